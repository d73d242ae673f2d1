#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>

#include "pscat/errors.hpp"
#include "pscat/wigner.hpp"

namespace pscat {

// Shortest decimal that round-trips the IEEE-754 value; locale-free and
// byte-stable across runs.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Write-then-rename so readers never observe a half-written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& body) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp);
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw Error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("rename failed: " + path.string());
}

inline std::string wigner_csv(const WignerGrid& w) {
    const auto& g = w.grid;
    std::string out = "# dim,Nr,Np,rmin,rmax,pmin,pmax\n# " + std::to_string(g.dim) + "," +
                      std::to_string(g.n_r[0]) + "," + std::to_string(g.n_p[0]) + "," +
                      format_double(g.r_min[0]) + "," + format_double(g.r_max[0]) + "," +
                      format_double(g.p_min[0]) + "," + format_double(g.p_max[0]) + "\n";
    if (g.dim == 1) {
        out += "r,p,n\n";
        for (int ip = 0; ip < g.n_p[0]; ++ip)
            for (int ir = 0; ir < g.n_r[0]; ++ir)
                out += format_double(g.r_at(0, ir)) + "," + format_double(g.p_at(0, ip)) + "," +
                       format_double(w.at(ip, ir)) + "\n";
    } else {
        out += "rx,ry,px,py,n\n";
        for (int ipx = 0; ipx < g.n_p[0]; ++ipx)
            for (int ipy = 0; ipy < g.n_p[1]; ++ipy)
                for (int irx = 0; irx < g.n_r[0]; ++irx)
                    for (int iry = 0; iry < g.n_r[1]; ++iry)
                        out += format_double(g.r_at(0, irx)) + "," +
                               format_double(g.r_at(1, iry)) + "," +
                               format_double(g.p_at(0, ipx)) + "," +
                               format_double(g.p_at(1, ipy)) + "," +
                               format_double(w.at2(ipx, ipy, irx, iry)) + "\n";
    }
    return out;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace pscat
