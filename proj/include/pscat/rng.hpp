#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace pscat {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A sample index
// maps straight to its random block, so parallel schedules cannot change the
// stream.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u;
    static constexpr std::uint32_t M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u;
    static constexpr std::uint32_t W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> generate(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) {
        auto round = [](std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        };
        round(ctr, key);
        for (int r = 1; r < 10; ++r) {
            key[0] += W0;
            key[1] += W1;
            round(ctr, key);
        }
        return ctr;
    }
};

// One logical random stream per (seed, stream) pair, indexed by sample id.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::array<std::uint32_t, 4> block(std::uint64_t index) const {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                                  static_cast<std::uint32_t>(seed_ >> 32)};
        return Philox4x32::generate(ctr, key);
    }

    // Two uniforms in (0,1] and their Box-Muller normal pair from one block.
    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t u = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return (static_cast<double>(u >> 11) + 1.0) * 0x1p-53;
    }

    std::array<double, 2> normals(std::uint64_t index) const {
        const auto b = block(index);
        const double u1 = to_unit(b[0], b[1]);
        const double u2 = to_unit(b[2], b[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    std::array<double, 2> uniforms(std::uint64_t index) const {
        const auto b = block(index);
        return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace pscat
