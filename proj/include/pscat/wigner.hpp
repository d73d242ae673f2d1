#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pscat/errors.hpp"
#include "pscat/fft.hpp"
#include "pscat/packets.hpp"
#include "pscat/sum.hpp"

namespace pscat {

struct PhaseSpaceGrid {
    int dim = 1;
    std::array<double, 2> r_min{-8.0, -8.0}, r_max{8.0, 8.0};
    std::array<double, 2> p_min{-8.0, -8.0}, p_max{8.0, 8.0};
    std::array<int, 2> n_r{256, 256};
    std::array<int, 2> n_p{256, 256};

    static PhaseSpaceGrid make_1d(double rmin, double rmax, int nr, double pmin, double pmax,
                                  int np) {
        PhaseSpaceGrid g;
        g.dim = 1;
        g.r_min[0] = rmin;
        g.r_max[0] = rmax;
        g.n_r[0] = nr;
        g.p_min[0] = pmin;
        g.p_max[0] = pmax;
        g.n_p[0] = np;
        g.validate();
        return g;
    }

    static PhaseSpaceGrid make_2d(double rmin, double rmax, int nr, double pmin, double pmax,
                                  int np) {
        PhaseSpaceGrid g;
        g.dim = 2;
        g.r_min = {rmin, rmin};
        g.r_max = {rmax, rmax};
        g.n_r = {nr, nr};
        g.p_min = {pmin, pmin};
        g.p_max = {pmax, pmax};
        g.n_p = {np, np};
        g.validate();
        return g;
    }

    void validate() const {
        for (int i = 0; i < dim; ++i) {
            if (!(r_min[i] < r_max[i]) || !(p_min[i] < p_max[i]))
                throw InvalidParameter("grid: range must have min < max and be finite");
            if (!std::isfinite(r_min[i]) || !std::isfinite(r_max[i]) ||
                !std::isfinite(p_min[i]) || !std::isfinite(p_max[i]))
                throw InvalidParameter("grid: range must be finite");
            for (int n : {n_r[i], n_p[i]})
                if (n < 16 || (n & (n - 1)) != 0)
                    throw InvalidParameter("grid: counts must be powers of two, >= 16");
        }
    }

    double r_step(int axis = 0) const { return (r_max[axis] - r_min[axis]) / n_r[axis]; }
    double p_step(int axis = 0) const { return (p_max[axis] - p_min[axis]) / n_p[axis]; }
    double r_at(int axis, int i) const { return r_min[axis] + i * r_step(axis); }
    double p_at(int axis, int i) const { return p_min[axis] + i * p_step(axis); }

    double cell_volume() const {
        double v = 1.0;
        for (int i = 0; i < dim; ++i) v *= r_step(i) * p_step(i);
        return v;
    }

    std::size_t r_cells() const {
        return dim == 1 ? static_cast<std::size_t>(n_r[0])
                        : static_cast<std::size_t>(n_r[0]) * n_r[1];
    }
    std::size_t p_cells() const {
        return dim == 1 ? static_cast<std::size_t>(n_p[0])
                        : static_cast<std::size_t>(n_p[0]) * n_p[1];
    }
};

// Sampled n(r,p). Storage is p-major: values[ip * r_cells + ir], with the
// dim-2 indices flattened row-major (x outer, y inner).
struct WignerGrid {
    PhaseSpaceGrid grid;
    std::vector<double> values;
    double imag_residual = 0.0; // max |Im| discarded, relative to max |n|
    std::string source;

    double at(int ip, int ir) const { return values[static_cast<std::size_t>(ip) * grid.r_cells() + ir]; }
    double at2(int ipx, int ipy, int irx, int iry) const {
        const std::size_t ip = static_cast<std::size_t>(ipx) * grid.n_p[1] + ipy;
        const std::size_t ir = static_cast<std::size_t>(irx) * grid.n_r[1] + iry;
        return values[ip * grid.r_cells() + ir];
    }

    double normalization() const {
        std::vector<double> tmp(values.begin(), values.end());
        return pairwise_sum(tmp) * grid.cell_volume();
    }
};

struct WignerTransformOptions {
    int zero_pad = 2;        // padded k-grid length factor, >= 2
    double norm_tol = 1e-3;  // GridTooCoarse beyond this
    double alias_tol = 1e-6; // AliasingDetected when edge |n| exceeds this * max|n|
    int threads = 1;
    bool check_momentum_coverage = true;
};

namespace detail {

// One k->r line: out_m = (dk/2pi) sum_j rho_j exp(i k_j r_m), k_j = (j-M/2) dk,
// r_m = r_min + m dr, M = pad * n_r, dk = 2pi/(M dr).
inline void wigner_line(std::vector<std::complex<double>>& work, double r_min, double dr,
                        int n_r, int pad) {
    const int m_tot = static_cast<int>(work.size());
    const double dk = 2.0 * std::numbers::pi / (m_tot * dr);
    for (int j = 0; j < m_tot; ++j)
        work[j] *= std::polar(1.0, (j - m_tot / 2) * dk * r_min);
    fft_radix2(work, +1);
    // (j - M/2) twiddle gives a (-1)^m alternation plus a constant phase.
    const std::complex<double> c0 = std::polar(dk / (2.0 * std::numbers::pi),
                                               -(m_tot / 2) * dk * r_min);
    for (int m = 0; m < n_r; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        work[m] *= sign * c0;
    }
    (void)pad;
}

inline void run_slices(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || n < 2) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    const int nt = std::min(threads, n);
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

// n(r,p) = (2pi)^-dim int d^dim k exp(i k.r) rho(p,k), evaluated by FFT over k
// on a zero-padded grid at every p cell. Slices over p are independent and
// write disjoint ranges, so threading cannot change the output bytes.
inline WignerGrid wigner_transform(const WavePacket& packet, const PhaseSpaceGrid& grid,
                                   const WignerTransformOptions& opt = {}) {
    grid.validate();
    if (packet.dim() != grid.dim)
        throw InvalidParameter("wigner_transform: packet/grid dimension mismatch");
    if (opt.zero_pad < 2) throw InvalidParameter("wigner_transform: zero_pad must be >= 2");

    if (opt.check_momentum_coverage) {
        Vec2 lo, hi;
        packet.support_box(lo, hi, 6.0);
        for (int ax = 0; ax < grid.dim; ++ax)
            if (grid.p_min[ax] > lo[ax] || grid.p_max[ax] < hi[ax])
                throw GridTooCoarse("wigner_transform: momentum range below 6 sigma coverage");
    }

    WignerGrid out;
    out.grid = grid;
    out.source = to_string(packet.spec().kind);
    out.values.assign(grid.p_cells() * grid.r_cells(), 0.0);
    double max_im = 0.0, max_abs = 0.0;

    if (grid.dim == 1) {
        const int m_tot = opt.zero_pad * grid.n_r[0];
        const double dr = grid.r_step(0);
        const double dk = 2.0 * std::numbers::pi / (m_tot * dr);
        const int np = grid.n_p[0];
        std::vector<double> im_slice(np, 0.0);
        detail::run_slices(np, opt.threads, [&](int ip) {
            std::vector<std::complex<double>> work(m_tot);
            const double p = grid.p_at(0, ip);
            for (int j = 0; j < m_tot; ++j) {
                const double k = (j - m_tot / 2) * dk;
                work[j] = packet.density({p, 0.0}, {k, 0.0});
            }
            detail::wigner_line(work, grid.r_min[0], dr, grid.n_r[0], opt.zero_pad);
            double im = 0.0;
            for (int m = 0; m < grid.n_r[0]; ++m) {
                out.values[static_cast<std::size_t>(ip) * grid.n_r[0] + m] = work[m].real();
                im = std::max(im, std::abs(work[m].imag()));
            }
            im_slice[ip] = im;
        });
        for (double v : im_slice) max_im = std::max(max_im, v);
    } else {
        const int mx = opt.zero_pad * grid.n_r[0], my = opt.zero_pad * grid.n_r[1];
        const double drx = grid.r_step(0), dry = grid.r_step(1);
        const double dkx = 2.0 * std::numbers::pi / (mx * drx);
        const double dky = 2.0 * std::numbers::pi / (my * dry);
        const int npx = grid.n_p[0], npy = grid.n_p[1];
        std::vector<double> im_slice(static_cast<std::size_t>(npx) * npy, 0.0);
        detail::run_slices(npx * npy, opt.threads, [&](int idx) {
            const int ipx = idx / npy, ipy = idx % npy;
            const Vec2 p{grid.p_at(0, ipx), grid.p_at(1, ipy)};
            std::vector<std::vector<std::complex<double>>> plane(
                mx, std::vector<std::complex<double>>(my));
            for (int jx = 0; jx < mx; ++jx) {
                const double kx = (jx - mx / 2) * dkx;
                for (int jy = 0; jy < my; ++jy) {
                    const double ky = (jy - my / 2) * dky;
                    plane[jx][jy] = packet.density(p, {kx, ky});
                }
            }
            // rows: transform y for every x line
            for (int jx = 0; jx < mx; ++jx)
                detail::wigner_line(plane[jx], grid.r_min[1], dry, grid.n_r[1], opt.zero_pad);
            // columns: transform x for the kept y cells
            std::vector<std::complex<double>> col(mx);
            double im = 0.0;
            for (int m_y = 0; m_y < grid.n_r[1]; ++m_y) {
                for (int jx = 0; jx < mx; ++jx) col[jx] = plane[jx][m_y];
                detail::wigner_line(col, grid.r_min[0], drx, grid.n_r[0], opt.zero_pad);
                for (int m_x = 0; m_x < grid.n_r[0]; ++m_x) {
                    const std::size_t ir = static_cast<std::size_t>(m_x) * grid.n_r[1] + m_y;
                    out.values[static_cast<std::size_t>(idx) * grid.r_cells() + ir] =
                        col[m_x].real();
                    im = std::max(im, std::abs(col[m_x].imag()));
                }
            }
            im_slice[idx] = im;
        });
        for (double v : im_slice) max_im = std::max(max_im, v);
    }

    for (double v : out.values) max_abs = std::max(max_abs, std::abs(v));
    out.imag_residual = max_abs > 0.0 ? max_im / max_abs : 0.0;

    const double norm = out.normalization();
    if (std::abs(norm - 1.0) > opt.norm_tol)
        throw GridTooCoarse("wigner_transform: normalization off by >" +
                            std::to_string(opt.norm_tol));

    // boundary cells should carry no weight; otherwise the window clips the state
    double edge = 0.0;
    if (grid.dim == 1) {
        for (int ip = 0; ip < grid.n_p[0]; ++ip) {
            edge = std::max(edge, std::abs(out.at(ip, 0)));
            edge = std::max(edge, std::abs(out.at(ip, grid.n_r[0] - 1)));
        }
        for (int ir = 0; ir < grid.n_r[0]; ++ir) {
            edge = std::max(edge, std::abs(out.at(0, ir)));
            edge = std::max(edge, std::abs(out.at(grid.n_p[0] - 1, ir)));
        }
    } else {
        for (int ipx = 0; ipx < grid.n_p[0]; ++ipx)
            for (int ipy = 0; ipy < grid.n_p[1]; ++ipy)
                for (int irx = 0; irx < grid.n_r[0]; ++irx)
                    for (int iry = 0; iry < grid.n_r[1]; ++iry)
                        if (ipx == 0 || ipy == 0 || irx == 0 || iry == 0 ||
                            ipx == grid.n_p[0] - 1 || ipy == grid.n_p[1] - 1 ||
                            irx == grid.n_r[0] - 1 || iry == grid.n_r[1] - 1)
                            edge = std::max(edge, std::abs(out.at2(ipx, ipy, irx, iry)));
    }
    if (edge > opt.alias_tol * max_abs)
        throw AliasingDetected("wigner_transform: support reaches the grid boundary");

    return out;
}

// Negative-volume integral, sum max(0,-n) * cell volume.
inline double negativity_volume(const WignerGrid& w) {
    std::vector<double> neg;
    neg.reserve(w.values.size());
    for (double v : w.values) neg.push_back(v < 0.0 ? -v : 0.0);
    return pairwise_sum(neg) * w.grid.cell_volume();
}

struct Marginals {
    std::vector<double> momentum_density; // indexed like the p cells
    std::vector<double> position_density; // indexed like the r cells
};

inline Marginals marginals(const WignerGrid& w) {
    const std::size_t np = w.grid.p_cells(), nr = w.grid.r_cells();
    Marginals m;
    m.momentum_density.assign(np, 0.0);
    m.position_density.assign(nr, 0.0);
    double dr = 1.0, dp = 1.0;
    for (int i = 0; i < w.grid.dim; ++i) {
        dr *= w.grid.r_step(i);
        dp *= w.grid.p_step(i);
    }
    std::vector<double> buf(nr);
    for (std::size_t ip = 0; ip < np; ++ip) {
        for (std::size_t ir = 0; ir < nr; ++ir) buf[ir] = w.values[ip * nr + ir];
        m.momentum_density[ip] = pairwise_sum(buf) * dr;
    }
    std::vector<double> buf2(np);
    for (std::size_t ir = 0; ir < nr; ++ir) {
        for (std::size_t ip = 0; ip < np; ++ip) buf2[ip] = w.values[ip * nr + ir];
        m.position_density[ir] = pairwise_sum(buf2) * dp;
    }
    return m;
}

struct NegativityScaleRow {
    double separation = 0.0; // in units of sigma_x
    double negativity = 0.0;
};

struct NegativityScaleResult {
    std::vector<NegativityScaleRow> table;
    std::optional<double> threshold_separation; // smallest d with negativity > threshold
};

// Sweep of symmetric two-Gaussian cats over the separation (units of sigma_x).
// One shared grid keeps the rows comparable.
inline NegativityScaleResult negativity_scale(double sigma_p,
                                              const std::vector<double>& separations,
                                              double threshold = 0.01,
                                              const WignerTransformOptions& opt = {}) {
    if (separations.empty()) throw InvalidParameter("negativity_scale: empty separation list");
    double dmax = 0.0;
    for (double d : separations) {
        if (d < 0.0) throw InvalidParameter("negativity_scale: separations must be >= 0");
        dmax = std::max(dmax, d);
    }
    const double sigma_x = 1.0 / sigma_p;
    const double r_half = (0.5 * dmax + 8.0) * sigma_x;
    const double p_half = 8.0 * sigma_p;
    const PhaseSpaceGrid grid =
        PhaseSpaceGrid::make_1d(-r_half, r_half, 256, -p_half, p_half, 256);

    NegativityScaleResult out;
    for (double d : separations) {
        PacketSpec spec;
        spec.kind = PacketKind::Cat;
        spec.dim = 1;
        const double b = 0.5 * d * sigma_x;
        spec.components = {CatComponent{{1.0, 0.0}, {}, {sigma_p, sigma_p}, {b, 0.0}},
                           CatComponent{{1.0, 0.0}, {}, {sigma_p, sigma_p}, {-b, 0.0}}};
        const WavePacket packet(spec);
        const double neg = negativity_volume(wigner_transform(packet, grid, opt));
        out.table.push_back({d, neg});
        if (!out.threshold_separation && neg > threshold) out.threshold_separation = d;
    }
    return out;
}

} // namespace pscat
