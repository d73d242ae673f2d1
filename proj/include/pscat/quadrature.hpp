#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "pscat/errors.hpp"
#include "pscat/sum.hpp"
#include "pscat/vec.hpp"

namespace pscat {

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

namespace detail {

// Newton iteration on the Legendre polynomial roots.
inline GaussLegendreRule compute_gauss_legendre(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 1; i <= m; ++i) {
        double z = std::cos(std::numbers::pi * (i - 0.25) / (n + 0.5));
        double z1 = 0.0, pp = 0.0;
        do {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            z1 = z;
            z = z1 - p1 / pp;
        } while (std::abs(z - z1) > 1e-15);
        rule.nodes[i - 1] = -z;
        rule.nodes[n - i] = z;
        rule.weights[i - 1] = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.weights[n - i] = rule.weights[i - 1];
    }
    return rule;
}

} // namespace detail

inline const GaussLegendreRule& gauss_legendre(int n) {
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
    return it->second;
}

struct QuadratureOptions {
    double rel_tol = 1e-6;
    double abs_tol = 1e-12; // floor for integrals that vanish identically
    int initial_order = 32;
    std::size_t max_nodes = std::size_t{1} << 20;
};

template <class T>
struct QuadratureResult {
    T value{};
    double error = 0.0;       // |I_n - I_{n/2}| from the last refinement
    std::size_t nodes = 0;
    bool converged = false;
};

namespace detail {

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

} // namespace detail

// f: double -> double or complex<double>
template <class F>
auto integrate_1d(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
    using T = decltype(f(a));
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    QuadratureResult<T> res;
    T prev{};
    bool have_prev = false;
    std::vector<T> buf;
    for (int order = opt.initial_order; static_cast<std::size_t>(order) <= opt.max_nodes; order *= 2) {
        const auto& rule = gauss_legendre(order);
        buf.resize(order);
        for (int i = 0; i < order; ++i) buf[i] = rule.weights[i] * f(mid + half * rule.nodes[i]);
        T cur = half * pairwise_sum(buf);
        res.nodes = static_cast<std::size_t>(order);
        res.value = cur;
        if (have_prev) {
            res.error = detail::magnitude(cur - prev);
            if (res.error <= std::max(opt.rel_tol * detail::magnitude(cur), opt.abs_tol)) {
                res.converged = true;
                return res;
            }
        }
        prev = cur;
        have_prev = true;
    }
    return res;
}

// Tensor-product rule over an axis-aligned box, same order per axis, order
// doubling until the relative change stabilizes.
template <class F>
auto integrate_box2d(F&& f, const Vec2& lo, const Vec2& hi, const QuadratureOptions& opt = {}) {
    using T = decltype(f(Vec2{}));
    const double midx = 0.5 * (lo.x + hi.x), halfx = 0.5 * (hi.x - lo.x);
    const double midy = 0.5 * (lo.y + hi.y), halfy = 0.5 * (hi.y - lo.y);
    QuadratureResult<T> res;
    T prev{};
    bool have_prev = false;
    std::vector<T> row, rows;
    for (int order = opt.initial_order;
         static_cast<std::size_t>(order) * order <= opt.max_nodes; order *= 2) {
        const auto& rule = gauss_legendre(order);
        rows.resize(order);
        row.resize(order);
        for (int i = 0; i < order; ++i) {
            const double x = midx + halfx * rule.nodes[i];
            for (int j = 0; j < order; ++j)
                row[j] = rule.weights[j] * f(Vec2{x, midy + halfy * rule.nodes[j]});
            rows[i] = rule.weights[i] * pairwise_sum(row);
        }
        T cur = (halfx * halfy) * pairwise_sum(rows);
        res.nodes = static_cast<std::size_t>(order) * order;
        res.value = cur;
        if (have_prev) {
            res.error = detail::magnitude(cur - prev);
            if (res.error <= std::max(opt.rel_tol * detail::magnitude(cur), opt.abs_tol)) {
                res.converged = true;
                return res;
            }
        }
        prev = cur;
        have_prev = true;
    }
    return res;
}

// Small fixed-size bundle of complex accumulators, so one quadrature pass can
// carry several integrands that share the expensive factors.
template <std::size_t N>
struct CBundle {
    std::array<std::complex<double>, N> v{};

    CBundle& operator+=(const CBundle& o) {
        for (std::size_t i = 0; i < N; ++i) v[i] += o.v[i];
        return *this;
    }
    CBundle operator+(const CBundle& o) const {
        CBundle r = *this;
        r += o;
        return r;
    }
    friend CBundle operator*(double c, const CBundle& b) {
        CBundle r = b;
        for (auto& x : r.v) x *= c;
        return r;
    }
};

// Nested Gauss-Legendre over an axis-aligned box in ndim dimensions, same
// order per axis, pairwise reduction at every level. f(x) reads x[0..ndim).
template <std::size_t NC, class F>
CBundle<NC> tensor_integrate(F&& f, const std::vector<double>& lo, const std::vector<double>& hi,
                             int order) {
    const int ndim = static_cast<int>(lo.size());
    const auto& rule = gauss_legendre(order);
    std::vector<double> x(ndim, 0.0);
    std::vector<std::vector<CBundle<NC>>> buf(ndim, std::vector<CBundle<NC>>(order));
    double jac = 1.0;
    for (int d = 0; d < ndim; ++d) jac *= 0.5 * (hi[d] - lo[d]);

    auto level = [&](auto&& self, int d) -> CBundle<NC> {
        if (d == ndim) return f(x.data());
        const double mid = 0.5 * (lo[d] + hi[d]), half = 0.5 * (hi[d] - lo[d]);
        auto& row = buf[d];
        for (int i = 0; i < order; ++i) {
            x[d] = mid + half * rule.nodes[i];
            row[i] = rule.weights[i] * self(self, d + 1);
        }
        return pairwise_sum(std::span<const CBundle<NC>>(row.data(), row.size()));
    };
    return jac * level(level, 0);
}

// Polar rule centered on the origin: Gauss-Legendre radially, uniform grid in
// the angle. The uniform angular rule integrates exp(i*n*phi) to exactly zero
// for 0 < |n| < M, which keeps vortex orthogonality at roundoff level.
template <class F>
auto integrate_polar(F&& f, double r_max, const QuadratureOptions& opt = {}) {
    using T = decltype(f(Vec2{}));
    QuadratureResult<T> res;
    T prev{};
    bool have_prev = false;
    std::vector<T> ring, rings;
    for (int order = opt.initial_order;
         static_cast<std::size_t>(order) * 2 * order <= opt.max_nodes; order *= 2) {
        const auto& rule = gauss_legendre(order);
        const int m = 2 * order;
        const double dphi = 2.0 * std::numbers::pi / m;
        rings.resize(order);
        ring.resize(m);
        for (int i = 0; i < order; ++i) {
            const double r = 0.5 * r_max * (1.0 + rule.nodes[i]);
            for (int j = 0; j < m; ++j) {
                const double phi = dphi * j;
                ring[j] = f(Vec2{r * std::cos(phi), r * std::sin(phi)});
            }
            rings[i] = rule.weights[i] * r * pairwise_sum(ring);
        }
        T cur = (0.5 * r_max * dphi) * pairwise_sum(rings);
        res.nodes = static_cast<std::size_t>(order) * m;
        res.value = cur;
        if (have_prev) {
            res.error = detail::magnitude(cur - prev);
            if (res.error <= std::max(opt.rel_tol * detail::magnitude(cur), opt.abs_tol)) {
                res.converged = true;
                return res;
            }
        }
        prev = cur;
        have_prev = true;
    }
    return res;
}

} // namespace pscat
