#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pscat/errors.hpp"
#include "pscat/quadrature.hpp"
#include "pscat/vec.hpp"

namespace pscat {

using complexd = std::complex<double>;

enum class PacketKind { Gaussian, Vortex, Airy, Cat };

inline std::string to_string(PacketKind k) {
    switch (k) {
        case PacketKind::Gaussian: return "gaussian";
        case PacketKind::Vortex: return "vortex";
        case PacketKind::Airy: return "airy";
        case PacketKind::Cat: return "cat";
    }
    return "?";
}

// Building block of cat superpositions: a displaced Gaussian with its own
// weight, envelope and shift.
struct CatComponent {
    complexd weight{1.0, 0.0};
    Vec2 mean_p{};
    Vec2 sigma{1.0, 1.0}; // momentum widths per axis
    Vec2 shift{};         // position offset, enters as exp(-i b.p)
};

struct PacketSpec {
    PacketKind kind = PacketKind::Gaussian;
    int dim = 1;
    Vec2 mean_p{};
    Vec2 sigma{1.0, 1.0};
    Vec2 shift{};
    double ring_radius = 0.0; // vortex kappa >= 0
    int oam = 0;              // vortex winding number
    Vec2 airy_scale{};        // cubic-phase length scale xi per axis
    std::vector<CatComponent> components;
};

// Momentum-space wave packet, normalized to unit probability.
//
// gaussian:  psi(p) = N exp(-(p-mu)^2/(2 sigma^2)) exp(-i b.p)
// airy:      gaussian envelope times exp(i (xi.p)^3 / 3)
// vortex:    N exp(i l phi) exp(-(|p-mu|-kappa)^2/(2 sigma^2)) exp(-i b.p), dim 2
// cat:       N sum_j w_j g_j(p) times exp(-i b.p), g_j displaced Gaussians
//
// Gaussian and Airy normalization is the closed-form envelope constant; the
// cat constant comes from analytic pairwise Gaussian overlaps (so degenerate
// superpositions collapse to the single-Gaussian values exactly); the vortex
// ring is normalized from the closed-form radial integral and re-verified by
// quadrature.
class WavePacket {
public:
    explicit WavePacket(PacketSpec spec) : spec_(std::move(spec)) {
        validate();
        canonicalize();
        normalize();
    }

    int dim() const { return spec_.dim; }
    const PacketSpec& spec() const { return spec_; }

    complexd amplitude(const Vec2& p) const {
        switch (spec_.kind) {
            case PacketKind::Gaussian: return shift_phase(p) * norm_ * envelope(p);
            case PacketKind::Airy: return shift_phase(p) * norm_ * envelope(p) * airy_phase(p);
            case PacketKind::Vortex: return shift_phase(p) * norm_ * vortex_core(p);
            case PacketKind::Cat: return shift_phase(p) * norm_ * cat_sum(p);
        }
        return {};
    }

    // d(psi)/dp per axis, analytic.
    std::array<complexd, 2> amplitude_gradient(const Vec2& p) const {
        const complexd psi = amplitude(p);
        std::array<complexd, 2> g{complexd{0.0, 0.0}, complexd{0.0, 0.0}};
        const complexd mi{0.0, -1.0};
        switch (spec_.kind) {
            case PacketKind::Gaussian:
                for (int i = 0; i < spec_.dim; ++i)
                    g[i] = (-(p[i] - spec_.mean_p[i]) / (spec_.sigma[i] * spec_.sigma[i]) +
                            mi * spec_.shift[i]) * psi;
                break;
            case PacketKind::Airy: {
                const double xp = dot(spec_.airy_scale, p);
                for (int i = 0; i < spec_.dim; ++i)
                    g[i] = (-(p[i] - spec_.mean_p[i]) / (spec_.sigma[i] * spec_.sigma[i]) +
                            complexd{0.0, 1.0} * (xp * xp * spec_.airy_scale[i]) +
                            mi * spec_.shift[i]) * psi;
                break;
            }
            case PacketKind::Vortex: {
                const double dx = p.x - spec_.mean_p.x, dy = p.y - spec_.mean_p.y;
                const double r = std::sqrt(dx * dx + dy * dy);
                if (r < 1e-300) return g; // phase singularity, measure-zero point
                const double s2 = spec_.sigma.x * spec_.sigma.x;
                const double radial = -(r - spec_.ring_radius) / s2;
                const complexd il{0.0, static_cast<double>(spec_.oam)};
                g[0] = (radial * (dx / r) + il * (-dy / (r * r)) + mi * spec_.shift.x) * psi;
                g[1] = (radial * (dy / r) + il * (dx / (r * r)) + mi * spec_.shift.y) * psi;
                break;
            }
            case PacketKind::Cat: {
                std::array<complexd, 2> dsum{complexd{0.0, 0.0}, complexd{0.0, 0.0}};
                for (const auto& c : spec_.components) {
                    const complexd gj = c.weight * component_value(c, p);
                    for (int i = 0; i < spec_.dim; ++i)
                        dsum[i] += (-(p[i] - c.mean_p[i]) / (c.sigma[i] * c.sigma[i]) +
                                    mi * c.shift[i]) * gj;
                }
                const complexd pref = shift_phase(p) * norm_;
                for (int i = 0; i < spec_.dim; ++i)
                    g[i] = pref * dsum[i] + mi * spec_.shift[i] * psi;
                break;
            }
        }
        return g;
    }

    // rho(p,k) = psi(p + k/2) conj(psi(p - k/2))
    complexd density(const Vec2& p, const Vec2& k) const {
        return amplitude(p + 0.5 * k) * std::conj(amplitude(p - 0.5 * k));
    }

    // Axis-aligned momentum box that carries the packet's support.
    void support_box(Vec2& lo, Vec2& hi, double widths = 8.0) const {
        lo = Vec2{};
        hi = Vec2{};
        switch (spec_.kind) {
            case PacketKind::Gaussian:
            case PacketKind::Airy:
                for (int i = 0; i < spec_.dim; ++i) {
                    lo[i] = spec_.mean_p[i] - widths * spec_.sigma[i];
                    hi[i] = spec_.mean_p[i] + widths * spec_.sigma[i];
                }
                break;
            case PacketKind::Vortex:
                for (int i = 0; i < 2; ++i) {
                    const double reach = spec_.ring_radius + widths * spec_.sigma.x;
                    lo[i] = spec_.mean_p[i] - reach;
                    hi[i] = spec_.mean_p[i] + reach;
                }
                break;
            case PacketKind::Cat:
                for (int i = 0; i < spec_.dim; ++i) {
                    bool first = true;
                    for (const auto& c : spec_.components) {
                        const double a = c.mean_p[i] - widths * c.sigma[i];
                        const double b = c.mean_p[i] + widths * c.sigma[i];
                        if (first || a < lo[i]) lo[i] = a;
                        if (first || b > hi[i]) hi[i] = b;
                        first = false;
                    }
                }
                break;
        }
    }

    double support_radius(double widths = 8.0) const {
        Vec2 lo, hi;
        support_box(lo, hi, widths);
        double r = 0.0;
        for (int i = 0; i < spec_.dim; ++i)
            r = std::max(r, std::max(std::abs(lo[i]), std::abs(hi[i])));
        return spec_.dim == 2 ? r * std::numbers::sqrt2 : r;
    }

    // Width parameter used for reporting scales (sigma_x = 1/sigma_p).
    double characteristic_sigma_p() const {
        if (spec_.kind == PacketKind::Cat) return spec_.components.front().sigma.x;
        return spec_.sigma.x;
    }

    double norm_constant() const { return norm_; }
    // Squared norm the raw (unscaled) superposition had before normalization.
    double raw_norm_squared() const { return raw_norm_sq_; }

private:
    void validate() const {
        if (spec_.dim != 1 && spec_.dim != 2)
            throw InvalidParameter("packet: dim must be 1 or 2");
        switch (spec_.kind) {
            case PacketKind::Gaussian:
            case PacketKind::Airy:
                for (int i = 0; i < spec_.dim; ++i)
                    if (!(spec_.sigma[i] > 0.0))
                        throw InvalidParameter("packet: sigma must be positive");
                break;
            case PacketKind::Vortex:
                if (spec_.dim != 2) throw InvalidParameter("vortex requires dim=2");
                if (!(spec_.sigma.x > 0.0))
                    throw InvalidParameter("packet: sigma must be positive");
                if (spec_.sigma.y != spec_.sigma.x && spec_.sigma.y != 0.0 &&
                    spec_.sigma.y != 1.0)
                    throw InvalidParameter("vortex: radial width is scalar (sigma.x)");
                if (spec_.ring_radius < 0.0)
                    throw InvalidParameter("vortex: ring_radius must be >= 0");
                break;
            case PacketKind::Cat:
                if (spec_.components.size() < 2)
                    throw InvalidParameter("cat: needs at least 2 components");
                {
                    double wsum = 0.0;
                    for (const auto& c : spec_.components) {
                        wsum += std::norm(c.weight);
                        for (int i = 0; i < spec_.dim; ++i)
                            if (!(c.sigma[i] > 0.0))
                                throw InvalidParameter("cat: component sigma must be positive");
                    }
                    if (wsum == 0.0) throw InvalidParameter("cat: all weights zero");
                }
                break;
        }
    }

    void canonicalize() {
        // Unused slots pinned so axis products in dim=1 stay inert.
        if (spec_.dim == 1) {
            spec_.mean_p.y = 0.0;
            spec_.sigma.y = 1.0;
            spec_.shift.y = 0.0;
            spec_.airy_scale.y = 0.0;
        }
        if (spec_.kind == PacketKind::Vortex) spec_.sigma.y = spec_.sigma.x;
        if (spec_.kind == PacketKind::Cat) {
            // Fold the outer momentum offset into the components.
            for (auto& c : spec_.components) {
                c.mean_p += spec_.mean_p;
                if (spec_.dim == 1) {
                    c.mean_p.y = 0.0;
                    c.sigma.y = 1.0;
                    c.shift.y = 0.0;
                }
            }
            spec_.mean_p = Vec2{};
        }
    }

    static double gaussian_norm_1d(double sigma) {
        return std::pow(sigma * sigma * std::numbers::pi, -0.25);
    }

    double envelope_norm() const {
        double n = 1.0;
        for (int i = 0; i < spec_.dim; ++i) n *= gaussian_norm_1d(spec_.sigma[i]);
        return n;
    }

    void normalize() {
        switch (spec_.kind) {
            case PacketKind::Gaussian:
            case PacketKind::Airy:
                norm_ = envelope_norm();
                raw_norm_sq_ = 1.0;
                break;
            case PacketKind::Vortex: {
                // 2*pi * int_0^inf r exp(-(r-kappa)^2/sigma^2) dr, closed form.
                const double s = spec_.sigma.x, k = spec_.ring_radius;
                const double raw = 2.0 * std::numbers::pi *
                                   (0.5 * s * std::sqrt(std::numbers::pi) * k *
                                        (1.0 + std::erf(k / s)) +
                                    0.5 * s * s * std::exp(-(k / s) * (k / s)));
                norm_ = 1.0 / std::sqrt(raw);
                raw_norm_sq_ = raw;
                // Re-verify numerically; a coarse disagreement means the
                // quadrature would poison everything downstream.
                QuadratureOptions opt;
                opt.rel_tol = 1e-8;
                const auto chk = integrate_polar(
                    [this](const Vec2& p) { return std::norm(norm_ * vortex_core(p)); },
                    support_radius(10.0), opt);
                if (std::abs(chk.value - 1.0) > 1e-3)
                    throw NormalizationFailure("vortex: norm check off by >1e-3");
                norm_ /= std::sqrt(chk.value);
                break;
            }
            case PacketKind::Cat: {
                complexd acc{0.0, 0.0};
                for (const auto& a : spec_.components)
                    for (const auto& b : spec_.components)
                        acc += std::conj(a.weight) * b.weight * gaussian_overlap(a, b);
                raw_norm_sq_ = acc.real();
                if (!(raw_norm_sq_ > 0.0))
                    throw NormalizationFailure("cat: non-positive squared norm");
                norm_ = 1.0 / std::sqrt(raw_norm_sq_);
                break;
            }
        }
    }

    // int conj(g_a) g_b d^dim p for two displaced Gaussians, closed form. The
    // equal-width equal-center branch is the same expression with the unit
    // prefactor cancelled algebraically, so coincident components overlap to
    // exactly 1.0 and degenerate cats collapse to the plain Gaussian bitwise.
    complexd gaussian_overlap(const CatComponent& a, const CatComponent& b) const {
        complexd out{1.0, 0.0};
        for (int i = 0; i < spec_.dim; ++i) {
            const double beta = a.shift[i] - b.shift[i];
            const double mu1 = a.mean_p[i], mu2 = b.mean_p[i];
            if (a.sigma[i] == b.sigma[i] && mu1 == mu2) {
                const double s = a.sigma[i];
                out *= std::exp(-beta * beta * s * s * 0.25) * std::polar(1.0, beta * mu1);
                continue;
            }
            const double aa = 0.5 / (a.sigma[i] * a.sigma[i]);
            const double cc = 0.5 / (b.sigma[i] * b.sigma[i]);
            const double m = (aa * mu1 + cc * mu2) / (aa + cc);
            const double na = gaussian_norm_1d(a.sigma[i]);
            const double nb = gaussian_norm_1d(b.sigma[i]);
            const double amp = na * nb * std::sqrt(std::numbers::pi / (aa + cc)) *
                               std::exp(-aa * cc * (mu1 - mu2) * (mu1 - mu2) / (aa + cc) -
                                        beta * beta / (4.0 * (aa + cc)));
            out *= amp * std::polar(1.0, beta * m);
        }
        return out;
    }

    complexd shift_phase(const Vec2& p) const {
        const double arg = -dot(spec_.shift, p);
        return arg == 0.0 ? complexd{1.0, 0.0} : std::polar(1.0, arg);
    }

    double envelope(const Vec2& p) const {
        double e = 0.0;
        for (int i = 0; i < spec_.dim; ++i) {
            const double d = (p[i] - spec_.mean_p[i]) / spec_.sigma[i];
            e += d * d;
        }
        return std::exp(-0.5 * e);
    }

    complexd airy_phase(const Vec2& p) const {
        const double xp = dot(spec_.airy_scale, p);
        return std::polar(1.0, xp * xp * xp / 3.0);
    }

    complexd vortex_core(const Vec2& p) const {
        const double dx = p.x - spec_.mean_p.x, dy = p.y - spec_.mean_p.y;
        const double r = std::sqrt(dx * dx + dy * dy);
        const double d = (r - spec_.ring_radius) / spec_.sigma.x;
        const double env = std::exp(-0.5 * d * d);
        if (spec_.oam == 0) return {env, 0.0};
        const double phi = std::atan2(dy, dx);
        return std::polar(env, spec_.oam * phi);
    }

    complexd component_value(const CatComponent& c, const Vec2& p) const {
        double e = 0.0, n = 1.0;
        for (int i = 0; i < spec_.dim; ++i) {
            const double d = (p[i] - c.mean_p[i]) / c.sigma[i];
            e += d * d;
            n *= gaussian_norm_1d(c.sigma[i]);
        }
        const double arg = -dot(c.shift, p);
        return std::polar(n * std::exp(-0.5 * e), arg);
    }

    complexd cat_sum(const Vec2& p) const {
        complexd acc{0.0, 0.0};
        for (const auto& c : spec_.components) acc += c.weight * component_value(c, p);
        return acc;
    }

    PacketSpec spec_;
    double norm_ = 1.0;
    double raw_norm_sq_ = 1.0;
};

inline WavePacket make_packet(const PacketSpec& spec) { return WavePacket(spec); }

// Two-point density matrix of a packet, rho(p,k) = psi(p+k/2) psi*(p-k/2).
class BilinearDensity {
public:
    explicit BilinearDensity(const WavePacket& src) : src_(&src) {}
    complexd operator()(const Vec2& p, const Vec2& k) const { return src_->density(p, k); }
    const WavePacket& source() const { return *src_; }

private:
    const WavePacket* src_;
};

// int conj(psi_a) psi_b d^dim p by adaptive quadrature. Dim-2 integration runs
// in polar coordinates so angular harmonics cancel exactly.
inline complexd overlap(const WavePacket& a, const WavePacket& b) {
    if (a.dim() != b.dim()) throw InvalidParameter("overlap: dimension mismatch");
    QuadratureOptions opt;
    opt.rel_tol = 1e-6;
    if (a.dim() == 1) {
        Vec2 lo_a, hi_a, lo_b, hi_b;
        a.support_box(lo_a, hi_a);
        b.support_box(lo_b, hi_b);
        const double lo = std::min(lo_a.x, lo_b.x), hi = std::max(hi_a.x, hi_b.x);
        auto res = integrate_1d(
            [&](double p) { return std::conj(a.amplitude({p, 0.0})) * b.amplitude({p, 0.0}); },
            lo, hi, opt);
        if (!res.converged)
            throw QuadratureNonConvergence("overlap: 1d quadrature did not stabilize");
        return res.value;
    }
    const double rmax = std::max(a.support_radius(), b.support_radius());
    auto res = integrate_polar(
        [&](const Vec2& p) { return std::conj(a.amplitude(p)) * b.amplitude(p); }, rmax, opt);
    if (!res.converged)
        throw QuadratureNonConvergence("overlap: polar quadrature did not stabilize");
    return res.value;
}

struct PacketMoments {
    Vec2 mean_p;
    Vec2 cov_p;  // variance per axis
    Vec2 mean_x; // Wigner centroid; equals the shift for unimodal kinds
};

namespace detail {

template <class F>
double packet_integral(const WavePacket& w, F&& f) {
    QuadratureOptions opt;
    opt.rel_tol = 1e-8;
    if (w.dim() == 1) {
        Vec2 lo, hi;
        w.support_box(lo, hi);
        auto res = integrate_1d([&](double p) { return f(Vec2{p, 0.0}); }, lo.x, hi.x, opt);
        if (!res.converged) throw QuadratureNonConvergence("moments: quadrature failed");
        return res.value;
    }
    Vec2 lo, hi;
    w.support_box(lo, hi);
    auto res = integrate_box2d([&](const Vec2& p) { return f(p); }, lo, hi, opt);
    if (!res.converged) throw QuadratureNonConvergence("moments: quadrature failed");
    return res.value;
}

} // namespace detail

inline PacketMoments moments(const WavePacket& w) {
    PacketMoments m;
    for (int i = 0; i < w.dim(); ++i) {
        m.mean_p[i] = detail::packet_integral(
            w, [&](const Vec2& p) { return p[i] * std::norm(w.amplitude(p)); });
        const double p2 = detail::packet_integral(
            w, [&](const Vec2& p) { return p[i] * p[i] * std::norm(w.amplitude(p)); });
        m.cov_p[i] = p2 - m.mean_p[i] * m.mean_p[i];
        // <x_i> = -Im int conj(psi) d(psi)/dp_i
        m.mean_x[i] = -detail::packet_integral(w, [&](const Vec2& p) {
            return std::imag(std::conj(w.amplitude(p)) * w.amplitude_gradient(p)[i]);
        });
    }
    return m;
}

} // namespace pscat
