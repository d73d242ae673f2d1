#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "pscat/amplitudes.hpp"
#include "pscat/errors.hpp"
#include "pscat/kinematics.hpp"
#include "pscat/packets.hpp"
#include "pscat/quadrature.hpp"
#include "pscat/vec.hpp"

namespace pscat {

// Elastic 2->2 kinematics for head-on beams along z, evaluated at a fluctuating
// relative transverse momentum q. The longitudinal momenta stay pinned at the
// mean center-of-momentum value, so the total three-momentum vanishes for
// every q and the final state is emitted toward a detector-fixed direction
// (theta, phi).
class ElasticKinematics {
public:
    ElasticKinematics(double m1, double m2, double sqrt_s)
        : m1_(m1), m2_(m2), s0_(sqrt_s * sqrt_s) {
        if (!(m1 > 0.0) || !(m2 > 0.0))
            throw InvalidParameter("kinematics: masses must be positive");
        p_z_ = cm_momentum(s0_, m1, m2); // throws BelowThreshold at/below threshold
        if (!(p_z_ > 0.0))
            throw BelowThreshold("kinematics: no momentum at threshold");
    }

    double m1() const { return m1_; }
    double m2() const { return m2_; }
    double s0() const { return s0_; }
    double p_cm() const { return p_z_; }

    struct ST {
        double s = 0.0;
        double t = 0.0;
    };

    // Exact invariants at relative transverse momentum q:
    //   p1 = ( q, +p_z), p2 = (-q, -p_z), |p3| = |p1|, p3 along (theta, phi).
    ST map(const Vec2& q, double theta, double phi) const {
        const double q2 = q.norm2();
        const double e1 = std::sqrt(m1_ * m1_ + p_z_ * p_z_ + q2);
        const double e2 = std::sqrt(m2_ * m2_ + p_z_ * p_z_ + q2);
        const double s = (e1 + e2) * (e1 + e2);
        const double pabs = std::sqrt(p_z_ * p_z_ + q2);
        const double st = std::sin(theta), ct = std::cos(theta);
        const double p1_dot_n = st * (q.x * std::cos(phi) + q.y * std::sin(phi)) + p_z_ * ct;
        const double t = 2.0 * m1_ * m1_ - 2.0 * e1 * e1 + 2.0 * pabs * p1_dot_n;
        return {s, t};
    }

    double t0(double theta) const {
        return -2.0 * p_z_ * p_z_ * (1.0 - std::cos(theta));
    }

    // d s / d q at q = 0 vanishes for head-on beams; kept explicit so the
    // chain rule over (s, t) stays visible in the first-order contraction.
    Vec2 ds_dq() const { return {0.0, 0.0}; }

    Vec2 dt_dq(double theta, double phi) const {
        const double c = 2.0 * p_z_ * std::sin(theta);
        return {c * std::cos(phi), c * std::sin(phi)};
    }

    // Scattering angle where the momentum transfer reaches -t = scale.
    double theta_at_momentum_transfer(double minus_t) const {
        if (!(minus_t > 0.0))
            throw InvalidParameter("theta_at_momentum_transfer: scale must be positive");
        const double c = 1.0 - minus_t / (2.0 * p_z_ * p_z_);
        if (c <= -1.0)
            throw OutOfDomain("theta_at_momentum_transfer: beyond kinematic reach");
        return std::acos(c);
    }

private:
    double m1_, m2_, s0_, p_z_ = 0.0;
};

struct GradLogOptions {
    int order_low = 48;   // Richardson pair for the assembled quadrature
    int order_high = 96;
    int order_low_2d = 10;
    int order_high_2d = 14;
    double floor = 1e-12; // WignerGradientUnstable below floor * peak
};

// The two-packet in-state reduced to the relative transverse coordinate.
// For equal-width Gaussian pairs the center-of-mass part factorizes exactly
// and the relative state is itself a Gaussian packet of width sigma/sqrt(2);
// every other combination is assembled numerically from the joint density.
class RelativeState {
public:
    RelativeState(WavePacket in1, WavePacket in2)
        : in1_(std::move(in1)), in2_(std::move(in2)) {
        if (in1_.dim() != in2_.dim())
            throw InvalidParameter("relative state: dimension mismatch");
        dim_ = in1_.dim();
        try_reduce();
        const auto m1 = moments(in1_);
        const auto m2 = moments(in2_);
        mean_q_ = 0.5 * (m1.mean_p - m2.mean_p);
        dipole_ = m1.mean_x - m2.mean_x;
    }

    int dim() const { return dim_; }
    bool analytic() const { return reduced_.has_value(); }
    const WavePacket* reduced() const { return reduced_ ? &*reduced_ : nullptr; }
    const WavePacket& in1() const { return in1_; }
    const WavePacket& in2() const { return in2_; }
    Vec2 mean_q() const { return mean_q_; }
    Vec2 dipole() const { return dipole_; }

    // Relative density matrix rho_rel(q, k), up to a constant factor that
    // cancels in every ratio observable.
    complexd rho(const Vec2& q, const Vec2& k) const {
        if (reduced_) return reduced_->density(q, k);
        std::vector<double> lo, hi;
        inner_box(lo, hi);
        const int order = dim_ == 1 ? 64 : 16;
        auto r = tensor_integrate<1>(
            [&](const double* x) {
                CBundle<1> out;
                out.v[0] = joint_kernel(q, k, x);
                return out;
            },
            lo, hi, order);
        return r.v[0];
    }

    // grad_r ln n_rel(r, mean q) evaluated at the collision point r = 0, where
    // n_rel is the Wigner function of the relative coordinate (dipole offset
    // included). This is the gradient the first-order correction contracts
    // with the amplitude phase displacement.
    Vec2 grad_log_density_at_origin(const GradLogOptions& opt = {}) const {
        if (reduced_) {
            // position density ~ exp(-(r-b)^2 sigma_red^2): grad ln at 0 = 2 b sigma^2
            const auto& sp = reduced_->spec();
            Vec2 g;
            for (int i = 0; i < dim_; ++i)
                g[i] = 2.0 * sp.shift[i] * sp.sigma[i] * sp.sigma[i];
            return g;
        }
        return assembled_grad_log(opt);
    }

    // Support boxes in the (q, k) integration variables.
    void q_support(Vec2& lo, Vec2& hi) const {
        Vec2 lo1, hi1, lo2, hi2;
        in1_.support_box(lo1, hi1);
        in2_.support_box(lo2, hi2);
        for (int i = 0; i < dim_; ++i) {
            lo[i] = 0.5 * (lo1[i] - hi2[i]);
            hi[i] = 0.5 * (hi1[i] - lo2[i]);
        }
    }

    void k_support(Vec2& lo, Vec2& hi) const {
        Vec2 lo1, hi1, lo2, hi2;
        in1_.support_box(lo1, hi1);
        in2_.support_box(lo2, hi2);
        for (int i = 0; i < dim_; ++i) {
            const double w = 0.5 * ((hi1[i] - lo1[i]) + (hi2[i] - lo2[i]));
            lo[i] = -w;
            hi[i] = w;
        }
    }

private:
    // A cat whose components coincide is the plain Gaussian; fold it back so
    // degenerate superpositions take the closed-form route.
    static std::optional<PacketSpec> as_gaussian(const PacketSpec& s) {
        if (s.kind == PacketKind::Gaussian) return s;
        if (s.kind != PacketKind::Cat) return std::nullopt;
        const auto& first = s.components.front();
        for (const auto& c : s.components)
            for (int i = 0; i < 2; ++i)
                if (c.sigma[i] != first.sigma[i] || c.mean_p[i] != first.mean_p[i] ||
                    c.shift[i] != first.shift[i])
                    return std::nullopt;
        PacketSpec g;
        g.kind = PacketKind::Gaussian;
        g.dim = s.dim;
        g.sigma = first.sigma;
        g.mean_p = first.mean_p;
        g.shift = s.shift + first.shift;
        return g;
    }

    void try_reduce() {
        const auto g1 = as_gaussian(in1_.spec());
        const auto g2 = as_gaussian(in2_.spec());
        if (!g1 || !g2) return;
        for (int i = 0; i < dim_; ++i)
            if (g1->sigma[i] != g2->sigma[i]) return;
        PacketSpec red;
        red.kind = PacketKind::Gaussian;
        red.dim = dim_;
        for (int i = 0; i < dim_; ++i) {
            red.sigma[i] = g1->sigma[i] / std::numbers::sqrt2;
            red.mean_p[i] = 0.5 * (g1->mean_p[i] - g2->mean_p[i]);
            red.shift[i] = g1->shift[i] - g2->shift[i];
        }
        reduced_.emplace(red);
    }

    // Integrand of the (P, kP) reduction at fixed (q, k):
    //   rho1(P/2+q, kP/2+k) * rho2(P/2-q, kP/2-k)
    complexd joint_kernel(const Vec2& q, const Vec2& k, const double* x) const {
        Vec2 pp, kp;
        for (int i = 0; i < dim_; ++i) {
            pp[i] = x[i];
            kp[i] = x[dim_ + i];
        }
        const Vec2 a1 = 0.5 * pp + q + 0.25 * kp + 0.5 * k;
        const Vec2 a2 = 0.5 * pp + q - 0.25 * kp - 0.5 * k;
        const Vec2 a3 = 0.5 * pp - q + 0.25 * kp - 0.5 * k;
        const Vec2 a4 = 0.5 * pp - q - 0.25 * kp + 0.5 * k;
        return in1_.amplitude(a1) * std::conj(in1_.amplitude(a2)) * in2_.amplitude(a3) *
               std::conj(in2_.amplitude(a4));
    }

    void inner_box(std::vector<double>& lo, std::vector<double>& hi) const {
        Vec2 lo1, hi1, lo2, hi2;
        in1_.support_box(lo1, hi1);
        in2_.support_box(lo2, hi2);
        lo.clear();
        hi.clear();
        for (int i = 0; i < dim_; ++i) { // P = p1 + p2
            lo.push_back(lo1[i] + lo2[i]);
            hi.push_back(hi1[i] + hi2[i]);
        }
        for (int i = 0; i < dim_; ++i) { // kP = k1 + k2
            const double w = (hi1[i] - lo1[i]) + (hi2[i] - lo2[i]);
            lo.push_back(-w);
            hi.push_back(w);
        }
    }

    // One fused pass over (k, P, kP): bundles {N(0), dN/dr_j(0), N(dipole)}.
    Vec2 assembled_grad_log(const GradLogOptions& opt) const {
        std::vector<double> lo, hi;
        Vec2 klo, khi;
        k_support(klo, khi);
        for (int i = 0; i < dim_; ++i) {
            lo.push_back(klo[i]);
            hi.push_back(khi[i]);
        }
        std::vector<double> ilo, ihi;
        inner_box(ilo, ihi);
        lo.insert(lo.end(), ilo.begin(), ilo.end());
        hi.insert(hi.end(), ihi.begin(), ihi.end());

        const Vec2 qbar = mean_q_;
        const Vec2 d = dipole_;
        auto integrand = [&](const double* x) {
            Vec2 k;
            for (int i = 0; i < dim_; ++i) k[i] = x[i];
            const complexd r = joint_kernel(qbar, k, x + dim_);
            CBundle<4> out;
            out.v[0] = r;                                        // N(0)
            out.v[1] = complexd(0.0, k.x) * r;                   // dN/dr_x(0)
            out.v[2] = complexd(0.0, k.y) * r;                   // dN/dr_y(0)
            out.v[3] = std::polar(1.0, dot(k, d)) * r;           // N(dipole) ~ peak scale
            return out;
        };
        const int o_lo = dim_ == 1 ? opt.order_low : opt.order_low_2d;
        const int o_hi = dim_ == 1 ? opt.order_high : opt.order_high_2d;
        const auto coarse = tensor_integrate<4>(integrand, lo, hi, o_lo);
        const auto fine = tensor_integrate<4>(integrand, lo, hi, o_hi);

        const double n0 = fine.v[0].real();
        const double peak = std::abs(fine.v[3].real());
        if (!(std::abs(n0) > opt.floor * peak))
            throw WignerGradientUnstable(
                "relative state: density at the collision point below floor");
        const double err = std::abs(fine.v[0] - coarse.v[0]) +
                           std::abs(fine.v[1] - coarse.v[1]) +
                           std::abs(fine.v[2] - coarse.v[2]);
        if (!(err <= 1e-4 * std::abs(n0) + 1e-14))
            throw QuadratureNonConvergence("relative state: gradient quadrature unstable");
        return {fine.v[1].real() / n0, fine.v[2].real() / n0};
    }

    WavePacket in1_, in2_;
    int dim_ = 1;
    std::optional<WavePacket> reduced_;
    Vec2 mean_q_{}, dipole_{};
};

// Complete description of one collision setup.
struct ScatteringScenario {
    double m1 = 0.0, m2 = 0.0;
    double sqrt_s = 0.0;
    PacketSpec packet1, packet2; // as configured, before the impact offset
    Vec2 impact_b{};             // relative transverse offset (length units)
    AmplitudeModel amplitude;
    std::vector<double> thetas;
    int phi_bins = 16;
    double binning_axis_phi = 0.0; // azimuth the bins and hemispheres refer to

    // built state
    std::optional<WavePacket> in1, in2;
    std::optional<ElasticKinematics> kinematics;
    std::shared_ptr<const RelativeState> relative;

    static ScatteringScenario build(ScatteringScenario s) {
        if (!(s.m1 > 0.0) || !(s.m2 > 0.0))
            throw InvalidParameter("scenario: masses must be positive");
        if (s.packet1.dim != s.packet2.dim)
            throw InvalidParameter("scenario: packet dimensions differ");
        if (s.phi_bins < 8) throw InvalidParameter("scenario: needs at least 8 phi bins");
        if (!std::isfinite(s.impact_b.x) || !std::isfinite(s.impact_b.y))
            throw InvalidParameter("scenario: impact parameter must be finite");
        s.amplitude.s_threshold = (s.m1 + s.m2) * (s.m1 + s.m2);
        // the impact parameter splits symmetrically between the two packets
        PacketSpec p1 = s.packet1, p2 = s.packet2;
        const Vec2 half = 0.5 * s.impact_b;
        p1.shift += half;
        p2.shift += -1.0 * half;
        s.in1.emplace(p1);
        s.in2.emplace(p2);
        s.kinematics.emplace(s.m1, s.m2, s.sqrt_s);
        s.relative = std::make_shared<const RelativeState>(*s.in1, *s.in2);
        return s;
    }
};

} // namespace pscat
