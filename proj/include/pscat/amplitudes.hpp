#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pscat/errors.hpp"

namespace pscat {

enum class AmplitudeKind { ConstantPhase, LogPhase, PolynomialPhase, Tabulated };

struct PolyTerm {
    int s_power = 0;
    int t_power = 0;
    double coeff = 0.0;
};

// Uniform rectangular table in (s, -t) with Catmull-Rom interpolation, which
// keeps the phase C^1 across cells.
struct PhaseTable {
    double s_min = 0.0, s_max = 0.0;
    double mt_min = 0.0, mt_max = 0.0; // -t range, positive
    int n_s = 0, n_mt = 0;
    std::vector<double> phase;   // row-major [is][imt]
    std::vector<double> modulus; // same layout

    bool empty() const { return phase.empty(); }
};

// M(s,t) = |M| exp(i zeta). Modulus is A (-t)^(-t_power); the phase depends on
// the kind:
//   constant:   zeta = zeta0
//   log:        zeta = eta ln(-t / lambda_sq)
//   polynomial: zeta = sum c_mn s^m t^n
//   tabulated:  interpolated table
struct AmplitudeModel {
    AmplitudeKind kind = AmplitudeKind::ConstantPhase;
    double normalization = 1.0; // A
    double t_power = 0.0;       // |M| = A * (-t)^(-t_power)
    double zeta0 = 0.0;
    double eta = 0.0;
    double lambda_sq = 1.0;
    std::vector<PolyTerm> poly;
    PhaseTable table;
    double s_threshold = 0.0; // physical domain: s > threshold

    static AmplitudeModel constant_phase(double a = 1.0, double zeta = 0.0) {
        AmplitudeModel m;
        m.kind = AmplitudeKind::ConstantPhase;
        m.normalization = a;
        m.zeta0 = zeta;
        return m;
    }

    static AmplitudeModel log_phase(double eta, double lambda_sq = 1.0, double a = 1.0,
                                    double t_power = 1.0) {
        AmplitudeModel m;
        m.kind = AmplitudeKind::LogPhase;
        m.normalization = a;
        m.t_power = t_power;
        m.eta = eta;
        m.lambda_sq = lambda_sq;
        return m;
    }

    static AmplitudeModel polynomial_phase(std::vector<PolyTerm> terms, double a = 1.0,
                                           double t_power = 0.0) {
        AmplitudeModel m;
        m.kind = AmplitudeKind::PolynomialPhase;
        m.normalization = a;
        m.t_power = t_power;
        m.poly = std::move(terms);
        return m;
    }
};

struct PhaseGradient {
    double d_s = 0.0;
    double d_t = 0.0;
};

namespace detail {

inline void check_domain(const AmplitudeModel& m, double s, double t) {
    if (!(t < 0.0)) throw OutOfDomain("amplitude: requires t < 0");
    if (!(s > m.s_threshold)) throw OutOfDomain("amplitude: s below threshold");
}

// Catmull-Rom in one variable with clamped end segments.
inline double catmull_rom(double p0, double p1, double p2, double p3, double u) {
    return 0.5 * ((2.0 * p1) + (-p0 + p2) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u +
                  (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u * u);
}

inline double catmull_rom_deriv(double p0, double p1, double p2, double p3, double u) {
    return 0.5 * ((-p0 + p2) + 2.0 * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u +
                  3.0 * (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * u * u);
}

struct TableLookup {
    double value = 0.0;
    double d_s = 0.0;
    double d_mt = 0.0;
};

inline TableLookup table_eval(const PhaseTable& tb, const std::vector<double>& field, double s,
                              double mt) {
    if (tb.n_s < 4 || tb.n_mt < 4) throw InvalidParameter("tabulated amplitude: table too small");
    const double hs = (tb.s_max - tb.s_min) / (tb.n_s - 1);
    const double hm = (tb.mt_max - tb.mt_min) / (tb.n_mt - 1);
    if (s < tb.s_min || s > tb.s_max || mt < tb.mt_min || mt > tb.mt_max)
        throw OutOfDomain("tabulated amplitude: point outside table");
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    int is = clampi(static_cast<int>((s - tb.s_min) / hs), 0, tb.n_s - 2);
    int im = clampi(static_cast<int>((mt - tb.mt_min) / hm), 0, tb.n_mt - 2);
    const double us = (s - (tb.s_min + is * hs)) / hs;
    const double um = (mt - (tb.mt_min + im * hm)) / hm;
    auto g = [&](int i, int j) {
        i = clampi(i, 0, tb.n_s - 1);
        j = clampi(j, 0, tb.n_mt - 1);
        return field[static_cast<std::size_t>(i) * tb.n_mt + j];
    };
    double rows[4], drows[4];
    for (int di = -1; di <= 2; ++di) {
        rows[di + 1] = catmull_rom(g(is + di, im - 1), g(is + di, im), g(is + di, im + 1),
                                   g(is + di, im + 2), um);
        drows[di + 1] = catmull_rom_deriv(g(is + di, im - 1), g(is + di, im), g(is + di, im + 1),
                                          g(is + di, im + 2), um) / hm;
    }
    TableLookup out;
    out.value = catmull_rom(rows[0], rows[1], rows[2], rows[3], us);
    out.d_s = catmull_rom_deriv(rows[0], rows[1], rows[2], rows[3], us) / hs;
    out.d_mt = catmull_rom(drows[0], drows[1], drows[2], drows[3], us);
    return out;
}

} // namespace detail

inline double phase(const AmplitudeModel& m, double s, double t) {
    detail::check_domain(m, s, t);
    switch (m.kind) {
        case AmplitudeKind::ConstantPhase: return m.zeta0;
        case AmplitudeKind::LogPhase: return m.eta * std::log(-t / m.lambda_sq);
        case AmplitudeKind::PolynomialPhase: {
            double z = 0.0;
            for (const auto& term : m.poly)
                z += term.coeff * std::pow(s, term.s_power) * std::pow(t, term.t_power);
            return z;
        }
        case AmplitudeKind::Tabulated:
            return detail::table_eval(m.table, m.table.phase, s, -t).value;
    }
    return 0.0;
}

inline double modulus(const AmplitudeModel& m, double s, double t) {
    detail::check_domain(m, s, t);
    if (m.kind == AmplitudeKind::Tabulated && !m.table.modulus.empty())
        return detail::table_eval(m.table, m.table.modulus, s, -t).value;
    return m.normalization * std::pow(-t, -m.t_power);
}

inline std::complex<double> evaluate(const AmplitudeModel& m, double s, double t) {
    return std::polar(modulus(m, s, t), phase(m, s, t));
}

inline PhaseGradient phase_gradient(const AmplitudeModel& m, double s, double t) {
    detail::check_domain(m, s, t);
    switch (m.kind) {
        case AmplitudeKind::ConstantPhase: return {0.0, 0.0};
        case AmplitudeKind::LogPhase: return {0.0, m.eta / t};
        case AmplitudeKind::PolynomialPhase: {
            PhaseGradient g;
            for (const auto& term : m.poly) {
                if (term.s_power > 0)
                    g.d_s += term.coeff * term.s_power * std::pow(s, term.s_power - 1) *
                             std::pow(t, term.t_power);
                if (term.t_power > 0)
                    g.d_t += term.coeff * std::pow(s, term.s_power) * term.t_power *
                             std::pow(t, term.t_power - 1);
            }
            return g;
        }
        case AmplitudeKind::Tabulated: {
            const auto lk = detail::table_eval(m.table, m.table.phase, s, -t);
            return {lk.d_s, -lk.d_mt}; // d/dt = -d/d(-t)
        }
    }
    return {0.0, 0.0};
}

// Central differences, O(h^2); verification oracle for phase_gradient.
inline PhaseGradient phase_gradient_fd(const AmplitudeModel& m, double s, double t, double h) {
    if (!(h > 0.0)) throw InvalidParameter("phase_gradient_fd: h must be positive");
    detail::check_domain(m, s + h, t - h);
    detail::check_domain(m, s - h, t + h);
    return {(phase(m, s + h, t) - phase(m, s - h, t)) / (2.0 * h),
            (phase(m, s, t + h) - phase(m, s, t - h)) / (2.0 * h)};
}

// dsigma/dt = |M|^2 / (16 pi [s-(m1+m2)^2][s-(m1-m2)^2]); no phase dependence.
inline double plane_wave_dsigma_dt(const AmplitudeModel& m, double s, double t, double m1,
                                   double m2) {
    const double sum = m1 + m2, dif = m1 - m2;
    if (s <= sum * sum) throw BelowThreshold("plane_wave_dsigma_dt: s below threshold");
    detail::check_domain(m, s, t);
    const double mod = modulus(m, s, t);
    const double flux = (s - sum * sum) * (s - dif * dif);
    return mod * mod / (16.0 * std::numbers::pi * flux);
}

} // namespace pscat
