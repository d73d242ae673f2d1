#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "pscat/errors.hpp"

namespace pscat {

// Metric (+,-,-,-), natural units.
struct FourMomentum {
    double e = 0.0;
    double px = 0.0;
    double py = 0.0;
    double pz = 0.0;

    static FourMomentum from_mass_momentum(double m, double px, double py, double pz) {
        if (m < 0.0) throw InvalidParameter("from_mass_momentum: negative mass");
        const double e = std::sqrt(m * m + px * px + py * py + pz * pz);
        return {e, px, py, pz};
    }

    double m2() const { return e * e - px * px - py * py - pz * pz; }
    double mass() const { return std::sqrt(std::max(0.0, m2())); }

    FourMomentum operator+(const FourMomentum& o) const {
        return {e + o.e, px + o.px, py + o.py, pz + o.pz};
    }
    FourMomentum operator-(const FourMomentum& o) const {
        return {e - o.e, px - o.px, py - o.py, pz - o.pz};
    }

    FourMomentum boosted_z(double beta) const {
        const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
        return {gamma * (e + beta * pz), px, py, gamma * (pz + beta * e)};
    }
};

inline double minkowski_dot(const FourMomentum& a, const FourMomentum& b) {
    return a.e * b.e - a.px * b.px - a.py * b.py - a.pz * b.pz;
}

struct MandelstamPoint {
    double s = 0.0;
    double t = 0.0;
    double u = 0.0;
};

// s = (p1+p2)^2, t = (p1-p3)^2, u = (p1-p4)^2. Requires p1+p2 = p3+p4
// componentwise to 1e-9 relative to sqrt(s).
inline MandelstamPoint mandelstam(const FourMomentum& p1, const FourMomentum& p2,
                                  const FourMomentum& p3, const FourMomentum& p4) {
    const FourMomentum in = p1 + p2;
    const FourMomentum out = p3 + p4;
    const double s = minkowski_dot(in, in);
    const double scale = std::sqrt(std::max(s, 0.0));
    const double tol = 1e-9 * (scale > 0.0 ? scale : 1.0);
    const FourMomentum d = in - out;
    if (std::abs(d.e) > tol || std::abs(d.px) > tol || std::abs(d.py) > tol ||
        std::abs(d.pz) > tol)
        throw NonConservedMomentum("mandelstam: four-momentum not conserved");
    const FourMomentum q13 = p1 - p3;
    const FourMomentum q14 = p1 - p4;
    return {s, minkowski_dot(q13, q13), minkowski_dot(q14, q14)};
}

// |p| of either particle in the center-of-momentum frame.
inline double cm_momentum(double s, double m1, double m2) {
    const double sum = m1 + m2, dif = m1 - m2;
    if (s < sum * sum)
        throw BelowThreshold("cm_momentum: s below (m1+m2)^2");
    const double num = (s - sum * sum) * (s - dif * dif);
    return std::sqrt(std::max(0.0, num)) / (2.0 * std::sqrt(s));
}

struct ParaxialityReport {
    double lambda_dB = 0.0;   // 2*pi/|<p>|, meaningless when mean_p = 0
    double lambda_c = 0.0;    // 1/m
    double ratio_dB = 0.0;    // sigma_p/|<p>|
    double ratio_c = 0.0;     // sigma_p/m  (= lambda_c/sigma_x in the width convention)
    bool mean_p_zero = false; // flags the undefined de Broglie entries
    std::optional<double> atom_ratio; // a*sigma_p = a/sigma_x
};

inline ParaxialityReport paraxiality(double mass, double sigma_p, double mean_p,
                                     std::optional<double> atom_size = std::nullopt) {
    if (mass <= 0.0) throw InvalidParameter("paraxiality: mass must be positive");
    if (sigma_p <= 0.0) throw InvalidParameter("paraxiality: sigma_p must be positive");
    if (mean_p < 0.0) throw InvalidParameter("paraxiality: mean_p must be nonnegative");
    ParaxialityReport rep;
    rep.lambda_c = 1.0 / mass;
    rep.ratio_c = sigma_p / mass;
    if (mean_p > 0.0) {
        rep.lambda_dB = 2.0 * std::numbers::pi / mean_p;
        rep.ratio_dB = sigma_p / mean_p;
    } else {
        rep.mean_p_zero = true;
        rep.lambda_dB = std::numeric_limits<double>::infinity();
        rep.ratio_dB = std::numeric_limits<double>::infinity();
    }
    if (atom_size) {
        if (*atom_size <= 0.0) throw InvalidParameter("paraxiality: atom_size must be positive");
        rep.atom_ratio = *atom_size * sigma_p;
    }
    return rep;
}

} // namespace pscat
