#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <thread>
#include <vector>

#include "pscat/correction.hpp"
#include "pscat/errors.hpp"
#include "pscat/rng.hpp"
#include "pscat/scenario.hpp"
#include "pscat/sum.hpp"

namespace pscat {

enum class OracleMethod { TensorQuadrature, MonteCarlo };

struct OracleConfig {
    OracleMethod method = OracleMethod::TensorQuadrature;
    int nodes = 48;               // per axis; the refinement pass doubles it
    long long samples = 200000;   // Monte Carlo budget
    std::uint64_t seed = 1;
    double target_rel_error = 1e-3;
    int threads = 1;

    void validate() const {
        if (method == OracleMethod::TensorQuadrature && nodes < 32)
            throw InvalidParameter("oracle: quadrature needs >= 32 nodes per axis");
        if (method == OracleMethod::MonteCarlo && samples < 10000)
            throw InvalidParameter("oracle: Monte Carlo needs >= 1e4 samples");
    }
};

struct BilinearResult {
    double value = 0.0;    // packet-averaged |M|^2, normalized by the overlap weight
    double error = 0.0;    // Richardson estimate or Monte Carlo batch SE
    double baseline = 0.0; // |M(kin(<q>))|^2
    double ratio = 0.0;    // value / baseline
    double imag_residual = 0.0;
    long long evaluations = 0;
};

namespace detail {

struct Direction {
    double st, ct, cphi, sphi;
    Direction(double theta, double phi)
        : st(std::sin(theta)), ct(std::cos(theta)), cphi(std::cos(phi)), sphi(std::sin(phi)) {}
};

inline complexd amplitude_at(const AmplitudeModel& m, const ElasticKinematics& kin,
                             const Vec2& q, const Direction& dir) {
    const double q2 = q.norm2();
    const double pz = kin.p_cm();
    const double e1 = std::sqrt(kin.m1() * kin.m1() + pz * pz + q2);
    const double e2 = std::sqrt(kin.m2() * kin.m2() + pz * pz + q2);
    const double s = (e1 + e2) * (e1 + e2);
    const double pabs = std::sqrt(pz * pz + q2);
    const double p1n = dir.st * (q.x * dir.cphi + q.y * dir.sphi) + pz * dir.ct;
    const double t = 2.0 * kin.m1() * kin.m1() - 2.0 * e1 * e1 + 2.0 * pabs * p1n;
    if (!(t < 0.0))
        throw OutOfDomain("oracle: kinematic map left the physical region");
    return evaluate(m, s, t);
}

// Gaussian proposals matched to a packet's envelope. Weights carry the exact
// density over the proposal, so vortex/airy/cat structure is handled exactly.
struct PacketSampler {
    const WavePacket* packet = nullptr;
    int dim = 1;
    // per-axis proposal parameters
    Vec2 p_mean{}, p_std{}, k_std{};
    // cat mixture
    std::vector<double> mix_cdf;       // cumulative component probabilities
    std::vector<Vec2> comp_mean, comp_pstd, comp_kstd;

    explicit PacketSampler(const WavePacket& w) : packet(&w), dim(w.dim()) {
        const auto& sp = w.spec();
        switch (sp.kind) {
            case PacketKind::Gaussian:
            case PacketKind::Airy:
                for (int i = 0; i < dim; ++i) {
                    p_mean[i] = sp.mean_p[i];
                    p_std[i] = sp.sigma[i] / std::numbers::sqrt2;
                    k_std[i] = sp.sigma[i] * std::numbers::sqrt2;
                }
                break;
            case PacketKind::Vortex: {
                const double s = sp.sigma.x, kap = sp.ring_radius;
                for (int i = 0; i < dim; ++i) {
                    p_mean[i] = sp.mean_p[i];
                    p_std[i] = std::sqrt(0.5 * kap * kap + s * s);
                    k_std[i] = std::numbers::sqrt2 * s + kap;
                }
                break;
            }
            case PacketKind::Cat: {
                double tot = 0.0;
                for (const auto& c : sp.components) tot += std::norm(c.weight);
                double acc = 0.0;
                for (const auto& c : sp.components) {
                    acc += std::norm(c.weight) / tot;
                    mix_cdf.push_back(acc);
                    Vec2 ps, ks;
                    for (int i = 0; i < dim; ++i) {
                        ps[i] = c.sigma[i] / std::numbers::sqrt2;
                        ks[i] = c.sigma[i] * std::numbers::sqrt2;
                    }
                    comp_mean.push_back(c.mean_p);
                    comp_pstd.push_back(ps);
                    comp_kstd.push_back(ks);
                }
                mix_cdf.back() = 1.0;
                break;
            }
        }
    }

    bool is_mixture() const { return !mix_cdf.empty(); }

    static double normal_pdf(double x, double mean, double std) {
        const double z = (x - mean) / std;
        return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * std::numbers::pi));
    }

    // proposal density of the (p, k) draw
    double density(const Vec2& p, const Vec2& k) const {
        if (!is_mixture()) {
            double d = 1.0;
            for (int i = 0; i < dim; ++i)
                d *= normal_pdf(p[i], p_mean[i], p_std[i]) * normal_pdf(k[i], 0.0, k_std[i]);
            return d;
        }
        double d = 0.0, prev = 0.0;
        for (std::size_t j = 0; j < mix_cdf.size(); ++j) {
            const double pj = mix_cdf[j] - prev;
            prev = mix_cdf[j];
            double dj = 1.0;
            for (int i = 0; i < dim; ++i)
                dj *= normal_pdf(p[i], comp_mean[j][i], comp_pstd[j][i]) *
                      normal_pdf(k[i], 0.0, comp_kstd[j][i]);
            d += pj * dj;
        }
        return d;
    }

    // Draw (p, k) for one sample; streams are (slot, slot+8, slot+16) for
    // the p-block, k-block and mixture pick respectively.
    void draw(const CounterRng& rng_p, const CounterRng& rng_k, const CounterRng& rng_m,
              std::uint64_t idx, Vec2& p, Vec2& k) const {
        Vec2 mean = p_mean, pstd = p_std, kstd = k_std;
        if (is_mixture()) {
            const double u = rng_m.uniforms(idx)[0];
            std::size_t j = 0;
            while (j + 1 < mix_cdf.size() && u > mix_cdf[j]) ++j;
            mean = comp_mean[j];
            pstd = comp_pstd[j];
            kstd = comp_kstd[j];
        }
        const auto np = rng_p.normals(idx);
        const auto nk = rng_k.normals(idx);
        for (int i = 0; i < dim; ++i) {
            p[i] = mean[i] + pstd[i] * np[i];
            k[i] = kstd[i] * nk[i];
        }
    }
};

} // namespace detail

// Packet-averaged bilinear
//   int dq dk rho_rel(q,k) M(kin(q+k/2)) M*(kin(q-k/2))
// normalized by the same integral with M == 1 (the packet-overlap weight), so
// the result is directly comparable with the plane-wave |M|^2 at the mean
// kinematics. Tensor quadrature integrates the reduced relative state when
// one exists and the full per-particle joint density otherwise; Monte Carlo
// importance-samples Gaussian envelopes with a counter-based stream, so the
// result is schedule-independent and reproducible from the seed.
inline BilinearResult averaged_bilinear(const ScatteringScenario& sc, double theta, double phi,
                                        const OracleConfig& cfg) {
    cfg.validate();
    const auto& kin = *sc.kinematics;
    const detail::Direction dir(theta, phi);
    const Vec2 qbar = sc.relative->mean_q();

    BilinearResult out;
    out.baseline = std::norm(detail::amplitude_at(sc.amplitude, kin, qbar, dir));

    const int dim = sc.relative->dim();
    const bool reduced = sc.relative->analytic();

    if (cfg.method == OracleMethod::TensorQuadrature) {
        std::vector<double> lo, hi;
        if (reduced) {
            Vec2 qlo, qhi, klo, khi;
            sc.relative->q_support(qlo, qhi);
            sc.relative->k_support(klo, khi);
            for (int i = 0; i < dim; ++i) {
                lo.push_back(qlo[i]);
                hi.push_back(qhi[i]);
            }
            for (int i = 0; i < dim; ++i) {
                lo.push_back(klo[i]);
                hi.push_back(khi[i]);
            }
        } else {
            if (dim != 1)
                throw InvalidParameter(
                    "oracle: tensor quadrature supports dim-2 only for Gaussian pairs; "
                    "use monte_carlo");
            Vec2 lo1, hi1, lo2, hi2;
            sc.in1->support_box(lo1, hi1);
            sc.in2->support_box(lo2, hi2);
            lo = {lo1.x, -(hi1.x - lo1.x), lo2.x, -(hi2.x - lo2.x)};
            hi = {hi1.x, hi1.x - lo1.x, hi2.x, hi2.x - lo2.x};
        }

        auto integrand = [&](const double* x) {
            Vec2 q, kq;
            complexd rho;
            if (reduced) {
                for (int i = 0; i < dim; ++i) {
                    q[i] = x[i];
                    kq[i] = x[dim + i];
                }
                rho = sc.relative->reduced()->density(q, kq);
            } else {
                const Vec2 p1{x[0], 0.0}, k1{x[1], 0.0}, p2{x[2], 0.0}, k2{x[3], 0.0};
                q = 0.5 * (p1 - p2);
                kq = 0.5 * (k1 - k2);
                rho = sc.in1->density(p1, k1) * sc.in2->density(p2, k2);
            }
            const complexd mprod =
                detail::amplitude_at(sc.amplitude, kin, q + 0.5 * kq, dir) *
                std::conj(detail::amplitude_at(sc.amplitude, kin, q - 0.5 * kq, dir));
            CBundle<2> v;
            v.v[0] = rho * mprod;
            v.v[1] = rho;
            return v;
        };

        const auto coarse = tensor_integrate<2>(integrand, lo, hi, cfg.nodes);
        const auto fine = tensor_integrate<2>(integrand, lo, hi, 2 * cfg.nodes);
        const double v_lo = coarse.v[0].real() / coarse.v[1].real();
        const double v_hi = fine.v[0].real() / fine.v[1].real();
        out.value = v_hi;
        out.error = std::abs(v_hi - v_lo);
        out.imag_residual = std::abs(fine.v[0].imag()) /
                            std::max(std::abs(fine.v[0].real()), 1e-300);
        long long n = 1;
        for (std::size_t i = 0; i < lo.size(); ++i) n *= 2 * cfg.nodes;
        out.evaluations = n;
    } else {
        // per-particle sampling slots: reduced state uses a single slot
        std::vector<detail::PacketSampler> samplers;
        if (reduced)
            samplers.emplace_back(*sc.relative->reduced());
        else {
            samplers.emplace_back(*sc.in1);
            samplers.emplace_back(*sc.in2);
        }
        const int nslots = static_cast<int>(samplers.size());
        std::vector<CounterRng> rng_p, rng_k, rng_m;
        for (int s = 0; s < nslots; ++s) {
            rng_p.emplace_back(cfg.seed, static_cast<std::uint64_t>(s));
            rng_k.emplace_back(cfg.seed, static_cast<std::uint64_t>(s) + 8);
            rng_m.emplace_back(cfg.seed, static_cast<std::uint64_t>(s) + 16);
        }

        auto sample_pair = [&](std::uint64_t idx, double& num, double& den) {
            Vec2 p[2], k[2];
            double prop = 1.0;
            for (int s = 0; s < nslots; ++s) {
                samplers[s].draw(rng_p[s], rng_k[s], rng_m[s], idx, p[s], k[s]);
                prop *= samplers[s].density(p[s], k[s]);
            }
            Vec2 q, kq;
            if (nslots == 1) {
                q = p[0];
                kq = k[0];
            } else {
                q = 0.5 * (p[0] - p[1]);
                kq = 0.5 * (k[0] - k[1]);
            }
            auto eval = [&](const Vec2& qq, const Vec2& kk, const Vec2 kv[2]) {
                complexd rho;
                if (nslots == 1)
                    rho = sc.relative->reduced()->density(qq, kv[0]);
                else
                    rho = sc.in1->density(p[0], kv[0]) * sc.in2->density(p[1], kv[1]);
                const complexd mprod =
                    detail::amplitude_at(sc.amplitude, kin, qq + 0.5 * kk, dir) *
                    std::conj(detail::amplitude_at(sc.amplitude, kin, qq - 0.5 * kk, dir));
                return std::make_pair(rho * mprod, rho);
            };
            const Vec2 kneg[2] = {-1.0 * k[0], -1.0 * k[1]};
            const auto a = eval(q, kq, k);
            const auto b = eval(q, -1.0 * kq, kneg);
            // conjugate-pair average: exactly real
            num = 0.5 * (a.first.real() + b.first.real()) / prop;
            den = 0.5 * (a.second.real() + b.second.real()) / prop;
        };

        const long long n = cfg.samples;
        const int nbatch = 32;
        const long long batch_sz = (n + nbatch - 1) / nbatch;
        const long long chunk_sz = 4096;
        struct Chunk {
            double num = 0.0, den = 0.0;
            int batch = 0;
        };
        std::vector<Chunk> chunks;
        for (long long b = 0; b < nbatch; ++b) {
            const long long b_lo = b * batch_sz, b_hi = std::min(n, (b + 1) * batch_sz);
            for (long long c = b_lo; c < b_hi; c += chunk_sz)
                chunks.push_back({0.0, 0.0, static_cast<int>(b)});
        }
        // chunk index -> sample range, reconstructed deterministically
        std::vector<std::pair<long long, long long>> ranges;
        for (long long b = 0; b < nbatch; ++b) {
            const long long b_lo = b * batch_sz, b_hi = std::min(n, (b + 1) * batch_sz);
            for (long long c = b_lo; c < b_hi; c += chunk_sz)
                ranges.emplace_back(c, std::min(b_hi, c + chunk_sz));
        }
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t ci = next.fetch_add(1); ci < chunks.size();
                 ci = next.fetch_add(1)) {
                double ns = 0.0, ds = 0.0;
                for (long long i = ranges[ci].first; i < ranges[ci].second; ++i) {
                    double nv, dv;
                    sample_pair(static_cast<std::uint64_t>(i), nv, dv);
                    ns += nv;
                    ds += dv;
                }
                chunks[ci].num = ns;
                chunks[ci].den = ds;
            }
        };
        if (cfg.threads > 1) {
            std::vector<std::thread> pool;
            for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        } else {
            worker();
        }
        // sequential combine in chunk order: bit-stable for any thread count
        std::vector<double> bnum(nbatch, 0.0), bden(nbatch, 0.0);
        double tnum = 0.0, tden = 0.0;
        for (const auto& c : chunks) {
            bnum[c.batch] += c.num;
            bden[c.batch] += c.den;
            tnum += c.num;
            tden += c.den;
        }
        out.value = tnum / tden;
        double mean = 0.0;
        int nb = 0;
        std::vector<double> rb;
        for (int b = 0; b < nbatch; ++b)
            if (bden[b] != 0.0) {
                rb.push_back(bnum[b] / bden[b]);
                ++nb;
            }
        for (double r : rb) mean += r;
        mean /= nb;
        double var = 0.0;
        for (double r : rb) var += (r - mean) * (r - mean);
        out.error = nb > 1 ? std::sqrt(var / (nb - 1) / nb) : 0.0;
        out.imag_residual = 0.0; // conjugate pairing cancels it identically
        out.evaluations = n;
    }

    out.ratio = out.value / out.baseline;
    if (out.value < -3.0 * out.error)
        throw NegativeValueBeyondError("oracle: bilinear came out negative beyond its error");
    if (cfg.target_rel_error > 0.0 &&
        out.error > cfg.target_rel_error * std::max(std::abs(out.value), 1e-300))
        throw NonConvergence("oracle: error target not met at the configured budget");
    return out;
}

// Shape-preserving width rescale: momentum widths scale by f, conjugate
// lengths by 1/f, so b/sigma_x and every dimensionless shape parameter stay
// put while sigma_p/m sweeps.
inline ScatteringScenario rescale_widths(const ScatteringScenario& base, double sigma_p_new) {
    ScatteringScenario s = base;
    const double f = sigma_p_new / base.in1->characteristic_sigma_p();
    auto scale_spec = [&](PacketSpec& sp) {
        for (int i = 0; i < 2; ++i) {
            sp.sigma[i] *= f;
            sp.shift[i] /= f;
            sp.airy_scale[i] /= f;
        }
        sp.ring_radius *= f;
        for (auto& c : sp.components) {
            for (int i = 0; i < 2; ++i) {
                c.sigma[i] *= f;
                c.shift[i] /= f;
            }
        }
    };
    scale_spec(s.packet1);
    scale_spec(s.packet2);
    s.impact_b = (1.0 / f) * s.impact_b;
    s.in1.reset();
    s.in2.reset();
    s.kinematics.reset();
    s.relative.reset();
    return ScatteringScenario::build(std::move(s));
}

struct ScalingRow {
    double sigma_over_m = 0.0;
    double oracle_ratio = 0.0;
    double oracle_error = 0.0;
    double first_order = 0.0;
};

struct ScalingProbe {
    double slope = 0.0;                  // linear coefficient of (ratio-1) vs sigma_p/m
    double quad_coeff = 0.0;             // quadratic coefficient
    double quad_over_linear_at_max = 0.0;
    std::vector<ScalingRow> table;
};

// Least-squares fit of (ratio - 1) = a x + b x^2 over the width sweep.
inline ScalingProbe scaling_probe(const ScatteringScenario& base,
                                  const std::vector<double>& sigma_ps, double theta, double phi,
                                  const OracleConfig& cfg) {
    if (sigma_ps.size() < 4)
        throw InvalidParameter("scaling_probe: needs at least 4 widths");
    const double lo = *std::min_element(sigma_ps.begin(), sigma_ps.end());
    const double hi = *std::max_element(sigma_ps.begin(), sigma_ps.end());
    if (hi < 10.0 * lo)
        throw InvalidParameter("scaling_probe: widths must span at least a decade");

    ScalingProbe out;
    double sxx = 0.0, sxx3 = 0.0, sx4 = 0.0, sxy = 0.0, sx2y = 0.0;
    for (double sp : sigma_ps) {
        const auto sc = rescale_widths(base, sp);
        const auto res = averaged_bilinear(sc, theta, phi, cfg);
        ScalingRow row;
        row.sigma_over_m = sp / base.m1;
        row.oracle_ratio = res.ratio;
        row.oracle_error = res.error / res.baseline;
        row.first_order = first_order_ratio(sc, theta, phi);
        out.table.push_back(row);
        const double x = row.sigma_over_m, y = res.ratio - 1.0;
        sxx += x * x;
        sxx3 += x * x * x;
        sx4 += x * x * x * x;
        sxy += x * y;
        sx2y += x * x * y;
    }
    const double det = sxx * sx4 - sxx3 * sxx3;
    out.slope = (sx4 * sxy - sxx3 * sx2y) / det;
    out.quad_coeff = (sxx * sx2y - sxx3 * sxy) / det;
    const double xmax = hi / base.m1;
    out.quad_over_linear_at_max =
        std::abs(out.quad_coeff * xmax) / std::max(std::abs(out.slope), 1e-300);
    return out;
}

// |oracle ratio - 1 - first_order|: the empirical size of everything the
// first-order expansion dropped. Scales quadratically in sigma_p.
inline double wkb_remainder(const ScatteringScenario& sc, double theta, double phi,
                            const OracleConfig& cfg) {
    const auto res = averaged_bilinear(sc, theta, phi, cfg);
    const double fo = first_order_ratio(sc, theta, phi);
    return std::abs(res.ratio - 1.0 - fo);
}

} // namespace pscat
