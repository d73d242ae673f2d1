#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pscat/errors.hpp"
#include "pscat/oracle.hpp"
#include "pscat/scenario.hpp"
#include "pscat/units.hpp"
#include "pscat/wigner.hpp"

namespace pscat {

using json = nlohmann::json;

struct WignerExportSpec {
    int packet = 1; // 1 or 2
    std::string file;
    PhaseSpaceGrid grid;
};

// Everything a run needs, already converted to natural units.
struct ScenarioConfig {
    ScatteringScenario scenario; // unbuilt
    std::uint64_t seed = 0;
    bool oracle_enabled = true;
    OracleConfig oracle;
    std::vector<WignerExportSpec> wigner_exports;
    std::vector<double> sigma_p_sweep;
    std::optional<double> atom_size;
    json echo;
};

namespace cfg_detail {

class Reader {
public:
    explicit Reader(std::vector<std::string>& out) : violations_(out) {}

    void fail(const std::string& path, const std::string& msg) {
        violations_.push_back(path + ": " + msg);
    }

    void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!allowed.count(it.key())) fail(path + "/" + it.key(), "unknown key");
    }

    bool has(const json& j, const char* key) const { return j.is_object() && j.contains(key); }

    double number(const json& j, const std::string& path, const char* key,
                  std::optional<double> fallback = std::nullopt) {
        if (!has(j, key)) {
            if (fallback) return *fallback;
            fail(path + "/" + key, "required number missing");
            return 0.0;
        }
        if (!j[key].is_number()) {
            fail(path + "/" + key, "must be a number");
            return fallback.value_or(0.0);
        }
        return j[key].get<double>();
    }

    long long integer(const json& j, const std::string& path, const char* key,
                      std::optional<long long> fallback = std::nullopt) {
        if (!has(j, key)) {
            if (fallback) return *fallback;
            fail(path + "/" + key, "required integer missing");
            return 0;
        }
        if (!j[key].is_number_integer() && !j[key].is_number_unsigned()) {
            fail(path + "/" + key, "must be an integer");
            return fallback.value_or(0);
        }
        return j[key].get<long long>();
    }

    std::string text(const json& j, const std::string& path, const char* key,
                     std::optional<std::string> fallback = std::nullopt) {
        if (!has(j, key)) {
            if (fallback) return *fallback;
            fail(path + "/" + key, "required string missing");
            return {};
        }
        if (!j[key].is_string()) {
            fail(path + "/" + key, "must be a string");
            return fallback.value_or("");
        }
        return j[key].get<std::string>();
    }

    // fixed-length numeric array -> Vec2 (y = 0 when dim == 1)
    Vec2 vec(const json& j, const std::string& path, const char* key, int dim,
             std::optional<Vec2> fallback = std::nullopt) {
        if (!has(j, key)) {
            if (fallback) return *fallback;
            fail(path + "/" + key, "required array missing");
            return {};
        }
        const auto& a = j[key];
        if (!a.is_array() || static_cast<int>(a.size()) != dim) {
            fail(path + "/" + key, "must be an array of " + std::to_string(dim) + " numbers");
            return fallback.value_or(Vec2{});
        }
        Vec2 v;
        for (int i = 0; i < dim; ++i) {
            if (!a[i].is_number()) {
                fail(path + "/" + key, "must contain numbers only");
                return fallback.value_or(Vec2{});
            }
            v[i] = a[i].get<double>();
        }
        return v;
    }

    bool ok() const { return violations_.empty(); }

private:
    std::vector<std::string>& violations_;
};

struct UnitSystem {
    bool nm_kev = false;
    double energy(double v) const { return nm_kev ? units::kev_to_mev(v) : v; }
    double length(double v) const { return nm_kev ? units::nm_to_natural(v) : v; }
    Vec2 length(Vec2 v) const { return {length(v.x), length(v.y)}; }
    Vec2 energy(Vec2 v) const { return {energy(v.x), energy(v.y)}; }
};

inline PacketSpec read_packet(Reader& r, const json& j, const std::string& path,
                              const UnitSystem& un) {
    PacketSpec spec;
    r.check_keys(j, path,
                 {"kind", "dim", "sigma", "sigma_x", "mean_p", "shift", "ring_radius", "oam",
                  "airy_scale", "components"});
    if (!j.is_object()) return spec;

    const std::string kind = r.text(j, path, "kind");
    if (kind == "gaussian")
        spec.kind = PacketKind::Gaussian;
    else if (kind == "vortex")
        spec.kind = PacketKind::Vortex;
    else if (kind == "airy")
        spec.kind = PacketKind::Airy;
    else if (kind == "cat")
        spec.kind = PacketKind::Cat;
    else if (!kind.empty())
        r.fail(path + "/kind", "must be one of gaussian|vortex|airy|cat");

    spec.dim = static_cast<int>(r.integer(j, path, "dim", 1));
    if (spec.dim != 1 && spec.dim != 2) {
        r.fail(path + "/dim", "must be 1 or 2");
        spec.dim = 1;
    }
    if (spec.kind == PacketKind::Vortex && spec.dim != 2)
        r.fail(path, "vortex requires dim=2");

    auto read_sigma = [&](const json& node, const std::string& p, Vec2& out,
                          bool required) -> void {
        const bool have_p = r.has(node, "sigma");
        const bool have_x = r.has(node, "sigma_x");
        if (have_p && have_x) {
            r.fail(p, "give either sigma or sigma_x, not both");
            return;
        }
        if (!have_p && !have_x) {
            if (required) r.fail(p, "needs sigma (momentum) or sigma_x (length)");
            return;
        }
        if (have_p) {
            out = un.energy(r.vec(node, p, "sigma", spec.dim));
        } else {
            Vec2 sx = r.vec(node, p, "sigma_x", spec.dim);
            for (int i = 0; i < spec.dim; ++i) {
                if (!(sx[i] > 0.0)) {
                    r.fail(p + "/sigma_x", "must be positive");
                    return;
                }
                out[i] = 1.0 / un.length(sx[i]);
            }
        }
        for (int i = 0; i < spec.dim; ++i)
            if (!(out[i] > 0.0)) r.fail(p, "sigma must be positive");
    };

    if (spec.kind != PacketKind::Cat) {
        read_sigma(j, path, spec.sigma, true);
    } else if (r.has(j, "sigma") || r.has(j, "sigma_x")) {
        r.fail(path, "cat packets carry widths on their components");
    }
    spec.mean_p = un.energy(r.vec(j, path, "mean_p", spec.dim, Vec2{}));
    spec.shift = un.length(r.vec(j, path, "shift", spec.dim, Vec2{}));

    if (spec.kind == PacketKind::Vortex) {
        spec.ring_radius = un.energy(r.number(j, path, "ring_radius"));
        if (spec.ring_radius < 0.0) r.fail(path + "/ring_radius", "must be >= 0");
        spec.oam = static_cast<int>(r.integer(j, path, "oam", 0));
    } else if (r.has(j, "ring_radius") || r.has(j, "oam")) {
        r.fail(path, "ring_radius/oam apply to vortex packets only");
    }

    if (spec.kind == PacketKind::Airy) {
        spec.airy_scale = un.length(r.vec(j, path, "airy_scale", spec.dim));
    } else if (r.has(j, "airy_scale")) {
        r.fail(path, "airy_scale applies to airy packets only");
    }

    if (spec.kind == PacketKind::Cat) {
        if (!r.has(j, "components") || !j["components"].is_array() ||
            j["components"].size() < 2) {
            r.fail(path + "/components", "cat needs an array of >= 2 components");
        } else {
            int idx = 0;
            for (const auto& cj : j["components"]) {
                const std::string cpath = path + "/components/" + std::to_string(idx++);
                r.check_keys(cj, cpath, {"weight", "sigma", "sigma_x", "mean_p", "shift"});
                CatComponent c;
                if (r.has(cj, "weight")) {
                    const auto& wj = cj["weight"];
                    if (wj.is_number())
                        c.weight = {wj.get<double>(), 0.0};
                    else if (wj.is_array() && wj.size() == 2 && wj[0].is_number() &&
                             wj[1].is_number())
                        c.weight = {wj[0].get<double>(), wj[1].get<double>()};
                    else
                        r.fail(cpath + "/weight", "must be a number or [re, im]");
                }
                Vec2 sig{1.0, 1.0};
                PacketSpec tmp = spec; // reuse sigma reader with the cat's dim
                (void)tmp;
                {
                    const bool have_p = r.has(cj, "sigma"), have_x = r.has(cj, "sigma_x");
                    if (have_p == have_x) {
                        r.fail(cpath, "needs exactly one of sigma or sigma_x");
                    } else if (have_p) {
                        sig = un.energy(r.vec(cj, cpath, "sigma", spec.dim));
                    } else {
                        Vec2 sx = r.vec(cj, cpath, "sigma_x", spec.dim);
                        for (int i = 0; i < spec.dim; ++i) {
                            if (!(sx[i] > 0.0)) {
                                r.fail(cpath + "/sigma_x", "must be positive");
                                break;
                            }
                            sig[i] = 1.0 / un.length(sx[i]);
                        }
                    }
                    for (int i = 0; i < spec.dim; ++i)
                        if (!(sig[i] > 0.0)) r.fail(cpath, "sigma must be positive");
                }
                c.sigma = sig;
                c.mean_p = un.energy(r.vec(cj, cpath, "mean_p", spec.dim, Vec2{}));
                c.shift = un.length(r.vec(cj, cpath, "shift", spec.dim, Vec2{}));
                spec.components.push_back(c);
            }
            double wsum = 0.0;
            for (const auto& c : spec.components) wsum += std::norm(c.weight);
            if (wsum == 0.0) r.fail(path + "/components", "all weights are zero");
        }
    } else if (r.has(j, "components")) {
        r.fail(path, "components apply to cat packets only");
    }
    return spec;
}

inline AmplitudeModel read_amplitude(Reader& r, const json& j, const std::string& path,
                                     const UnitSystem& un) {
    AmplitudeModel m;
    r.check_keys(j, path,
                 {"kind", "normalization", "t_power", "zeta0", "eta", "lambda_sq", "terms",
                  "table"});
    if (!j.is_object()) return m;
    const std::string kind = r.text(j, path, "kind");
    m.normalization = r.number(j, path, "normalization", 1.0);
    if (kind == "constant_phase") {
        m.kind = AmplitudeKind::ConstantPhase;
        m.t_power = r.number(j, path, "t_power", 0.0);
        m.zeta0 = r.number(j, path, "zeta0", 0.0);
    } else if (kind == "log_phase") {
        m.kind = AmplitudeKind::LogPhase;
        m.t_power = r.number(j, path, "t_power", 1.0);
        m.eta = r.number(j, path, "eta");
        const double l2 = r.number(j, path, "lambda_sq", 1.0);
        m.lambda_sq = un.energy(un.energy(l2)); // an energy squared
        if (!(m.lambda_sq > 0.0)) r.fail(path + "/lambda_sq", "must be positive");
    } else if (kind == "polynomial_phase") {
        m.kind = AmplitudeKind::PolynomialPhase;
        m.t_power = r.number(j, path, "t_power", 0.0);
        if (!r.has(j, "terms") || !j["terms"].is_array()) {
            r.fail(path + "/terms", "polynomial_phase needs a terms array");
        } else {
            int idx = 0;
            for (const auto& tj : j["terms"]) {
                const std::string tpath = path + "/terms/" + std::to_string(idx++);
                r.check_keys(tj, tpath, {"s_power", "t_power", "coeff"});
                PolyTerm term;
                term.s_power = static_cast<int>(r.integer(tj, tpath, "s_power", 0));
                term.t_power = static_cast<int>(r.integer(tj, tpath, "t_power", 0));
                term.coeff = r.number(tj, tpath, "coeff");
                if (term.s_power < 0 || term.t_power < 0)
                    r.fail(tpath, "powers must be >= 0");
                m.poly.push_back(term);
            }
        }
    } else if (kind == "tabulated") {
        m.kind = AmplitudeKind::Tabulated;
        m.t_power = r.number(j, path, "t_power", 0.0);
        if (!r.has(j, "table") || !j["table"].is_object()) {
            r.fail(path + "/table", "tabulated needs a table object");
        } else {
            const auto& tj = j["table"];
            const std::string tpath = path + "/table";
            r.check_keys(tj, tpath,
                         {"s_min", "s_max", "mt_min", "mt_max", "n_s", "n_mt", "phase",
                          "modulus"});
            auto& tb = m.table;
            tb.s_min = un.energy(un.energy(r.number(tj, tpath, "s_min")));
            tb.s_max = un.energy(un.energy(r.number(tj, tpath, "s_max")));
            tb.mt_min = un.energy(un.energy(r.number(tj, tpath, "mt_min")));
            tb.mt_max = un.energy(un.energy(r.number(tj, tpath, "mt_max")));
            tb.n_s = static_cast<int>(r.integer(tj, tpath, "n_s"));
            tb.n_mt = static_cast<int>(r.integer(tj, tpath, "n_mt"));
            if (tb.n_s < 4 || tb.n_mt < 4) r.fail(tpath, "table needs n_s, n_mt >= 4");
            auto read_field = [&](const char* key, std::vector<double>& out, bool required) {
                if (!r.has(tj, key)) {
                    if (required) r.fail(tpath + "/" + key, "required array missing");
                    return;
                }
                const auto& a = tj[key];
                if (!a.is_array() ||
                    a.size() != static_cast<std::size_t>(tb.n_s) * tb.n_mt) {
                    r.fail(tpath + "/" + key, "must be an array of n_s*n_mt numbers");
                    return;
                }
                for (const auto& x : a) {
                    if (!x.is_number()) {
                        r.fail(tpath + "/" + key, "must contain numbers only");
                        return;
                    }
                    out.push_back(x.get<double>());
                }
            };
            read_field("phase", tb.phase, true);
            read_field("modulus", tb.modulus, false);
        }
    } else if (!kind.empty()) {
        r.fail(path + "/kind",
               "must be one of constant_phase|log_phase|polynomial_phase|tabulated");
    }
    return m;
}

} // namespace cfg_detail

// Full schema check; returns every violation, not only the first. When the
// returned list is empty, `out` carries a usable configuration in natural
// units.
inline std::vector<std::string> parse_config(const json& j, ScenarioConfig* out) {
    std::vector<std::string> violations;
    cfg_detail::Reader r(violations);
    ScenarioConfig cfg;
    cfg.echo = j;

    if (!j.is_object()) {
        r.fail("", "config must be a JSON object");
        return violations;
    }
    r.check_keys(j, "", {"schema_version", "units", "particles", "collision", "amplitude",
                         "observables"});

    const long long sv = r.integer(j, "", "schema_version");
    if (sv != 1 && r.has(j, "schema_version")) r.fail("/schema_version", "must be 1");

    cfg_detail::UnitSystem un;
    const std::string units = r.text(j, "", "units", std::string("natural"));
    if (units == "nm-keV")
        un.nm_kev = true;
    else if (units != "natural")
        r.fail("/units", "must be natural or nm-keV");

    // particles
    if (!r.has(j, "particles")) {
        r.fail("/particles", "required object missing");
    } else {
        const auto& pj = j["particles"];
        r.check_keys(pj, "/particles", {"m1", "m2", "packet1", "packet2"});
        cfg.scenario.m1 = un.energy(r.number(pj, "/particles", "m1"));
        cfg.scenario.m2 = un.energy(r.number(pj, "/particles", "m2"));
        if (r.has(pj, "m1") && !(cfg.scenario.m1 > 0.0))
            r.fail("/particles/m1", "must be positive");
        if (r.has(pj, "m2") && !(cfg.scenario.m2 > 0.0))
            r.fail("/particles/m2", "must be positive");
        if (r.has(pj, "packet1"))
            cfg.scenario.packet1 = cfg_detail::read_packet(r, pj["packet1"],
                                                           "/particles/packet1", un);
        else
            r.fail("/particles/packet1", "required object missing");
        if (r.has(pj, "packet2"))
            cfg.scenario.packet2 = cfg_detail::read_packet(r, pj["packet2"],
                                                           "/particles/packet2", un);
        else
            r.fail("/particles/packet2", "required object missing");
        if (cfg.scenario.packet1.dim != cfg.scenario.packet2.dim)
            r.fail("/particles", "packet1 and packet2 must share dim");
    }

    // collision
    if (!r.has(j, "collision")) {
        r.fail("/collision", "required object missing");
    } else {
        const auto& cj = j["collision"];
        r.check_keys(cj, "/collision", {"sqrt_s", "impact_parameter", "axis"});
        cfg.scenario.sqrt_s = un.energy(r.number(cj, "/collision", "sqrt_s"));
        const double thr = cfg.scenario.m1 + cfg.scenario.m2;
        if (r.has(cj, "sqrt_s") && violations.empty() && !(cfg.scenario.sqrt_s > thr))
            r.fail("/collision/sqrt_s", "must exceed m1+m2");
        const std::string axis = r.text(cj, "/collision", "axis", std::string("z"));
        if (axis != "z") r.fail("/collision/axis", "only the z collision axis is supported");
        cfg.scenario.impact_b = un.length(
            r.vec(cj, "/collision", "impact_parameter", cfg.scenario.packet1.dim, Vec2{}));
    }

    // amplitude
    if (!r.has(j, "amplitude"))
        r.fail("/amplitude", "required object missing");
    else
        cfg.scenario.amplitude = cfg_detail::read_amplitude(r, j["amplitude"], "/amplitude", un);

    // observables
    if (!r.has(j, "observables")) {
        r.fail("/observables", "required object missing");
    } else {
        const auto& oj = j["observables"];
        r.check_keys(oj, "/observables",
                     {"seed", "theta", "phi_bins", "binning_axis_phi", "oracle", "wigner",
                      "sigma_p_sweep", "atom_size"});
        if (!r.has(oj, "seed"))
            r.fail("/observables/seed", "seed is required, runs are never auto-seeded");
        else
            cfg.seed = static_cast<std::uint64_t>(r.integer(oj, "/observables", "seed"));

        if (!r.has(oj, "theta") || !oj["theta"].is_array() || oj["theta"].empty()) {
            r.fail("/observables/theta", "required non-empty array of angles");
        } else {
            for (const auto& t : oj["theta"]) {
                if (!t.is_number()) {
                    r.fail("/observables/theta", "must contain numbers only");
                    break;
                }
                const double th = t.get<double>();
                if (!(th > 0.0) || !(th <= 3.14159265358979324))
                    r.fail("/observables/theta", "angles must lie in (0, pi]");
                cfg.scenario.thetas.push_back(th);
            }
        }
        cfg.scenario.phi_bins = static_cast<int>(r.integer(oj, "/observables", "phi_bins", 16));
        if (cfg.scenario.phi_bins < 8) r.fail("/observables/phi_bins", "must be >= 8");
        cfg.scenario.binning_axis_phi = r.number(oj, "/observables", "binning_axis_phi", 0.0);

        if (r.has(oj, "oracle")) {
            const auto& rj = oj["oracle"];
            r.check_keys(rj, "/observables/oracle",
                         {"enabled", "method", "nodes", "samples", "target_rel_error"});
            if (r.has(rj, "enabled")) {
                if (!rj["enabled"].is_boolean())
                    r.fail("/observables/oracle/enabled", "must be a boolean");
                else
                    cfg.oracle_enabled = rj["enabled"].get<bool>();
            }
            const std::string method =
                r.text(rj, "/observables/oracle", "method", std::string("tensor_quadrature"));
            if (method == "tensor_quadrature")
                cfg.oracle.method = OracleMethod::TensorQuadrature;
            else if (method == "monte_carlo")
                cfg.oracle.method = OracleMethod::MonteCarlo;
            else
                r.fail("/observables/oracle/method",
                       "must be tensor_quadrature or monte_carlo");
            cfg.oracle.nodes =
                static_cast<int>(r.integer(rj, "/observables/oracle", "nodes", 48));
            cfg.oracle.samples = r.integer(rj, "/observables/oracle", "samples", 200000);
            cfg.oracle.target_rel_error =
                r.number(rj, "/observables/oracle", "target_rel_error", 1e-3);
            if (cfg.oracle.method == OracleMethod::TensorQuadrature && cfg.oracle.nodes < 32)
                r.fail("/observables/oracle/nodes", "quadrature needs >= 32 nodes per axis");
            if (cfg.oracle.method == OracleMethod::MonteCarlo && cfg.oracle.samples < 10000)
                r.fail("/observables/oracle/samples", "monte_carlo needs >= 1e4 samples");
        }
        cfg.oracle.seed = cfg.seed;

        if (r.has(oj, "wigner")) {
            if (!oj["wigner"].is_array()) {
                r.fail("/observables/wigner", "must be an array");
            } else {
                int idx = 0;
                for (const auto& wj : oj["wigner"]) {
                    const std::string wpath = "/observables/wigner/" + std::to_string(idx++);
                    r.check_keys(wj, wpath, {"packet", "file", "grid"});
                    WignerExportSpec ex;
                    ex.packet = static_cast<int>(r.integer(wj, wpath, "packet", 1));
                    if (ex.packet != 1 && ex.packet != 2) r.fail(wpath + "/packet", "must be 1 or 2");
                    ex.file = r.text(wj, wpath, "file");
                    if (ex.file.find('/') != std::string::npos)
                        r.fail(wpath + "/file", "must be a bare file name");
                    if (!r.has(wj, "grid") || !wj["grid"].is_object()) {
                        r.fail(wpath + "/grid", "required object missing");
                    } else {
                        const auto& gj = wj["grid"];
                        const std::string gpath = wpath + "/grid";
                        r.check_keys(gj, gpath,
                                     {"r_min", "r_max", "n_r", "p_min", "p_max", "n_p"});
                        const int dim = cfg.scenario.packet1.dim;
                        const double rmin = un.length(r.number(gj, gpath, "r_min"));
                        const double rmax = un.length(r.number(gj, gpath, "r_max"));
                        const double pmin = un.energy(r.number(gj, gpath, "p_min"));
                        const double pmax = un.energy(r.number(gj, gpath, "p_max"));
                        const int nr = static_cast<int>(r.integer(gj, gpath, "n_r"));
                        const int np = static_cast<int>(r.integer(gj, gpath, "n_p"));
                        try {
                            ex.grid = dim == 1
                                          ? PhaseSpaceGrid::make_1d(rmin, rmax, nr, pmin, pmax, np)
                                          : PhaseSpaceGrid::make_2d(rmin, rmax, nr, pmin, pmax, np);
                        } catch (const Error& e) {
                            r.fail(gpath, e.what());
                        }
                    }
                    cfg.wigner_exports.push_back(std::move(ex));
                }
            }
        }

        if (r.has(oj, "sigma_p_sweep")) {
            if (!oj["sigma_p_sweep"].is_array() || oj["sigma_p_sweep"].size() < 4) {
                r.fail("/observables/sigma_p_sweep", "must be an array of >= 4 widths");
            } else {
                for (const auto& s : oj["sigma_p_sweep"]) {
                    if (!s.is_number()) {
                        r.fail("/observables/sigma_p_sweep", "must contain numbers only");
                        break;
                    }
                    const double v = un.energy(s.get<double>());
                    if (!(v > 0.0)) r.fail("/observables/sigma_p_sweep", "widths must be positive");
                    cfg.sigma_p_sweep.push_back(v);
                }
            }
        }

        if (r.has(oj, "atom_size")) {
            const double a = un.length(r.number(oj, "/observables", "atom_size"));
            if (!(a > 0.0))
                r.fail("/observables/atom_size", "must be positive");
            else
                cfg.atom_size = a;
        }
    }

    // packet-level semantic checks that need no construction
    auto check_packet = [&](const PacketSpec& p, const std::string& path) {
        if (violations.empty()) {
            try {
                WavePacket probe(p);
            } catch (const Error& e) {
                r.fail(path, e.what());
            }
        }
    };
    check_packet(cfg.scenario.packet1, "/particles/packet1");
    check_packet(cfg.scenario.packet2, "/particles/packet2");

    if (cfg.atom_size && violations.empty() && cfg.scenario.packet1.kind != PacketKind::Cat)
        r.fail("/observables/atom_size", "atom-scale asymmetry needs a cat packet1");

    if (violations.empty() && out) *out = std::move(cfg);
    return violations;
}

inline ScenarioConfig load_config(const json& j) {
    ScenarioConfig cfg;
    auto violations = parse_config(j, &cfg);
    if (!violations.empty()) {
        std::string msg = "invalid config:";
        for (const auto& v : violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }
    return cfg;
}

} // namespace pscat
