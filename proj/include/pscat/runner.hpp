#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pscat/config.hpp"
#include "pscat/correction.hpp"
#include "pscat/csv.hpp"
#include "pscat/kinematics.hpp"
#include "pscat/oracle.hpp"
#include "pscat/version.hpp"
#include "pscat/wigner.hpp"

namespace pscat {

struct RunOptions {
    int threads = 1;
    std::ostream* log = &std::cerr;
};

namespace run_detail {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace run_detail

// Schema check without computation; returns every violation.
inline std::vector<std::string> validate(const std::filesystem::path& config_path) {
    std::string bytes;
    try {
        bytes = run_detail::read_file(config_path);
    } catch (const Error& e) {
        return {e.what()};
    }
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded()) return {"config is not valid JSON"};
    return parse_config(j, nullptr);
}

// Full pipeline: build the scenario, run the observables, emit report.json
// and the CSV tables. Exit codes: 0 ok, 1 config error (nothing written),
// 2 numerical failure (diagnostic lands in report.json).
inline int run(const std::filesystem::path& config_path,
               const std::filesystem::path& out_dir, const RunOptions& opts = {}) {
    const auto t_start = std::chrono::steady_clock::now();

    std::string bytes;
    json j;
    ScenarioConfig cfg;
    try {
        bytes = run_detail::read_file(config_path);
        j = json::parse(bytes, nullptr, false);
        if (j.is_discarded()) throw ConfigError("config is not valid JSON");
        cfg = load_config(j);
    } catch (const Error& e) {
        if (opts.log) *opts.log << e.what() << "\n";
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        if (opts.log) *opts.log << "cannot create output directory: " << out_dir << "\n";
        return 1;
    }

    json report;
    report["tool_version"] = version;
    report["config_hash"] = run_detail::hex64(fnv1a64(bytes));
    report["config"] = cfg.echo;
    report["seed"] = cfg.seed;

    try {
        auto scenario = ScatteringScenario::build(cfg.scenario);
        cfg.oracle.threads = opts.threads;

        // paraxiality of the probe packet against the collision kinematics
        const double sigma_p = scenario.in1->characteristic_sigma_p();
        const auto par = paraxiality(scenario.m1, sigma_p, scenario.kinematics->p_cm(),
                                     cfg.atom_size);
        report["paraxiality"] = {{"lambda_dB", par.lambda_dB},
                                 {"lambda_c", par.lambda_c},
                                 {"ratio_dB", par.ratio_dB},
                                 {"ratio_c", par.ratio_c},
                                 {"mean_p_zero", par.mean_p_zero}};
        if (par.atom_ratio) report["paraxiality"]["atom_ratio"] = *par.atom_ratio;

        long long oracle_evals = 0;

        // asymmetry table over (theta, phi bins)
        std::string asym_csv = "theta,phi_bin_center,pw_dsigma_dt,first_order_ratio,"
                               "oracle_ratio,oracle_err\n";
        json asym_report = json::array();
        for (double theta : scenario.thetas) {
            const auto asym = azimuthal_asymmetry(scenario, theta);
            json ar = {{"theta", theta},
                       {"A", asym.asymmetry},
                       {"degenerate_dipole", asym.degenerate_dipole},
                       {"saturated", asym.saturated}};
            asym_report.push_back(ar);
            for (const auto& bin : asym.bins) {
                std::string orat = "nan", oerr = "nan";
                if (cfg.oracle_enabled) {
                    const auto res =
                        averaged_bilinear(scenario, theta, bin.phi_center, cfg.oracle);
                    orat = format_double(res.ratio);
                    oerr = format_double(res.error / res.baseline);
                    oracle_evals += res.evaluations;
                }
                asym_csv += format_double(theta) + "," + format_double(bin.phi_center) + "," +
                            format_double(bin.pw_dsigma_dt) + "," +
                            format_double(bin.first_order) + "," + orat + "," + oerr + "\n";
            }
        }
        report["asymmetry"] = asym_report;
        atomic_write(out_dir / "asymmetry.csv", asym_csv);

        // Wigner grid exports
        json wig_report = json::array();
        for (const auto& ex : cfg.wigner_exports) {
            const WavePacket& packet = ex.packet == 1 ? *scenario.in1 : *scenario.in2;
            WignerTransformOptions wopt;
            wopt.threads = opts.threads;
            const auto grid = wigner_transform(packet, ex.grid, wopt);
            atomic_write(out_dir / ex.file, wigner_csv(grid));
            wig_report.push_back({{"file", ex.file},
                                  {"packet", ex.packet},
                                  {"negativity", negativity_volume(grid)},
                                  {"normalization", grid.normalization()},
                                  {"imag_residual", grid.imag_residual}});
        }
        if (!wig_report.empty()) report["wigner"] = wig_report;

        // width sweep
        if (!cfg.sigma_p_sweep.empty()) {
            const double theta = scenario.thetas.front();
            const double phi = scenario.binning_axis_phi +
                               std::numbers::pi / scenario.phi_bins; // first bin center
            const auto probe = scaling_probe(scenario, cfg.sigma_p_sweep, theta, phi, cfg.oracle);
            std::string csv = "sigma_p_over_m,oracle_ratio,oracle_err,first_order_ratio\n";
            for (const auto& row : probe.table)
                csv += format_double(row.sigma_over_m) + "," + format_double(row.oracle_ratio) +
                       "," + format_double(row.oracle_error) + "," +
                       format_double(row.first_order) + "\n";
            atomic_write(out_dir / "scaling.csv", csv);
            report["scaling"] = {{"slope", probe.slope},
                                 {"quad_coeff", probe.quad_coeff},
                                 {"quad_over_linear_at_max", probe.quad_over_linear_at_max},
                                 {"theta", theta},
                                 {"phi", phi}};
        }

        // atom-scale asymmetry
        if (cfg.atom_size) {
            const auto atom = atom_scale_asymmetry(scenario, *cfg.atom_size);
            report["atom_scale"] = {{"a_over_sigma_x", atom.a_over_sigma_x},
                                    {"theta_star", atom.theta_star},
                                    {"A", atom.asymmetry.asymmetry},
                                    {"saturated", atom.asymmetry.saturated}};
        }

        report["counts"] = {{"oracle_evaluations", oracle_evals},
                            {"threads", opts.threads}};
        const auto t_end = std::chrono::steady_clock::now();
        report["timing_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count();
        atomic_write(out_dir / "report.json", report.dump(2) + "\n");
        return 0;
    } catch (const NumericalError& e) {
        report["error"] = e.what();
        const auto t_end = std::chrono::steady_clock::now();
        report["timing_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count();
        atomic_write(out_dir / "report.json", report.dump(2) + "\n");
        if (opts.log) *opts.log << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        if (opts.log) *opts.log << e.what() << "\n";
        return 1;
    }
}

} // namespace pscat
