// SPDX-License-Identifier: Apache-2.0
#include "fadechan/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "fadechan/error.hpp"
#include "fadechan/numerics/parallel.hpp"
#include "fadechan/numerics/quadrature.hpp"
#include "fadechan/numerics/special.hpp"

namespace fadechan {
namespace {

using Clock = std::chrono::steady_clock;

Json estimate_pair(const std::array<Estimate, 2>& e, bool error) {
    return Json::array({error ? e[0].error : e[0].value, error ? e[1].error : e[1].value});
}

Json estimate_matrix(const std::array<std::array<Estimate, 2>, 2>& e, bool error) {
    return Json::array({estimate_pair(e[0], error), estimate_pair(e[1], error)});
}

template <class T>
Json matrix(const std::array<std::array<T, 2>, 2>& m) {
    return Json::array({Json::array({m[0][0], m[0][1]}), Json::array({m[1][0], m[1][1]})});
}

Json header(const Scenario& sc, std::string_view command) {
    Json j;
    j["command"] = std::string(command);
    j["scenario"] = sc.resolved;
    j["scenario_hash"] = sc.hash();
    j["seed"] = sc.sampling.seed;
    j["warnings"] = sc.warnings;
    j["status"] = "ok";
    return j;
}

void write_run_info(const std::filesystem::path& dir, const Scenario& sc, std::string_view command,
                    Clock::time_point start) {
    Json info;
    info["command"] = std::string(command);
    info["scenario_hash"] = sc.hash();
    info["seed"] = sc.sampling.seed;
    info["workers"] = worker_count();
    info["runtime_seconds"] = std::chrono::duration<double>(Clock::now() - start).count();
    write_atomic(dir / "run_info.json", canonical_json(info));
}

void warn(const Scenario& sc) {
    for (const auto& w : sc.warnings) std::cerr << "warning: " << w << "\n";
}

// Runs body(summary); diagnostic and budget failures become a failed
// summary and the matching exit code.
template <class Body>
int guarded(const Scenario& sc, std::string_view command, const std::filesystem::path& dir, Body&& body) {
    const auto start = Clock::now();
    std::filesystem::create_directories(dir);
    warn(sc);
    Json summary = header(sc, command);
    int code = kExitOk;
    try {
        body(summary);
    } catch (const DiagnosticError& e) {
        summary["status"] = "diagnostic_failure";
        summary["message"] = e.what();
        std::cerr << "error: " << e.what() << "\n";
        code = kExitDiagnostic;
    } catch (const BudgetExceeded& e) {
        summary["status"] = "integration_budget_exceeded";
        summary["message"] = e.what();
        summary["best_estimate"] = e.best_estimate();
        summary["error_estimate"] = e.error_estimate();
        std::cerr << "error: " << e.what() << "\n";
        code = kExitBudget;
    }
    write_atomic(dir / "summary.json", canonical_json(summary));
    write_run_info(dir, sc, command, start);
    return code;
}

PdtInputs model_inputs(const Scenario& sc, const FieldStatistics& stats) {
    PdtInputs in;
    in.model = sc.model;
    in.stats = stats;
    in.params = sc.channel;
    in.geom = sc.aperture;
    in.corrections = sc.corrections();
    in.plan = sc.pdt_plan();
    in.angle = sc.orientation;
    return in;
}

// Distribution with provenance and the first-principles reference moments.
Json pdt_json(const Scenario& sc, const PdtInputs& in, TransmittanceDistribution& dist) {
    dist.provenance.scenario_hash = sc.hash();
    Json j = distribution_json(dist);
    const auto& s = in.stats;
    const double det = in.corrections.eta_det;
    j["reference_mean"] = (s.mean_eta[0].value - s.mean_eta[1].value) * det;
    j["reference_variance"] = s.annular_variance.value * det * det;
    j["reference_variance_error"] = s.annular_variance.error * det * det;
    j["d0"] = in.geom.d0;
    j["tracking_ratio"] = in.corrections.tracking_ratio;
    j["eta_det"] = det;
    if (in.model == PdtModel::weak_bw) j["weak_bw"] = weak_bw_json(weak_bw_params(s, in.geom, in.corrections));
    return j;
}

// ---- validation -----------------------------------------------------------

double series_i0(double x) {
    long double term = 1.0L, sum = 1.0L;
    const long double q = 0.25L * x * x;
    for (int k = 1; k < 500 && term > 1e-22L * sum; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
    }
    return static_cast<double>(sum);
}

double series_i1(double x) {
    long double term = 0.5L * x, sum = term;
    const long double q = 0.25L * x * x;
    for (int k = 1; k < 500 && term > 1e-22L * sum; ++k) {
        term *= q / (static_cast<long double>(k) * (k + 1));
        sum += term;
    }
    return static_cast<double>(sum);
}

// Power of a circular Gaussian spot in the centred disk of radius a:
// adaptive radial quadrature of a periodic trapezoid in angle.
double disk_power_quadrature(double r0, double W, double a) {
    constexpr int kAngles = 512;
    const double norm = 2.0 / (std::numbers::pi * W * W);
    const auto ring = [&](double r) {
        double s = 0.0;
        for (int j = 0; j < kAngles; ++j) {
            const double th = 2.0 * std::numbers::pi * j / kAngles;
            const double dx = r * std::cos(th) - r0, dy = r * std::sin(th);
            s += std::exp(-2.0 * (dx * dx + dy * dy) / (W * W));
        }
        return norm * r * s * 2.0 * std::numbers::pi / kAngles;
    };
    return adaptive_quad_1d(ring, 0.0, a, 1e-13).value;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

}  // namespace

Json statistics_json(const ChannelParams& params, const FieldStatistics& s) {
    Json j;
    j["sigma_R2"] = params.rytov2();
    j["k"] = params.k();
    j["omega"] = params.omega();
    j["vacuum_radius"] = std::sqrt(params.vacuum_radius2());
    j["W_ST"] = s.W_ST.value;
    j["W_ST_error"] = s.W_ST.error;
    j["sigma_bw2"] = s.sigma_bw2.value;
    j["sigma_bw2_error"] = s.sigma_bw2.error;
    j["mean_eta"] = estimate_pair(s.mean_eta, false);
    j["mean_eta_error"] = estimate_pair(s.mean_eta, true);
    j["eta_corr"] = estimate_matrix(s.eta_corr, false);
    j["eta_corr_error"] = estimate_matrix(s.eta_corr, true);
    j["annular_mean"] = s.mean_eta[0].value - s.mean_eta[1].value;
    j["annular_variance"] = s.annular_variance.value;
    j["annular_variance_error"] = s.annular_variance.error;
    j["centroid_mean"] = estimate_pair(s.centroid_mean, false);
    j["W2_corr"] = estimate_matrix(s.W2_corr, false);
    j["W2_corr_error"] = estimate_matrix(s.W2_corr, true);
    j["theta_mean"] = s.theta_mean.value;
    j["theta_mean_error"] = s.theta_mean.error;
    j["theta_var"] = s.theta_var.value;
    j["theta_var_error"] = s.theta_var.error;
    j["theta_cov"] = s.theta_cov.value;
    j["theta_cov_error"] = s.theta_cov.error;
    j["sampled_mean_eta"] = estimate_pair(s.sampled_mean_eta, false);
    j["sampled_power"] = s.sampled_power.value;
    j["long_term_radius"] = s.long_term_radius;
    j["window_radius"] = s.window_radius;
    j["realizations"] = s.realizations;
    j["flags"] = s.flags;
    return j;
}

Json distribution_json(const TransmittanceDistribution& d) {
    Json j;
    j["model"] = std::string(model_name(d.model_tag));
    j["n_samples"] = d.n_samples;
    j["bins"] = d.bins();
    j["mean"] = d.mean;
    j["mean_error"] = d.mean_error;
    j["second_moment"] = d.second_moment;
    j["variance"] = d.variance;
    j["variance_error"] = d.variance_error;
    j["normalization"] = d.total_mass();
    j["support"] = Json::array({d.bin_edges.front(), d.bin_edges.back()});
    j["provenance"] = {{"scenario_hash", d.provenance.scenario_hash}, {"seed", d.provenance.seed}};
    const auto& g = d.diagnostics;
    j["diagnostics"] = {{"attempted", g.attempted},
                        {"rejected_truncation", g.rejected_truncation},
                        {"rejected_ordering", g.rejected_ordering},
                        {"rejection_rate", g.rejection_rate()},
                        {"clamped", g.clamps.clamped},
                        {"clamp_rate", g.clamps.rate()},
                        {"flags", g.flags}};
    return j;
}

Json weak_bw_json(const WeakBWParams& w) {
    Json j;
    j["eta0"] = w.eta0;
    j["zeta0"] = matrix(w.zeta0);
    j["mu_offset"] = w.mu_offset;
    j["cov_lognormal"] = matrix(w.cov_lognormal);
    j["R"] = w.R;
    j["lambda"] = w.lambda;
    j["delta"] = w.delta;
    j["truncation_mass"] = w.truncation_mass;
    j["flags"] = w.flags;
    return j;
}

int command_stats(const Scenario& sc, const std::filesystem::path& dir) {
    return guarded(sc, "stats", dir, [&](Json& summary) {
        const auto stats = compute_field_statistics(sc.channel, sc.aperture, sc.statistics_plan());
        summary["statistics"] = statistics_json(sc.channel, stats);
    });
}

int command_pdt(const Scenario& sc, const std::filesystem::path& dir) {
    return guarded(sc, "pdt", dir, [&](Json& summary) {
        const auto stats = compute_field_statistics(sc.channel, sc.aperture, sc.statistics_plan());
        summary["statistics"] = statistics_json(sc.channel, stats);
        const auto in = model_inputs(sc, stats);
        auto dist = run_model(in);
        summary["distribution"] = pdt_json(sc, in, dist);
        summary["csv"] = "pdt.csv";
        write_atomic(dir / "pdt.csv", distribution_csv(dist));
    });
}

int command_sweep(const Scenario& sc, const std::filesystem::path& dir) {
    if (!sc.sweep) throw InputError("sweep", "the sweep command needs a sweep section");
    const SweepSettings& sw = *sc.sweep;
    return guarded(sc, "sweep", dir, [&](Json& summary) {
        const std::string var(sweep_variable_name(sw.variable));
        std::optional<FieldStatistics> shared;
        if (sw.variable != SweepVariable::L) {
            shared = compute_field_statistics(sc.channel, sc.aperture, sc.statistics_plan());
            summary["statistics"] = statistics_json(sc.channel, *shared);
        }
        Json points = Json::array();
        std::string table = var + ",mean,mean_error,second_moment,variance\n";
        std::size_t best = 0;
        double best_mean = -1.0;
        for (std::size_t i = 0; i < sw.grid.size(); ++i) {
            const double value = sw.grid[i];
            Scenario point = sc;
            std::vector<std::string> warnings;
            switch (sw.variable) {
                case SweepVariable::d0: point.aperture.d0 = value; break;
                case SweepVariable::tracking_ratio: point.tracking_ratio = value; break;
                case SweepVariable::L: {
                    Json doc = sc.resolved;
                    doc.erase("sweep");
                    doc["corrections"].erase("eta_det");
                    doc["channel"]["L"] = value;
                    if (doc["orientation"].is_string()) doc.erase("orientation");
                    point = scenario_from_json(doc);
                    warnings = point.warnings;
                    for (const auto& w : warnings) std::cerr << "warning: " << var << "=" << value << ": " << w << "\n";
                    break;
                }
            }
            const FieldStatistics stats = shared ? *shared
                                                 : compute_field_statistics(point.channel, point.aperture,
                                                                            point.statistics_plan());
            const auto in = model_inputs(point, stats);
            auto dist = run_model(in);
            char name[64];
            std::snprintf(name, sizeof name, "pdt_%s_%03zu.csv", var.c_str(), i);
            write_atomic(dir / name, distribution_csv(dist));
            Json p;
            p["value"] = value;
            p["csv"] = name;
            p["distribution"] = pdt_json(sc, in, dist);
            if (!shared) p["statistics"] = statistics_json(point.channel, stats);
            p["warnings"] = warnings;
            points.push_back(std::move(p));
            table += format_number(value) + "," + format_number(dist.mean) + "," + format_number(dist.mean_error) +
                     "," + format_number(dist.second_moment) + "," + format_number(dist.variance) + "\n";
            if (dist.mean > best_mean) {
                best_mean = dist.mean;
                best = i;
            }
        }
        summary["variable"] = var;
        summary["points"] = std::move(points);
        summary["argmax_value"] = sw.grid[best];
        summary["max_mean"] = best_mean;
        summary["table"] = "sweep.csv";
        write_atomic(dir / "sweep.csv", table);
    });
}

const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> t{
        {"rytov_table_rel", 0.01},
        {"marcum_zero_order_abs", 1e-10},
        {"lambert_inverse_rel", 1e-10},
        {"bessel_series_rel", 1e-12},
        {"annular_exact_vs_quadrature_abs", 1e-8},
        {"annular_approx_vs_exact_abs", 0.02},
        {"elliptic_equal_axes_spot_rel", 1e-10},
        {"elliptic_equal_axes_peak_abs", 1e-10},
        {"vacuum_sigma_bw2_abs", 1e-12},
        {"vacuum_W_ST_rel", 0.005},
        {"vacuum_mean_eta_rel", 0.005},
        {"pdt_normalization_abs", 1e-9},
    };
    return t;
}

std::vector<ValidationCheck> validation_checks(const Scenario& sc, const std::map<std::string, double>& overrides) {
    auto bounds = default_tolerances();
    for (const auto& [name, bound] : overrides) {
        if (!bounds.count(name)) throw InputError("tolerances." + name, "unknown check");
        bounds[name] = bound;
    }
    std::vector<ValidationCheck> checks;
    const auto add = [&](const std::string& name, double value) {
        const double bound = bounds.at(name);
        checks.push_back({name, value, bound, std::isfinite(value) && value <= bound});
    };
    const auto& g = sc.aperture;

    {
        const double table[] = {0.43, 1.53, 3.22, 5.47, 8.23};
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            ChannelParams p;
            p.L = 1000.0 * (i + 1);
            worst = std::max(worst, std::abs(p.rytov2() / table[i] - 1.0));
        }
        add("rytov_table_rel", worst);
    }
    {
        double worst = 0.0;
        for (double b : linspace(0.0, 5.0, 101)) worst = std::max(worst, std::abs(marcum_q(0.0, b) - std::exp(-0.5 * b * b)));
        add("marcum_zero_order_abs", worst);
    }
    {
        double worst = 0.0;
        for (double x : linspace(0.0, 50.0, 101)) {
            const double w = lambert_w0(x * std::exp(x));
            worst = std::max(worst, x > 0.0 ? std::abs(w / x - 1.0) : std::abs(w));
        }
        add("lambert_inverse_rel", worst);
    }
    {
        double worst = 0.0;
        for (double x : linspace(0.0, 30.0, 61)) {
            worst = std::max(worst, std::abs(bessel_i0(x) / series_i0(x) - 1.0));
            if (x > 0.0) worst = std::max(worst, std::abs(bessel_i1(x) / series_i1(x) - 1.0));
        }
        add("bessel_series_rel", worst);
    }
    {
        // Spot radii from a2 to 2 a1, offsets up to three radii.
        double quad_worst = 0.0, approx_worst = 0.0;
        const auto widths = linspace(g.a2 > 0.0 ? g.a2 : 0.25 * g.a1, 2.0 * g.a1, 20);
        for (std::size_t i = 0; i < widths.size(); ++i) {
            const double W = widths[i];
            const auto offsets = linspace(0.0, 3.0 * W, 10);
            for (std::size_t j = 0; j < offsets.size(); ++j) {
                const double r0 = offsets[j];
                const double ex = annular_transmittance_exact(r0, W, g);
                approx_worst = std::max(approx_worst, std::abs(annular_transmittance_approx(r0, W, g) - ex));
                if (i % 5 == 0 && j % 3 == 0) {
                    const double inner = g.a2 > 0.0 ? disk_power_quadrature(r0, W, g.a2) : 0.0;
                    const double q = disk_power_quadrature(r0, W, g.a1) - inner;
                    quad_worst = std::max(quad_worst, std::abs(q - ex));
                }
            }
        }
        add("annular_exact_vs_quadrature_abs", quad_worst);
        add("annular_approx_vs_exact_abs", approx_worst);
    }
    {
        double spot = 0.0, peak = 0.0;
        for (double W : {0.5 * g.a1, g.a1, 2.0 * g.a1}) {
            for (double chi : linspace(0.0, std::numbers::pi, 13))
                spot = std::max(spot, std::abs(effective_spot(chi, g.a1, W, W) / W - 1.0));
            peak = std::max(peak, std::abs(elliptic_max_transmittance(g.a1, W, W) + std::expm1(-2.0 * g.a1 * g.a1 / (W * W))));
        }
        add("elliptic_equal_axes_spot_rel", spot);
        add("elliptic_equal_axes_peak_abs", peak);
    }
    {
        ChannelParams vacuum = sc.channel;
        vacuum.Cn2 = 0.0;
        StatisticsPlan plan = sc.statistics_plan();
        const auto s = compute_field_statistics(vacuum, g, plan);
        const double W2 = vacuum.vacuum_radius2();
        add("vacuum_sigma_bw2_abs", std::abs(s.sigma_bw2.value));
        add("vacuum_W_ST_rel", std::abs(s.W_ST.value / std::sqrt(W2) - 1.0));
        double worst = 0.0;
        for (int n : {1, 2}) {
            const double a = g.radius(n);
            if (a <= 0.0) continue;
            const double closed = -std::expm1(-2.0 * a * a / W2);
            worst = std::max(worst, std::abs(s.mean_eta[static_cast<std::size_t>(n - 1)].value / closed - 1.0));
        }
        add("vacuum_mean_eta_rel", worst);

        SamplingPlan small = sc.pdt_plan();
        small.n_samples = 100000;
        const auto d = pdt_beam_wandering(std::sqrt(W2), 0.3 * std::sqrt(W2), g, sc.corrections(), small);
        bool supported = d.bin_edges.front() >= 0.0 && d.bin_edges.back() <= 1.0;
        for (double v : d.density) supported = supported && v >= 0.0;
        add("pdt_normalization_abs", supported ? std::abs(d.total_mass() - 1.0) : INFINITY);
    }
    return checks;
}

int command_validate(const Scenario& sc, const std::filesystem::path& dir,
                     const std::map<std::string, double>& overrides) {
    const auto start = Clock::now();
    std::filesystem::create_directories(dir);
    auto tolerances = sc.tolerances;
    for (const auto& [k, v] : overrides) tolerances[k] = v;
    const auto checks = validation_checks(sc, tolerances);
    Json report = header(sc, "validate");
    Json list = Json::array();
    bool all = true;
    for (const auto& c : checks) {
        list.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_number(c.value)
                  << " bound=" << format_number(c.bound) << "\n";
        all = all && c.pass;
    }
    report["checks"] = std::move(list);
    report["passed"] = all;
    if (!all) report["status"] = "checks_failed";
    write_atomic(dir / "validate.json", canonical_json(report));
    write_run_info(dir, sc, "validate", start);
    return all ? kExitOk : kExitDiagnostic;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Transmittance distributions of turbulent free-space channels"};
    std::string command, scenario_path, out_dir = ".", tolerance_file;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    app.add_option("command", command, "stats | pdt | sweep | validate")
        ->required()
        ->check(CLI::IsMember({"stats", "pdt", "sweep", "validate"}));
    app.add_option("scenario", scenario_path, "scenario JSON file")->required();
    app.add_option("--set", sets, "override a scenario field, dotted.path=value")->take_all();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "sampling seed");
    app.add_option("--tolerances", tolerance_file, "JSON object of validate bounds");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    std::map<std::string, double> overrides;
    try {
        if (seed) sets.push_back("sampling.seed=" + std::to_string(*seed));
        if (!tolerance_file.empty()) {
            std::ifstream in(tolerance_file);
            if (!in) throw InputError("--tolerances", "cannot open " + tolerance_file);
            const Json doc = Json::parse(in, nullptr, false);
            if (doc.is_discarded() || !doc.is_object()) throw InputError("--tolerances", "expected a JSON object");
            for (auto it = doc.begin(); it != doc.end(); ++it) {
                if (!it->is_number()) throw InputError("tolerances." + it.key(), "expected a number");
                overrides[it.key()] = it->get<double>();
            }
        }
        const Scenario sc = load_scenario(scenario_path, sets);
        if (command == "stats") return command_stats(sc, out_dir);
        if (command == "pdt") return command_pdt(sc, out_dir);
        if (command == "sweep") return command_sweep(sc, out_dir);
        return command_validate(sc, out_dir, overrides);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        if (command == "validate") {
            Json report;
            report["command"] = "validate";
            report["passed"] = false;
            report["status"] = "input_error";
            report["checks"] = Json::array({{{"name", "scenario_valid"}, {"pass", false}, {"message", e.what()}}});
            try {
                std::filesystem::create_directories(out_dir);
                write_atomic(std::filesystem::path(out_dir) / "validate.json", canonical_json(report));
            } catch (const std::exception&) {
            }
        }
        return kExitInput;
    } catch (const DomainError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const DiagnosticError& e) {
        std::cerr << "diagnostic failure: " << e.what() << "\n";
        return kExitDiagnostic;
    } catch (const BudgetExceeded& e) {
        std::cerr << "integration budget exceeded: " << e.what() << "\n";
        return kExitBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace fadechan
