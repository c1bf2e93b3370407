#pragma once

// run / sweep / classify / check-inequality.
//
// Exit codes: 0 success (verdict pass, or no bound to check), 1 usage or I/O
// error, 2 verdict failure, 3 blow-up signal inside a bounded regime.

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chemo/cli/config.hpp"
#include "chemo/cli/svg.hpp"
#include "chemo/diagnostics.hpp"
#include "chemo/interpolation_check.hpp"
#include "chemo/regimes.hpp"
#include "chemo/stepper.hpp"

namespace chemo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerdictFail = 2;
inline constexpr int kExitBlowupInRegime = 3;

/// Clipped u mass above this fraction of the initial mass is flagged.
inline constexpr double kClippedMassFlag = 1e-6;

struct CliOptions {
    std::optional<std::string> out_dir;
    unsigned workers = 1;
    bool quiet = false;
};

using json = nlohmann::json;

inline json to_json(const Params& p) {
    return {{"chi", p.chi}, {"a", p.a},       {"b", p.b},
            {"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma},
            {"mode", std::string(to_string(p.mode))}};
}

inline json to_json(const RegimeReport& r, int n, double omega) {
    json j{{"case", std::string(to_string(r.regime.tag))},
           {"details", r.regime.details},
           {"tie", r.regime.tie},
           {"v_sup_bound", r.v_sup_bound},
           {"n", n},
           {"omega_measure", omega}};
    j["mass_bound_m0"] = r.mass_bound_m0 ? json(*r.mass_bound_m0) : json(nullptr);
    j["threshold_margin"] = r.threshold_margin ? json(*r.threshold_margin) : json(nullptr);
    return j;
}

inline json to_json(const Verdict& v) {
    json checks = json::array();
    for (const auto& c : v.checks) {
        checks.push_back({{"name", c.name},
                          {"bound", c.bound},
                          {"observed", c.observed},
                          {"pass", c.pass},
                          {"margin", c.margin}});
    }
    return {{"overall", v.overall ? "pass" : "fail"}, {"tol", v.tol}, {"checks", checks}};
}

/// Outcome of one simulated parameter point.
struct PointResult {
    Params params;
    RegimeReport report;
    Verdict verdict;
    double max_mass = 0.0;
    std::optional<BlowupSignal> blowup;
    int exit_code = kExitOk;
};

inline int exit_code_for(const RegimeReport& rep, const Verdict& v, bool blew_up) {
    const bool bounded = rep.regime.bounded();
    if (blew_up && bounded) return kExitBlowupInRegime;
    if (!bounded) return kExitOk;
    return v.overall ? kExitOk : kExitVerdictFail;
}

inline int classification_dim(const ExperimentConfig& cfg) {
    return cfg.run && cfg.run->n ? *cfg.run->n : cfg.grid->dim();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// classify -> run -> verdict for one parameter set; writes series.csv,
/// summary.json and (optionally) norms.svg into `dir`.
inline PointResult run_point(const ExperimentConfig& cfg, const Params& params,
                             std::optional<double> cp_user, const std::filesystem::path& dir) {
    const Grid& grid = *cfg.grid;
    const RunSection& run_cfg = *cfg.run;
    const int n = classification_dim(cfg);
    const Field u0 = make_field(grid, *cfg.u0);
    const Field v0 = make_field(grid, *cfg.v0);

    PointResult res;
    res.params = params;
    res.report = make_report(params, n, grid.measure(), u0, v0, cp_user);

    const std::vector<double> ks = run_cfg.ks.empty() ? default_norm_exponents(n) : run_cfg.ks;
    std::vector<DiagnosticRecord> records;
    const Observer observer = [&](const State& s, const StepInfo& info) {
        records.push_back(record(s, ks, info.dt, info.clipped_mass_total));
    };
    const RunReport rep = run(State{u0, v0, 0.0}, params, cfg.stepper,
                              RunOptions{run_cfg.horizon, run_cfg.record_every}, observer);

    res.verdict = verdict(records, res.report, run_cfg.tol);
    for (const auto& r : records) res.max_mass = std::max(res.max_mass, r.mass);
    res.blowup = rep.blowup;
    res.exit_code = exit_code_for(res.report, res.verdict, rep.blowup.has_value());

    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    write_csv(csv, records, ks);
    write_text(dir / "series.csv", csv.str());

    const State& fin = rep.final_state;
    const double initial_mass = total(u0);
    json summary;
    summary["params"] = to_json(params);
    summary["grid"] = {{"dim", grid.dim()},
                       {"extents", grid.dim() == 1 ? json::array({grid.extent(0)})
                                                   : json::array({grid.extent(0), grid.extent(1)})},
                       {"cells", grid.dim() == 1 ? json::array({grid.cells(0)})
                                                 : json::array({grid.cells(0), grid.cells(1)})}};
    summary["regime"] = to_json(res.report, n, grid.measure());
    summary["verdict"] = to_json(res.verdict);
    summary["terminal"] = {{"t", fin.t},
                           {"steps", rep.steps},
                           {"rejected_attempts", rep.rejected_attempts},
                           {"mass", total(fin.u)},
                           {"u_sup", fin.u.max()},
                           {"u_min", fin.u.min()},
                           {"v_sup", fin.v.max()},
                           {"v_min", fin.v.min()},
                           {"clipped_mass_total", rep.clipped_mass_total},
                           {"clipped_mass_v_total", rep.clipped_mass_v_total},
                           {"clipped_mass_flagged", rep.clipped_mass_total > kClippedMassFlag * initial_mass}};
    if (rep.blowup) {
        summary["blowup"] = {{"t_detected", rep.blowup->t_detected},
                             {"reason", std::string(to_string(rep.blowup->reason))},
                             {"u_sup", rep.blowup->u_sup},
                             {"interpretation", res.report.regime.bounded()
                                                    ? "detector fired inside a bounded regime"
                                                    : "observation only; boundedness is not asserted outside the theorem regimes"}};
    } else {
        summary["blowup"] = nullptr;
    }
    json notes = json::array();
    if (cfg.u0->kind == Profile::Kind::Gaussian || cfg.v0->kind == Profile::Kind::Gaussian) {
        notes.push_back("gaussian initial profile is only approximately Neumann-compatible");
    }
    if (cp_user) notes.push_back("C_P is user supplied; CASE_2C classification is conditional on it");
    summary["notes"] = notes;
    summary["exit_code"] = res.exit_code;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    if (cfg.output.plot) write_text(dir / "norms.svg", render_norms_svg(records, cfg.output.log_scale));
    return res;
}

inline std::filesystem::path output_dir(const ExperimentConfig& cfg, const CliOptions& opts) {
    return opts.out_dir ? std::filesystem::path(*opts.out_dir) : std::filesystem::path(cfg.output.directory);
}

inline void append_log(const std::filesystem::path& dir, const std::string& line) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir / "run.log", std::ios::app);
    os << timestamp() << ' ' << line << '\n';
}

inline bool report_missing(const ExperimentConfig& cfg, Command cmd, std::ostream& err) {
    const auto missing = missing_sections(cfg, cmd);
    for (const auto& m : missing) err << "error: " << m << '\n';
    return !missing.empty();
}

inline int cmd_run(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream& err) {
    if (report_missing(cfg, Command::Run, err)) return kExitUsage;
    const auto dir = output_dir(cfg, opts);
    try {
        append_log(dir, "run start");
        const PointResult res = run_point(cfg, *cfg.params, cfg.cp_user, dir);
        append_log(dir, "run end exit=" + std::to_string(res.exit_code));
        if (!opts.quiet) {
            out << "regime " << to_string(res.report.regime.tag) << ", verdict "
                << (res.verdict.overall ? "pass" : "fail");
            if (res.blowup) {
                out << ", blow-up signal " << to_string(res.blowup->reason) << " at t=" << res.blowup->t_detected;
            }
            out << " -> " << dir.string() << '\n';
        }
        return res.exit_code;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

/// key=value pairs joined by underscores, using the last path component as key.
inline std::string sweep_slug(const std::vector<std::pair<std::string, std::string>>& point) {
    std::string slug;
    for (const auto& [key, value] : point) {
        const auto dot = key.rfind('.');
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        std::string rendered = value;
        try {
            std::size_t used = 0;
            const double x = std::stod(value, &used);
            if (used == value.size()) rendered = format_number(x);
        } catch (const std::exception&) {
        }
        if (!slug.empty()) slug += '_';
        slug += name + "=" + rendered;
    }
    return slug;
}

struct SweepPoint {
    std::vector<std::pair<std::string, std::string>> assignment;
    Params params;
    std::optional<double> cp_user;
    std::string slug;
};

/// Expands the Cartesian product (first axis varies slowest). Returns the
/// errors instead when any point has invalid values.
inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg, std::vector<std::string>& errors) {
    std::vector<SweepPoint> points;
    std::size_t total_points = cfg.sweep.empty() ? 0 : 1;
    for (const auto& axis : cfg.sweep) total_points *= axis.values.size();
    for (std::size_t idx = 0; idx < total_points; ++idx) {
        SweepPoint pt{{}, *cfg.params, cfg.cp_user, {}};
        std::size_t rem = idx;
        std::vector<std::size_t> choice(cfg.sweep.size());
        for (std::size_t a = cfg.sweep.size(); a-- > 0;) {
            choice[a] = rem % cfg.sweep[a].values.size();
            rem /= cfg.sweep[a].values.size();
        }
        detail::Reader rd;
        for (std::size_t a = 0; a < cfg.sweep.size(); ++a) {
            const auto& axis = cfg.sweep[a];
            const std::string& value = axis.values[choice[a]];
            pt.assignment.emplace_back(axis.key, value);
            const YAML::Node node(value);
            const std::string path = "sweep." + axis.key;
            if (axis.key == "cp_user") {
                if (auto x = rd.number(node, path)) {
                    if (*x > 0.0) {
                        pt.cp_user = *x;
                    } else {
                        rd.error(path, "must be > 0");
                    }
                }
            } else {
                detail::apply_param(rd, pt.params, axis.key.substr(7), node, path);
            }
        }
        for (const auto& v : validate(pt.params)) {
            rd.error("sweep point " + sweep_slug(pt.assignment) + ": params." + v.field, "must be " + v.requirement);
        }
        errors.insert(errors.end(), rd.errors.begin(), rd.errors.end());
        pt.slug = sweep_slug(pt.assignment);
        points.push_back(std::move(pt));
    }
    return points;
}

inline int cmd_sweep(const ExperimentConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream& err) {
    if (report_missing(cfg, Command::Sweep, err)) return kExitUsage;
    std::vector<std::string> errors;
    const std::vector<SweepPoint> points = expand_sweep(cfg, errors);
    if (points.empty()) {
        err << "error: sweep: empty parameter product\n";
        return kExitUsage;
    }
    if (!errors.empty()) {
        for (const auto& e : errors) err << "error: " << e << '\n';
        return kExitUsage;
    }
    const auto dir = output_dir(cfg, opts);
    try {
        std::filesystem::create_directories(dir);
        append_log(dir, "sweep start points=" + std::to_string(points.size()));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::vector<std::optional<PointResult>> results(points.size());
    std::vector<std::exception_ptr> failures(points.size());
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            try {
                results[i] = run_point(cfg, points[i].params, points[i].cp_user, dir / points[i].slug);
                if (!opts.quiet) {
                    std::lock_guard lock(io);
                    out << "[" << i + 1 << "/" << points.size() << "] " << points[i].slug << ": "
                        << to_string(results[i]->report.regime.tag) << '\n';
                }
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(points.size())));
    {
        std::vector<std::thread> pool;
        for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
        if (failures[i]) {
            try {
                std::rethrow_exception(failures[i]);
            } catch (const std::exception& e) {
                err << "error: sweep point " << points[i].slug << ": " << e.what() << '\n';
            }
            return kExitUsage;
        }
    }

    std::ostringstream atlas;
    atlas << "slug";
    for (const auto& axis : cfg.sweep) atlas << ',' << axis.key;
    atlas << ",chi,a,b,alpha,beta,gamma,mode,regime,verdict,max_mass,blowup\n";
    int code = kExitOk;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const PointResult& r = *results[i];
        atlas << points[i].slug;
        for (const auto& [key, value] : points[i].assignment) atlas << ',' << value;
        const Params& p = r.params;
        atlas << ',' << format_number(p.chi) << ',' << format_number(p.a) << ',' << format_number(p.b) << ','
              << format_number(p.alpha) << ',' << format_number(p.beta) << ',' << format_number(p.gamma) << ','
              << to_string(p.mode) << ',' << to_string(r.report.regime.tag) << ','
              << (r.verdict.overall ? "pass" : "fail") << ',' << format_number(r.max_mass) << ','
              << (r.blowup ? "true" : "false") << '\n';
        code = std::max(code, r.exit_code);
    }
    try {
        write_text(dir / "atlas.csv", atlas.str());
        append_log(dir, "sweep end exit=" + std::to_string(code));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return code;
}

inline int cmd_classify(const ExperimentConfig& cfg, const CliOptions&, std::ostream& out, std::ostream& err) {
    if (report_missing(cfg, Command::Classify, err)) return kExitUsage;
    const Grid& grid = *cfg.grid;
    const int n = classification_dim(cfg);
    const RegimeReport rep =
        make_report(*cfg.params, n, grid.measure(), make_field(grid, *cfg.u0), make_field(grid, *cfg.v0), cfg.cp_user);
    json j = to_json(rep, n, grid.measure());
    j["params"] = to_json(*cfg.params);
    out << j.dump(2) << '\n';
    return kExitOk;
}

inline int cmd_check_inequality(const ExperimentConfig& cfg, const CliOptions&, std::ostream& out,
                                std::ostream& err) {
    if (report_missing(cfg, Command::CheckInequality, err)) return kExitUsage;
    const InequalitySection& q = *cfg.inequality;
    InequalityOptions opts;
    opts.samples = q.samples;
    opts.cells = q.cells;
    opts.seed = q.seed;
    const InequalityReport rep = check_interpolation(q.q, q.r, q.n, opts);
    const GNExponents& e = rep.exponents;
    if (!e.admissible) {
        err << "error: (q=" << q.q << ", r=" << q.r << ", n=" << q.n << ") inadmissible: " << e.failed_condition
            << " fails\n";
        return kExitUsage;
    }
    json fits = json::array();
    for (const auto& f : rep.fits) {
        fits.push_back({{"eps", f.eps},
                        {"c0_fitted", f.c0_fitted},
                        {"c0_median", f.c0_median},
                        {"c0_min", f.c0_min},
                        {"worst_sample", f.worst_sample},
                        {"violations", f.violations}});
    }
    json j{{"q", q.q},
           {"r", q.r},
           {"n", q.n},
           {"lambda", e.lambda},
           {"delta", e.delta},
           {"p", e.p ? json(*e.p) : json(nullptr)},
           {"exponent_convention", e.convention ? "1/p = 1/2 - 1/n extended to n < 3" : "none"},
           {"samples", opts.samples},
           {"c0_cap", opts.c0_cap},
           {"fits", fits}};
    out << j.dump(2) << '\n';
    return rep.violated() ? kExitVerdictFail : kExitOk;
}

}  // namespace chemo::cli
