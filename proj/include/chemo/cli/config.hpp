#pragma once

// Experiment configuration: a YAML document with the sections
//   grid, params, initial, stepper, run, sweep, output, inequality, cp_user.
// Unknown keys are errors; every violation is reported with its dotted path.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chemo/grid.hpp"
#include "chemo/model.hpp"
#include "chemo/stepper.hpp"

namespace chemo::cli {

struct Profile {
    enum class Kind { Constant, CosineBump, Gaussian };
    Kind kind = Kind::Constant;
    double c = 0.0;          // constant
    double amplitude = 0.0;  // cosine_bump, gaussian
    double mean = 0.0;       // cosine_bump
    std::vector<double> center;  // gaussian; defaults to the domain centre
    double width = 0.0;
    double floor = 0.0;
};

/// mean + amplitude * prod_d cos(pi x_d / L_d) is Neumann-compatible exactly;
/// the Gaussian only approximately.
inline Field make_field(const Grid& g, const Profile& p) {
    switch (p.kind) {
        case Profile::Kind::Constant:
            return Field(g, p.c);
        case Profile::Kind::CosineBump:
            return Field::sample(g, [&](double x, double y) {
                double s = std::cos(std::numbers::pi * x / g.extent(0));
                if (g.dim() == 2) s *= std::cos(std::numbers::pi * y / g.extent(1));
                return p.mean + p.amplitude * s;
            });
        case Profile::Kind::Gaussian:
            return Field::sample(g, [&](double x, double y) {
                const double cx = p.center.empty() ? 0.5 * g.extent(0) : p.center[0];
                double r2 = (x - cx) * (x - cx);
                if (g.dim() == 2) {
                    const double cy = p.center.size() > 1 ? p.center[1] : 0.5 * g.extent(1);
                    r2 += (y - cy) * (y - cy);
                }
                return p.floor + p.amplitude * std::exp(-r2 / (2.0 * p.width * p.width));
            });
    }
    return Field(g);
}

struct RunSection {
    double horizon = 1.0;
    std::size_t record_every = 1;
    std::vector<double> ks;  // empty: {1, 2, n + 3}
    std::optional<int> n;    // classification dimension; defaults to grid dim
    double tol = 0.02;       // relative slack on the mass bound
};

struct SweepAxis {
    std::string key;                  // e.g. "params.alpha"
    std::vector<std::string> values;  // scalar text, applied like the base config
};

struct OutputSection {
    std::string directory = "out";
    bool plot = true;
    bool log_scale = false;
};

struct InequalitySection {
    double q = 2.0;
    double r = 1.0;
    int n = 3;
    std::size_t samples = 200;
    int cells = 256;
    std::uint64_t seed = 20240601;
};

struct ExperimentConfig {
    std::optional<Grid> grid;
    std::optional<Params> params;
    std::optional<Profile> u0;
    std::optional<Profile> v0;
    StepperConfig stepper;
    std::optional<RunSection> run;
    std::vector<SweepAxis> sweep;
    OutputSection output;
    std::optional<double> cp_user;
    std::optional<InequalitySection> inequality;
    std::set<std::string> sections;  // top-level sections present in the text
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return config.has_value() && errors.empty(); }
};

namespace detail {

class Reader {
public:
    std::vector<std::string> errors;

    void error(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    void error_at(const YAML::Node& node, const std::string& path, const std::string& msg) {
        const auto mark = node.Mark();
        if (mark.line >= 0) {
            errors.push_back(path + ": " + msg + " (line " + std::to_string(mark.line + 1) + ")");
        } else {
            error(path, msg);
        }
    }

    template <class T>
    std::optional<T> scalar(const YAML::Node& node, const std::string& path, const char* what) {
        if (!node.IsScalar()) {
            error_at(node, path, std::string("expected ") + what);
            return std::nullopt;
        }
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            error_at(node, path, std::string("expected ") + what + ", got '" + node.Scalar() + "'");
            return std::nullopt;
        }
    }

    std::optional<double> number(const YAML::Node& n, const std::string& path) {
        return scalar<double>(n, path, "a number");
    }

    std::optional<std::vector<double>> numbers(const YAML::Node& node, const std::string& path) {
        if (node.IsScalar()) {
            if (auto x = number(node, path)) return std::vector<double>{*x};
            return std::nullopt;
        }
        if (!node.IsSequence()) {
            error_at(node, path, "expected a list of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool good = true;
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (auto x = number(node[i], path + "[" + std::to_string(i) + "]")) {
                out.push_back(*x);
            } else {
                good = false;
            }
        }
        if (!good) return std::nullopt;
        return out;
    }

    /// Visits every key of a mapping, flagging keys without a handler.
    void mapping(const YAML::Node& node, const std::string& path,
                 const std::map<std::string, std::function<void(const YAML::Node&, const std::string&)>>& handlers) {
        if (!node.IsMap()) {
            error_at(node, path, "expected a mapping");
            return;
        }
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            const std::string sub = path.empty() ? key : path + "." + key;
            auto it = handlers.find(key);
            if (it == handlers.end()) {
                error_at(kv.first, sub, "unknown key");
                continue;
            }
            it->second(kv.second, sub);
        }
    }
};

inline std::optional<SourceMode> parse_mode(const std::string& s) {
    if (s == "growth_dampening" || s == "GROWTH_DAMPENING") return SourceMode::GrowthDampening;
    if (s == "decay_growth" || s == "DECAY_GROWTH") return SourceMode::DecayGrowth;
    return std::nullopt;
}

/// Applies one params.<key> value; shared by the base config and sweep points.
inline bool apply_param(Reader& rd, Params& p, const std::string& key, const YAML::Node& node,
                        const std::string& path) {
    if (key == "mode") {
        auto s = rd.scalar<std::string>(node, path, "a mode name");
        if (!s) return false;
        if (auto m = parse_mode(*s)) {
            p.mode = *m;
            return true;
        }
        rd.error_at(node, path, "mode must be growth_dampening or decay_growth, got '" + *s + "'");
        return false;
    }
    double* slot = key == "chi"     ? &p.chi
                   : key == "a"     ? &p.a
                   : key == "b"     ? &p.b
                   : key == "alpha" ? &p.alpha
                   : key == "beta"  ? &p.beta
                   : key == "gamma" ? &p.gamma
                                    : nullptr;
    if (!slot) {
        rd.error_at(node, path, "unknown key");
        return false;
    }
    if (auto x = rd.number(node, path)) {
        *slot = *x;
        return true;
    }
    return false;
}

inline const std::vector<std::string>& param_keys() {
    static const std::vector<std::string> keys{"chi", "a", "b", "alpha", "beta", "gamma", "mode"};
    return keys;
}

inline std::optional<Profile> parse_profile(Reader& rd, const YAML::Node& node, const std::string& path) {
    if (!node.IsMap() || !node["profile"]) {
        rd.error_at(node, path, "expected a mapping with a 'profile' key");
        return std::nullopt;
    }
    Profile prof;
    const std::string kind = node["profile"].IsScalar() ? node["profile"].Scalar() : "";
    std::set<std::string> required;
    if (kind == "constant") {
        prof.kind = Profile::Kind::Constant;
        required = {"c"};
    } else if (kind == "cosine_bump") {
        prof.kind = Profile::Kind::CosineBump;
        required = {"amplitude", "mean"};
    } else if (kind == "gaussian") {
        prof.kind = Profile::Kind::Gaussian;
        required = {"width", "amplitude"};
    } else {
        rd.error_at(node["profile"], path + ".profile",
                    "must be constant, cosine_bump or gaussian, got '" + kind + "'");
        return std::nullopt;
    }
    auto num = [&](double& slot) {
        return [&rd, &slot](const YAML::Node& n, const std::string& p) {
            if (auto x = rd.number(n, p)) slot = *x;
        };
    };
    std::map<std::string, std::function<void(const YAML::Node&, const std::string&)>> h{
        {"profile", [](const YAML::Node&, const std::string&) {}}};
    if (prof.kind == Profile::Kind::Constant) {
        h["c"] = num(prof.c);
    } else if (prof.kind == Profile::Kind::CosineBump) {
        h["amplitude"] = num(prof.amplitude);
        h["mean"] = num(prof.mean);
    } else {
        h["amplitude"] = num(prof.amplitude);
        h["width"] = num(prof.width);
        h["floor"] = num(prof.floor);
        h["center"] = [&](const YAML::Node& n, const std::string& p) {
            if (auto xs = rd.numbers(n, p)) prof.center = *xs;
        };
    }
    rd.mapping(node, path, h);
    for (const auto& key : required) {
        if (!node[key]) rd.error(path + "." + key, "missing");
    }
    switch (prof.kind) {
        case Profile::Kind::Constant:
            if (!(prof.c >= 0.0)) rd.error(path + ".c", "must be ≥ 0");
            break;
        case Profile::Kind::CosineBump:
            if (!(prof.mean >= std::abs(prof.amplitude))) {
                rd.error(path + ".mean", "must be ≥ |amplitude| to keep the profile nonnegative");
            }
            break;
        case Profile::Kind::Gaussian:
            if (!(prof.width > 0.0)) rd.error(path + ".width", "must be > 0");
            if (!(prof.amplitude >= 0.0)) rd.error(path + ".amplitude", "must be ≥ 0");
            if (!(prof.floor >= 0.0)) rd.error(path + ".floor", "must be ≥ 0");
            break;
    }
    return prof;
}

}  // namespace detail

inline ParseResult parse_config(const std::string& text) {
    ParseResult result;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        result.errors.push_back("line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg);
        return result;
    }
    if (root.IsNull()) {
        result.errors.push_back("config: empty document");
        return result;
    }

    detail::Reader rd;
    ExperimentConfig cfg;
    using Handler = std::function<void(const YAML::Node&, const std::string&)>;
    auto num = [&rd](double& slot) -> Handler {
        return [&rd, &slot](const YAML::Node& n, const std::string& p) {
            if (auto x = rd.number(n, p)) slot = *x;
        };
    };

    std::map<std::string, Handler> top;

    top["grid"] = [&](const YAML::Node& node, const std::string& path) {
        int dim = 0;
        std::vector<double> extents;
        std::vector<int> cells;
        rd.mapping(node, path,
                   {{"dim", [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<int>(n, p, "an integer")) dim = *x;
                     }},
                    {"extents", [&](const YAML::Node& n, const std::string& p) {
                         if (auto xs = rd.numbers(n, p)) extents = *xs;
                     }},
                    {"cells", [&](const YAML::Node& n, const std::string& p) {
                         if (n.IsScalar()) {
                             if (auto x = rd.scalar<int>(n, p, "an integer")) cells = {*x};
                         } else if (n.IsSequence()) {
                             for (std::size_t i = 0; i < n.size(); ++i) {
                                 if (auto x = rd.scalar<int>(n[i], p, "an integer")) cells.push_back(*x);
                             }
                         } else {
                             rd.error_at(n, p, "expected a list of integers");
                         }
                     }}});
        if (dim != 1 && dim != 2) {
            rd.error(path + ".dim", "must be 1 or 2");
            return;
        }
        if (extents.size() != static_cast<std::size_t>(dim)) {
            rd.error(path + ".extents", "need " + std::to_string(dim) + " value(s)");
        }
        if (cells.size() != static_cast<std::size_t>(dim)) {
            rd.error(path + ".cells", "need " + std::to_string(dim) + " value(s)");
        }
        if (extents.size() != static_cast<std::size_t>(dim) || cells.size() != static_cast<std::size_t>(dim)) return;
        bool good = true;
        for (int a = 0; a < dim; ++a) {
            if (!(extents[a] > 0.0)) {
                rd.error(path + ".extents", "must be > 0");
                good = false;
            }
            if (cells[a] < 4) {
                rd.error(path + ".cells", "must be ≥ 4");
                good = false;
            }
        }
        if (good) {
            cfg.grid = dim == 1 ? Grid::line(extents[0], cells[0])
                                : Grid::rectangle(extents[0], extents[1], cells[0], cells[1]);
        }
    };

    top["params"] = [&](const YAML::Node& node, const std::string& path) {
        Params p;
        if (!node.IsMap()) {
            rd.error_at(node, path, "expected a mapping");
            return;
        }
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            detail::apply_param(rd, p, key, kv.second, path + "." + key);
        }
        for (const auto& key : detail::param_keys()) {
            if (!node[key]) rd.error(path + "." + key, "missing");
        }
        for (const auto& v : validate(p)) rd.error(path + "." + v.field, "must be " + v.requirement);
        cfg.params = p;
    };

    top["initial"] = [&](const YAML::Node& node, const std::string& path) {
        rd.mapping(node, path,
                   {{"u0", [&](const YAML::Node& n, const std::string& p) { cfg.u0 = detail::parse_profile(rd, n, p); }},
                    {"v0", [&](const YAML::Node& n, const std::string& p) { cfg.v0 = detail::parse_profile(rd, n, p); }}});
        if (!node["u0"]) rd.error(path + ".u0", "missing");
        if (!node["v0"]) rd.error(path + ".v0", "missing");
    };

    top["stepper"] = [&](const YAML::Node& node, const std::string& path) {
        StepperConfig& s = cfg.stepper;
        auto choice = [&](auto& slot, std::map<std::string, std::decay_t<decltype(slot)>> options) -> Handler {
            return [&rd, &slot, options](const YAML::Node& n, const std::string& p) {
                auto text = rd.scalar<std::string>(n, p, "a name");
                if (!text) return;
                auto it = options.find(*text);
                if (it == options.end()) {
                    std::string names;
                    for (const auto& [k, _] : options) names += (names.empty() ? "" : ", ") + k;
                    rd.error_at(n, p, "must be one of " + names);
                    return;
                }
                slot = it->second;
            };
        };
        rd.mapping(node, path,
                   {{"dt_init", num(s.dt_init)},
                    {"dt_min", num(s.dt_min)},
                    {"dt_max", num(s.dt_max)},
                    {"cfl_safety", num(s.cfl_safety)},
                    {"u_blowup_threshold", num(s.u_blowup_threshold)},
                    {"linear_tol", num(s.linear_tol)},
                    {"theta", num(s.theta)},
                    {"max_linear_iterations",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<int>(n, p, "an integer")) s.max_linear_iterations = *x;
                     }},
                    {"clip_policy", choice(s.clip_policy, {{"clip_to_zero", ClipPolicy::ClipToZero},
                                                           {"reject_step", ClipPolicy::RejectStep}})},
                    {"u_face_scheme", choice(s.u_face_scheme, {{"central", FaceScheme::Central},
                                                               {"upwind", FaceScheme::Upwind}})},
                    {"consumption", choice(s.consumption, {{"explicit", ConsumptionScheme::Explicit},
                                                           {"semi_implicit", ConsumptionScheme::SemiImplicit}})}});
    };

    top["run"] = [&](const YAML::Node& node, const std::string& path) {
        RunSection r;
        rd.mapping(node, path,
                   {{"horizon", num(r.horizon)},
                    {"tol", num(r.tol)},
                    {"record_every",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<long long>(n, p, "an integer")) {
                             if (*x < 1) {
                                 rd.error(p, "must be ≥ 1");
                             } else {
                                 r.record_every = static_cast<std::size_t>(*x);
                             }
                         }
                     }},
                    {"ks",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto xs = rd.numbers(n, p)) {
                             for (double k : *xs) {
                                 if (!(k >= 1.0)) rd.error(p, "exponents must be ≥ 1");
                             }
                             r.ks = *xs;
                         }
                     }},
                    {"n", [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<int>(n, p, "an integer")) {
                             if (*x < 1) rd.error(p, "must be ≥ 1");
                             r.n = *x;
                         }
                     }}});
        if (!(r.horizon > 0.0)) rd.error(path + ".horizon", "must be > 0");
        if (!(r.tol >= 0.0)) rd.error(path + ".tol", "must be ≥ 0");
        cfg.run = r;
    };

    top["sweep"] = [&](const YAML::Node& node, const std::string& path) {
        if (!node.IsMap()) {
            rd.error_at(node, path, "expected a mapping of parameter paths to value lists");
            return;
        }
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            const std::string sub = path + "." + key;
            const bool known = key == "cp_user" ||
                               (key.rfind("params.", 0) == 0 &&
                                std::find(detail::param_keys().begin(), detail::param_keys().end(),
                                          key.substr(7)) != detail::param_keys().end());
            if (!known) {
                rd.error_at(kv.first, sub, "unknown key (sweepable: params.<name>, cp_user)");
                continue;
            }
            SweepAxis axis{key, {}};
            const YAML::Node& vals = kv.second;
            if (vals.IsScalar()) {
                axis.values.push_back(vals.Scalar());
            } else if (vals.IsSequence()) {
                for (const auto& v : vals) {
                    if (v.IsScalar()) {
                        axis.values.push_back(v.Scalar());
                    } else {
                        rd.error_at(v, sub, "expected scalar values");
                    }
                }
            } else {
                rd.error_at(vals, sub, "expected a list of values");
            }
            cfg.sweep.push_back(std::move(axis));
        }
    };

    top["output"] = [&](const YAML::Node& node, const std::string& path) {
        OutputSection& o = cfg.output;
        rd.mapping(node, path,
                   {{"directory",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto s = rd.scalar<std::string>(n, p, "a path")) o.directory = *s;
                     }},
                    {"plot",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto b = rd.scalar<bool>(n, p, "true or false")) o.plot = *b;
                     }},
                    {"log_scale", [&](const YAML::Node& n, const std::string& p) {
                         if (auto b = rd.scalar<bool>(n, p, "true or false")) o.log_scale = *b;
                     }}});
    };

    top["cp_user"] = [&](const YAML::Node& node, const std::string& path) {
        if (auto x = rd.number(node, path)) {
            if (!(*x > 0.0)) rd.error(path, "must be > 0");
            cfg.cp_user = *x;
        }
    };

    top["inequality"] = [&](const YAML::Node& node, const std::string& path) {
        InequalitySection q;
        rd.mapping(node, path,
                   {{"q", num(q.q)},
                    {"r", num(q.r)},
                    {"n",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<int>(n, p, "an integer")) q.n = *x;
                     }},
                    {"samples",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<long long>(n, p, "an integer")) {
                             if (*x < 1) rd.error(p, "must be ≥ 1");
                             q.samples = static_cast<std::size_t>(std::max(*x, 1LL));
                         }
                     }},
                    {"cells",
                     [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<int>(n, p, "an integer")) q.cells = *x;
                     }},
                    {"seed", [&](const YAML::Node& n, const std::string& p) {
                         if (auto x = rd.scalar<std::uint64_t>(n, p, "an unsigned integer")) q.seed = *x;
                     }}});
        if (q.n < 1) rd.error(path + ".n", "must be ≥ 1");
        if (q.cells < 4) rd.error(path + ".cells", "must be ≥ 4");
        if (!node["q"]) rd.error(path + ".q", "missing");
        if (!node["r"]) rd.error(path + ".r", "missing");
        cfg.inequality = q;
    };

    if (!root.IsMap()) {
        result.errors.push_back("config: top level must be a mapping");
        return result;
    }
    for (const auto& kv : root) cfg.sections.insert(kv.first.as<std::string>());
    rd.mapping(root, "", top);

    for (const auto& v : validate(cfg.stepper)) rd.error("stepper." + v.field, "must be " + v.requirement);
    if (cfg.grid) {
        const std::pair<const char*, const std::optional<Profile>*> profiles[] = {{"initial.u0", &cfg.u0},
                                                                                  {"initial.v0", &cfg.v0}};
        for (const auto& [path, prof] : profiles) {
            if (*prof && (*prof)->center.size() > static_cast<std::size_t>(cfg.grid->dim())) {
                rd.error(std::string(path) + ".center", "more coordinates than the grid dimension");
            }
        }
    }

    result.errors = std::move(rd.errors);
    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

enum class Command { Run, Sweep, Classify, CheckInequality };

/// Sections each subcommand cannot do without.
inline std::vector<std::string> missing_sections(const ExperimentConfig& cfg, Command cmd) {
    std::vector<std::string> need;
    switch (cmd) {
        case Command::Run: need = {"grid", "params", "initial", "run"}; break;
        case Command::Sweep: need = {"grid", "params", "initial", "run", "sweep"}; break;
        case Command::Classify: need = {"grid", "params", "initial"}; break;
        case Command::CheckInequality: need = {"inequality"}; break;
    }
    std::vector<std::string> out;
    for (const auto& s : need) {
        if (!cfg.sections.contains(s)) out.push_back(s + ": section required by this subcommand");
    }
    return out;
}

}  // namespace chemo::cli
