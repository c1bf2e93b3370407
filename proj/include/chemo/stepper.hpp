#pragma once

// IMEX time integration of
//   u_t = Lap u - chi div(u grad v) + f(u)
//   v_t = Lap v - v u
// with Neumann closure. Diffusion is implicit with weight theta; chemotaxis,
// the nonlocal source and (by default) consumption are explicit.
//
// theta = 1   : IMEX Euler, one stage, first order.
// theta = 1/2 : Crank-Nicolson diffusion with a Heun predictor-corrector for
//               the explicit terms, two stages, second order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chemo/errors.hpp"
#include "chemo/grid.hpp"
#include "chemo/linear_solvers.hpp"
#include "chemo/model.hpp"

namespace chemo {

enum class ClipPolicy { ClipToZero, RejectStep };
enum class ConsumptionScheme { Explicit, SemiImplicit };

struct StepperConfig {
    double dt_init = 1e-4;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double cfl_safety = 0.5;
    double u_blowup_threshold = 1e6;
    ClipPolicy clip_policy = ClipPolicy::ClipToZero;
    double linear_tol = 1e-10;
    FaceScheme u_face_scheme = FaceScheme::Central;
    double theta = 1.0;
    ConsumptionScheme consumption = ConsumptionScheme::Explicit;
    int max_linear_iterations = 10000;
    // Test hook: false replaces f(u) by zero.
    bool source_enabled = true;
};

inline std::vector<Violation> validate(const StepperConfig& c) {
    std::vector<Violation> out;
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) out.push_back({name, "> 0"});
    };
    positive(c.dt_init, "dt_init");
    positive(c.dt_min, "dt_min");
    positive(c.dt_max, "dt_max");
    positive(c.u_blowup_threshold, "u_blowup_threshold");
    if (!(c.dt_min <= c.dt_max)) out.push_back({"dt_min", "≤ dt_max"});
    if (!(c.dt_min <= c.dt_init && c.dt_init <= c.dt_max)) {
        out.push_back({"dt_init", "in [dt_min, dt_max]"});
    }
    if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) out.push_back({"cfl_safety", "in (0, 1]"});
    if (!(c.linear_tol > 0.0 && c.linear_tol <= 1e-6)) out.push_back({"linear_tol", "in (0, 1e-6]"});
    if (c.theta != 1.0 && c.theta != 0.5) out.push_back({"theta", "1 or 0.5"});
    if (c.max_linear_iterations < 1) out.push_back({"max_linear_iterations", "≥ 1"});
    return out;
}

enum class BlowupReason { SupExceeded, DtUnderflow };

inline std::string_view to_string(BlowupReason r) {
    return r == BlowupReason::SupExceeded ? "SUP_EXCEEDED" : "DT_UNDERFLOW";
}

struct BlowupSignal {
    double t_detected = 0.0;
    BlowupReason reason = BlowupReason::SupExceeded;
    double u_sup = 0.0;  // sup u of the offending candidate (or of the last state)
};

struct StepOutcome {
    std::variant<BlowupSignal, State> result;  // BlowupSignal first so the outcome is default-constructible
    double dt_used = 0.0;
    double clipped_mass = 0.0;    // u mass removed by clipping, >= 0
    double clipped_mass_v = 0.0;  // same for v
    int rejections = 0;

    bool blew_up() const noexcept { return std::holds_alternative<BlowupSignal>(result); }
    const State& state() const { return std::get<State>(result); }
    const BlowupSignal& signal() const { return std::get<BlowupSignal>(result); }
};

namespace detail {

struct ExplicitTerms {
    Field du;
    Field dv;  // zero under semi-implicit consumption
};

inline ExplicitTerms explicit_terms(const Field& u, const Field& v, const Params& p,
                                    const StepperConfig& cfg) {
    ExplicitTerms e{chemotaxis_divergence(u, v, p.chi, cfg.u_face_scheme), Field(u.grid())};
    if (cfg.source_enabled) {
        const Field f = source_eval(u, p);
        for (std::size_t k = 0; k < u.size(); ++k) e.du[k] += f[k];
    }
    if (cfg.consumption == ConsumptionScheme::Explicit) {
        for (std::size_t k = 0; k < u.size(); ++k) e.dv[k] = -v[k] * u[k];
    }
    return e;
}

inline Field positive_part(Field f) {
    for (double& x : f.values()) x = std::max(x, 0.0);
    return f;
}

/// Solves (I - theta dt Lap + diag(d)) x = old + (1 - theta) dt Lap old + dt * forcing.
inline Field implicit_diffusion(const Field& old, const Field& forcing, std::span<const double> d,
                                double dt, const StepperConfig& cfg) {
    const Grid& g = old.grid();
    Field rhs(g);
    const double explicit_weight = (1.0 - cfg.theta) * dt;
    if (explicit_weight > 0.0) {
        const Field lap = laplacian(old);
        for (std::size_t k = 0; k < old.size(); ++k) {
            rhs[k] = old[k] + explicit_weight * lap[k] + dt * forcing[k];
        }
    } else {
        for (std::size_t k = 0; k < old.size(); ++k) rhs[k] = old[k] + dt * forcing[k];
    }
    Field x = old;
    solve_diffusion(g, cfg.theta * dt, d, rhs.values(), x.values(), cfg.linear_tol,
                    cfg.max_linear_iterations);
    return x;
}

inline std::vector<double> consumption_diag(const StepperConfig& cfg, double dt, const Field& u,
                                            const Field* u_pred = nullptr) {
    if (cfg.consumption != ConsumptionScheme::SemiImplicit) return {};
    std::vector<double> d(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double uk = u_pred ? 0.5 * (u[k] + (*u_pred)[k]) : u[k];
        d[k] = dt * uk;
    }
    return d;
}

/// One unclipped IMEX update of (u, v) over dt.
inline std::pair<Field, Field> imex_update(const State& s, const Params& p,
                                           const StepperConfig& cfg, double dt) {
    const ExplicitTerms e0 = explicit_terms(s.u, s.v, p, cfg);
    const std::vector<double> d0 = consumption_diag(cfg, dt, s.u);
    Field u1 = implicit_diffusion(s.u, e0.du, {}, dt, cfg);
    Field v1 = implicit_diffusion(s.v, e0.dv, d0, dt, cfg);
    if (cfg.theta == 1.0) return {std::move(u1), std::move(v1)};

    // Heun corrector: average the explicit terms at the old and predicted levels.
    const Field u_pred = positive_part(std::move(u1));
    const Field v_pred = positive_part(std::move(v1));
    const ExplicitTerms e1 = explicit_terms(u_pred, v_pred, p, cfg);
    Field fu(s.u.grid()), fv(s.u.grid());
    for (std::size_t k = 0; k < s.u.size(); ++k) {
        fu[k] = 0.5 * (e0.du[k] + e1.du[k]);
        fv[k] = 0.5 * (e0.dv[k] + e1.dv[k]);
    }
    const std::vector<double> d1 = consumption_diag(cfg, dt, s.u, &u_pred);
    return {implicit_diffusion(s.u, fu, {}, dt, cfg), implicit_diffusion(s.v, fv, d1, dt, cfg)};
}

inline double negative_mass(const Field& f) {
    double m = 0.0;
    for (double x : f.values()) {
        if (x < 0.0) m -= x;
    }
    return m * f.grid().cell_volume();
}

inline void clip_to_zero(Field& f) {
    for (double& x : f.values()) x = std::max(x, 0.0);
}

}  // namespace detail

/// Advances `s` by `dt` (0 < dt <= dt_max; a shortened final step may fall
/// below dt_min). Under RejectStep a negative undershoot halves dt and
/// retries until dt_min is crossed.
inline StepOutcome step(const State& s, const Params& p, const StepperConfig& cfg, double dt) {
    if (!(dt > 0.0) || dt > cfg.dt_max * (1.0 + 1e-12)) {
        throw PreconditionError("step: dt=" + std::to_string(dt) + " outside (0, dt_max]");
    }
    StepOutcome out;
    for (;;) {
        auto [u, v] = detail::imex_update(s, p, cfg, dt);
        out.dt_used = dt;
        const double u_sup = u.max();
        if (!u.all_finite() || !v.all_finite() || !(u_sup <= cfg.u_blowup_threshold)) {
            out.result = BlowupSignal{s.t + dt, BlowupReason::SupExceeded,
                                      u.all_finite() ? u_sup : std::numeric_limits<double>::infinity()};
            return out;
        }
        const double neg_u = detail::negative_mass(u);
        const double neg_v = detail::negative_mass(v);
        const bool undershoot = u.min() < 0.0 || v.min() < 0.0;
        if (undershoot && cfg.clip_policy == ClipPolicy::RejectStep) {
            ++out.rejections;
            dt *= 0.5;
            if (dt < cfg.dt_min) {
                out.result = BlowupSignal{s.t, BlowupReason::DtUnderflow, s.u.max()};
                return out;
            }
            continue;
        }
        detail::clip_to_zero(u);
        detail::clip_to_zero(v);
        out.clipped_mass = neg_u;
        out.clipped_mass_v = neg_v;
        out.result = State{std::move(u), std::move(v), s.t + dt};
        return out;
    }
}

struct DtLimits {
    double advective = 0.0;
    double reaction = 0.0;
    double consumption = 0.0;
    double raw = 0.0;  // cfl_safety * min of the above, before clamping
};

inline constexpr double kDtGuard = 1e-30;

inline DtLimits dt_limits(const State& s, const Params& p, const StepperConfig& cfg) {
    DtLimits lim;
    const Grid& g = s.u.grid();
    lim.advective = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < g.dim(); ++axis) {
        lim.advective = std::min(lim.advective,
                                 g.h(axis) / (p.chi * max_face_gradient(s.v, axis) + kDtGuard));
    }
    const double rate = cfg.source_enabled ? source_rate_bound(s.u, p) : 0.0;
    lim.reaction = 1.0 / (rate + kDtGuard);
    lim.consumption = 1.0 / (s.u.max() + kDtGuard);
    lim.raw = cfg.cfl_safety * std::min({lim.advective, lim.reaction, lim.consumption});
    return lim;
}

/// Next step size: the stability limits, capped at 1.5 * dt_prev and clamped to [dt_min, dt_max].
inline double adapt_dt(const State& s, const Params& p, const StepperConfig& cfg, double dt_prev) {
    const double dt = std::min({dt_limits(s, p, cfg).raw, cfg.dt_max, 1.5 * dt_prev});
    return std::max(dt, cfg.dt_min);
}

struct StepInfo {
    std::size_t step = 0;
    double dt = 0.0;
    double clipped_mass_total = 0.0;
};

/// Must not mutate the state it observes.
using Observer = std::function<void(const State&, const StepInfo&)>;

struct RunOptions {
    double horizon = 1.0;
    std::size_t observe_every = 1;
};

struct RunReport {
    State final_state;  // last valid state (the pre-blow-up state when blowup is set)
    std::optional<BlowupSignal> blowup;
    double clipped_mass_total = 0.0;
    double clipped_mass_v_total = 0.0;
    std::size_t steps = 0;
    std::size_t rejected_attempts = 0;
};

inline RunReport run(const State& initial, const Params& p, const StepperConfig& cfg,
                     const RunOptions& opts, const Observer& observer = {}) {
    if (auto bad = validate(cfg); !bad.empty()) {
        throw PreconditionError("run: invalid stepper config: " + bad.front().to_string());
    }
    if (auto bad = validate(p); !bad.empty()) {
        throw PreconditionError("run: invalid params: " + bad.front().to_string());
    }
    if (!(opts.horizon > 0.0)) throw PreconditionError("run: horizon must be positive");
    if (!(initial.u.grid() == initial.v.grid())) throw StructuralError("run: u and v grids differ");
    if (!initial.u.all_finite() || !initial.v.all_finite() || initial.u.min() < 0.0 ||
        initial.v.min() < 0.0) {
        throw PreconditionError("run: initial data must be finite and nonnegative");
    }
    const std::size_t every = std::max<std::size_t>(opts.observe_every, 1);

    RunReport rep{initial, std::nullopt};
    State& s = rep.final_state;
    auto notify = [&](double dt) {
        if (observer) observer(s, StepInfo{rep.steps, dt, rep.clipped_mass_total});
    };
    notify(0.0);

    double dt_prev = cfg.dt_init;
    bool observed_last = true;
    const double t_end = opts.horizon;
    while (s.t < t_end) {
        const DtLimits lim = dt_limits(s, p, cfg);
        if (lim.raw < cfg.dt_min) {
            rep.blowup = BlowupSignal{s.t, BlowupReason::DtUnderflow, s.u.max()};
            break;
        }
        double dt = rep.steps == 0
                        ? std::clamp(std::min(lim.raw, cfg.dt_init), cfg.dt_min, cfg.dt_max)
                        : adapt_dt(s, p, cfg, dt_prev);
        const double remaining = t_end - s.t;
        if (dt >= remaining || remaining - dt < 1e-12 * t_end) dt = remaining;

        StepOutcome out = step(s, p, cfg, dt);
        ++rep.steps;
        rep.rejected_attempts += static_cast<std::size_t>(out.rejections);
        if (out.blew_up()) {
            rep.blowup = out.signal();
            break;
        }
        rep.clipped_mass_total += out.clipped_mass;
        rep.clipped_mass_v_total += out.clipped_mass_v;
        const bool last = out.dt_used == remaining;
        s = std::move(std::get<State>(out.result));
        if (last) s.t = t_end;
        dt_prev = out.dt_used;
        observed_last = rep.steps % every == 0 || s.t >= t_end;
        if (observed_last) notify(out.dt_used);
    }
    if (!observed_last) notify(dt_prev);
    return rep;
}

}  // namespace chemo
