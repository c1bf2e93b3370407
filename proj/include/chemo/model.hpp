#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "chemo/errors.hpp"
#include "chemo/grid.hpp"

namespace chemo {

/// Which of the two nonlocal source forms drives the density:
///   GrowthDampening:  f(u) =  a u^alpha - b u^beta * int u^gamma
///   DecayGrowth:      f(u) = -a u^alpha + b u^beta * int u^gamma
enum class SourceMode { GrowthDampening, DecayGrowth };

inline std::string_view to_string(SourceMode mode) {
    return mode == SourceMode::GrowthDampening ? "GROWTH_DAMPENING" : "DECAY_GROWTH";
}

struct Params {
    double chi = 1.0;
    double a = 1.0;
    double b = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    SourceMode mode = SourceMode::GrowthDampening;
};

struct Violation {
    std::string field;        // e.g. "alpha"
    std::string requirement;  // e.g. "≥ 1"

    std::string to_string() const { return field + " " + requirement; }
};

inline std::vector<Violation> validate(const Params& p) {
    std::vector<Violation> out;
    auto positive = [&](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) out.push_back({name, "> 0"});
    };
    auto at_least_one = [&](double x, const char* name) {
        if (!(x >= 1.0) || !std::isfinite(x)) out.push_back({name, "≥ 1"});
    };
    positive(p.chi, "chi");
    positive(p.a, "a");
    positive(p.b, "b");
    at_least_one(p.alpha, "alpha");
    at_least_one(p.beta, "beta");
    at_least_one(p.gamma, "gamma");
    return out;
}

struct State {
    Field u;
    Field v;
    double t = 0.0;
};

namespace detail {

inline double pow_nonneg(double x, double e) {
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    return std::pow(x, e);
}

inline double mode_sign(SourceMode mode) { return mode == SourceMode::GrowthDampening ? 1.0 : -1.0; }

}  // namespace detail

/// Evaluates f(u) cellwise; the nonlocal integral is computed once from `u`.
inline Field source_eval(const Field& u, const Params& p) {
    const double nonlocal = integrate_power(u, p.gamma);  // rejects negative cells
    const double s = detail::mode_sign(p.mode);
    Field out(u.grid());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double x = u[k];
        out[k] = s * (p.a * detail::pow_nonneg(x, p.alpha) -
                      p.b * detail::pow_nonneg(x, p.beta) * nonlocal);
    }
    return out;
}

/// Upper bound on the sup-norm Lipschitz constant of u -> f(u) at `u`: the
/// local derivative plus the sensitivity of the broadcast integral.
inline double source_rate_bound(const Field& u, const Params& p) {
    const double nonlocal = integrate_power(u, p.gamma);
    const double vol = u.grid().cell_volume();
    double d_nonlocal = 0.0;  // d/dc of int (u + c)^gamma at c = 0
    double local_max = 0.0;
    double u_beta_max = 0.0;
    for (double x : u.values()) {
        d_nonlocal += p.gamma * detail::pow_nonneg(x, p.gamma - 1.0);
        const double local = p.a * p.alpha * detail::pow_nonneg(x, p.alpha - 1.0) +
                             p.b * p.beta * detail::pow_nonneg(x, p.beta - 1.0) * nonlocal;
        local_max = std::max(local_max, local);
        u_beta_max = std::max(u_beta_max, detail::pow_nonneg(x, p.beta));
    }
    return local_max + p.b * u_beta_max * d_nonlocal * vol;
}

}  // namespace chemo
