#pragma once

// Parameter regimes in which the chemotaxis-consumption system with nonlocal
// sources is known to have global bounded solutions, and the a priori bounds
// that come with them.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "chemo/errors.hpp"
#include "chemo/grid.hpp"
#include "chemo/model.hpp"

namespace chemo {

enum class RegimeTag { Case1A, Case1B, Case2A, Case2B, Case2CConditional, OutsideTheorem };

inline std::string_view to_string(RegimeTag tag) {
    switch (tag) {
        case RegimeTag::Case1A: return "CASE_1A";
        case RegimeTag::Case1B: return "CASE_1B";
        case RegimeTag::Case2A: return "CASE_2A";
        case RegimeTag::Case2B: return "CASE_2B";
        case RegimeTag::Case2CConditional: return "CASE_2C_CONDITIONAL";
        case RegimeTag::OutsideTheorem: return "OUTSIDE_THEOREM";
    }
    return "?";
}

struct RegimeCase {
    RegimeTag tag = RegimeTag::OutsideTheorem;
    std::string details;  // decisive inequality with both sides evaluated
    bool tie = false;     // a comparison fell within the tie tolerance

    bool bounded() const noexcept { return tag != RegimeTag::OutsideTheorem; }
};

struct RegimeReport {
    RegimeCase regime;
    std::optional<double> mass_bound_m0;  // CASE_1x only
    double v_sup_bound = 0.0;
    std::optional<double> threshold_margin;  // CASE_2B / CASE_2C only
};

namespace detail {

inline constexpr double kTieTolerance = 1e-12;

inline bool nearly_equal(double x, double y) {
    return std::abs(x - y) <= kTieTolerance * std::max({1.0, std::abs(x), std::abs(y)});
}

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

/// Records one comparison; near-equal values count as equal and are flagged.
struct Comparator {
    bool tie = false;

    bool gt(double x, double y) {
        if (nearly_equal(x, y)) {
            if (x != y) tie = true;
            return false;
        }
        return x > y;
    }
    bool lt(double x, double y) { return gt(y, x); }
    bool ge(double x, double y) {
        if (nearly_equal(x, y)) {
            if (x != y) tie = true;
            return true;
        }
        return x > y;
    }
    bool eq(double x, double y) {
        if (nearly_equal(x, y)) {
            if (x != y) tie = true;
            return true;
        }
        return false;
    }
};

}  // namespace detail

/// Classifies (params, n, |Omega|) against the boundedness theorem. Strict and
/// non-strict inequalities are evaluated as stated; values within 1e-12
/// (relative) of each other are treated as equal and the tie is reported.
/// Case 2(c) needs the constant C_P, which must be supplied by the caller.
inline RegimeCase classify(const Params& p, int n, double omega_measure, double v0_sup,
                           std::optional<double> cp_user = std::nullopt) {
    if (n < 1) throw PreconditionError("classify: dimension n must be >= 1");
    if (!(omega_measure > 0.0)) throw PreconditionError("classify: |Omega| must be positive");
    if (auto bad = validate(p); !bad.empty()) {
        throw PreconditionError("classify: invalid params: " + bad.front().to_string());
    }
    using detail::fmt;
    detail::Comparator cmp;
    RegimeCase out;
    const double sum = p.beta + p.gamma;
    const double half_n = 0.5 * n;
    auto finish = [&](RegimeTag tag, std::string details) {
        out.tag = tag;
        out.details = std::move(details);
        out.tie = cmp.tie;
        if (out.tie) out.details += " (tie within 1e-12 treated as equality)";
        return out;
    };

    if (p.mode == SourceMode::GrowthDampening) {
        if (!cmp.ge(p.beta, p.alpha)) {
            return finish(RegimeTag::OutsideTheorem,
                          "beta ≥ alpha violated: " + fmt(p.beta) + " < " + fmt(p.alpha));
        }
        if (cmp.ge(p.alpha, 2.0)) {
            const double rhs = half_n * (p.alpha - 1.0) + p.alpha;
            const std::string ineq = "beta + gamma > n/2 (alpha - 1) + alpha: " + fmt(sum);
            if (cmp.gt(sum, rhs)) return finish(RegimeTag::Case1A, ineq + " > " + fmt(rhs));
            return finish(RegimeTag::OutsideTheorem, ineq + " ≤ " + fmt(rhs) + " violated");
        }
        const double rhs = half_n + 2.0;
        const std::string ineq = "beta + gamma > n/2 + 2: " + fmt(sum);
        if (cmp.gt(sum, rhs)) return finish(RegimeTag::Case1B, ineq + " > " + fmt(rhs));
        return finish(RegimeTag::OutsideTheorem, ineq + " ≤ " + fmt(rhs) + " violated");
    }

    if (!cmp.ge(p.beta, 1.0)) {
        return finish(RegimeTag::OutsideTheorem, "beta ≥ 1 violated: " + fmt(p.beta));
    }
    const double b_omega = p.b * omega_measure;
    if (cmp.gt(p.alpha, 2.0)) {
        if (cmp.lt(sum, p.alpha)) {
            return finish(RegimeTag::Case2A, "alpha > 2 and beta + gamma < alpha: " + fmt(sum) +
                                                 " < " + fmt(p.alpha));
        }
        if (cmp.eq(sum, p.alpha)) {
            const std::string ineq = "beta + gamma = alpha and a > b|Omega|: " + fmt(p.a);
            if (cmp.gt(p.a, b_omega)) return finish(RegimeTag::Case2B, ineq + " > " + fmt(b_omega));
            return finish(RegimeTag::OutsideTheorem, ineq + " ≤ " + fmt(b_omega) + " violated");
        }
        return finish(RegimeTag::OutsideTheorem, "alpha > 2 but beta + gamma > alpha: " + fmt(sum) +
                                                     " > " + fmt(p.alpha));
    }
    if (cmp.eq(p.alpha, 2.0) && cmp.eq(p.beta, 1.0) && cmp.eq(p.gamma, 1.0)) {
        if (!cp_user) {
            return finish(RegimeTag::OutsideTheorem,
                          "alpha = 2, beta = gamma = 1 but no C_P supplied for a > b|Omega| + C_P chi ||v0||");
        }
        const double rhs = b_omega + *cp_user * p.chi * v0_sup;
        const std::string ineq = "a > b|Omega| + C_P chi ||v0||: " + fmt(p.a);
        if (cmp.gt(p.a, rhs)) return finish(RegimeTag::Case2CConditional, ineq + " > " + fmt(rhs));
        return finish(RegimeTag::OutsideTheorem, ineq + " ≤ " + fmt(rhs) + " violated");
    }
    return finish(RegimeTag::OutsideTheorem,
                  "alpha > 2 violated and (alpha, beta, gamma) != (2, 1, 1): alpha = " + fmt(p.alpha));
}

/// The level y1 above which the mass cannot grow (growth-dampening, beta >= alpha).
inline double mass_threshold(const Params& p, double omega_measure) {
    if (p.mode != SourceMode::GrowthDampening) {
        throw PreconditionError("mass_bound: requires GROWTH_DAMPENING mode");
    }
    if (!(p.beta >= p.alpha)) throw PreconditionError("mass_bound: requires beta >= alpha");
    if (!(omega_measure > 0.0)) throw PreconditionError("mass_bound: |Omega| must be positive");
    const double om = omega_measure;
    if (p.beta == p.alpha) {
        return std::pow(p.a / (p.b * std::pow(om, 1.0 - p.gamma)), 1.0 / p.gamma);
    }
    const double gap = p.beta - p.alpha;
    const double num = p.a * std::pow(om, gap / p.beta);
    const double den = p.b * std::pow(om, (1.0 - p.gamma) - (p.beta - 1.0) * gap / p.beta);
    return std::pow(num / den, 1.0 / (gap + p.gamma));
}

inline double ode_comparison_bound(double y0, double y1) {
    if (!(y0 >= 0.0) || !(y1 > 0.0)) {
        throw PreconditionError("ode_comparison_bound: need y0 >= 0 and y1 > 0");
    }
    return std::max(y0, y1);
}

/// m0 = max{initial mass, y1}: uniform ceiling on the total mass.
inline double mass_bound(const Params& p, double omega_measure, double initial_mass) {
    return ode_comparison_bound(initial_mass, mass_threshold(p, omega_measure));
}

inline double v_sup_bound(const Field& v0) {
    if (v0.min() < 0.0) throw PreconditionError("v_sup_bound: v0 has negative values");
    return v0.max();
}

/// Exponents of the interpolation inequality
///   ||phi||_q^q <= C0 ||phi||_r^delta + eps ||grad phi||_2^2 + ||phi||_2^2.
struct GNExponents {
    std::optional<double> p;  // 2n/(n-2); absent for n in {1, 2}
    double inv_p = 0.0;       // 1/2 - 1/n for every n
    double lambda = 0.0;
    double delta = 0.0;
    bool admissible = false;
    bool convention = false;     // n in {1, 2}: 1/p extended by 1/2 - 1/n
    std::string failed_condition;
};

inline GNExponents gn_exponents(double q, double r, int n) {
    if (n < 1) throw PreconditionError("gn_exponents: n must be >= 1");
    GNExponents e;
    e.inv_p = 0.5 - 1.0 / n;
    e.convention = n <= 2;
    if (n >= 3) e.p = 2.0 * n / (n - 2.0);

    if (!(r >= 1.0)) {
        e.failed_condition = "1 ≤ r";
    } else if (!(r < q)) {
        e.failed_condition = "r < q";
    } else if (n >= 3 && !(q < *e.p)) {
        e.failed_condition = "q < p";
    } else {
        const double bound = n == 1 ? 2.0 / r + 2.0 : n == 2 ? 2.0 / r + 1.0 : 2.0 / r + 1.0 - 2.0 / *e.p;
        if (!(q / r < bound)) {
            e.failed_condition = n == 1 ? "q/r < 2/r + 2" : n == 2 ? "q/r < 2/r + 1" : "q/r < 2/r + 1 - 2/p";
        }
    }
    e.admissible = e.failed_condition.empty();
    if (e.admissible) {
        e.lambda = (1.0 / r - 1.0 / q) / (1.0 / r - e.inv_p);
        e.delta = 2.0 * (1.0 - e.lambda) * q / (2.0 - e.lambda * q);
    }
    return e;
}

/// Classification plus the bounds it implies for a concrete initial state.
inline RegimeReport make_report(const Params& p, int n, double omega_measure, const Field& u0,
                                const Field& v0, std::optional<double> cp_user = std::nullopt) {
    RegimeReport rep;
    rep.v_sup_bound = v_sup_bound(v0);
    rep.regime = classify(p, n, omega_measure, rep.v_sup_bound, cp_user);
    switch (rep.regime.tag) {
        case RegimeTag::Case1A:
        case RegimeTag::Case1B:
            rep.mass_bound_m0 = mass_bound(p, omega_measure, integrate_power(u0, 1.0));
            break;
        case RegimeTag::Case2B:
            rep.threshold_margin = p.a - p.b * omega_measure;
            break;
        case RegimeTag::Case2CConditional:
            rep.threshold_margin = p.a - p.b * omega_measure - *cp_user * p.chi * rep.v_sup_bound;
            break;
        default:
            break;
    }
    return rep;
}

}  // namespace chemo
