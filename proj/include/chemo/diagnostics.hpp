#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "chemo/errors.hpp"
#include "chemo/grid.hpp"
#include "chemo/model.hpp"
#include "chemo/regimes.hpp"

namespace chemo {

struct DiagnosticRecord {
    double t = 0.0;
    double mass = 0.0;
    std::map<double, double> lk_norms;  // k -> ||u||_{L^k}
    double u_sup = 0.0;
    double u_min = 0.0;
    double v_sup = 0.0;
    double v_min = 0.0;
    double dt = 0.0;
    double clipped_mass_cum = 0.0;
};

/// Monitored exponents {1, 2, n + 3}.
inline std::vector<double> default_norm_exponents(int n) { return {1.0, 2.0, n + 3.0}; }

inline DiagnosticRecord record(const State& s, std::span<const double> ks, double dt,
                               double clipped_mass_cum) {
    DiagnosticRecord r;
    r.t = s.t;
    r.mass = total(s.u);
    const NormSummary un = norms(s.u, ks);
    r.lk_norms = un.lk;
    r.u_sup = un.sup;
    r.u_min = un.min;
    r.v_sup = s.v.max();
    r.v_min = s.v.min();
    r.dt = dt;
    r.clipped_mass_cum = clipped_mass_cum;
    return r;
}

struct Check {
    std::string name;
    double bound = 0.0;
    double observed = 0.0;  // observed max (min for nonnegativity)
    bool pass = true;
    double margin = 0.0;  // bound - observed, sign-adjusted so positive means room to spare
};

struct Verdict {
    std::vector<Check> checks;
    bool overall = true;
    double tol = 0.02;

    const Check* find(const std::string& name) const {
        for (const auto& c : checks) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }
};

inline constexpr double kVSupRelativeSlack = 1e-10;
inline constexpr double kMonotoneSlack = 1e-12;

/// Compares a time-sorted trajectory against the analytic bounds in `report`:
/// mass <= m0 (1 + tol) when m0 is known, v_sup <= sup v0, u >= 0 and
/// v_sup nonincreasing in time.
inline Verdict verdict(std::span<const DiagnosticRecord> traj, const RegimeReport& report,
                       double tol = 0.02) {
    if (traj.empty()) throw PreconditionError("verdict: empty trajectory");
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (traj[i].t < traj[i - 1].t) throw PreconditionError("verdict: records are not time-sorted");
    }
    Verdict v;
    v.tol = tol;

    if (report.mass_bound_m0) {
        const double m0 = *report.mass_bound_m0;
        double max_mass = 0.0;
        for (const auto& r : traj) max_mass = std::max(max_mass, r.mass);
        v.checks.push_back({"mass_bound", m0, max_mass, max_mass <= m0 * (1.0 + tol), m0 - max_mass});
    }

    double max_vsup = traj.front().v_sup;
    for (const auto& r : traj) max_vsup = std::max(max_vsup, r.v_sup);
    const double vb = report.v_sup_bound;
    v.checks.push_back({"v_sup_bound", vb, max_vsup, max_vsup <= vb * (1.0 + kVSupRelativeSlack),
                        vb - max_vsup});

    double min_u = traj.front().u_min;
    for (const auto& r : traj) min_u = std::min(min_u, r.u_min);
    v.checks.push_back({"u_nonnegative", 0.0, min_u, min_u >= 0.0, min_u});

    double worst_increase = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        worst_increase = std::max(worst_increase, traj[i].v_sup - traj[i - 1].v_sup);
    }
    const double slack = kMonotoneSlack * std::max(1.0, vb);
    v.checks.push_back({"v_sup_monotone", slack, worst_increase, worst_increase <= slack,
                        slack - worst_increase});

    v.overall = std::all_of(v.checks.begin(), v.checks.end(), [](const Check& c) { return c.pass; });
    return v;
}

/// Shortest round-trip decimal representation.
inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline void write_csv_header(std::ostream& os, std::span<const double> ks) {
    os << "t,mass,u_sup,u_min,v_sup,v_min,dt,clipped_mass_cum";
    std::vector<double> sorted(ks.begin(), ks.end());
    std::sort(sorted.begin(), sorted.end());
    for (double k : sorted) os << ",L" << format_number(k);
    os << '\n';
}

inline void write_csv_row(std::ostream& os, const DiagnosticRecord& r) {
    os << format_number(r.t) << ',' << format_number(r.mass) << ',' << format_number(r.u_sup) << ','
       << format_number(r.u_min) << ',' << format_number(r.v_sup) << ',' << format_number(r.v_min)
       << ',' << format_number(r.dt) << ',' << format_number(r.clipped_mass_cum);
    for (const auto& [k, value] : r.lk_norms) os << ',' << format_number(value);  // map is k-sorted
    os << '\n';
}

inline void write_csv(std::ostream& os, std::span<const DiagnosticRecord> traj,
                      std::span<const double> ks) {
    write_csv_header(os, ks);
    for (const auto& r : traj) write_csv_row(os, r);
}

}  // namespace chemo
