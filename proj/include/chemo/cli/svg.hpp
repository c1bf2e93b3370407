#pragma once

// Minimal line plot of the monitored norms (mass, sup u, sup v) against time.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chemo/diagnostics.hpp"

namespace chemo::cli {

/// Ticks at 1, 2 or 5 times a power of ten covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = 10.0 * mag;
    for (double m : {1.0, 2.0, 5.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    }
    return ticks;
}

namespace detail {

struct Series {
    const char* name;
    const char* colour;
    std::vector<double> y;
};

inline std::string tick_label(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

}  // namespace detail

inline std::string render_norms_svg(const std::vector<DiagnosticRecord>& traj, bool log_scale) {
    constexpr double W = 800, H = 500, left = 80, right = 150, top = 30, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;

    std::vector<double> t;
    std::vector<detail::Series> series{{"mass", "#1f77b4", {}}, {"sup u", "#d62728", {}}, {"sup v", "#2ca02c", {}}};
    for (const auto& r : traj) {
        t.push_back(r.t);
        series[0].y.push_back(r.mass);
        series[1].y.push_back(r.u_sup);
        series[2].y.push_back(r.v_sup);
    }

    auto transform = [&](double y) {
        if (!log_scale) return y;
        return y > 0.0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN();
    };
    double t_lo = t.empty() ? 0.0 : t.front(), t_hi = t.empty() ? 1.0 : t.back();
    if (!(t_hi > t_lo)) t_hi = t_lo + 1.0;
    double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
    for (const auto& s : series) {
        for (double y : s.y) {
            const double ty = transform(y);
            if (std::isfinite(ty)) {
                y_lo = std::min(y_lo, ty);
                y_hi = std::max(y_hi, ty);
            }
        }
    }
    if (!std::isfinite(y_lo)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (log_scale) {
        y_lo = std::floor(y_lo);
        y_hi = std::ceil(y_hi);
    }
    if (!(y_hi > y_lo)) {
        y_hi = y_lo + 1.0;
    } else if (!log_scale) {
        const double pad = 0.05 * (y_hi - y_lo);
        y_lo -= pad;
        y_hi += pad;
    }

    auto px = [&](double x) { return left + (x - t_lo) / (t_hi - t_lo) * pw; };
    auto py = [&](double y) { return top + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double x : nice_ticks(t_lo, t_hi)) {
        os << "<line x1=\"" << px(x) << "\" y1=\"" << top + ph << "\" x2=\"" << px(x) << "\" y2=\""
           << top + ph + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 20
           << "\" font-size=\"12\" text-anchor=\"middle\">" << detail::tick_label(x) << "</text>\n";
    }
    std::vector<double> yticks;
    if (log_scale) {
        for (double e = y_lo; e <= y_hi + 1e-9; e += 1.0) yticks.push_back(e);
    } else {
        yticks = nice_ticks(y_lo, y_hi);
    }
    for (double y : yticks) {
        os << "<line x1=\"" << left - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << left << "\" y2=\"" << py(y)
           << "\" stroke=\"black\"/>\n";
        const std::string label = log_scale ? "1e" + detail::tick_label(y) : detail::tick_label(y);
        os << "<text x=\"" << left - 8 << "\" y=\"" << py(y) + 4
           << "\" font-size=\"12\" text-anchor=\"end\">" << label << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" font-size=\"14\" text-anchor=\"middle\">t</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        os << "<polyline fill=\"none\" stroke=\"" << series[s].colour << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double ty = transform(series[s].y[i]);
            if (!std::isfinite(ty)) continue;
            os << (first ? "" : " ") << px(t[i]) << ',' << py(ty);
            first = false;
        }
        os << "\"/>\n";
        const double ly = top + 20 + 20.0 * s;
        os << "<line x1=\"" << W - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 40 << "\" y2=\""
           << ly << "\" stroke=\"" << series[s].colour << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - right + 45 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << series[s].name
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace chemo::cli
