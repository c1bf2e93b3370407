#pragma once

// Empirical check of the interpolation inequality
//   ||phi||_q^q <= C0 ||phi||_r^delta + eps ||grad phi||_2^2 + ||phi||_2^2
// on random smooth nonnegative 1D grid functions. For each sample the
// smallest C0 making the inequality hold is computed; the fitted constant for
// a given eps is the maximum over samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "chemo/grid.hpp"
#include "chemo/regimes.hpp"

namespace chemo {

struct InequalityOptions {
    std::size_t samples = 200;
    int cells = 256;
    double length = 1.0;
    std::uint64_t seed = 20240601;
    std::vector<double> eps_values{1.0, 0.1};
    double c0_cap = 1e12;  // a sample needing more than this counts as a violation
};

struct InequalityFit {
    double eps = 0.0;
    double c0_fitted = 0.0;  // max over samples of the required C0
    double c0_median = 0.0;
    double c0_min = 0.0;
    std::size_t worst_sample = 0;
    std::size_t violations = 0;
};

struct InequalityReport {
    GNExponents exponents;
    std::vector<InequalityFit> fits;

    bool violated() const {
        return std::any_of(fits.begin(), fits.end(), [](const InequalityFit& f) { return f.violations > 0; });
    }
};

/// Smooth nonnegative Neumann-compatible cosine series with random modes and scale.
inline Field random_smooth_profile(const Grid& g, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> modes(1, 8);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int k_max = modes(rng);
    std::vector<double> coeff(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) coeff[k] = normal(rng) / (1.0 + k);
    const double length = g.extent(0);
    Field f = Field::sample(g, [&](double x) {
        double s = 0.0;
        for (int k = 0; k <= k_max; ++k) s += coeff[k] * std::cos(k * std::numbers::pi * x / length);
        return s;
    });
    const double lo = f.min();
    const double lift = unit(rng);
    const double scale = std::pow(10.0, -2.0 + 4.0 * unit(rng));
    for (double& x : f.values()) x = scale * (x - lo + lift);
    return f;
}

inline InequalityReport check_interpolation(double q, double r, int n,
                                            const InequalityOptions& opts = {}) {
    InequalityReport rep;
    rep.exponents = gn_exponents(q, r, n);
    if (!rep.exponents.admissible) return rep;
    if (opts.samples == 0) throw PreconditionError("check_interpolation: need at least one sample");

    const Grid g = Grid::line(opts.length, opts.cells);
    std::mt19937_64 rng(opts.seed);
    const double delta = rep.exponents.delta;

    struct Terms {
        double lhs, lr_delta, grad, l2sq;
    };
    std::vector<Terms> terms;
    terms.reserve(opts.samples);
    const std::vector<double> ks{q, r, 2.0};
    for (std::size_t s = 0; s < opts.samples; ++s) {
        const Field phi = random_smooth_profile(g, rng);
        const NormSummary nrm = norms(phi, ks);
        terms.push_back({std::pow(nrm.lk.at(q), q), std::pow(nrm.lk.at(r), delta),
                         gradient_energy(phi), std::pow(nrm.lk.at(2.0), 2.0)});
    }

    for (double eps : opts.eps_values) {
        InequalityFit fit;
        fit.eps = eps;
        std::vector<double> needed(terms.size());
        for (std::size_t s = 0; s < terms.size(); ++s) {
            const Terms& t = terms[s];
            const double excess = t.lhs - eps * t.grad - t.l2sq;
            double c0 = 0.0;
            if (excess > 0.0) {
                c0 = t.lr_delta > 0.0 ? excess / t.lr_delta : std::numeric_limits<double>::infinity();
            }
            needed[s] = c0;
            if (!(c0 <= opts.c0_cap)) ++fit.violations;
        }
        const auto worst = std::max_element(needed.begin(), needed.end());
        fit.worst_sample = static_cast<std::size_t>(worst - needed.begin());
        fit.c0_fitted = *worst;
        fit.c0_min = *std::min_element(needed.begin(), needed.end());
        std::vector<double> sorted = needed;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        fit.c0_median = sorted[sorted.size() / 2];
        rep.fits.push_back(fit);
    }
    return rep;
}

}  // namespace chemo
