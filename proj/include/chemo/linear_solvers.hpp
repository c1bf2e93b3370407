#pragma once

// Solvers for the implicit diffusion operator  A = I - c * Lap + diag(d)
// (c >= 0, d >= 0) with Neumann closure. A is symmetric positive definite
// and an M-matrix, so its inverse is nonnegative.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "chemo/errors.hpp"
#include "chemo/grid.hpp"

namespace chemo {

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

namespace detail {

inline double reaction_diag(std::span<const double> d, std::size_t k) { return d.empty() ? 0.0 : d[k]; }

/// Without a reaction diagonal A 1 = 1 and the face terms telescope, so
/// sum(A x) = sum(x). Shifting x by a constant makes sum(x) = sum(rhs) exactly.
inline void restore_total(std::span<const double> d, std::span<const double> rhs, std::span<double> x) {
    if (!d.empty()) return;
    double defect = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) defect += rhs[k] - x[k];
    const double shift = defect / static_cast<double>(x.size());
    for (double& xi : x) xi += shift;
}

}  // namespace detail

/// y = A x
inline void apply_diffusion_operator(const Grid& g, double c, std::span<const double> d,
                                     std::span<const double> x, std::span<double> y) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = (1.0 + detail::reaction_diag(d, k)) * x[k];
    const std::array<double, 2> w{c / (g.h(0) * g.h(0)), c / (g.h(1) * g.h(1))};
    detail::for_each_interior_face(g, [&](std::size_t lo, std::size_t hi, int axis) {
        const double flux = w[axis] * (x[hi] - x[lo]);
        y[lo] -= flux;
        y[hi] += flux;
    });
}

/// Direct Thomas solve for the 1D operator; `x` receives the solution.
inline SolveStats solve_tridiagonal(const Grid& g, double c, std::span<const double> d,
                                    std::span<const double> rhs, std::span<double> x) {
    const int n = g.cells(0);
    const double w = c / (g.h(0) * g.h(0));
    std::vector<double> upper(n), rhs_mod(n);
    auto diag = [&](int i) {
        const int neighbours = (i == 0 || i == n - 1) ? 1 : 2;
        return 1.0 + detail::reaction_diag(d, i) + neighbours * w;
    };
    // off-diagonals are -w everywhere
    double denom = diag(0);
    upper[0] = -w / denom;
    rhs_mod[0] = rhs[0] / denom;
    for (int i = 1; i < n; ++i) {
        denom = diag(i) + w * upper[i - 1];
        upper[i] = -w / denom;
        rhs_mod[i] = (rhs[i] + w * rhs_mod[i - 1]) / denom;
    }
    x[n - 1] = rhs_mod[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = rhs_mod[i] - upper[i] * x[i + 1];
    return {};
}

/// Jacobi-preconditioned conjugate gradients. `x` holds the initial guess on
/// entry. With `d` empty the result is projected so that its sum matches the
/// right-hand side. Throws SolverError when `max_iterations` is exhausted.
inline SolveStats solve_cg(const Grid& g, double c, std::span<const double> d,
                           std::span<const double> rhs, std::span<double> x, double rel_tol,
                           int max_iterations = 10000) {
    const std::size_t n = rhs.size();
    std::vector<double> r(n), z(n), p(n), ap(n), inv_diag(n, 0.0);

    const std::array<double, 2> w{c / (g.h(0) * g.h(0)), c / (g.h(1) * g.h(1))};
    for (std::size_t k = 0; k < n; ++k) inv_diag[k] = 1.0 + detail::reaction_diag(d, k);
    detail::for_each_interior_face(g, [&](std::size_t lo, std::size_t hi, int axis) {
        inv_diag[lo] += w[axis];
        inv_diag[hi] += w[axis];
    });
    for (double& m : inv_diag) m = 1.0 / m;

    auto dot = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
        return s;
    };

    double rhs_norm = 0.0;
    for (double b : rhs) rhs_norm += b * b;
    rhs_norm = std::sqrt(rhs_norm);
    if (rhs_norm == 0.0) {
        for (double& xi : x) xi = 0.0;
        return {};
    }

    apply_diffusion_operator(g, c, d, x, ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - ap[k];
    double res = std::sqrt(dot(r, r)) / rhs_norm;
    if (res <= rel_tol) {
        detail::restore_total(d, rhs, x);
        return {0, res};
    }

    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iterations; ++it) {
        apply_diffusion_operator(g, c, d, p, ap);
        const double alpha = rz / dot(p, ap);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        res = std::sqrt(dot(r, r)) / rhs_norm;
        if (res <= rel_tol) {
            detail::restore_total(d, rhs, x);
            return {it, res};
        }
        for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    throw SolverError("cg: no convergence after " + std::to_string(max_iterations) +
                          " iterations, relative residual " + std::to_string(res),
                      res, max_iterations);
}

/// Dispatches to the direct solver in 1D and CG in 2D.
inline SolveStats solve_diffusion(const Grid& g, double c, std::span<const double> d,
                                  std::span<const double> rhs, std::span<double> x, double rel_tol,
                                  int max_iterations = 10000) {
    if (g.dim() == 1) return solve_tridiagonal(g, c, d, rhs, x);
    return solve_cg(g, c, d, rhs, x, rel_tol, max_iterations);
}

}  // namespace chemo
