#pragma once

// Cell-centred finite-volume discretisation of a 1D interval or 2D rectangle
// with homogeneous Neumann (zero normal flux) closure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "chemo/errors.hpp"

namespace chemo {

/// How the cell density is reconstructed on a face for the chemotactic flux.
enum class FaceScheme { Central, Upwind };

/// Uniform Cartesian mesh. A 1D grid is stored as nx x 1 with a unit second
/// extent so that volume and indexing formulas are shared with 2D.
class Grid {
public:
    Grid(int dim, std::array<double, 2> extents, std::array<int, 2> cells)
        : dim_(dim), extents_(extents), cells_(cells) {
        if (dim != 1 && dim != 2) {
            throw PreconditionError("grid: dim must be 1 or 2, got " + std::to_string(dim));
        }
        if (dim == 1) {
            extents_[1] = 1.0;
            cells_[1] = 1;
        }
        for (int axis = 0; axis < dim; ++axis) {
            if (!(extents_[axis] > 0.0) || !std::isfinite(extents_[axis])) {
                throw PreconditionError("grid: extent along axis " + std::to_string(axis) +
                                        " must be positive");
            }
            if (cells_[axis] < 4) {
                throw PreconditionError("grid: need at least 4 cells along axis " +
                                        std::to_string(axis));
            }
        }
        for (int axis = 0; axis < 2; ++axis) {
            h_[axis] = extents_[axis] / cells_[axis];
        }
    }

    static Grid line(double length, int cells) { return Grid(1, {length, 1.0}, {cells, 1}); }

    static Grid rectangle(double lx, double ly, int nx, int ny) {
        return Grid(2, {lx, ly}, {nx, ny});
    }

    int dim() const noexcept { return dim_; }
    double extent(int axis) const { return extents_.at(axis); }
    int cells(int axis) const { return cells_.at(axis); }
    double h(int axis) const { return h_.at(axis); }
    double min_h() const noexcept { return dim_ == 1 ? h_[0] : std::min(h_[0], h_[1]); }

    std::size_t size() const noexcept {
        return static_cast<std::size_t>(cells_[0]) * static_cast<std::size_t>(cells_[1]);
    }

    double cell_volume() const noexcept { return h_[0] * h_[1]; }

    /// |Omega|
    double measure() const noexcept { return extents_[0] * extents_[1]; }

    std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_[0]) +
               static_cast<std::size_t>(i);
    }

    double center(int axis, int i) const { return (i + 0.5) * h_.at(axis); }

    bool operator==(const Grid& other) const noexcept {
        return dim_ == other.dim_ && extents_ == other.extents_ && cells_ == other.cells_;
    }

private:
    int dim_;
    std::array<double, 2> extents_;
    std::array<int, 2> cells_;
    std::array<double, 2> h_{};
};

/// One scalar per cell, interpreted as a cell average.
class Field {
public:
    explicit Field(const Grid& grid, double value = 0.0) : grid_(grid), values_(grid.size(), value) {}

    Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) {
            throw StructuralError("field: " + std::to_string(values_.size()) +
                                  " values for a grid of " + std::to_string(grid_.size()) +
                                  " cells");
        }
    }

    /// Samples `fn` at cell centres; `fn` takes (x) on 1D grids and (x, y) on 2D grids.
    template <class Fn>
    static Field sample(const Grid& grid, Fn&& fn) {
        Field out(grid);
        for (int j = 0; j < grid.cells(1); ++j) {
            for (int i = 0; i < grid.cells(0); ++i) {
                const double x = grid.center(0, i);
                if constexpr (std::is_invocable_r_v<double, Fn, double, double>) {
                    out[grid.index(i, j)] = fn(x, grid.center(1, j));
                } else {
                    out[grid.index(i, j)] = fn(x);
                }
            }
        }
        return out;
    }

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    double max() const { return *std::max_element(values_.begin(), values_.end()); }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }

    bool all_finite() const noexcept {
        return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
    }

private:
    Grid grid_;
    std::vector<double> values_;
};

namespace detail {

inline void require_same_grid(const Field& a, const Field& b, const char* op) {
    if (!(a.grid() == b.grid())) {
        throw StructuralError(std::string(op) + ": fields live on different grids");
    }
}

/// Calls fn(lo, hi, axis) once per interior face; boundary faces carry no flux.
template <class Fn>
void for_each_interior_face(const Grid& g, Fn&& fn) {
    const int nx = g.cells(0);
    const int ny = g.cells(1);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            fn(g.index(i, j), g.index(i + 1, j), 0);
        }
    }
    if (g.dim() == 2) {
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                fn(g.index(i, j), g.index(i, j + 1), 1);
            }
        }
    }
}

}  // namespace detail

/// Five-point (three in 1D) Laplacian with mirrored ghost cells. Written in
/// flux form so that the volume-weighted sum vanishes up to rounding.
inline Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    Field out(g);
    const std::array<double, 2> inv_h2{1.0 / (g.h(0) * g.h(0)), 1.0 / (g.h(1) * g.h(1))};
    detail::for_each_interior_face(g, [&](std::size_t lo, std::size_t hi, int axis) {
        const double flux = (f[hi] - f[lo]) * inv_h2[axis];
        out[lo] += flux;
        out[hi] -= flux;
    });
    return out;
}

/// Discrete -chi * div(u grad v) assembled from face fluxes
/// chi * u_face * (v_hi - v_lo) / h.
inline Field chemotaxis_divergence(const Field& u, const Field& v, double chi,
                                   FaceScheme scheme = FaceScheme::Central) {
    detail::require_same_grid(u, v, "chemotaxis_divergence");
    if (!(chi > 0.0)) {
        throw PreconditionError("chemotaxis_divergence: chi must be positive");
    }
    const Grid& g = u.grid();
    Field out(g);
    const std::array<double, 2> inv_h2{1.0 / (g.h(0) * g.h(0)), 1.0 / (g.h(1) * g.h(1))};
    detail::for_each_interior_face(g, [&](std::size_t lo, std::size_t hi, int axis) {
        const double dv = v[hi] - v[lo];
        double u_face;
        if (scheme == FaceScheme::Central) {
            u_face = 0.5 * (u[lo] + u[hi]);
        } else {
            // cells drift up the signal gradient
            u_face = dv > 0.0 ? u[lo] : u[hi];
        }
        // cell flux from lo to hi, divided by h once more for the divergence
        const double flux = chi * u_face * dv * inv_h2[axis];
        out[lo] -= flux;
        out[hi] += flux;
    });
    return out;
}

/// Midpoint quadrature of f^gamma over the domain. Rejects negative cells.
inline double integrate_power(const Field& f, double gamma) {
    if (!(gamma >= 1.0)) {
        throw PreconditionError("integrate_power: exponent must be >= 1");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double x = f[k];
        if (x < 0.0) {
            throw PreconditionError("integrate_power: negative value " + std::to_string(x) +
                                    " at cell " + std::to_string(k));
        }
        sum += gamma == 1.0 ? x : std::pow(x, gamma);
    }
    return sum * f.grid().cell_volume();
}

/// Volume-weighted sum without a sign check.
inline double total(const Field& f) {
    double sum = 0.0;
    for (double x : f.values()) sum += x;
    return sum * f.grid().cell_volume();
}

struct NormSummary {
    std::map<double, double> lk;
    double sup = 0.0;
    double min = 0.0;
};

inline NormSummary norms(const Field& f, std::span<const double> ks) {
    NormSummary out;
    out.sup = f.max();
    out.min = f.min();
    const double vol = f.grid().cell_volume();
    for (double k : ks) {
        double sum = 0.0;
        for (double x : f.values()) sum += std::pow(std::abs(x), k);
        out.lk[k] = std::pow(sum * vol, 1.0 / k);
    }
    return out;
}

/// Largest |difference quotient| across interior faces normal to `axis`.
inline double max_face_gradient(const Field& v, int axis) {
    double m = 0.0;
    const Grid& g = v.grid();
    detail::for_each_interior_face(g, [&](std::size_t lo, std::size_t hi, int a) {
        if (a == axis) m = std::max(m, std::abs(v[hi] - v[lo]) / g.h(axis));
    });
    return m;
}

/// sum over faces of |grad f|^2 * (face dual volume); the discrete ||grad f||_2^2.
inline double gradient_energy(const Field& f) {
    const Grid& g = f.grid();
    double sum = 0.0;
    detail::for_each_interior_face(g, [&](std::size_t lo, std::size_t hi, int axis) {
        const double d = (f[hi] - f[lo]) / g.h(axis);
        sum += d * d;
    });
    return sum * g.cell_volume();
}

}  // namespace chemo
