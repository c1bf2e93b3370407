#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "chemo/grid.hpp"

using namespace chemo;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

double weighted_sum(const Field& f) {
    double s = 0.0;
    for (double x : f.values()) s += x;
    return s * f.grid().cell_volume();
}

double weighted_abs_sum(const Field& f) {
    double s = 0.0;
    for (double x : f.values()) s += std::abs(x);
    return s * f.grid().cell_volume();
}

Field random_field(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Field f(g);
    for (double& x : f.values()) x = d(rng);
    return f;
}

}  // namespace

TEST(Grid, GeometryAndMeasure) {
    const Grid g = Grid::rectangle(2.0, 0.5, 8, 4);
    EXPECT_EQ(g.dim(), 2);
    EXPECT_EQ(g.size(), 32u);
    EXPECT_DOUBLE_EQ(g.h(0), 0.25);
    EXPECT_DOUBLE_EQ(g.h(1), 0.125);
    EXPECT_DOUBLE_EQ(g.measure(), 1.0);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.25 * 0.125);
    EXPECT_DOUBLE_EQ(g.center(0, 0), 0.125);

    const Grid line = Grid::line(3.0, 6);
    EXPECT_EQ(line.dim(), 1);
    EXPECT_DOUBLE_EQ(line.measure(), 3.0);
    EXPECT_DOUBLE_EQ(line.cell_volume(), 0.5);
}

TEST(Grid, RejectsInvalidShapes) {
    EXPECT_THROW(Grid(3, {1.0, 1.0}, {8, 8}), PreconditionError);
    EXPECT_THROW(Grid::line(0.0, 8), PreconditionError);
    EXPECT_THROW(Grid::line(-1.0, 8), PreconditionError);
    EXPECT_THROW(Grid::line(1.0, 3), PreconditionError);
    EXPECT_THROW(Grid::rectangle(1.0, 1.0, 8, 2), PreconditionError);
    EXPECT_NO_THROW(Grid::line(1.0, 4));
}

TEST(Field, SizeMismatchIsStructuralError) {
    const Grid g = Grid::line(1.0, 8);
    EXPECT_THROW(Field(g, std::vector<double>(7, 1.0)), StructuralError);
    EXPECT_NO_THROW(Field(g, std::vector<double>(8, 1.0)));
}

TEST(Laplacian, AnnihilatesConstants) {
    for (const Grid& g : {Grid::line(1.0, 17), Grid::rectangle(2.0, 1.0, 9, 6)}) {
        const Field lap = laplacian(Field(g, 5.0));
        for (double x : lap.values()) EXPECT_EQ(x, 0.0);
    }
}

TEST(Laplacian, NeumannEigenfunctionSecondOrder) {
    std::vector<double> errors;
    for (int n : {64, 128, 256}) {
        const Grid g = Grid::line(1.0, n);
        const Field f = Field::sample(g, [](double x) { return std::cos(pi * x); });
        const Field exact = Field::sample(g, [](double x) { return -pi * pi * std::cos(pi * x); });
        errors.push_back(max_abs_diff(laplacian(f), exact));
    }
    // O(h^2): 256 cells is well below 1e-3
    EXPECT_LT(errors.back(), 1e-3);
    for (std::size_t i = 1; i < errors.size(); ++i) {
        EXPECT_NEAR(std::log2(errors[i - 1] / errors[i]), 2.0, 0.2);
    }
}

TEST(Laplacian, SecondOrderIn2D) {
    std::vector<double> errors;
    for (int n : {16, 32, 64}) {
        const Grid g = Grid::rectangle(1.0, 2.0, n, 2 * n);
        const Field f = Field::sample(g, [](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); });
        const Field exact = Field::sample(
            g, [](double x, double y) { return -2.0 * pi * pi * std::cos(pi * x) * std::cos(pi * y); });
        errors.push_back(max_abs_diff(laplacian(f), exact));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
        EXPECT_NEAR(std::log2(errors[i - 1] / errors[i]), 2.0, 0.2);
    }
}

TEST(Laplacian, ExactOnQuadraticInterior) {
    const Grid g = Grid::line(1.0, 20);
    const Field f = Field::sample(g, [](double x) { return x * x; });
    const Field lap = laplacian(f);
    for (int i = 1; i + 1 < 20; ++i) EXPECT_NEAR(lap[i], 2.0, 1e-9);
    // mirrored ghosts: only one neighbour contributes at the ends
    const double h = g.h(0);
    EXPECT_NEAR(lap[0], (f[1] - f[0]) / (h * h), 1e-9);
    EXPECT_NEAR(lap[19], (f[18] - f[19]) / (h * h), 1e-9);
    // the left mirror happens to reproduce 2 for x^2; the right one does not
    EXPECT_NEAR(lap[0], 2.0, 1e-9);
    EXPECT_GT(std::abs(lap[19] - 2.0), 1.0);
}

TEST(Laplacian, Conservative) {
    std::mt19937_64 rng(11);
    for (const Grid& g : {Grid::line(1.3, 50), Grid::rectangle(1.0, 0.7, 13, 9)}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Field lap = laplacian(random_field(g, rng, 0.0, 3.0));
            EXPECT_LE(std::abs(weighted_sum(lap)), 1e-12 * weighted_abs_sum(lap));
        }
    }
}

TEST(Chemotaxis, ZeroForConstantSignal) {
    const Grid g = Grid::rectangle(1.0, 1.0, 8, 8);
    std::mt19937_64 rng(3);
    const Field u = random_field(g, rng, 0.0, 2.0);
    for (auto scheme : {FaceScheme::Central, FaceScheme::Upwind}) {
        const Field out = chemotaxis_divergence(u, Field(g, 4.2), 1.5, scheme);
        for (double x : out.values()) EXPECT_EQ(x, 0.0);
    }
}

TEST(Chemotaxis, ConstantDensityMatchesScaledLaplacian) {
    std::mt19937_64 rng(5);
    for (const Grid& g : {Grid::line(1.0, 40), Grid::rectangle(1.0, 2.0, 10, 12)}) {
        const Field v = random_field(g, rng, 0.0, 1.0);
        const double c = 2.5, chi = 0.7;
        const Field out = chemotaxis_divergence(Field(g, c), v, chi);
        const Field lap = laplacian(v);
        // the face-flux divergence of c grad v enters the u equation with a minus sign
        for (std::size_t k = 0; k < g.size(); ++k) {
            EXPECT_NEAR(out[k], -chi * c * lap[k], 1e-12 * std::max(1.0, std::abs(chi * c * lap[k])));
        }
    }
}

TEST(Chemotaxis, Conservative) {
    std::mt19937_64 rng(17);
    for (const Grid& g : {Grid::line(1.0, 64), Grid::rectangle(1.0, 1.0, 16, 16)}) {
        for (auto scheme : {FaceScheme::Central, FaceScheme::Upwind}) {
            const Field out =
                chemotaxis_divergence(random_field(g, rng, 0.0, 2.0), random_field(g, rng, 0.0, 2.0), 3.0, scheme);
            EXPECT_LE(std::abs(weighted_sum(out)), 1e-12 * weighted_abs_sum(out));
        }
    }
}

TEST(Chemotaxis, UpwindTakesDonorCell) {
    const Grid g = Grid::line(1.0, 4);
    const Field u(g, std::vector<double>{1.0, 2.0, 3.0, 4.0});
    const Field v(g, std::vector<double>{0.0, 1.0, 1.0, 1.0});
    const Field out = chemotaxis_divergence(u, v, 1.0, FaceScheme::Upwind);
    const double inv_h2 = 16.0;
    // signal rises across face 0|1, so the flux carries u out of cell 0
    EXPECT_DOUBLE_EQ(out[0], -1.0 * inv_h2);
    EXPECT_DOUBLE_EQ(out[1], 1.0 * inv_h2);
    EXPECT_DOUBLE_EQ(out[2], 0.0);
    const Field central = chemotaxis_divergence(u, v, 1.0, FaceScheme::Central);
    EXPECT_DOUBLE_EQ(central[0], -1.5 * inv_h2);
}

TEST(Chemotaxis, RejectsMismatchAndNonPositiveChi) {
    const Grid a = Grid::line(1.0, 8), b = Grid::line(1.0, 9);
    EXPECT_THROW(chemotaxis_divergence(Field(a, 1.0), Field(b, 1.0), 1.0), StructuralError);
    EXPECT_THROW(chemotaxis_divergence(Field(a, 1.0), Field(a, 1.0), 0.0), PreconditionError);
}

TEST(IntegratePower, ConstantFieldExact) {
    const Grid g = Grid::rectangle(2.0, 1.5, 7, 5);
    EXPECT_DOUBLE_EQ(integrate_power(Field(g, 1.5), 3.0), std::pow(1.5, 3.0) * 3.0);
    EXPECT_DOUBLE_EQ(integrate_power(Field(g, 0.0), 2.0), 0.0);
}

TEST(IntegratePower, QuadraticMoment) {
    const Grid g = Grid::line(1.0, 512);
    const Field f = Field::sample(g, [](double x) { return x; });
    // midpoint rule error for x^2 is h^2 / 12
    EXPECT_NEAR(integrate_power(f, 2.0), 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(integrate_power(f, 2.0) - 1.0 / 3.0, -g.h(0) * g.h(0) / 12.0, 1e-15);
}

TEST(IntegratePower, GammaOneIsMass) {
    std::mt19937_64 rng(1);
    const Grid g = Grid::line(2.0, 30);
    const Field f = random_field(g, rng, 0.0, 5.0);
    EXPECT_NEAR(integrate_power(f, 1.0), total(f), 1e-14);
}

TEST(IntegratePower, RejectsNegativeCellAndSmallExponent) {
    const Grid g = Grid::line(1.0, 8);
    Field f(g, 1.0);
    f[5] = -0.1;
    try {
        integrate_power(f, 1.0);
        FAIL() << "expected PreconditionError";
    } catch (const PreconditionError& e) {
        EXPECT_NE(std::string(e.what()).find("cell 5"), std::string::npos);
    }
    EXPECT_THROW(integrate_power(Field(g, 1.0), 0.5), PreconditionError);
}

TEST(IntegratePower, MonotoneInGammaOnUnitInterval) {
    std::mt19937_64 rng(23);
    const Grid g = Grid::line(1.0, 64);
    for (int trial = 0; trial < 10; ++trial) {
        const Field f = random_field(g, rng, 0.0, 1.0);
        double prev = integrate_power(f, 1.0);
        for (double gamma : {1.3, 2.0, 2.7, 4.0}) {
            const double cur = integrate_power(f, gamma);
            EXPECT_LE(cur, prev);
            prev = cur;
        }
    }
}

TEST(Norms, ConstantField) {
    const Grid g = Grid::line(2.0, 10);
    const std::vector<double> ks{3.0};
    const NormSummary n = norms(Field(g, 1.0), ks);
    EXPECT_NEAR(n.lk.at(3.0), std::cbrt(2.0), 1e-14);
    EXPECT_EQ(n.sup, 1.0);
    EXPECT_EQ(n.min, 1.0);
}

TEST(Norms, CosineSupAtLeftCell) {
    const Grid g = Grid::line(1.0, 128);
    const Field f = Field::sample(g, [](double x) { return std::cos(pi * x); });
    const std::vector<double> ks{1.0, 2.0};
    const NormSummary n = norms(f, ks);
    EXPECT_EQ(n.sup, f[0]);
    EXPECT_NEAR(n.sup, 1.0, g.h(0) * g.h(0) * pi * pi);
    EXPECT_NEAR(n.lk.at(2.0), std::sqrt(0.5), 1e-12);
}

TEST(Norms, MinOfNonnegativeField) {
    std::mt19937_64 rng(9);
    const Grid g = Grid::rectangle(1.0, 1.0, 6, 6);
    const NormSummary n = norms(random_field(g, rng, 0.0, 1.0), std::vector<double>{1.0});
    EXPECT_GE(n.min, 0.0);
}

TEST(GradientHelpers, FaceGradientAndEnergy) {
    const Grid g = Grid::line(1.0, 4);
    const Field v(g, std::vector<double>{0.0, 0.25, 0.25, 1.0});
    EXPECT_DOUBLE_EQ(max_face_gradient(v, 0), 3.0);
    // (1^2 + 0 + 3^2) * h
    EXPECT_DOUBLE_EQ(gradient_energy(v), 10.0 * 0.25);
}
