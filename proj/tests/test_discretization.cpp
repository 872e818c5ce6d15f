#include <shell_lane_emden/discretization.hpp>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sle;

namespace {

StripGrid radial_grid(double a, double b, int m, int n) {
    GridSpec spec;
    spec.a = a;
    spec.b = b;
    spec.m = m;
    spec.d = 0;
    spec.n_r = n;
    return build_grid(spec);
}

StripGrid strip(int m, int d, int n_r, int n_s, double Z) {
    GridSpec spec;
    spec.m = m;
    spec.d = d;
    spec.n_r = n_r;
    spec.n_s = n_s;
    spec.Z = Z;
    return build_grid(spec);
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

double order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

} // namespace

TEST(BuildGrid, CellCentres) {
    const StripGrid g = build_grid(ShellConfig(3, 2, 1, 2, 3), 4, 0, 0.0);
    ASSERT_EQ(g.n_r(), 4);
    const double want[] = {1.125, 1.375, 1.625, 1.875};
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g.r_nodes[static_cast<std::size_t>(i)], want[i]);
    EXPECT_FALSE(g.has_s_axis());
    EXPECT_EQ(g.size(), 4u);
}

TEST(BuildGrid, HalfLineNodes) {
    const StripGrid g = build_grid(ShellConfig(4, 1, 1, 2, 3), 4, 4, 8.0);
    EXPECT_EQ(g.s_axis, SAxis::half_line);
    const double want[] = {1, 3, 5, 7};
    for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(g.s_at(j), want[j]);
}

TEST(BuildGrid, FullLineForOneDimensionalZ) {
    const StripGrid g = build_grid(ShellConfig(3, 1, 1, 2, 3), 4, 8, 2.0);
    EXPECT_EQ(g.s_axis, SAxis::full_line);
    EXPECT_DOUBLE_EQ(g.s_at(0), -1.75);
    EXPECT_DOUBLE_EQ(g.s_at(7), 1.75);
}

TEST(BuildGrid, RejectsBadSizes) {
    const ShellConfig c(4, 1, 1, 2, 3);
    EXPECT_THROW(build_grid(c, 3, 8, 1.0), DomainError);
    EXPECT_THROW(build_grid(c, 8, 3, 1.0), DomainError);
    EXPECT_THROW(build_grid(c, 8, 8, 0.0), DomainError);
    EXPECT_THROW(build_grid(c, 8, 8, -1.0), DomainError);
}

TEST(WeightAt, Examples) {
    EXPECT_DOUBLE_EQ(weight_at(2.0, 0.0, 1, 1), 2.0);
    EXPECT_DOUBLE_EQ(weight_at(1.5, 3.0, 1, 3), 13.5);
    for (double t : {0.3, 1.0, 7.5}) EXPECT_DOUBLE_EQ(weight_at(t, 0.0, 0, 1), 1.0);
    EXPECT_THROW(weight_at(1.5, 0.0, 1, 2), DomainError);
}

TEST(Field, ValidatesLengthAndFiniteness) {
    const StripGrid g = strip(1, 2, 4, 4, 1.0);
    EXPECT_THROW(Field(g, std::vector<double>(15, 0.0)), DomainError);
    std::vector<double> v(16, 0.0);
    v[3] = NAN;
    EXPECT_THROW(Field(g, v), DomainError);
}

TEST(AssembleOperator, ExactSymmetry) {
    const DiscreteOperator op = assemble_operator(strip(1, 2, 16, 16, 3.0));
    for (std::size_t i = 0; i < op.size(); ++i)
        for (std::size_t k = op.matrix.row_ptr[i]; k < op.matrix.row_ptr[i + 1]; ++k)
            EXPECT_EQ(op.matrix.val[k], op.matrix.at(op.matrix.col[k], i));
}

TEST(AssembleOperator, UnweightedStripIsFivePointLaplacianTimesCellMeasure) {
    const StripGrid g = strip(0, 1, 8, 8, 1.0);
    const DiscreteOperator op = assemble_operator(g);
    const double hr = g.h_r, hs = g.h_s, cell = hr * hs;
    for (int j = 1; j + 1 < g.n_s(); ++j)
        for (int i = 1; i + 1 < g.n_r(); ++i) {
            const std::size_t c = g.index(i, j);
            EXPECT_NEAR(op.matrix.at(c, c), cell * (2 / (hr * hr) + 2 / (hs * hs)), 1e-12);
            EXPECT_NEAR(op.matrix.at(c, g.index(i + 1, j)), -cell / (hr * hr), 1e-12);
            EXPECT_NEAR(op.matrix.at(c, g.index(i, j + 1)), -cell / (hs * hs), 1e-12);
            EXPECT_DOUBLE_EQ(op.cell_measure[c], cell);
        }
}

TEST(AssembleOperator, MMatrix) {
    for (const StripGrid& g : {strip(1, 2, 12, 10, 2.0), strip(2, 1, 9, 14, 3.0), radial_grid(1, 2, 3, 20)}) {
        const DiscreteOperator op = assemble_operator(g);
        for (std::size_t i = 0; i < op.size(); ++i) {
            double off = 0.0, diag = 0.0;
            for (std::size_t k = op.matrix.row_ptr[i]; k < op.matrix.row_ptr[i + 1]; ++k) {
                if (op.matrix.col[k] == i) {
                    diag = op.matrix.val[k];
                } else {
                    EXPECT_LE(op.matrix.val[k], 0.0);
                    off += std::abs(op.matrix.val[k]);
                }
            }
            EXPECT_GE(diag, off * (1 - 1e-14));
        }
    }
}

TEST(AssembleOperator, SmallestEigenvalueMatchesDenseSolver) {
    const StripGrid g = radial_grid(1, 2, 1, 64);
    const DiscreteOperator op = assemble_operator(g);
    const std::size_t n = op.size();

    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = op.matrix.row_ptr[i]; k < op.matrix.row_ptr[i + 1]; ++k)
            dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(op.matrix.col[k])) = op.matrix.val[k];
    const double lambda_dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues()(0);

    // Inverse iteration with the library's CG solver.
    std::vector<double> x(n, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double nx = norm2(x);
        for (double& xi : x) xi /= nx;
        lambda = quadratic_form(op, x);
        x = conjugate_gradient(op.matrix, x, 1e-14).x;
    }
    EXPECT_NEAR(lambda / lambda_dense, 1.0, 1e-10);
}

TEST(DirichletEnergy, MatchesQuadraticFormOnRandomFields) {
    const DiscreteOperator op = assemble_operator(strip(1, 2, 32, 24, 4.0));
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const std::vector<double> v = random_values(op.size(), seed);
        const double q = quadratic_form(op, v);
        EXPECT_NEAR(dirichlet_energy(op, v), q, 1e-13 * q);
    }
}

TEST(WeightedH1Norm, ZeroField) {
    const StripGrid g = strip(1, 2, 8, 8, 1.0);
    EXPECT_EQ(weighted_h1_norm(Field(g)), 0.0);
}

TEST(WeightedH1Norm, InteriorSpike) {
    const StripGrid g = strip(0, 1, 8, 8, 1.0);
    Field v(g);
    v.values[g.index(3, 4)] = 1.0;
    const double want = std::sqrt(2 * g.h_s / g.h_r + 2 * g.h_r / g.h_s);
    EXPECT_NEAR(weighted_h1_norm(v), want, 1e-14 * want);
}

TEST(WeightedH1Norm, SineConvergesAtSecondOrder) {
    const double exact = M_PI / std::sqrt(2.0);
    std::vector<double> err;
    for (int n : {16, 32, 64, 128}) {
        const Field v = sample_field(radial_grid(1, 2, 0, n), [](double r, double) { return std::sin(M_PI * (r - 1)); });
        err.push_back(std::abs(weighted_h1_norm(v) - exact));
    }
    for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(order(err[k - 1], err[k]), 1.8);
}

TEST(WeightedLpNorm, Examples) {
    const StripGrid g = radial_grid(1, 2, 0, 16);
    EXPECT_EQ(weighted_lp_norm(Field(g), 3.0), 0.0);
    const Field one = sample_field(g, [](double, double) { return 1.0; });
    EXPECT_NEAR(weighted_lp_norm(one, 2.0), 1.0, 1e-12);
    EXPECT_THROW(weighted_lp_norm(one, 0.5), DomainError);
}

TEST(WeightedLpNorm, LinearProfileConvergesAtSecondOrder) {
    // m = 1 folds |S^1| = 2 pi into the measure.
    const double exact = std::sqrt(2 * M_PI * 15.0 / 4.0);
    std::vector<double> err;
    for (int n : {16, 32, 64, 128}) {
        const Field v = sample_field(radial_grid(1, 2, 1, n), [](double r, double) { return r; });
        err.push_back(std::abs(weighted_lp_norm(v, 2.0) - exact));
    }
    EXPECT_LT(err.back(), 1e-4);
    for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(order(err[k - 1], err[k]), 1.8);
}

TEST(SolveSpd, RecoversKnownSolution) {
    const StripGrid g = strip(1, 2, 16, 16, 2.0);
    const DiscreteOperator op = assemble_operator(g);
    const std::vector<double> w = random_values(op.size(), 7);
    const Field rhs(g, op.matrix * w);
    const Field x = solve_spd(op, rhs, 1e-12);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(x.values[i], w[i], 1e-9);
}

TEST(SolveSpd, ZeroRhs) {
    const StripGrid g = strip(1, 2, 8, 8, 2.0);
    const Field x = solve_spd(assemble_operator(g), Field(g), 1e-12);
    for (double xi : x.values) EXPECT_EQ(xi, 0.0);
}

TEST(SolveSpd, PoissonOnUnitInterval) {
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const StripGrid g = radial_grid(0, 1, 0, n);
        const DiscreteOperator op = assemble_operator(g);
        const Field rhs(g, op.cell_measure);
        const Field x = solve_spd(op, rhs, 1e-13);
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = g.r_nodes[static_cast<std::size_t>(i)];
            e = std::max(e, std::abs(x.values[static_cast<std::size_t>(i)] - r * (1 - r) / 2));
        }
        err.push_back(e);
    }
    EXPECT_LT(err.back(), 1e-4);
    for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(order(err[k - 1], err[k]), 1.8);
}

TEST(SolveSpd, MaximumPrinciple) {
    const StripGrid g = strip(1, 2, 24, 24, 3.0);
    const DiscreteOperator op = assemble_operator(g);
    std::vector<double> rhs = random_values(op.size(), 11);
    for (double& x : rhs) x = std::abs(x) * (x > 0.5 ? 1.0 : 0.0);
    const Field x = solve_spd(op, Field(g, rhs), 1e-12);
    double mn = 0.0, mx = 0.0;
    for (double xi : x.values) {
        mn = std::min(mn, xi);
        mx = std::max(mx, xi);
    }
    EXPECT_GE(mn, -1e-13 * mx);
}

TEST(SolveSpd, ThrowsWithHistoryAtIterationCap) {
    const StripGrid g = strip(1, 2, 16, 16, 2.0);
    const DiscreteOperator op = assemble_operator(g);
    const std::vector<double> rhs = random_values(op.size(), 3);
    try {
        conjugate_gradient(op.matrix, rhs, 1e-12, std::nullopt, 2);
        FAIL() << "expected LinearSolveError";
    } catch (const LinearSolveError& e) {
        EXPECT_FALSE(e.residual_history.empty());
    }
}
