#include <shell_lane_emden/solver.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace sle;

namespace {

StripGrid radial_grid(int m, int n) {
    GridSpec spec;
    spec.m = m;
    spec.d = 0;
    spec.n_r = n;
    return build_grid(spec);
}

// Small but converged solves shared by several tests.
const MinimizerRecord& strip_solution() {
    static const MinimizerRecord rec = [] {
        const ShellConfig cfg(4, 1, 1, 2, 3);
        return ground_state(build_grid(cfg, 16, 80, 5.0), cfg, SolverConfig{});
    }();
    return rec;
}

const MinimizerRecord& line_solution() {
    static const MinimizerRecord rec = [] {
        const ShellConfig cfg(3, 1, 1, 2, 3);
        return ground_state(build_grid(cfg, 16, 96, 3.0), cfg, SolverConfig{});
    }();
    return rec;
}

} // namespace

TEST(SolverConfig, Validation) {
    SolverConfig s;
    EXPECT_NO_THROW(s.validate());
    s.energy_tol = 0;
    EXPECT_THROW(s.validate(), DomainError);
    s = SolverConfig{};
    s.max_outer = 0;
    EXPECT_THROW(s.validate(), DomainError);
    s = SolverConfig{};
    s.init = InitKind::custom;
    EXPECT_THROW(s.validate(), DomainError);
}

TEST(RescaleToSolution, Examples) {
    const StripGrid g = radial_grid(1, 8);
    const Field v = sample_field(g, [](double r, double) { return r - 1.0; });
    const Field same = rescale_to_solution(v, 1.0, 3.7);
    const Field twice = rescale_to_solution(v, 4.0, 4.0);
    const Field eight = rescale_to_solution(v, 8.0, 3.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_DOUBLE_EQ(same.values[i], v.values[i]);
        EXPECT_DOUBLE_EQ(twice.values[i], 2.0 * v.values[i]);
        EXPECT_DOUBLE_EQ(eight.values[i], 8.0 * v.values[i]);
    }
    EXPECT_THROW(rescale_to_solution(v, 0.0, 3.0), DomainError);
    EXPECT_THROW(rescale_to_solution(v, 1.0, 2.0), DomainError);
}

TEST(GroundState, StripSolutionInvariants) {
    const MinimizerRecord& rec = strip_solution();
    EXPECT_TRUE(rec.converged);
    EXPECT_GT(rec.c, 0.0);
    EXPECT_LE(rec.constraint_defect, 1e-12);
    EXPECT_LE(rec.pde_residual, SolverConfig{}.residual_tol);
    for (double x : rec.v.values) EXPECT_GE(x, 0.0);
    const double s = std::pow(rec.c, 1.0 / (3.0 - 2.0));
    for (std::size_t i = 0; i < rec.v.size(); ++i) EXPECT_DOUBLE_EQ(rec.u.values[i], s * rec.v.values[i]);
    for (std::size_t k = 1; k < rec.energy_history.size(); ++k)
        EXPECT_LE(rec.energy_history[k], rec.energy_history[k - 1] * (1 + 1e-13));
}

TEST(GroundState, FirstOrderConditionAgainstRandomDirections) {
    const MinimizerRecord& rec = strip_solution();
    const DiscreteOperator op = assemble_operator(rec.v.grid);
    const std::vector<double> f = nonlinearity(op, rec.v.values, 3.0);
    std::vector<double> r = op.matrix * rec.v.values;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= rec.c * f[i];
    const double scale = rec.c * norm2(f);
    std::mt19937_64 rng(42);
    std::normal_distribution<double> dist;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> phi(r.size());
        for (double& x : phi) x = dist(rng);
        EXPECT_LE(std::abs(dot(r, phi)), SolverConfig{}.residual_tol * scale * norm2(phi));
    }
}

TEST(GroundState, ZEvenOnFullLine) {
    const MinimizerRecord& rec = line_solution();
    ASSERT_TRUE(rec.converged);
    EXPECT_EQ(rec.v.grid.s_axis, SAxis::full_line);
    EXPECT_LE(z_evenness_defect(rec.v), 10 * SolverConfig{}.residual_tol * rec.v.max_abs());
}

TEST(GroundState, RestrictionToEvenFunctionsDoesNotLowerEnergy) {
    // d = 1: the half line with a reflecting face at z = 0 holds exactly the
    // z-even grid functions of the full line with twice the cells.
    const ShellConfig cfg(3, 1, 1, 2, 3);
    GridSpec half;
    half.a = 1;
    half.b = 2;
    half.m = 1;
    half.d = 1;
    half.n_r = 16;
    half.n_s = 48;
    half.Z = 3.0;
    half.s_axis = SAxis::half_line;
    const MinimizerRecord even = ground_state(build_grid(half), cfg, SolverConfig{});
    const MinimizerRecord& full = line_solution();
    EXPECT_GE(even.c, full.c * (1 - 1e-8));
    EXPECT_NEAR(even.c / full.c, 1.0, 1e-6);
}

TEST(GroundState, ScalingLaw) {
    const ShellConfig small(4, 1, 1, 2, 3), large(4, 1, 2, 4, 3);
    const double c1 = ground_state(build_grid(small, 12, 32, 3.0), small, SolverConfig{}).c;
    const double c2 = ground_state(build_grid(large, 12, 32, 6.0), large, SolverConfig{}).c;
    EXPECT_NEAR(c2 / c1, std::pow(2.0, -2.0 / 3.0), 0.01 * std::pow(2.0, -2.0 / 3.0));
}

TEST(GroundState, RefusesCriticalAndSupercritical) {
    for (double p : {4.0, 6.0}) {
        const ShellConfig cfg(5, 1, 1, 2, p);
        try {
            ground_state(build_grid(cfg, 8, 16, 2.0), cfg, SolverConfig{});
            FAIL() << "expected refusal";
        } catch (const RegimeRefusal& e) {
            EXPECT_EQ(e.regime.regime, p == 4.0 ? Regime::critical : Regime::supercritical);
        }
    }
}

TEST(GroundState, ThrowsWithHistoryWhenCapped) {
    const ShellConfig cfg(4, 1, 1, 2, 3);
    SolverConfig s;
    s.max_outer = 2;
    try {
        ground_state(build_grid(cfg, 8, 16, 2.0), cfg, s);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.energy_history.size(), 2u);
        EXPECT_EQ(e.residual_history.size(), 2u);
    }
    s.fail_on_nonconvergence = false;
    const MinimizerRecord rec = ground_state(build_grid(cfg, 8, 16, 2.0), cfg, s);
    EXPECT_FALSE(rec.converged);
}

TEST(GroundState, RejectsMismatchedGrid) {
    const ShellConfig cfg(4, 1, 1, 2, 3);
    EXPECT_THROW(ground_state(build_grid(ShellConfig(4, 1, 1, 3, 3), 8, 16, 2.0), cfg, SolverConfig{}), DomainError);
}

TEST(PdeResidual, ZeroFieldIsInfinite) {
    const StripGrid g = radial_grid(1, 8);
    EXPECT_TRUE(std::isinf(pde_residual(Field(g), 3.0)));
}

TEST(PdeResidual, UnrescaledMinimizerIsNotASolution) {
    const MinimizerRecord& rec = strip_solution();
    ASSERT_GT(std::abs(rec.c - 1.0), 0.1);
    EXPECT_GT(pde_residual(rec.v, 3.0), 0.1);
}

TEST(PdeResidual, ManufacturedLinearModeIsSecondOrder) {
    // -u'' = pi^2 u for u = sin(pi (r - 1)): the p = 3 residual with the
    // forcing pi^2 u in place of |u| u.
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const StripGrid g = radial_grid(0, n);
        const DiscreteOperator op = assemble_operator(g);
        const Field u = sample_field(g, [](double r, double) { return std::sin(M_PI * (r - 1)); });
        std::vector<double> f(u.size()), r = op.matrix * u.values;
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = op.cell_measure[i] * M_PI * M_PI * u.values[i];
            r[i] -= f[i];
        }
        err.push_back(norm2(r) / norm2(f));
    }
    for (std::size_t k = 1; k < err.size(); ++k) EXPECT_GE(std::log2(err[k - 1] / err[k]), 1.8);
}

TEST(DecayProfile, SyntheticFields) {
    const StripGrid g = build_grid(ShellConfig(4, 1, 1, 2, 3), 8, 16, 4.0);
    const Field near_axis = sample_field(g, [](double, double s) { return s < 1.0 ? 1.0 : 0.0; });
    for (double t : decay_profile(near_axis).value) EXPECT_EQ(t, 0.0);
    const Field flat = sample_field(g, [](double, double) { return -2.5; });
    for (double t : decay_profile(flat).value) EXPECT_EQ(t, 1.0);
    EXPECT_THROW(decay_profile(Field(radial_grid(1, 8))), DomainError);
}

TEST(DecayProfile, ConvergedGroundStateHasSmallTail) {
    const TailStats t = decay_profile(strip_solution().v);
    ASSERT_EQ(t.value.size(), 3u);
    EXPECT_LE(t.value[0], 1e-3);
    EXPECT_LE(t.value[2], t.value[0]);
}

TEST(GroundState, FineRadialGridConverges) {
    // At this resolution <A v, v> through the matrix carries ~1e-10 relative
    // rounding, far above the energy slack.
    const ShellConfig cfg(3, 2, 1, 2, 4);
    const MinimizerRecord rec = ground_state(build_grid(cfg, 2048, 0, 0.0), cfg, SolverConfig{});
    EXPECT_TRUE(rec.converged);
    EXPECT_LE(rec.pde_residual, 1e-8);
    EXPECT_LT(rec.outer_iters, 100);
}
