#include <shell_lane_emden/pohozaev.hpp>
#include <shell_lane_emden/radial_oracle.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace sle;

namespace {

const ShellConfig reference(3, 2, 1, 2, 4);

const RadialSolution& reference_solution() {
    static const RadialSolution sol = radial_ground_state(reference, 1e-12);
    return sol;
}

// Composite Simpson over the uniform profile nodes.
template <class F>
double simpson(const RadialSolution& s, F&& f) {
    const std::size_t n = s.r.size() - 1;
    const double h = (s.r.back() - s.r.front()) / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t i = 0; i + 2 <= n; i += 2) acc += h / 3 * (f(i) + 4 * f(i + 1) + f(i + 2));
    if (n % 2) acc += 0.5 * h * (f(n - 1) + f(n));
    return acc;
}

} // namespace

TEST(Shoot, ZeroSlopeGivesZero) {
    const ShootResult r = shoot(0.0, reference, 1000);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_FALSE(r.blew_up);
}

TEST(Shoot, FreeLinearOde) {
    const ShellConfig flat(2, 0, 1, 2.5, 3);
    for (double sigma : {0.1, 1.0, 7.0}) EXPECT_NEAR(shoot(sigma, flat, 1000, false).value, sigma * 1.5, 1e-12 * sigma);
    const ShellConfig cyl(2, 1, 1, 2, 3);
    for (double sigma : {0.1, 1.0, 7.0})
        EXPECT_NEAR(shoot(sigma, cyl, 1000, false).value, sigma * std::log(2.0), 1e-11 * sigma);
}

TEST(Shoot, SmallSlopesFollowTheLinearization) {
    const ShellConfig cyl(2, 1, 1, 2, 3);
    double prev = 0.0;
    for (double sigma = 1e-6; sigma < 1e-2; sigma *= 4) {
        const double ub = shoot(sigma, cyl, 2000).value;
        EXPECT_GT(ub, prev);
        EXPECT_NEAR(ub / (sigma * std::log(2.0)), 1.0, 10 * sigma);
        prev = ub;
    }
}

TEST(Shoot, RejectsBadArguments) {
    EXPECT_THROW(shoot(-1.0, reference, 1000), DomainError);
    EXPECT_THROW(shoot(1.0, reference, 99), DomainError);
}

TEST(RadialGroundState, RequiresRadialConfiguration) {
    EXPECT_THROW(radial_ground_state(ShellConfig(4, 1, 1, 2, 3), 1e-10), DomainError);
    EXPECT_THROW(radial_ground_state(reference, 0.0), DomainError);
}

TEST(RadialGroundState, PositiveProfileWithSingleMaximum) {
    const RadialSolution& s = reference_solution();
    EXPECT_EQ(s.u.front(), 0.0);
    EXPECT_LE(std::abs(s.end_value), 1e-12);
    for (std::size_t i = 1; i + 1 < s.u.size(); ++i) EXPECT_GT(s.u[i], 0.0);
    int slope_changes = 0;
    for (std::size_t i = 1; i < s.du.size(); ++i)
        if ((s.du[i] > 0) != (s.du[i - 1] > 0)) ++slope_changes;
    EXPECT_EQ(slope_changes, 1);
}

TEST(RadialGroundState, FrozenReferenceValues) {
    // Values produced by this oracle at n_steps = 1e5, tol = 1e-12.
    const RadialSolution& s = reference_solution();
    EXPECT_NEAR(s.sigma_star, 16.0334, 1e-4);
    EXPECT_NEAR(s.amplitude, 3.77415, 1e-5);
    EXPECT_NEAR(s.energy, 1706.03, 1e-2);
}

TEST(RadialGroundState, StepDoublingChangesAmplitudeNegligibly) {
    const RadialSolution& fine = reference_solution();
    const RadialSolution coarse = radial_ground_state(reference, 1e-12, 50000);
    EXPECT_LE(std::abs(fine.amplitude - coarse.amplitude) / fine.amplitude, 1e-8);
}

TEST(RadialGroundState, ConvergesAcrossStepCounts) {
    const RadialSolution& ref = reference_solution();
    double prev = HUGE_VAL;
    for (int n : {1000, 10000}) {
        const double diff = std::abs(radial_ground_state(reference, 1e-12, n).amplitude - ref.amplitude);
        EXPECT_LT(diff, prev);
        prev = diff;
    }
    EXPECT_LT(prev / ref.amplitude, 1e-8);
}

TEST(RadialGroundState, SatisfiesOneDimensionalPohozaevIdentity) {
    // Terms computed directly from the ODE profile, independent of the grid code.
    const RadialSolution& s = reference_solution();
    const int m = reference.m(), N = reference.N();
    const double p = reference.p(), a = reference.a(), b = reference.b();
    const double C = sphere_area(m);
    const double E = C * simpson(s, [&](std::size_t i) { return std::pow(s.r[i], m) * s.du[i] * s.du[i]; });
    const double P = C * simpson(s, [&](std::size_t i) { return std::pow(s.r[i], m) * std::pow(std::abs(s.u[i]), p); });
    const double D = C * simpson(s, [&](std::size_t i) {
        return std::pow(s.r[i], m) * (1 - m * phi(s.r[i], a, m)) * s.du[i] * s.du[i];
    });
    const double flux = 0.5 * C * std::pow(b, m) * s.du.back() * s.du.back() * phi(b, a, m) * b;
    const double div_term = -(N - m) * (0.5 * E - P / p);
    EXPECT_NEAR(E, s.energy, 1e-9 * E);
    EXPECT_LE(std::abs(flux - div_term - D) / E, 1e-6);
}

TEST(RadialGroundState, HigherBranchHasInteriorZero) {
    const RadialSolution s = radial_ground_state(reference, 1e-9, 20000, 1);
    int sign_changes = 0;
    for (std::size_t i = 2; i + 1 < s.u.size(); ++i)
        if ((s.u[i] > 0) != (s.u[i - 1] > 0)) ++sign_changes;
    EXPECT_EQ(sign_changes, 1);
    EXPECT_GT(s.sigma_star, reference_solution().sigma_star);
}

TEST(RadialSolution, HermiteSampleReproducesNodes) {
    const RadialSolution& s = reference_solution();
    for (std::size_t i : {std::size_t{0}, std::size_t{1234}, s.r.size() - 1}) EXPECT_NEAR(s.sample(s.r[i]), s.u[i], 1e-12);
}
