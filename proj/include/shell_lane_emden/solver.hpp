#pragma once

// Constrained minimization of I(v) = ||v||_m^2 on M = {|v|_{m,p} = 1} and
// rescaling of minimizers to solutions of A u = W |u|^{p-2} u.
//
// Outer scheme is normalized inverse iteration
//     v <- normalize(A^{-1}(W |v|^{p-2} v)),
// which does not increase I (Cauchy-Schwarz in the A-inner product plus
// Hoelder). A step that raises I anyway is replaced by a projected gradient
// step with backtracking. At a fixed point A v = c W |v|^{p-2} v with c = I(v),
// so u = c^{1/(p-2)} v solves the discrete equation.

#include "discretization.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sle {

enum class InitKind { positive_bump, custom };

struct SolverConfig {
    double energy_tol = 1e-10;
    double residual_tol = 1e-8;
    int max_outer = 500;
    double linear_tol = 1e-12;
    InitKind init = InitKind::positive_bump;
    std::vector<double> custom_init;
    /// Iterate even when the configuration is not subcritical.
    bool force = false;
    /// When false, a run that stops without converging (iteration cap, or a
    /// safeguard step that finds no descent) returns its last iterate with
    /// converged = false instead of throwing.
    bool fail_on_nonconvergence = true;

    void validate() const {
        if (!(energy_tol > 0.0) || !(residual_tol > 0.0) || !(linear_tol > 0.0))
            throw DomainError("SolverConfig: tolerances must be > 0");
        if (max_outer < 1) throw DomainError("SolverConfig: max_outer must be >= 1");
        if (init == InitKind::custom && custom_init.empty())
            throw DomainError("SolverConfig: custom init selected but no values given");
    }
};

template <class Grid>
struct BasicMinimizerRecord {
    GridField<Grid> v;  ///< normalized minimizer, |v|_{m,p} = 1
    double c = 0.0;     ///< I(v) = ||v||_m^2
    GridField<Grid> u;  ///< c^{1/(p-2)} v
    int outer_iters = 0;
    double pde_residual = 0.0;
    double constraint_defect = 0.0;
    bool converged = false;
    int safeguard_steps = 0;
    int gauge_shifts = 0;
    std::vector<double> energy_history;
    std::vector<double> residual_history;
};

using MinimizerRecord = BasicMinimizerRecord<StripGrid>;

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> energies, std::vector<double> residuals)
        : std::runtime_error(what), energy_history(std::move(energies)), residual_history(std::move(residuals)) {}
    std::vector<double> energy_history;
    std::vector<double> residual_history;
};

/// Thrown instead of iterating when p >= 2*_{N,m}: no nontrivial
/// finite-energy solution exists there, so there is nothing to converge to.
class RegimeRefusal : public std::runtime_error {
public:
    RegimeRefusal(const ShellConfig& c, ExponentRegime r)
        : std::runtime_error(message(c, r)), cfg(c), regime(r) {}
    ShellConfig cfg;
    ExponentRegime regime;

private:
    static std::string message(const ShellConfig& c, ExponentRegime r) {
        return std::string("nonexistence regime: p = ") + std::to_string(c.p()) + " is " + to_string(r.regime) +
               " (critical exponent " + to_string(r.critical_exponent) + " for N = " + std::to_string(c.N()) +
               ", m = " + std::to_string(c.m()) +
               "); the Pohozaev obstruction rules out nontrivial solutions, rerun with force to probe";
    }
};

inline std::vector<double> nonlinearity(const DiscreteOperator& op, std::span<const double> v, double p) {
    std::vector<double> g(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) g[i] = op.cell_measure[i] * std::pow(std::abs(v[i]), p - 2.0) * v[i];
    return g;
}

/// ||A u - W|u|^{p-2}u|| / ||W|u|^{p-2}u||. Returns +infinity for u == 0,
/// which is how a zero solution is flagged.
inline double pde_residual(const DiscreteOperator& op, std::span<const double> u, double p) {
    const std::vector<double> f = nonlinearity(op, u, p);
    const double fn = norm2(f);
    if (fn == 0.0) return std::numeric_limits<double>::infinity();
    std::vector<double> r = op.matrix * u;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= f[i];
    return norm2(r) / fn;
}

template <class Grid>
double pde_residual(const GridField<Grid>& u, double p) {
    return pde_residual(assemble_operator(u.grid), u.values, p);
}

template <class Grid>
GridField<Grid> rescale_to_solution(const GridField<Grid>& v, double c, double p) {
    if (!(c > 0.0)) throw DomainError("rescale_to_solution: c must be > 0");
    if (!(p > 2.0)) throw DomainError("rescale_to_solution: p must be > 2");
    GridField<Grid> u = v;
    const double s = std::pow(c, 1.0 / (p - 2.0));
    for (double& x : u.values) x *= s;
    return u;
}

namespace detail {

inline void normalize_lp(const DiscreteOperator& op, std::vector<double>& v, double p) {
    const double n = weighted_lp_norm(op, v, p);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("constrained minimization: iterate has zero L^p norm");
    for (double& x : v) x /= n;
}

/// ||A v - c W|v|^{p-2}v|| / (c ||W|v|^{p-2}v||), the residual of the
/// rescaled field expressed through the normalized one.
inline double scaled_residual(const DiscreteOperator& op, std::span<const double> v, double c, double p) {
    const std::vector<double> f = nonlinearity(op, v, p);
    std::vector<double> r = op.matrix * v;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * f[i];
    return norm2(r) / (c * norm2(f));
}

struct NoGauge {
    template <class Grid>
    bool operator()(const Grid&, std::vector<double>&) const {
        return false;
    }
};

} // namespace detail

/// Minimizes <A v, v> subject to sum W|v|^p = 1 starting from `init`.
/// `gauge(grid, values)` may modify an accepted iterate and returns whether it did.
/// With `nonnegative`, roundoff-level negative entries (|v_i| <= 1e-10 max|v|)
/// left by the inexact linear solves are set to zero.
template <class Grid, class Gauge = detail::NoGauge>
BasicMinimizerRecord<Grid> minimize_constrained(const DiscreteOperator& op, GridField<Grid> init, double p,
                                                const SolverConfig& scfg, bool nonnegative, Gauge gauge = {}) {
    scfg.validate();
    if (!(p > 2.0)) throw DomainError("minimize_constrained: p must be > 2");
    // Energy increases below this relative size are floating-point noise. The
    // face sum has only nonnegative terms, so its rounding stays near eps
    // where <A v, v> through the matrix loses digits to cancellation.
    constexpr double energy_slack = 1e-13;

    BasicMinimizerRecord<Grid> rec;
    bool stalled = false;
    std::vector<double> v = std::move(init.values);
    detail::normalize_lp(op, v, p);
    double E = dirichlet_energy(op, v);

    const std::vector<double> diag = op.matrix.diagonal();
    std::vector<double> x0(v.size());

    for (int k = 1; k <= scfg.max_outer; ++k) {
        const std::vector<double> g = nonlinearity(op, v, p);
        for (std::size_t i = 0; i < v.size(); ++i) x0[i] = v[i] / E;
        std::vector<double> w = conjugate_gradient(op.matrix, g, scfg.linear_tol, std::span<const double>(x0)).x;
        if (nonnegative) {
            double mx = 0.0;
            for (double x : w) mx = std::max(mx, std::abs(x));
            for (double& x : w)
                if (x < 0.0 && -x <= 1e-10 * mx) x = 0.0;
        }
        detail::normalize_lp(op, w, p);
        if (gauge(init.grid, w)) {
            ++rec.gauge_shifts;
            detail::normalize_lp(op, w, p);
        }
        double E_new = dirichlet_energy(op, w);

        if (E_new > E * (1.0 + energy_slack)) {
            // Projected gradient step with backtracking, Jacobi scaled.
            ++rec.safeguard_steps;
            std::vector<double> grad = op.matrix * v;
            const std::vector<double> gv = nonlinearity(op, v, p);
            for (std::size_t i = 0; i < v.size(); ++i) grad[i] = (grad[i] - E * gv[i]) / diag[i];
            bool accepted = false;
            double t = 1.0;
            for (int trial = 0; trial < 40 && !accepted; ++trial, t *= 0.5) {
                for (std::size_t i = 0; i < v.size(); ++i) w[i] = v[i] - t * grad[i];
                detail::normalize_lp(op, w, p);
                E_new = dirichlet_energy(op, w);
                accepted = E_new < E;
            }
            if (!accepted) {
                // No descent direction left at this precision.
                w = v;
                E_new = E;
                stalled = true;
            }
        }

        const double res = detail::scaled_residual(op, w, E_new, p);
        const double dE = std::abs(E - E_new) / E_new;
        rec.energy_history.push_back(E_new);
        rec.residual_history.push_back(res);
        rec.outer_iters = k;
        v = std::move(w);
        E = E_new;
        if (dE <= scfg.energy_tol && res <= scfg.residual_tol) {
            rec.converged = true;
            break;
        }
        if (stalled) break;
    }

    rec.c = E;
    rec.v = GridField<Grid>(init.grid, std::move(v));
    rec.constraint_defect = std::abs(weighted_lp_norm(op, rec.v.values, p) - 1.0);
    rec.u = rescale_to_solution(rec.v, rec.c, p);
    rec.pde_residual = pde_residual(op, rec.u.values, p);

    if (!rec.converged && scfg.fail_on_nonconvergence) {
        throw ConvergenceError(std::string("constrained minimization ") +
                                   (stalled ? "stalled after " : "did not converge in ") +
                                   std::to_string(rec.outer_iters) + " outer iterations (last residual " +
                                   std::to_string(rec.residual_history.empty() ? NAN : rec.residual_history.back()) +
                                   ")",
                               rec.energy_history, rec.residual_history);
    }
    return rec;
}

/// v0 = sin(pi (r - a)/(b - a)) exp(-s^2); s is z on a full line.
inline Field positive_bump(const StripGrid& g) {
    return sample_field(g, [&](double r, double s) {
        return std::sin(M_PI * (r - g.a) / (g.b - g.a)) * std::exp(-s * s);
    });
}

/// Re-centres a z-line iterate whose weighted barycentre has drifted by
/// more than half a cell, by linear interpolation along z.
struct BarycenterGauge {
    bool operator()(const StripGrid& g, std::vector<double>& v) const {
        if (g.s_axis != SAxis::full_line) return false;
        double num = 0.0, den = 0.0;
        for (int j = 0; j < g.n_s(); ++j)
            for (int i = 0; i < g.n_r(); ++i) {
                const double w = v[g.index(i, j)] * v[g.index(i, j)];
                num += w * g.s_at(j);
                den += w;
            }
        if (den == 0.0) return false;
        const double zbar = num / den;
        if (std::abs(zbar) <= 0.5 * g.h_s) return false;
        const std::vector<double> old = v;
        const double shift = zbar / g.h_s;  // sample old at z + zbar
        for (int j = 0; j < g.n_s(); ++j) {
            const double src = j + shift;
            const int j0 = static_cast<int>(std::floor(src));
            const double t = src - j0;
            for (int i = 0; i < g.n_r(); ++i) {
                const auto at = [&](int jj) { return (jj < 0 || jj >= g.n_s()) ? 0.0 : old[g.index(i, jj)]; };
                v[g.index(i, j)] = (1.0 - t) * at(j0) + t * at(j0 + 1);
            }
        }
        return true;
    }
};

inline void check_grid_matches(const StripGrid& grid, const ShellConfig& cfg) {
    if (grid.m != cfg.m() || grid.d != reduced_dimension(cfg) || grid.a != cfg.a() || grid.b != cfg.b())
        throw DomainError("ground_state: grid was not built for this configuration");
}

/// Ground state on M (c_0) or, on an O(d)-reduced grid, on M^G (c_0^G).
inline MinimizerRecord ground_state(const StripGrid& grid, const ShellConfig& cfg, const SolverConfig& scfg) {
    check_grid_matches(grid, cfg);
    if (cfg.m() == 0) throw DomainError("ground_state: m = 0 (two disjoint strips) is not supported");
    const ExponentRegime regime = classify_regime(cfg);
    if (regime.regime != Regime::subcritical && !scfg.force) throw RegimeRefusal(cfg, regime);

    const DiscreteOperator op = assemble_operator(grid);
    Field init = scfg.init == InitKind::custom ? Field(grid, scfg.custom_init) : positive_bump(grid);
    const bool nonnegative = scfg.init == InitKind::positive_bump;
    return minimize_constrained(op, std::move(init), cfg.p(), scfg, nonnegative, BarycenterGauge{});
}

/// max |v(r, z) - v(r, -z)| on a full z line; zero on any other grid, where
/// evenness holds by construction.
inline double z_evenness_defect(const Field& v) {
    const StripGrid& g = v.grid;
    if (g.s_axis != SAxis::full_line) return 0.0;
    double mx = 0.0;
    for (int j = 0; j < g.n_s(); ++j)
        for (int i = 0; i < g.n_r(); ++i)
            mx = std::max(mx, std::abs(v.values[g.index(i, j)] - v.values[g.index(i, g.n_s() - 1 - j)]));
    return mx;
}

struct TailStats {
    std::vector<double> s;      ///< requested sample positions
    std::vector<double> value;  ///< max_r |v(r, s)| / max|v|
};

/// Tail of a field along the z direction, at s = Z/2, 3Z/4 and the last cell.
inline TailStats decay_profile(const Field& v) {
    const StripGrid& g = v.grid;
    if (!g.has_s_axis()) throw DomainError("decay_profile: not applicable without a z direction (d = 0)");
    TailStats t;
    t.s = {0.5 * g.Z, 0.75 * g.Z, g.Z - 0.5 * g.h_s};
    const double vmax = v.max_abs();
    for (double s : t.s) {
        double mx = 0.0;
        for (int j = 0; j < g.n_s(); ++j) {
            // Cells whose |s| is nearest to the sample; both sides on a full line.
            const double dist = std::abs(std::abs(g.s_at(j)) - s);
            if (dist > 0.5 * g.h_s + 1e-12 * g.h_s) continue;
            for (int i = 0; i < g.n_r(); ++i) mx = std::max(mx, std::abs(v.values[g.index(i, j)]));
        }
        t.value.push_back(vmax > 0.0 ? mx / vmax : 0.0);
    }
    return t;
}

} // namespace sle
