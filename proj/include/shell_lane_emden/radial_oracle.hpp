#pragma once

// Shooting solver for radial solutions of
//     u'' + (m/r) u' + |u|^{p-2} u = 0 on (a, b),  u(a) = u(b) = 0,
// used as an independent reference for the variational solver whenever the
// strip degenerates to an interval (d = 0). Fixed-step classical RK4, so
// repeated runs are bit-identical.

#include "geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sle {

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ShootResult {
    double value = 0.0;  ///< u(b), or +/-infinity after blow-up
    double slope = 0.0;  ///< u'(b)
    bool blew_up = false;
    double blowup_r = 0.0;
    int sign_changes = 0;  ///< sign changes of u over the nodes in (a, b]
};

namespace detail {

constexpr double blowup_level = 1e150;

/// Integrates from (u, u')(a) = (0, sigma); `visit(r, u, du)` sees every node.
template <class Visit>
ShootResult integrate_radial(double sigma, double a, double b, int m, double p, int n_steps, bool nonlinear,
                             Visit&& visit) {
    const double h = (b - a) / n_steps;
    const auto rhs = [&](double r, double u, double w) -> std::array<double, 2> {
        const double src = nonlinear ? std::pow(std::abs(u), p - 2.0) * u : 0.0;
        return {w, -(m / r) * w - src};
    };
    ShootResult res;
    double u = 0.0, w = sigma;
    visit(a, u, w);
    int last_sign = 0;
    for (int k = 0; k < n_steps; ++k) {
        const double r = a + k * h;
        const auto k1 = rhs(r, u, w);
        const auto k2 = rhs(r + 0.5 * h, u + 0.5 * h * k1[0], w + 0.5 * h * k1[1]);
        const auto k3 = rhs(r + 0.5 * h, u + 0.5 * h * k2[0], w + 0.5 * h * k2[1]);
        const auto k4 = rhs(r + h, u + h * k3[0], w + h * k3[1]);
        u += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        w += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        const double r_next = (k + 1 == n_steps) ? b : a + (k + 1) * h;
        if (!std::isfinite(u) || !std::isfinite(w) || std::abs(u) > blowup_level || std::abs(w) > blowup_level) {
            res.blew_up = true;
            res.blowup_r = r_next;
            res.value = std::copysign(std::numeric_limits<double>::infinity(), std::isnan(u) ? 1.0 : u);
            res.slope = w;
            return res;
        }
        const int sgn = u > 0.0 ? 1 : -1;
        if (last_sign != 0 && sgn != last_sign) ++res.sign_changes;
        last_sign = sgn;
        visit(r_next, u, w);
    }
    res.value = u;
    res.slope = w;
    return res;
}

} // namespace detail

/// u(b) for the initial slope sigma. With `nonlinear = false` the source term
/// is dropped (free linear ODE, for testing).
inline ShootResult shoot(double sigma, const ShellConfig& cfg, int n_steps, bool nonlinear = true) {
    if (sigma < 0.0) throw DomainError("shoot: sigma must be >= 0");
    if (n_steps < 100) throw DomainError("shoot: n_steps must be >= 100");
    return detail::integrate_radial(sigma, cfg.a(), cfg.b(), cfg.m(), cfg.p(), n_steps, nonlinear,
                                    [](double, double, double) {});
}

struct RadialSolution {
    double sigma_star = 0.0;
    int branch = 0;
    std::vector<double> r;
    std::vector<double> u;
    std::vector<double> du;
    double amplitude = 0.0;  ///< max |u|
    double energy = 0.0;     ///< |S^m| int r^m |u'|^2 dr
    double end_value = 0.0;  ///< u(b) at sigma_star

    /// Cubic Hermite interpolation of the profile.
    double sample(double x) const {
        const double a = r.front(), b = r.back();
        if (x <= a) return u.front();
        if (x >= b) return u.back();
        const double h = (b - a) / static_cast<double>(r.size() - 1);
        std::size_t k = static_cast<std::size_t>((x - a) / h);
        k = std::min(k, r.size() - 2);
        return hermite(k, (x - r[k]) / h, h);
    }

    double hermite(std::size_t k, double t, double h) const {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * u[k] + (t3 - 2 * t2 + t) * h * du[k] + (-2 * t3 + 3 * t2) * u[k + 1] +
               (t3 - t2) * h * du[k + 1];
    }
};

namespace detail {

/// Maximum of |Hermite interpolant| near the largest node value.
inline double profile_amplitude(const RadialSolution& s) {
    std::size_t imax = 0;
    for (std::size_t i = 0; i < s.u.size(); ++i)
        if (std::abs(s.u[i]) > std::abs(s.u[imax])) imax = i;
    double best = std::abs(s.u[imax]);
    const double h = (s.r.back() - s.r.front()) / static_cast<double>(s.r.size() - 1);
    for (std::size_t k : {imax == 0 ? imax : imax - 1, imax}) {
        if (k + 1 >= s.u.size()) continue;
        // derivative of the cubic in t is a t^2 + b t + c
        const double u0 = s.u[k], u1 = s.u[k + 1], m0 = h * s.du[k], m1 = h * s.du[k + 1];
        const double qa = 6 * u0 + 3 * m0 - 6 * u1 + 3 * m1;
        const double qb = -6 * u0 - 4 * m0 + 6 * u1 - 2 * m1;
        const double qc = m0;
        std::vector<double> roots;
        if (std::abs(qa) < 1e-300) {
            if (qb != 0.0) roots.push_back(-qc / qb);
        } else {
            const double disc = qb * qb - 4 * qa * qc;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                roots.push_back((-qb + sq) / (2 * qa));
                roots.push_back((-qb - sq) / (2 * qa));
            }
        }
        for (double t : roots)
            if (t > 0.0 && t < 1.0) best = std::max(best, std::abs(s.hermite(k, t, h)));
    }
    return best;
}

} // namespace detail

/// Bisects the initial slope for the radial solution with `branch` interior
/// zeros (branch 0 is the one-signed ground branch) until |u(b)| <= tol.
/// Requires d = 0 (m = N - 1).
inline RadialSolution radial_ground_state(const ShellConfig& cfg, double tol, int n_steps = 100000,
                                          int branch = 0) {
    if (reduced_dimension(cfg) != 0)
        throw DomainError("radial_ground_state: requires a radial configuration (m = N - 1)");
    if (!(tol > 0.0)) throw DomainError("radial_ground_state: tol must be > 0");
    if (branch < 0) throw DomainError("radial_ground_state: branch must be >= 0");

    const auto fire = [&](double sigma) { return shoot(sigma, cfg, n_steps); };
    const auto beyond = [&](const ShootResult& s) { return s.blew_up || s.sign_changes >= branch + 1; };

    double lo = 0.0, hi = 0.0;
    bool found = false;
    double prev = 0.0;
    for (double sigma = 1e-6; sigma <= 1e6; sigma *= std::pow(2.0, 0.25)) {
        if (beyond(fire(sigma))) {
            lo = prev;
            hi = sigma;
            found = true;
            break;
        }
        prev = sigma;
    }
    if (!found || lo == 0.0)
        throw BracketError("radial_ground_state: no sign change of u(b) for sigma in [1e-6, 1e6]");

    double best_sigma = lo;
    ShootResult best = fire(lo);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        const ShootResult s = fire(mid);
        if (!s.blew_up && std::abs(s.value) < std::abs(best.value)) {
            best = s;
            best_sigma = mid;
        }
        if (std::abs(best.value) <= tol) break;
        if (beyond(s))
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    }

    RadialSolution sol;
    sol.sigma_star = best_sigma;
    sol.branch = branch;
    sol.r.reserve(static_cast<std::size_t>(n_steps) + 1);
    sol.u.reserve(static_cast<std::size_t>(n_steps) + 1);
    sol.du.reserve(static_cast<std::size_t>(n_steps) + 1);
    const ShootResult fin = detail::integrate_radial(best_sigma, cfg.a(), cfg.b(), cfg.m(), cfg.p(), n_steps, true,
                                                     [&](double r, double u, double w) {
                                                         sol.r.push_back(r);
                                                         sol.u.push_back(u);
                                                         sol.du.push_back(w);
                                                     });
    sol.end_value = fin.value;
    sol.amplitude = detail::profile_amplitude(sol);

    // Composite Simpson (trapezoid on a leftover interval).
    const double C = cfg.m() == 0 ? 1.0 : sphere_area(cfg.m());
    const double h = (cfg.b() - cfg.a()) / n_steps;
    const auto f = [&](std::size_t i) { return std::pow(sol.r[i], cfg.m()) * sol.du[i] * sol.du[i]; };
    const std::size_t n = static_cast<std::size_t>(n_steps);
    const std::size_t even = n - n % 2;
    double s = 0.0;
    for (std::size_t i = 0; i + 2 <= even; i += 2) s += h / 3.0 * (f(i) + 4 * f(i + 1) + f(i + 2));
    if (even < n) s += 0.5 * h * (f(n - 1) + f(n));
    sol.energy = C * s;

    if (std::abs(sol.end_value) > tol)
        throw BracketError("radial_ground_state: bisection stalled at |u(b)| = " + std::to_string(std::abs(sol.end_value)));
    return sol;
}

} // namespace sle
