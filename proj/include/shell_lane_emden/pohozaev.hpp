#pragma once

// Pohozaev bookkeeping for the shell problem with the multiplier field
//     chi(y, z) = (phi(|y|) y, z),   phi(t) = (1 - (a/t)^{m+1}) / (m + 1),
// which satisfies phi(a) = 0 and t phi'(t) + (m+1) phi(t) = 1, hence
// div chi = N - m. For a solution u the identity
//     1/2 int_{dOmega} |grad u|^2 chi.nu
//         = -int (div chi)(|grad u|^2/2 - |u|^p/p) + int Dchi[grad u].grad u
// holds; on a truncated grid the faces |z| = Z contribute an extra flux
// with chi.nu = Z.

#include "discretization.hpp"
#include "geometry.hpp"
#include "grid.hpp"

#include <cmath>
#include <span>
#include <string>

namespace sle {

inline double phi(double t, double a, int m) {
    if (!(t > 0.0)) throw DomainError("phi: t must be > 0");
    return (1.0 - std::pow(a / t, m + 1)) / (m + 1);
}

/// Closed-form derivative of phi.
inline double phi_derivative(double t, double a, int m) {
    if (!(t > 0.0)) throw DomainError("phi_derivative: t must be > 0");
    return std::pow(a / t, m + 1) / t;
}

/// kappa(p) = (N - m)(1/p - 1/2 + 1/(N - m)); positive exactly when p < 2*_{N,m}.
/// Generic over the scalar so it can run in exact rational arithmetic.
template <class T>
T pohozaev_factor(int N, int m, const T& p) {
    const T k(N - m);
    return k * (T(1) / p - T(1) / T(2) + T(1) / k);
}

inline double pohozaev_factor(int N, int m, double p) { return pohozaev_factor<double>(N, m, p); }

/// The multiplier field in reduced coordinates: at y = t e_1, Dchi is
/// diagonal with entries 1 - m phi(t) (radial), phi(t) (m tangential
/// directions) and 1 (z directions).
struct PohozaevField {
    double a = 1.0;
    int m = 1;

    double profile(double t) const { return phi(t, a, m); }
    double radial_coefficient(double t) const { return 1.0 - m * phi(t, a, m); }
    double tangential_coefficient(double t) const { return phi(t, a, m); }
    static constexpr double z_coefficient() { return 1.0; }
    /// (chi . nu) on |y| = t; nu points away from the annulus axis.
    double normal_component_at_radius(double t) const { return phi(t, a, m) * t; }
    /// |chi(y, z)| for |y| = r, |z| = s.
    double magnitude(double r, double s) const {
        const double yr = phi(r, a, m) * r;
        return std::sqrt(yr * yr + s * s);
    }
    /// div chi, identically N - m.
    static double divergence(int N, int m) { return static_cast<double>(N - m); }
};

enum class FluxFamily { outer_shell, truncation };

struct BoundaryFlux {
    double value = 0.0;
    bool family_present = true;
};

/// 1/2 sum over Dirichlet faces of the family of |d_nu u|^2 (chi . nu) x face
/// measure, d_nu u from the one-sided quadratic (9 u_1 - u_2)/(3h) through
/// the face value 0 and the two nearest cells. The inner shell |y| = a has
/// chi . nu = 0 and never contributes.
inline BoundaryFlux boundary_flux(const DiscreteOperator& op, const StripGrid& grid, std::span<const double> u,
                                  const PohozaevField& chi, FluxFamily which) {
    BoundaryFlux out;
    if (which == FluxFamily::truncation && !grid.has_s_axis()) {
        out.family_present = false;
        return out;
    }
    const FaceAxis axis = which == FluxFamily::outer_shell ? FaceAxis::r : FaceAxis::s;
    for (const Face& f : op.faces) {
        if (f.kind != FaceKind::dirichlet || f.axis != axis) continue;
        double chi_nu = 0.0;
        if (axis == FaceAxis::r) {
            if (f.outward < 0) continue;  // |y| = a: chi . nu = 0
            chi_nu = chi.normal_component_at_radius(f.position);
        } else {
            chi_nu = std::abs(f.position);  // z . nu on |z| = Z
        }
        const double dnu = (9.0 * u[f.lo] - u[f.inner]) / (3.0 * f.h);
        out.value += 0.5 * f.measure * dnu * dnu * chi_nu;
    }
    return out;
}

inline BoundaryFlux boundary_flux(const Field& u, const ShellConfig& cfg, FluxFamily which) {
    const DiscreteOperator op = assemble_operator(u.grid);
    return boundary_flux(op, u.grid, u.values, PohozaevField{cfg.a(), cfg.m()}, which);
}

struct PohozaevReport {
    double div_term = 0.0;          ///< -int (div chi) phi(u, grad u)
    double dchi_term = 0.0;         ///< int Dchi[grad u] . grad u
    double shell_flux = 0.0;        ///< 1/2 int_{|y|=b} |grad u|^2 chi.nu
    double trunc_flux = 0.0;        ///< 1/2 int_{|z|=Z} |grad u|^2 chi.nu
    double residual = 0.0;          ///< shell_flux + trunc_flux - div_term - dchi_term
    double kappa = 0.0;             ///< (N-m)(1/p - 1/2 + 1/(N-m))
    double dirichlet_energy = 0.0;  ///< int |grad u|^2
    double potential_energy = 0.0;  ///< int |u|^p
    double angular_constant = 1.0;  ///< reduced integrals are the values above divided by this
    bool truncation_present = false;
    bool degenerate = false;        ///< u == 0
    /// 0 < shell_flux <= kappa * dirichlet_energy * (1 + chain_slack)
    bool chain_holds = false;
    double chain_slack = 0.05;

    double relative_residual() const { return dirichlet_energy > 0.0 ? std::abs(residual) / dirichlet_energy : 0.0; }
    double chain_bound() const { return kappa * dirichlet_energy; }
};

/// Evaluates every term of the identity on a grid function. All integrals
/// are over the full domain (angular constants included).
inline PohozaevReport pohozaev_report(const DiscreteOperator& op, const Field& u, const ShellConfig& cfg,
                                      double chain_slack = 0.05) {
    const StripGrid& g = u.grid;
    if (g.m != cfg.m() || g.a != cfg.a()) throw DomainError("pohozaev_report: grid does not match configuration");
    const PohozaevField chi{cfg.a(), cfg.m()};
    const double p = cfg.p();

    PohozaevReport rep;
    rep.chain_slack = chain_slack;
    rep.angular_constant = op.angular_constant;
    rep.kappa = pohozaev_factor(cfg.N(), cfg.m(), p);
    rep.truncation_present = g.has_s_axis();
    if (u.max_abs() == 0.0) {
        rep.degenerate = true;
        return rep;
    }

    rep.dirichlet_energy = dirichlet_energy(op, u.values);
    for (std::size_t i = 0; i < u.size(); ++i) rep.potential_energy += op.cell_measure[i] * std::pow(std::abs(u.values[i]), p);

    const double div_chi = PohozaevField::divergence(cfg.N(), cfg.m());
    rep.div_term = -div_chi * (0.5 * rep.dirichlet_energy - rep.potential_energy / p);

    for (const Face& f : op.faces) {
        const double dv = f.jump(u.values);
        const double psi = f.axis == FaceAxis::r ? chi.radial_coefficient(f.position) : PohozaevField::z_coefficient();
        rep.dchi_term += f.coeff() * psi * dv * dv;
    }

    rep.shell_flux = boundary_flux(op, g, u.values, chi, FluxFamily::outer_shell).value;
    rep.trunc_flux = boundary_flux(op, g, u.values, chi, FluxFamily::truncation).value;
    rep.residual = rep.shell_flux + rep.trunc_flux - rep.div_term - rep.dchi_term;
    rep.chain_holds = rep.shell_flux > 0.0 && rep.shell_flux <= rep.chain_bound() * (1.0 + chain_slack);
    return rep;
}

inline PohozaevReport pohozaev_report(const Field& u, const ShellConfig& cfg, double chain_slack = 0.05) {
    return pohozaev_report(assemble_operator(u.grid), u, cfg, chain_slack);
}

} // namespace sle
