#pragma once

// G_k-equivariant solutions for N = 3, m = 1, where y is identified with a
// point of the complex plane and G_k is generated by the rotation by 2 pi/k
// and the reflection in the line at angle pi/k. Functions with
// u(g x) = det(g) u(x) vanish on every reflection line, so they are
// determined by their values on the sector 0 < theta < pi/k with Dirichlet
// conditions there; the full field is 2k signed copies of the sector.

#include "discretization.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "nodal.hpp"
#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sle {

using SectorRecord = BasicMinimizerRecord<CylinderGrid>;

/// Sector 0 < theta < pi/k of the annulus (a, b) times (-Z, Z); measures
/// count all 2k images.
inline CylinderGrid build_sector_grid(int k, double a, double b, int n_rho, int n_theta, int n_z, double Z) {
    if (k < 3) throw DomainError("build_sector_grid: k must be >= 3");
    return build_cylinder_grid(a, b, n_rho, n_theta, n_z, Z, M_PI / k, false, 2 * k);
}

/// Number of sector copies tiling the circle: 2k.
inline int sector_order(const CylinderGrid& sector) {
    return static_cast<int>(std::lround(2.0 * M_PI / sector.theta_span));
}

inline SectorField sector_bump(const CylinderGrid& g) {
    return sample_field(g, [&](double rho, double theta, double z) {
        return std::sin(M_PI * (rho - g.a) / (g.b - g.a)) * std::sin(M_PI * theta / g.theta_span) * std::exp(-z * z);
    });
}

/// z-recentring for cylinder iterates, the same rule as BarycenterGauge.
struct CylinderBarycenterGauge {
    bool operator()(const CylinderGrid& g, std::vector<double>& v) const {
        double num = 0.0, den = 0.0;
        for (int l = 0; l < g.n_z(); ++l)
            for (int j = 0; j < g.n_theta(); ++j)
                for (int i = 0; i < g.n_rho(); ++i) {
                    const double w = v[g.index(i, j, l)] * v[g.index(i, j, l)];
                    num += w * g.z_nodes[static_cast<std::size_t>(l)];
                    den += w;
                }
        if (den == 0.0) return false;
        const double zbar = num / den;
        if (std::abs(zbar) <= 0.5 * g.h_z) return false;
        const std::vector<double> old = v;
        const double shift = zbar / g.h_z;
        for (int l = 0; l < g.n_z(); ++l) {
            const double src = l + shift;
            const int l0 = static_cast<int>(std::floor(src));
            const double t = src - l0;
            for (int j = 0; j < g.n_theta(); ++j)
                for (int i = 0; i < g.n_rho(); ++i) {
                    const auto at = [&](int ll) { return (ll < 0 || ll >= g.n_z()) ? 0.0 : old[g.index(i, j, ll)]; };
                    v[g.index(i, j, l)] = (1.0 - t) * at(l0) + t * at(l0 + 1);
                }
        }
        return true;
    }
};

/// Minimizer of int |grad u|^2 on {|u|_p = 1} within the sector (Dirichlet on
/// all faces), rescaled to a solution. Requires 2 < p < 6.
inline SectorRecord sector_ground_state(const CylinderGrid& sector, double p, const SolverConfig& scfg) {
    if (sector.theta_periodic) throw DomainError("sector_ground_state: expected a Dirichlet sector grid");
    if (!(p > 2.0) || !(p < 6.0)) throw DomainError("sector_ground_state: need 2 < p < 6 (N = 3)");
    const DiscreteOperator op = assemble_operator(sector);
    SectorField init = scfg.init == InitKind::custom ? SectorField(sector, scfg.custom_init) : sector_bump(sector);
    return minimize_constrained(op, std::move(init), p, scfg, scfg.init == InitKind::positive_bump,
                                CylinderBarycenterGauge{});
}

/// Full-circle field from a sector field: copy j covers
/// (j pi/k, (j+1) pi/k), is mirrored when j is odd and carries sign (-1)^j.
inline SectorField extend_by_reflection(const SectorField& v, int k) {
    if (k < 3) throw DomainError("extend_by_reflection: k must be >= 3");
    const CylinderGrid& s = v.grid;
    if (sector_order(s) != 2 * k) throw DomainError("extend_by_reflection: sector does not match k");
    const int nt = s.n_theta();
    CylinderGrid full = build_cylinder_grid(s.a, s.b, s.n_rho(), 2 * k * nt, s.n_z(), s.Z, 2.0 * M_PI, true, 1);
    SectorField out(full);
    for (int l = 0; l < s.n_z(); ++l)
        for (int copy = 0; copy < 2 * k; ++copy)
            for (int t = 0; t < nt; ++t) {
                const int src = copy % 2 == 0 ? t : nt - 1 - t;
                const double sign = copy % 2 == 0 ? 1.0 : -1.0;
                for (int i = 0; i < s.n_rho(); ++i)
                    out.values[full.index(i, copy * nt + t, l)] = sign * v.values[s.index(i, src, l)];
            }
    return out;
}

/// max over g in G_k and all cells of |u(g x) - det(g) u(x)|, for a periodic
/// full-circle field whose theta resolution is a multiple of 2k.
inline double equivariance_defect(const SectorField& u, int k) {
    const CylinderGrid& g = u.grid;
    if (!g.theta_periodic) throw DomainError("equivariance_defect: expected a full-circle grid");
    const int M = g.n_theta();
    if (M % (2 * k) != 0) throw DomainError("equivariance_defect: theta cells not a multiple of 2k");
    const int nt = M / (2 * k);
    double worst = 0.0;
    // Rotations by 2 pi j/k (det +1) and reflections theta -> 2 pi l/k - theta (det -1).
    for (int elem = 0; elem < 2 * k; ++elem) {
        const bool reflection = elem >= k;
        const int j = elem % k;
        const double det = reflection ? -1.0 : 1.0;
        for (int l = 0; l < g.n_z(); ++l)
            for (int t = 0; t < M; ++t) {
                const int image = reflection ? ((2 * j * nt - 1 - t) % M + M) % M : (t + 2 * j * nt) % M;
                for (int i = 0; i < g.n_rho(); ++i)
                    worst = std::max(worst, std::abs(u.values[g.index(i, image, l)] - det * u.values[g.index(i, t, l)]));
            }
    }
    return worst;
}

/// Relative residual of the discrete equation on a full-circle field,
/// skipping the cells adjacent to the k reflection lines.
inline double residual_away_from_seams(const SectorField& u, int k, double p) {
    const CylinderGrid& g = u.grid;
    const int nt = g.n_theta() / (2 * k);
    const DiscreteOperator op = assemble_operator(g);
    const std::vector<double> f = nonlinearity(op, u.values, p);
    const std::vector<double> Au = op.matrix * u.values;
    double rr = 0.0, ff = 0.0;
    for (int l = 0; l < g.n_z(); ++l)
        for (int t = 0; t < g.n_theta(); ++t) {
            const int local = t % nt;
            if (local == 0 || local == nt - 1) continue;
            for (int i = 0; i < g.n_rho(); ++i) {
                const std::size_t c = g.index(i, t, l);
                rr += (Au[c] - f[c]) * (Au[c] - f[c]);
                ff += f[c] * f[c];
            }
        }
    return ff > 0.0 ? std::sqrt(rr / ff) : HUGE_VAL;
}

/// max |v(rho, theta, z) - v(rho, theta, -z)|.
inline double z_evenness_defect(const SectorField& v) {
    const CylinderGrid& g = v.grid;
    double mx = 0.0;
    for (int l = 0; l < g.n_z(); ++l)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int i = 0; i < g.n_rho(); ++i)
                mx = std::max(mx, std::abs(v.values[g.index(i, j, l)] - v.values[g.index(i, j, g.n_z() - 1 - l)]));
    return mx;
}

} // namespace sle
