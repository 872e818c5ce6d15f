#pragma once

// Finite-volume discretization of -div(w grad v) with w(r, s) = r^m s^{d-1}.
//
// The operator is stored twice: as a sparse matrix, and as the list of faces
// it was assembled from. Each face carries its flux coefficient, so the
// quadratic form <A v, v> can be recomputed as a sum of squared differences
// (discrete integration by parts). Dirichlet faces use a mirrored ghost
// value -v, reflecting faces are simply absent.
//
// Angular constants are folded into every measure, so all sums below are
// integrals over the full N-dimensional domain.

#include "geometry.hpp"
#include "grid.hpp"
#include "sparse.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sle {

/// r^m s^{d-1}; the s factor is 1 when d <= 1.
inline double weight_at(double r, double s, int m, int d) {
    if (!(r >= 0.0)) throw DomainError("weight_at: r must be >= 0");
    double w = std::pow(r, m);
    if (d >= 2) {
        if (!(s > 0.0)) throw DomainError("weight_at: s must be > 0 when d >= 2");
        w *= std::pow(s, d - 1);
    }
    return w;
}

/// Weight as used on a particular grid: a d = 1 half line carries s^0 = 1,
/// and a full line never sees the s factor.
inline double grid_weight(const StripGrid& g, double r, double s) {
    return weight_at(r, s, g.m, g.s_axis == SAxis::half_line ? g.d : std::min(g.d, 1));
}

enum class FaceAxis { r, s, theta };
enum class FaceKind { interior, dirichlet };

struct Face {
    FaceAxis axis = FaceAxis::r;
    FaceKind kind = FaceKind::interior;
    std::size_t lo = 0;     ///< cell on the lower side (the only cell for a Dirichlet face)
    std::size_t hi = 0;     ///< cell on the upper side (interior faces)
    std::size_t inner = 0;  ///< next cell inward from a Dirichlet face
    int outward = 0;        ///< +1 / -1: direction of the outer normal along the axis (Dirichlet faces)
    double position = 0.0;  ///< coordinate of the face along its axis
    double measure = 0.0;   ///< angular constant x face weight x transverse area
    double spacing = 0.0;   ///< distance spanned by the difference quotient
    double h = 0.0;         ///< cell width along the axis

    double coeff() const { return measure / spacing; }
    /// Difference across the face, ghost value -v for Dirichlet faces.
    double jump(std::span<const double> v) const { return kind == FaceKind::interior ? v[lo] - v[hi] : v[lo]; }
};

struct DiscreteOperator {
    CsrMatrix matrix;
    std::vector<Face> faces;
    std::vector<double> cell_measure;
    double angular_constant = 1.0;

    std::size_t size() const { return cell_measure.size(); }
};

namespace detail {

inline CsrMatrix matrix_from_faces(std::size_t n, const std::vector<Face>& faces) {
    CsrBuilder builder(n);
    for (const Face& f : faces) {
        const double c = f.coeff();
        builder.add(f.lo, f.lo, c);
        if (f.kind == FaceKind::interior) {
            builder.add(f.lo, f.hi, -c);
            builder.add(f.hi, f.lo, -c);
            builder.add(f.hi, f.hi, c);
        }
    }
    return std::move(builder).build();
}

} // namespace detail

inline DiscreteOperator assemble_operator(const StripGrid& g) {
    DiscreteOperator op;
    op.angular_constant = g.angular_constant;
    const double C = g.angular_constant;
    const int nr = g.n_r();
    const int ns = g.n_s();
    const double area_r = g.has_s_axis() ? g.h_s : 1.0;

    op.cell_measure.resize(g.size());
    for (int j = 0; j < ns; ++j)
        for (int i = 0; i < nr; ++i)
            op.cell_measure[g.index(i, j)] =
                C * grid_weight(g, g.r_nodes[static_cast<std::size_t>(i)], g.s_at(j)) * g.h_r * area_r;

    for (int j = 0; j < ns; ++j) {
        const double s = g.s_at(j);
        Face lower{FaceAxis::r, FaceKind::dirichlet, g.index(0, j), 0, g.index(1, j), -1, g.a,
                   C * grid_weight(g, g.a, s) * area_r, 0.5 * g.h_r, g.h_r};
        op.faces.push_back(lower);
        for (int i = 0; i + 1 < nr; ++i) {
            const double rf = g.a + (i + 1) * g.h_r;
            op.faces.push_back(Face{FaceAxis::r, FaceKind::interior, g.index(i, j), g.index(i + 1, j), 0, 0, rf,
                                    C * grid_weight(g, rf, s) * area_r, g.h_r, g.h_r});
        }
        Face upper{FaceAxis::r, FaceKind::dirichlet, g.index(nr - 1, j), 0, g.index(nr - 2, j), +1, g.b,
                   C * grid_weight(g, g.b, s) * area_r, 0.5 * g.h_r, g.h_r};
        op.faces.push_back(upper);
    }

    if (g.has_s_axis()) {
        const double lo_s = g.s_axis == SAxis::full_line ? -g.Z : 0.0;
        for (int i = 0; i < nr; ++i) {
            const double r = g.r_nodes[static_cast<std::size_t>(i)];
            if (!g.lower_s_face_reflecting()) {
                op.faces.push_back(Face{FaceAxis::s, FaceKind::dirichlet, g.index(i, 0), 0, g.index(i, 1), -1, lo_s,
                                        C * grid_weight(g, r, -lo_s) * g.h_r, 0.5 * g.h_s, g.h_s});
            }
            for (int j = 0; j + 1 < ns; ++j) {
                const double sf = lo_s + (j + 1) * g.h_s;
                op.faces.push_back(Face{FaceAxis::s, FaceKind::interior, g.index(i, j), g.index(i, j + 1), 0, 0, sf,
                                        C * grid_weight(g, r, std::abs(sf)) * g.h_r, g.h_s, g.h_s});
            }
            op.faces.push_back(Face{FaceAxis::s, FaceKind::dirichlet, g.index(i, ns - 1), 0, g.index(i, ns - 2), +1,
                                    g.Z, C * grid_weight(g, r, g.Z) * g.h_r, 0.5 * g.h_s, g.h_s});
        }
    }

    op.matrix = detail::matrix_from_faces(g.size(), op.faces);
    return op;
}

/// Operator of -(1/rho) d_rho(rho d_rho) - (1/rho^2) d_theta^2 - d_z^2 with
/// measure rho drho dtheta dz, Dirichlet on rho = a, b and |z| = Z, and on the
/// theta faces of a sector (periodic otherwise).
inline DiscreteOperator assemble_operator(const CylinderGrid& g) {
    DiscreteOperator op;
    const double C = static_cast<double>(g.copies);
    op.angular_constant = C;
    const int nr = g.n_rho();
    const int nt = g.n_theta();
    const int nz = g.n_z();
    const double hr = g.h_rho;
    const double ht = g.h_theta;
    const double hz = g.h_z;
    const auto rho = [&](int i) { return g.rho_nodes[static_cast<std::size_t>(i)]; };

    op.cell_measure.resize(g.size());
    for (int l = 0; l < nz; ++l)
        for (int j = 0; j < nt; ++j)
            for (int i = 0; i < nr; ++i) op.cell_measure[g.index(i, j, l)] = C * rho(i) * hr * ht * hz;

    for (int l = 0; l < nz; ++l) {
        for (int j = 0; j < nt; ++j) {
            op.faces.push_back(Face{FaceAxis::r, FaceKind::dirichlet, g.index(0, j, l), 0, g.index(1, j, l), -1, g.a,
                                    C * g.a * ht * hz, 0.5 * hr, hr});
            for (int i = 0; i + 1 < nr; ++i) {
                const double rf = g.a + (i + 1) * hr;
                op.faces.push_back(Face{FaceAxis::r, FaceKind::interior, g.index(i, j, l), g.index(i + 1, j, l), 0, 0,
                                        rf, C * rf * ht * hz, hr, hr});
            }
            op.faces.push_back(Face{FaceAxis::r, FaceKind::dirichlet, g.index(nr - 1, j, l), 0,
                                    g.index(nr - 2, j, l), +1, g.b, C * g.b * ht * hz, 0.5 * hr, hr});
        }
    }
    for (int l = 0; l < nz; ++l) {
        for (int i = 0; i < nr; ++i) {
            const double m_theta = C * hr * hz / rho(i);
            if (g.theta_periodic) {
                for (int j = 0; j < nt; ++j) {
                    const int jn = (j + 1) % nt;
                    op.faces.push_back(Face{FaceAxis::theta, FaceKind::interior, g.index(i, j, l), g.index(i, jn, l),
                                            0, 0, (j + 1) * ht, m_theta, ht, ht});
                }
            } else {
                op.faces.push_back(Face{FaceAxis::theta, FaceKind::dirichlet, g.index(i, 0, l), 0, g.index(i, 1, l),
                                        -1, 0.0, m_theta, 0.5 * ht, ht});
                for (int j = 0; j + 1 < nt; ++j)
                    op.faces.push_back(Face{FaceAxis::theta, FaceKind::interior, g.index(i, j, l),
                                            g.index(i, j + 1, l), 0, 0, (j + 1) * ht, m_theta, ht, ht});
                op.faces.push_back(Face{FaceAxis::theta, FaceKind::dirichlet, g.index(i, nt - 1, l), 0,
                                        g.index(i, nt - 2, l), +1, g.theta_span, m_theta, 0.5 * ht, ht});
            }
        }
    }
    for (int j = 0; j < nt; ++j) {
        for (int i = 0; i < nr; ++i) {
            const double m_z = C * rho(i) * hr * ht;
            op.faces.push_back(Face{FaceAxis::s, FaceKind::dirichlet, g.index(i, j, 0), 0, g.index(i, j, 1), -1, -g.Z,
                                    m_z, 0.5 * hz, hz});
            for (int l = 0; l + 1 < nz; ++l)
                op.faces.push_back(Face{FaceAxis::s, FaceKind::interior, g.index(i, j, l), g.index(i, j, l + 1), 0, 0,
                                        -g.Z + (l + 1) * hz, m_z, hz, hz});
            op.faces.push_back(Face{FaceAxis::s, FaceKind::dirichlet, g.index(i, j, nz - 1), 0,
                                    g.index(i, j, nz - 2), +1, g.Z, m_z, 0.5 * hz, hz});
        }
    }

    op.matrix = detail::matrix_from_faces(g.size(), op.faces);
    return op;
}

inline std::vector<double> apply(const DiscreteOperator& op, std::span<const double> v) { return op.matrix * v; }

/// <A v, v> through the sparse matrix.
inline double quadratic_form(const DiscreteOperator& op, std::span<const double> v) {
    const std::vector<double> Av = op.matrix * v;
    return dot(Av, v);
}

/// Sum over faces of coeff x (difference)^2: the discrete weighted Dirichlet
/// energy, computed without the matrix.
inline double dirichlet_energy(const DiscreteOperator& op, std::span<const double> v) {
    double e = 0.0;
    for (const Face& f : op.faces) {
        const double dv = f.jump(v);
        e += f.coeff() * dv * dv;
    }
    return e;
}

inline double weighted_h1_norm(const DiscreteOperator& op, std::span<const double> v) {
    return std::sqrt(dirichlet_energy(op, v));
}

template <class Grid>
double weighted_h1_norm(const GridField<Grid>& v) {
    return weighted_h1_norm(assemble_operator(v.grid), v.values);
}

/// (sum_i measure_i |v_i|^q)^{1/q}, the midpoint rule for the weighted L^q norm.
inline double weighted_lp_norm(const DiscreteOperator& op, std::span<const double> v, double q) {
    if (!(q >= 1.0)) throw DomainError("weighted_lp_norm: q must be >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += op.cell_measure[i] * std::pow(std::abs(v[i]), q);
    return std::pow(s, 1.0 / q);
}

template <class Grid>
double weighted_lp_norm(const GridField<Grid>& v, double q) {
    return weighted_lp_norm(assemble_operator(v.grid), v.values, q);
}

/// Solves A x = rhs by conjugate gradients; see conjugate_gradient.
template <class Grid>
GridField<Grid> solve_spd(const DiscreteOperator& op, const GridField<Grid>& rhs, double tol) {
    LinearSolveResult res = conjugate_gradient(op.matrix, rhs.values, tol);
    return GridField<Grid>(rhs.grid, std::move(res.x));
}

} // namespace sle
