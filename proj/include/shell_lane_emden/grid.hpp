#pragma once

// Cell-centered tensor grids on the reduced coordinates and grid functions.
//
// StripGrid covers (a, b) in r = |y| and, depending on the reduced
// z-dimension d = N - m - 1,
//   d = 0  : no second axis (radial annulus),
//   d = 1  : z in (-Z, Z) with Dirichlet at both ends (full line),
//   d >= 2 : s = |z| in (0, Z), reflecting face at s = 0, Dirichlet at s = Z.
// A d = 1 grid may also be built on the half line, which restricts to
// z-even functions.
//
// CylinderGrid covers (rho, theta, z) for the three-dimensional equivariant
// solves: either a Dirichlet sector theta in (0, span) or the periodic circle.

#include "geometry.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sle {

enum class SAxis { none, full_line, half_line };

inline std::vector<double> cell_centers(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = lo + (i + 0.5) * h;
    return x;
}

struct GridSpec {
    double a = 1.0;
    double b = 2.0;
    int m = 0;
    int d = 0;
    int n_r = 4;
    int n_s = 4;
    double Z = 1.0;
    /// Defaults: none for d = 0, full_line for d = 1, half_line for d >= 2.
    std::optional<SAxis> s_axis;
    /// Defaults to |S^m| (1 for m = 0, a single strip) times |S^{d-1}| on a half line.
    std::optional<double> angular_constant;
};

struct StripGrid {
    int m = 0;
    int d = 0;
    double a = 0.0;
    double b = 1.0;
    double Z = 0.0;
    SAxis s_axis = SAxis::none;
    double h_r = 0.0;
    double h_s = 1.0;
    double angular_constant = 1.0;
    std::vector<double> r_nodes;
    std::vector<double> s_nodes;

    int n_r() const { return static_cast<int>(r_nodes.size()); }
    int n_s() const { return s_axis == SAxis::none ? 1 : static_cast<int>(s_nodes.size()); }
    std::size_t size() const { return static_cast<std::size_t>(n_r()) * static_cast<std::size_t>(n_s()); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_r()) * static_cast<std::size_t>(j);
    }
    bool has_s_axis() const { return s_axis != SAxis::none; }
    /// s coordinate of row j (0 when there is no second axis).
    double s_at(int j) const { return has_s_axis() ? s_nodes[static_cast<std::size_t>(j)] : 0.0; }
    /// Lower s face: reflecting (half line) or Dirichlet (full line).
    bool lower_s_face_reflecting() const { return s_axis == SAxis::half_line; }

    friend bool operator==(const StripGrid&, const StripGrid&) = default;
};

inline StripGrid build_grid(const GridSpec& spec) {
    if (!(spec.a >= 0.0) || !(spec.b > spec.a))
        throw DomainError("build_grid: need 0 <= a < b");
    if (spec.m < 0 || spec.d < 0) throw DomainError("build_grid: m and d must be >= 0");
    if (spec.n_r < 4) throw DomainError("build_grid: n_r must be >= 4");

    StripGrid g;
    g.m = spec.m;
    g.d = spec.d;
    g.a = spec.a;
    g.b = spec.b;
    g.h_r = (spec.b - spec.a) / spec.n_r;
    g.r_nodes = cell_centers(spec.a, spec.b, spec.n_r);

    if (spec.d == 0) {
        g.s_axis = SAxis::none;
    } else {
        g.s_axis = spec.s_axis.value_or(spec.d == 1 ? SAxis::full_line : SAxis::half_line);
        if (g.s_axis == SAxis::none) throw DomainError("build_grid: d >= 1 requires an s axis");
        if (g.s_axis == SAxis::full_line && spec.d != 1)
            throw DomainError("build_grid: a full-line z axis is only available for d = 1");
        if (spec.n_s < 4) throw DomainError("build_grid: n_s must be >= 4");
        if (!(spec.Z > 0.0) || !std::isfinite(spec.Z)) throw DomainError("build_grid: Z must be > 0");
        g.Z = spec.Z;
        const double lo = g.s_axis == SAxis::full_line ? -spec.Z : 0.0;
        g.h_s = (spec.Z - lo) / spec.n_s;
        g.s_nodes = cell_centers(lo, spec.Z, spec.n_s);
    }

    if (spec.angular_constant) {
        g.angular_constant = *spec.angular_constant;
    } else {
        g.angular_constant = spec.m == 0 ? 1.0 : sphere_area(spec.m);
        if (g.s_axis == SAxis::half_line) g.angular_constant *= sphere_area(spec.d - 1);
    }
    return g;
}

/// Grid for a validated shell configuration. n_s and Z are ignored when d = 0.
inline StripGrid build_grid(const ShellConfig& cfg, int n_r, int n_s, double Z) {
    GridSpec spec;
    spec.a = cfg.a();
    spec.b = cfg.b();
    spec.m = cfg.m();
    spec.d = reduced_dimension(cfg);
    spec.n_r = n_r;
    spec.n_s = n_s;
    spec.Z = Z;
    return build_grid(spec);
}

/// (rho, theta, z) grid, cell-centered and uniform. `copies` is the number of
/// congruent images of the theta range that make up the full domain; it is
/// folded into the cell measures so integrals are full-domain integrals.
struct CylinderGrid {
    double a = 1.0;
    double b = 2.0;
    double Z = 1.0;
    double theta_span = 0.0;
    bool theta_periodic = false;
    int copies = 1;
    double h_rho = 0.0;
    double h_theta = 0.0;
    double h_z = 0.0;
    std::vector<double> rho_nodes;
    std::vector<double> theta_nodes;
    std::vector<double> z_nodes;

    int n_rho() const { return static_cast<int>(rho_nodes.size()); }
    int n_theta() const { return static_cast<int>(theta_nodes.size()); }
    int n_z() const { return static_cast<int>(z_nodes.size()); }
    std::size_t size() const {
        return static_cast<std::size_t>(n_rho()) * static_cast<std::size_t>(n_theta()) *
               static_cast<std::size_t>(n_z());
    }
    std::size_t index(int i, int j, int l) const {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(n_rho()) *
                   (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_theta()) * static_cast<std::size_t>(l));
    }

    friend bool operator==(const CylinderGrid&, const CylinderGrid&) = default;
};

inline CylinderGrid build_cylinder_grid(double a, double b, int n_rho, int n_theta, int n_z, double Z,
                                        double theta_span, bool periodic, int copies) {
    if (!(a > 0.0) || !(b > a)) throw DomainError("build_cylinder_grid: need 0 < a < b");
    if (n_rho < 4 || n_theta < 4 || n_z < 4) throw DomainError("build_cylinder_grid: need >= 4 cells per axis");
    if (!(Z > 0.0)) throw DomainError("build_cylinder_grid: Z must be > 0");
    if (!(theta_span > 0.0) || theta_span > 2.0 * M_PI + 1e-12)
        throw DomainError("build_cylinder_grid: theta span must lie in (0, 2 pi]");
    if (copies < 1) throw DomainError("build_cylinder_grid: copies must be >= 1");
    CylinderGrid g;
    g.a = a;
    g.b = b;
    g.Z = Z;
    g.theta_span = theta_span;
    g.theta_periodic = periodic;
    g.copies = copies;
    g.h_rho = (b - a) / n_rho;
    g.h_theta = theta_span / n_theta;
    g.h_z = 2.0 * Z / n_z;
    g.rho_nodes = cell_centers(a, b, n_rho);
    g.theta_nodes = cell_centers(0.0, theta_span, n_theta);
    g.z_nodes = cell_centers(-Z, Z, n_z);
    return g;
}

/// Real values on the cells of a grid. Carries its grid by value.
template <class Grid>
struct GridField {
    Grid grid;
    std::vector<double> values;

    GridField() = default;
    explicit GridField(Grid g) : grid(std::move(g)), values(grid.size(), 0.0) {}
    GridField(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw DomainError("GridField: value count " + std::to_string(values.size()) +
                              " does not match grid size " + std::to_string(grid.size()));
        for (double x : values)
            if (!std::isfinite(x)) throw DomainError("GridField: non-finite value");
    }

    std::size_t size() const { return values.size(); }
    double max_abs() const {
        double mx = 0.0;
        for (double x : values) mx = std::max(mx, std::abs(x));
        return mx;
    }
};

using Field = GridField<StripGrid>;
using SectorField = GridField<CylinderGrid>;

/// Samples f(r, s) at every cell center.
template <class Fn>
Field sample_field(const StripGrid& grid, Fn&& f) {
    Field out(grid);
    for (int j = 0; j < grid.n_s(); ++j)
        for (int i = 0; i < grid.n_r(); ++i)
            out.values[grid.index(i, j)] = f(grid.r_nodes[static_cast<std::size_t>(i)], grid.s_at(j));
    return out;
}

template <class Fn>
SectorField sample_field(const CylinderGrid& grid, Fn&& f) {
    SectorField out(grid);
    for (int l = 0; l < grid.n_z(); ++l)
        for (int j = 0; j < grid.n_theta(); ++j)
            for (int i = 0; i < grid.n_rho(); ++i)
                out.values[grid.index(i, j, l)] =
                    f(grid.rho_nodes[static_cast<std::size_t>(i)], grid.theta_nodes[static_cast<std::size_t>(j)],
                      grid.z_nodes[static_cast<std::size_t>(l)]);
    return out;
}

} // namespace sle
