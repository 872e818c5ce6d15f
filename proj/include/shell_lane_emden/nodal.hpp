#pragma once

// Nodal domains of grid functions: maximal face-connected sets of cells of
// one sign whose magnitude exceeds a fraction of the sup norm. Cells below
// the threshold stay unlabeled, so a sign change across a reflection plane
// never merges two domains.

#include "grid.hpp"

#include <cstddef>
#include <numeric>
#include <vector>

namespace sle {

struct NodalReport {
    int count = 0;
    double threshold = 0.0;
    std::vector<std::size_t> component_sizes;  ///< in order of first cell index
    bool zero_field = false;
};

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x == y) return;
        if (size_[x] < size_[y]) std::swap(x, y);
        parent_[y] = x;
        size_[x] += size_[y];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

template <class Visit>
void for_each_adjacent_pair(const StripGrid& g, Visit&& visit) {
    for (int j = 0; j < g.n_s(); ++j)
        for (int i = 0; i < g.n_r(); ++i) {
            if (i + 1 < g.n_r()) visit(g.index(i, j), g.index(i + 1, j));
            if (j + 1 < g.n_s()) visit(g.index(i, j), g.index(i, j + 1));
        }
}

template <class Visit>
void for_each_adjacent_pair(const CylinderGrid& g, Visit&& visit) {
    for (int l = 0; l < g.n_z(); ++l)
        for (int j = 0; j < g.n_theta(); ++j)
            for (int i = 0; i < g.n_rho(); ++i) {
                if (i + 1 < g.n_rho()) visit(g.index(i, j, l), g.index(i + 1, j, l));
                if (j + 1 < g.n_theta())
                    visit(g.index(i, j, l), g.index(i, j + 1, l));
                else if (g.theta_periodic)
                    visit(g.index(i, j, l), g.index(i, 0, l));
                if (l + 1 < g.n_z()) visit(g.index(i, j, l), g.index(i, j, l + 1));
            }
}

} // namespace detail

template <class Grid>
NodalReport count_nodal_domains(const GridField<Grid>& field, double threshold_frac) {
    if (!(threshold_frac > 0.0) || threshold_frac > 0.01)
        throw DomainError("count_nodal_domains: threshold fraction must lie in (0, 0.01]");
    NodalReport rep;
    const double vmax = field.max_abs();
    if (vmax == 0.0) {
        rep.zero_field = true;
        return rep;
    }
    rep.threshold = threshold_frac * vmax;
    const auto& v = field.values;
    const auto sign = [&](std::size_t i) { return v[i] > rep.threshold ? 1 : (v[i] < -rep.threshold ? -1 : 0); };

    detail::DisjointSets sets(v.size());
    detail::for_each_adjacent_pair(field.grid, [&](std::size_t x, std::size_t y) {
        const int sx = sign(x);
        if (sx != 0 && sx == sign(y)) sets.unite(x, y);
    });

    std::vector<long> slot(v.size(), -1);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (sign(i) == 0) continue;
        const std::size_t root = sets.find(i);
        if (slot[root] < 0) {
            slot[root] = static_cast<long>(rep.component_sizes.size());
            rep.component_sizes.push_back(0);
        }
        ++rep.component_sizes[static_cast<std::size_t>(slot[root])];
    }
    rep.count = static_cast<int>(rep.component_sizes.size());
    return rep;
}

} // namespace sle
