// SPDX-License-Identifier: MIT
//
// Uniform adapted grid: cubes of side 1/G with G = ceil(1/delta), each point
// snapped to the midpoint of its cube. Cube membership uses half-open cubes
// [z/G, (z+1)/G) per coordinate, which fixes a deterministic rule for
// boundary points.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "aot/path_measure.hpp"

namespace aot {

struct GridSpec {
    double delta = 0.0;  // requested grid size
    int G = 0;           // grid count, ceil(1/delta)
    int dimension = 0;   // ambient dimension dT

    GridSpec() = default;
    GridSpec(double delta_, int dimension_) : delta(delta_), dimension(dimension_) {
        if (!(delta > 0.0)) throw std::invalid_argument("GridSpec: delta must be positive");
        if (dimension <= 0) throw std::invalid_argument("GridSpec: dimension must be positive");
        G = static_cast<int>(std::ceil(1.0 / delta));
        if (G < 1) G = 1;
    }

    double cell_width() const { return 1.0 / static_cast<double>(G); }

    /// Midpoint of the cube containing coordinate c: (floor(c*G) + 1/2)/G.
    double snap(double c) const {
        const double z = std::floor(c * static_cast<double>(G));
        return (z + 0.5) / static_cast<double>(G);
    }
};

inline Path project_path(const GridSpec& g, const Path& p) {
    std::vector<double> c(p.coords.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = g.snap(p.coords[i]);
    return Path(p.d, p.T, std::move(c));
}

/// Snap every atom to its cube midpoint; colliding projected paths merge
/// their weights. Mass is preserved.
inline DiscretePathMeasure adapted_project(const GridSpec& g, const DiscretePathMeasure& m) {
    if (g.dimension != m.d() * m.T())
        throw std::invalid_argument("adapted_project: grid dimension mismatch");
    std::vector<Atom> atoms;
    atoms.reserve(m.size());
    for (const Atom& a : m.atoms()) atoms.push_back({project_path(g, a.path), a.weight});
    return DiscretePathMeasure::from_atoms(m.d(), m.T(), std::move(atoms));
}

}  // namespace aot
