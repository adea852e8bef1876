// SPDX-License-Identifier: MIT
//
// Discrete path measures: weighted atoms over T-stage, d-dimensional paths.
// This is the universal carrier for every measure in the library — inputs,
// estimators, references, and intermediate constructions alike.
//
// Paths carry the sum-norm ||x|| = sum_t ||x_t||_2 (per-stage Euclidean).
// Measures are kept canonical: atoms lexicographically sorted by
// coordinates, exact-duplicate paths merged, weights strictly positive and
// summing to one. All values are immutable after construction and safe to
// share across threads.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace aot {

// ============================================================================
// Path
// ============================================================================

/// A single T-stage path in R^{dT}. Coordinates are stage-major:
/// coords[t*d + k] is component k of stage t. Entries must be finite.
struct Path {
    int d = 0;
    int T = 0;
    std::vector<double> coords;

    Path() = default;
    Path(int d_, int T_, std::vector<double> coords_)
        : d(d_), T(T_), coords(std::move(coords_)) {
        if (d <= 0 || T <= 0) throw std::invalid_argument("Path: d and T must be positive");
        if (coords.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(T))
            throw std::invalid_argument("Path: coords size must be d*T");
        for (double& c : coords) {
            if (!std::isfinite(c)) throw std::invalid_argument("Path: non-finite coordinate");
            if (c == 0.0) c = 0.0;  // normalize -0.0 so canonical order is bit-stable
        }
    }

    double at(int t, int k) const { return coords[static_cast<std::size_t>(t) * d + k]; }

    /// Euclidean norm of stage t.
    double stage_norm(int t) const {
        double sq = 0.0;
        for (int k = 0; k < d; ++k) {
            const double c = at(t, k);
            sq += c * c;
        }
        return std::sqrt(sq);
    }

    friend bool operator==(const Path& a, const Path& b) {
        return a.d == b.d && a.T == b.T && a.coords == b.coords;
    }
};

inline bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Sum-norm ||x|| = sum_{t} ||x_t||_2.
inline double sum_norm(const Path& p) {
    double s = 0.0;
    for (int t = 0; t < p.T; ++t) s += p.stage_norm(t);
    return s;
}

/// Euclidean norm of the stage difference ||x_t - y_t||_2, for equal d.
inline double stage_distance(const Path& x, int tx, const Path& y, int ty) {
    double sq = 0.0;
    for (int k = 0; k < x.d; ++k) {
        const double diff = x.at(tx, k) - y.at(ty, k);
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

/// Sum-norm distance between whole paths, sum_t ||x_t - y_t||_2.
inline double path_distance(const Path& x, const Path& y) {
    double s = 0.0;
    for (int t = 0; t < x.T; ++t) s += stage_distance(x, t, y, t);
    return s;
}

struct Atom {
    Path path;
    double weight = 0.0;
};

// ============================================================================
// DiscretePathMeasure
// ============================================================================

class DiscretePathMeasure {
public:
    DiscretePathMeasure() = default;

    /// Canonicalize and validate: merge duplicate paths, sort atoms
    /// lexicographically, drop numerically-zero weights, check total mass.
    static DiscretePathMeasure from_atoms(int d, int T, std::vector<Atom> atoms,
                                          double mass_tol = 1e-12) {
        if (atoms.empty()) throw std::invalid_argument("measure: no atoms");
        for (const Atom& a : atoms) {
            if (a.path.d != d || a.path.T != T)
                throw std::invalid_argument("measure: atom shape mismatch");
            if (!(a.weight > -1e-12) || !std::isfinite(a.weight))
                throw std::invalid_argument("measure: negative or non-finite weight");
        }
        std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
            return lex_less(a.path.coords, b.path.coords);
        });
        std::vector<Atom> merged;
        merged.reserve(atoms.size());
        for (Atom& a : atoms) {
            if (!merged.empty() && merged.back().path == a.path)
                merged.back().weight += a.weight;
            else
                merged.push_back(std::move(a));
        }
        std::erase_if(merged, [](const Atom& a) { return a.weight <= 1e-15; });
        if (merged.empty()) throw std::invalid_argument("measure: all atoms degenerate");
        double total = 0.0, comp = 0.0;  // Kahan
        for (const Atom& a : merged) {
            const double y = a.weight - comp;
            const double t = total + y;
            comp = (t - total) - y;
            total = t;
        }
        if (std::abs(total - 1.0) > mass_tol)
            throw std::invalid_argument("measure: weights sum to " + std::to_string(total) +
                                        ", not 1");
        DiscretePathMeasure m;
        m.d_ = d;
        m.T_ = T;
        m.atoms_ = std::move(merged);
        return m;
    }

    int d() const { return d_; }
    int T() const { return T_; }
    std::size_t size() const { return atoms_.size(); }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const Atom& atom(std::size_t i) const { return atoms_[i]; }

    bool same_shape(const DiscretePathMeasure& o) const { return d_ == o.d_ && T_ == o.T_; }

    friend bool operator==(const DiscretePathMeasure& a, const DiscretePathMeasure& b) {
        if (!a.same_shape(b) || a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a.atoms_[i].path == b.atoms_[i].path)) return false;
            if (std::abs(a.atoms_[i].weight - b.atoms_[i].weight) > 1e-12) return false;
        }
        return true;
    }

private:
    int d_ = 0;
    int T_ = 0;
    std::vector<Atom> atoms_;
};

/// Dirac measure at a single path.
inline DiscretePathMeasure dirac(Path p) {
    const int d = p.d, T = p.T;
    return DiscretePathMeasure::from_atoms(d, T, {{std::move(p), 1.0}});
}

// ============================================================================
// Measure-level operations
// ============================================================================

/// p-th moment M_p = sum_i w_i ||x_i||^p, p >= 1.
inline double moment(const DiscretePathMeasure& m, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("moment: p must be >= 1");
    double s = 0.0;
    for (const Atom& a : m.atoms()) s += a.weight * std::pow(sum_norm(a.path), p);
    return s;
}

/// Translate every atom by zeta in R^{dT}; weights unchanged.
inline DiscretePathMeasure shift(const DiscretePathMeasure& m, const std::vector<double>& zeta) {
    const std::size_t dim = static_cast<std::size_t>(m.d()) * m.T();
    if (zeta.size() != dim) throw std::invalid_argument("shift: zeta dimension mismatch");
    for (double z : zeta)
        if (!std::isfinite(z)) throw std::invalid_argument("shift: non-finite zeta");
    std::vector<Atom> atoms;
    atoms.reserve(m.size());
    for (const Atom& a : m.atoms()) {
        std::vector<double> c = a.path.coords;
        for (std::size_t i = 0; i < dim; ++i) c[i] += zeta[i];
        atoms.push_back({Path(m.d(), m.T(), std::move(c)), a.weight});
    }
    return DiscretePathMeasure::from_atoms(m.d(), m.T(), std::move(atoms));
}

/// Truncation map applied atomwise: stages are kept until the first exit
/// from [-R, R]^d; from the exit stage on, every stage is replaced by the
/// sentinel stage (R+1, ..., R+1). Output lives in [-R-1, R+1]^{dT} and
/// satisfies ||phi_R(x)|| <= 2 T sqrt(d) ||x||.
inline Path truncate_path(const Path& p, double R) {
    int tau = p.T;
    for (int t = 0; t < p.T; ++t) {
        for (int k = 0; k < p.d; ++k) {
            if (std::abs(p.at(t, k)) > R) {
                tau = t;
                break;
            }
        }
        if (tau == t) break;
    }
    if (tau == p.T) return p;
    std::vector<double> c = p.coords;
    for (int t = tau; t < p.T; ++t)
        for (int k = 0; k < p.d; ++k) c[static_cast<std::size_t>(t) * p.d + k] = R + 1.0;
    return Path(p.d, p.T, std::move(c));
}

inline DiscretePathMeasure truncate(const DiscretePathMeasure& m, double R) {
    if (!(R >= 1.0)) throw std::invalid_argument("truncate: R must be >= 1");
    std::vector<Atom> atoms;
    atoms.reserve(m.size());
    for (const Atom& a : m.atoms()) atoms.push_back({truncate_path(a.path, R), a.weight});
    return DiscretePathMeasure::from_atoms(m.d(), m.T(), std::move(atoms));
}

/// Pushforward onto the first t stages (1 <= t <= T).
inline DiscretePathMeasure marginal_up_to(const DiscretePathMeasure& m, int t) {
    if (t < 1 || t > m.T()) throw std::invalid_argument("marginal_up_to: t out of range");
    std::vector<Atom> atoms;
    atoms.reserve(m.size());
    for (const Atom& a : m.atoms()) {
        std::vector<double> c(a.path.coords.begin(),
                              a.path.coords.begin() + static_cast<std::size_t>(t) * m.d());
        atoms.push_back({Path(m.d(), t, std::move(c)), a.weight});
    }
    return DiscretePathMeasure::from_atoms(m.d(), t, std::move(atoms));
}

// ============================================================================
// JSON file format
// ============================================================================
//
// { "d": int, "T": int, "atoms": [ { "w": float, "path": [[float x d] x T] } ] }
// Weights must sum to 1 within 1e-9 on load; they are renormalized to unit
// mass so downstream invariants hold exactly.

inline nlohmann::json measure_to_json(const DiscretePathMeasure& m) {
    nlohmann::json j;
    j["d"] = m.d();
    j["T"] = m.T();
    nlohmann::json atoms = nlohmann::json::array();
    for (const Atom& a : m.atoms()) {
        nlohmann::json stages = nlohmann::json::array();
        for (int t = 0; t < m.T(); ++t) {
            nlohmann::json stage = nlohmann::json::array();
            for (int k = 0; k < m.d(); ++k) stage.push_back(a.path.at(t, k));
            stages.push_back(std::move(stage));
        }
        atoms.push_back({{"w", a.weight}, {"path", std::move(stages)}});
    }
    j["atoms"] = std::move(atoms);
    return j;
}

inline DiscretePathMeasure measure_from_json(const nlohmann::json& j) {
    const int d = j.at("d").get<int>();
    const int T = j.at("T").get<int>();
    if (d <= 0 || T <= 0) throw std::invalid_argument("measure json: d and T must be positive");
    std::vector<Atom> atoms;
    double total = 0.0;
    for (const auto& ja : j.at("atoms")) {
        const double w = ja.at("w").get<double>();
        const auto& stages = ja.at("path");
        if (static_cast<int>(stages.size()) != T)
            throw std::invalid_argument("measure json: path must have T stages");
        std::vector<double> coords;
        coords.reserve(static_cast<std::size_t>(d) * T);
        for (const auto& stage : stages) {
            if (static_cast<int>(stage.size()) != d)
                throw std::invalid_argument("measure json: stage must have d entries");
            for (const auto& c : stage) coords.push_back(c.get<double>());
        }
        total += w;
        atoms.push_back({Path(d, T, std::move(coords)), w});
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("measure json: weights sum to " + std::to_string(total));
    for (Atom& a : atoms) a.weight /= total;
    return DiscretePathMeasure::from_atoms(d, T, std::move(atoms), 1e-9);
}

}  // namespace aot
