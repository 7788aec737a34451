/** @file
 * Builders for the walk families the library ships: classical Markov chain
 * embeddings, stationary lattice walks, finite-graph walks written as a
 * matrix of operators, and the named presets used by the CLI and tests.
 */
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oqrw/walk.hpp"

namespace oqrw {

/// Right-stochastic matrix: entry (j, i) is the transition probability j -> i.
class StochasticMatrix {
public:
    explicit StochasticMatrix(std::size_t size)
        : size_(size), p_(size * size, 0.0) {
        if (size == 0) throw DefinitionError("StochasticMatrix: size must be >= 1");
    }

    std::size_t size() const { return size_; }
    double& at(std::size_t j, std::size_t i) { return p_[j * size_ + i]; }
    double at(std::size_t j, std::size_t i) const { return p_[j * size_ + i]; }

    void validate(double tol = 1e-12) const {
        for (std::size_t j = 0; j < size_; ++j) {
            double row = 0.0;
            for (std::size_t i = 0; i < size_; ++i) {
                if (at(j, i) < 0.0)
                    throw DefinitionError("StochasticMatrix: negative entry in row " +
                                          std::to_string(j + 1));
                row += at(j, i);
            }
            if (std::abs(row - 1.0) > tol)
                throw DefinitionError("StochasticMatrix: row " + std::to_string(j + 1) +
                                      " sums to " + std::to_string(row));
        }
    }

private:
    std::size_t size_;
    std::vector<double> p_;
};

/// V x V grid of optional operators; row j lists the B^i_j leaving source j.
class OperatorMatrix {
public:
    explicit OperatorMatrix(std::size_t size) : size_(size), cells_(size * size) {
        if (size == 0) throw DefinitionError("OperatorMatrix: size must be >= 1");
    }

    std::size_t size() const { return size_; }
    std::optional<ComplexMatrix>& at(std::size_t j, std::size_t i) {
        return cells_[j * size_ + i];
    }
    const std::optional<ComplexMatrix>& at(std::size_t j, std::size_t i) const {
        return cells_[j * size_ + i];
    }

private:
    std::size_t size_;
    std::vector<std::optional<ComplexMatrix>> cells_;
};

/// Classical embedding B^i_j = sqrt(P(j,i)) U^i_j. With the unitaries omitted
/// every U^i_j is the identity; either way the walk's distribution reproduces
/// the classical chain's n-step law exactly.
inline TransitionOperators from_classical(
    const StochasticMatrix& p,
    const std::optional<std::vector<std::vector<ComplexMatrix>>>& unitaries,
    std::size_t chirality_dim) {
    p.validate();
    const std::size_t v = p.size();
    if (unitaries) {
        if (unitaries->size() != v)
            throw DefinitionError("from_classical: unitary grid has wrong size");
        for (std::size_t j = 0; j < v; ++j) {
            if ((*unitaries)[j].size() != v)
                throw DefinitionError("from_classical: unitary grid row has wrong size");
            for (std::size_t i = 0; i < v; ++i) {
                const auto& u = (*unitaries)[j][i];
                if (u.rows() != chirality_dim || u.cols() != chirality_dim)
                    throw DefinitionError("from_classical: unitary has wrong dimension");
                if (!is_unitary(u, 1e-10))
                    throw DefinitionError("from_classical: grid entry (" +
                                          std::to_string(j + 1) + "," +
                                          std::to_string(i + 1) + ") is not unitary");
            }
        }
    }

    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges;
    const ComplexMatrix eye = ComplexMatrix::identity(chirality_dim);
    for (std::size_t j = 0; j < v; ++j)
        for (std::size_t i = 0; i < v; ++i) {
            const double pji = p.at(j, i);
            if (pji == 0.0) continue;
            const ComplexMatrix& u = unitaries ? (*unitaries)[j][i] : eye;
            edges[{static_cast<Vertex>(i + 1), static_cast<Vertex>(j + 1)}] =
                std::sqrt(pji) * u;
        }
    return TransitionOperators::graph(
        VertexSpace::finite_graph(static_cast<std::int64_t>(v)), chirality_dim,
        std::move(edges));
}

/// Stationary nearest-neighbor lattice walk from the pair (B left, C right).
inline TransitionOperators stationary_z(const ComplexMatrix& left,
                                        const ComplexMatrix& right) {
    if (!left.is_square() || !right.is_square() || left.rows() != right.rows())
        throw DefinitionError("stationary_z: operator dimensions differ");
    const ComplexMatrix sum = adjoint(left) * left + adjoint(right) * right;
    const double dev = max_abs_diff(sum, ComplexMatrix::identity(left.rows()));
    if (dev > 1e-10)
        throw DefinitionError("stationary_z: B*B + C*C deviates from I by " +
                              std::to_string(dev));
    return TransitionOperators::stationary(VertexSpace::lattice_z(0, 0), left, right);
}

/// Finite-graph walk from the matrix-of-operators notation; absent cells are
/// zero operators. Throws naming the first row that breaks normalization.
inline TransitionOperators from_operator_matrix(const OperatorMatrix& om,
                                                double tol = 1e-10) {
    const std::size_t v = om.size();
    std::size_t dim = 0;
    for (std::size_t j = 0; j < v && dim == 0; ++j)
        for (std::size_t i = 0; i < v && dim == 0; ++i)
            if (om.at(j, i)) dim = om.at(j, i)->rows();
    if (dim == 0) throw DefinitionError("from_operator_matrix: no operators given");

    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges;
    for (std::size_t j = 0; j < v; ++j) {
        ComplexMatrix row_sum(dim, dim);
        bool any = false;
        for (std::size_t i = 0; i < v; ++i) {
            if (!om.at(j, i)) continue;
            const ComplexMatrix& b = *om.at(j, i);
            if (b.rows() != dim || b.cols() != dim)
                throw DefinitionError("from_operator_matrix: mixed operator dimensions");
            row_sum += adjoint(b) * b;
            any = true;
            edges[{static_cast<Vertex>(i + 1), static_cast<Vertex>(j + 1)}] = b;
        }
        if (!any)
            throw DefinitionError("from_operator_matrix: row " + std::to_string(j + 1) +
                                  " has no operators");
        const double dev = max_abs_diff(row_sum, ComplexMatrix::identity(dim));
        if (dev > tol)
            throw DefinitionError("from_operator_matrix: row " + std::to_string(j + 1) +
                                  " deviates from normalization by " + std::to_string(dev));
    }
    return TransitionOperators::graph(
        VertexSpace::finite_graph(static_cast<std::int64_t>(v)), dim, std::move(edges));
}

// --- named presets -------------------------------------------------------------

struct Preset {
    std::string name;
    TransitionOperators ops;
    BlockState initial;
};

/// Lattice walk with B, C = 1/sqrt(3) upper/lower triangular pair; starts in
/// |e1><e1| at the origin. Drifts right at first, then turns Gaussian.
inline Preset preset_z_sqrt3() {
    const double s = 1.0 / std::sqrt(3.0);
    const ComplexMatrix b{{s, s}, {0.0, s}};
    const ComplexMatrix c{{s, 0.0}, {-s, s}};
    auto ops = stationary_z(b, c);
    auto initial = BlockState::point(ops.space(), 2, 0, ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}});
    return Preset{"z_sqrt3", std::move(ops), std::move(initial)};
}

/// Five-dimensional chirality lattice walk parameterized by an angle t;
/// starts maximally mixed at the origin. Exhibits two traveling packets
/// plus a slowly decaying peak riding the fast edge.
inline Preset preset_z_dim5(double t) {
    const double c2 = std::cos(2.0 * t), c4 = std::cos(4.0 * t);
    const double s2 = std::sin(2.0 * t), s4 = std::sin(4.0 * t);
    const double r = 2.0 * std::sqrt(1.5) * s4;
    const double u = -2.0 * s2 - s4, w = 2.0 * s2 - s4;
    ComplexMatrix b{{0.0, u, 0.0, w, 0.0},
                    {u, 0.0, -r, 0.0, w},
                    {0.0, -r, 0.0, -r, 0.0},
                    {w, 0.0, -r, 0.0, u},
                    {0.0, w, 0.0, u, 0.0}};
    b *= Complex{0.25, 0.0};

    const double el = 3.0 + 4.0 * c2 + c4;
    const double elp = 3.0 - 4.0 * c2 + c4;
    const double cc = -std::sqrt(6.0) * (1.0 - c4);
    const double g = 4.0 * (c2 + c4), gp = 4.0 * (-c2 + c4);
    ComplexMatrix c{{el, 0.0, cc, 0.0, elp},
                    {0.0, g, 0.0, gp, 0.0},
                    {cc, 0.0, 2.0 * (1.0 + 3.0 * c4), 0.0, cc},
                    {0.0, gp, 0.0, g, 0.0},
                    {elp, 0.0, cc, 0.0, el}};
    c *= Complex{0.125, 0.0};

    auto ops = stationary_z(b, c);
    ComplexMatrix rho0 = ComplexMatrix::identity(5);
    rho0 *= Complex{0.2, 0.0};
    auto initial = BlockState::point(ops.space(), 5, 0, std::move(rho0));
    return Preset{"z_dim5", std::move(ops), std::move(initial)};
}

/// Two-vertex graph walk: diagonal pair (D1, D2) out of vertex 1 and the
/// absorbing pair (B, C) out of vertex 2. Converges to |e1><e1| at vertex 2.
inline Preset preset_two_vertex(double p, double a = 1.0 / std::sqrt(2.0),
                                double alpha = 1.0 / std::sqrt(2.0)) {
    if (!(p > 0.0 && p < 1.0))
        throw DefinitionError("two_vertex: p must lie in (0,1)");
    if (std::abs(a) > 1.0 || std::abs(alpha) > 1.0)
        throw DefinitionError("two_vertex: diagonal entries must lie in [-1,1]");
    const double bb = std::sqrt(1.0 - a * a), beta = std::sqrt(1.0 - alpha * alpha);
    OperatorMatrix om(2);
    om.at(0, 0) = ComplexMatrix{{a, 0.0}, {0.0, alpha}};
    om.at(0, 1) = ComplexMatrix{{bb, 0.0}, {0.0, beta}};
    om.at(1, 0) = ComplexMatrix{{0.0, std::sqrt(p)}, {0.0, 0.0}};
    om.at(1, 1) = ComplexMatrix{{1.0, 0.0}, {0.0, std::sqrt(1.0 - p)}};
    auto ops = from_operator_matrix(om);
    ComplexMatrix rho0 = ComplexMatrix::identity(2);
    rho0 *= Complex{0.5, 0.0};
    auto initial = BlockState::point(ops.space(), 2, 1, std::move(rho0));
    return Preset{"two_vertex", std::move(ops), std::move(initial)};
}

/// N-site chain: interior sites hop left/right through diagonal pairs,
/// the last site holds the absorbing (B, C) pair. Transports any state
/// started at site 1 into |e1><e1| at site N.
inline Preset preset_chain(std::int64_t n_sites, double p,
                           std::vector<double> angles = {}) {
    if (n_sites < 2) throw DefinitionError("chain: need at least 2 sites");
    if (!(p > 0.0 && p < 1.0)) throw DefinitionError("chain: p must lie in (0,1)");
    const auto n_pairs = static_cast<std::size_t>(n_sites - 1);
    if (angles.empty()) angles.assign(n_pairs, std::atan(1.0)); // pi/4
    if (angles.size() != n_pairs)
        throw DefinitionError("chain: need one angle per non-terminal site");

    OperatorMatrix om(static_cast<std::size_t>(n_sites));
    for (std::size_t j = 0; j + 1 < static_cast<std::size_t>(n_sites); ++j) {
        // cos-weighted operator to the lower-index target, sin-weighted forward
        ComplexMatrix d_low = ComplexMatrix::identity(2);
        d_low *= Complex{std::cos(angles[j]), 0.0};
        ComplexMatrix d_high = ComplexMatrix::identity(2);
        d_high *= Complex{std::sin(angles[j]), 0.0};
        if (j == 0) {
            om.at(0, 0) = std::move(d_low);
            om.at(0, 1) = std::move(d_high);
        } else {
            om.at(j, j - 1) = std::move(d_low);
            om.at(j, j + 1) = std::move(d_high);
        }
    }
    const auto last = static_cast<std::size_t>(n_sites - 1);
    om.at(last, last - 1) = ComplexMatrix{{0.0, std::sqrt(p)}, {0.0, 0.0}};
    om.at(last, last) = ComplexMatrix{{1.0, 0.0}, {0.0, std::sqrt(1.0 - p)}};

    auto ops = from_operator_matrix(om);
    ComplexMatrix rho0 = ComplexMatrix::identity(2);
    rho0 *= Complex{0.5, 0.0};
    auto initial = BlockState::point(ops.space(), 2, 1, std::move(rho0));
    return Preset{"chain", std::move(ops), std::move(initial)};
}

/// Coin-derived lattice pair B = (a b; 0 0), C = (0 0; c d) from the Hadamard
/// coin; satisfies the stronger amplitude-walk condition C*B = 0.
inline Preset preset_hadamard_unitary() {
    const double s = 1.0 / std::sqrt(2.0);
    const ComplexMatrix b{{s, s}, {0.0, 0.0}};
    const ComplexMatrix c{{0.0, 0.0}, {s, -s}};
    auto ops = stationary_z(b, c);
    auto initial = BlockState::point(ops.space(), 2, 0, ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}});
    return Preset{"hadamard_unitary", std::move(ops), std::move(initial)};
}

/// CLI surface: preset by name with a loose parameter map.
inline Preset make_preset(const std::string& name,
                          const std::map<std::string, double>& params = {},
                          const std::vector<double>& angles = {}) {
    auto get = [&](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "z_sqrt3") return preset_z_sqrt3();
    if (name == "z_dim5") return preset_z_dim5(get("t", std::atan(1.0) / 10.0)); // pi/40
    if (name == "two_vertex")
        return preset_two_vertex(get("p", 0.5), get("a", 1.0 / std::sqrt(2.0)),
                                 get("alpha", 1.0 / std::sqrt(2.0)));
    if (name == "chain")
        return preset_chain(static_cast<std::int64_t>(get("n", 5)), get("p", 0.5), angles);
    if (name == "hadamard_unitary") return preset_hadamard_unitary();
    throw DefinitionError("unknown preset: " + name);
}

} // namespace oqrw
