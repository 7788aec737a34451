/** @file
 * The walk model: vertex spaces, transition operator families, block-diagonal
 * states and their exact evolution under the completely positive one-step map.
 *
 * A walk is a family of operators B^i_j (effect of jumping j -> i on the
 * internal chirality space) normalized per source: sum_i B^i_j* B^i_j = I.
 * States are vertex-indexed families of positive blocks rho_i with total
 * trace one; one step maps rho_i to sum_j B^i_j rho_j B^i_j*.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oqrw/matrix.hpp"

namespace oqrw {

using Vertex = std::int64_t;

class VertexSpace {
public:
    enum class Kind { FiniteGraph, LatticeZ };

    // Vertices 1..count, matching the stochastic-matrix convention.
    static VertexSpace finite_graph(std::int64_t count) {
        if (count < 1) throw DefinitionError("finite_graph: count must be >= 1");
        VertexSpace s;
        s.kind_ = Kind::FiniteGraph;
        s.lo_ = 1;
        s.hi_ = count;
        return s;
    }

    // Finite window [lo, hi] of the integer lattice. States grow their own
    // window as support spreads; this is just the current hull.
    static VertexSpace lattice_z(Vertex lo, Vertex hi) {
        if (lo > hi) throw DefinitionError("lattice_z: lo > hi");
        VertexSpace s;
        s.kind_ = Kind::LatticeZ;
        s.lo_ = lo;
        s.hi_ = hi;
        return s;
    }

    Kind kind() const { return kind_; }
    bool is_lattice() const { return kind_ == Kind::LatticeZ; }
    Vertex lo() const { return lo_; }
    Vertex hi() const { return hi_; }
    std::int64_t count() const { return hi_ - lo_ + 1; }
    bool contains(Vertex v) const { return v >= lo_ && v <= hi_; }

    // All vertices of the (truncated) register, in ascending order.
    std::vector<Vertex> vertices() const {
        std::vector<Vertex> out;
        out.reserve(static_cast<std::size_t>(count()));
        for (Vertex v = lo_; v <= hi_; ++v) out.push_back(v);
        return out;
    }

    bool compatible_with(const VertexSpace& o) const {
        if (kind_ != o.kind_) return false;
        if (kind_ == Kind::FiniteGraph) return count() == o.count();
        return true; // lattice windows may differ; they track state support
    }

private:
    Kind kind_ = Kind::FiniteGraph;
    Vertex lo_ = 1;
    Vertex hi_ = 1;
};

struct Edge {
    Vertex target;
    ComplexMatrix op;
};

/// The walk definition: a vertex space plus the edge-indexed operator family.
class TransitionOperators {
public:
    // Translation-invariant nearest-neighbor lattice walk: B jumps left,
    // C jumps right, from every site.
    static TransitionOperators stationary(VertexSpace space, ComplexMatrix left,
                                          ComplexMatrix right) {
        if (!space.is_lattice())
            throw DefinitionError("stationary: requires a lattice space");
        if (!left.is_square() || !right.is_square() || left.rows() != right.rows())
            throw DefinitionError("stationary: operator dimensions differ");
        TransitionOperators t;
        t.space_ = space;
        t.dim_ = left.rows();
        t.stationary_ = true;
        t.left_ = std::move(left);
        t.right_ = std::move(right);
        return t;
    }

    static TransitionOperators graph(VertexSpace space, std::size_t chirality_dim,
                                     std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges) {
        // edge keys are (target i, source j)
        TransitionOperators t;
        t.space_ = space;
        t.dim_ = chirality_dim;
        for (auto& [key, m] : edges) {
            const auto [target, source] = key;
            if (!space.contains(target) || !space.contains(source))
                throw DefinitionError("graph: edge endpoint outside vertex space");
            if (m.rows() != chirality_dim || m.cols() != chirality_dim)
                throw DefinitionError("graph: operator on edge (" + std::to_string(target) +
                                      "," + std::to_string(source) + ") has wrong dimension");
            t.by_source_[source].push_back(Edge{target, std::move(m)});
        }
        for (auto& [src, list] : t.by_source_)
            std::sort(list.begin(), list.end(),
                      [](const Edge& a, const Edge& b) { return a.target < b.target; });
        return t;
    }

    const VertexSpace& space() const { return space_; }
    std::size_t chirality_dim() const { return dim_; }
    bool is_stationary() const { return stationary_; }
    const ComplexMatrix& left_op() const { return left_; }
    const ComplexMatrix& right_op() const { return right_; }

    // Visit all operators leaving source j, ascending target order.
    void for_each_edge_from(Vertex j,
                            const std::function<void(Vertex, const ComplexMatrix&)>& fn) const {
        if (stationary_) {
            fn(j - 1, left_);
            fn(j + 1, right_);
            return;
        }
        auto it = by_source_.find(j);
        if (it == by_source_.end()) return;
        for (const auto& e : it->second) fn(e.target, e.op);
    }

    std::vector<Edge> edges_from(Vertex j) const {
        std::vector<Edge> out;
        for_each_edge_from(j, [&](Vertex t, const ComplexMatrix& m) {
            out.push_back(Edge{t, m});
        });
        return out;
    }

    // Sources carrying at least one edge (finite graphs only).
    std::vector<Vertex> sources() const {
        std::vector<Vertex> out;
        if (stationary_) return out;
        out.reserve(by_source_.size());
        for (const auto& [src, _] : by_source_) out.push_back(src);
        return out;
    }

    // Same walk with a different lattice window (for truncated realizations).
    TransitionOperators with_window(Vertex lo, Vertex hi) const {
        if (!stationary_)
            throw DefinitionError("with_window: only stationary lattice walks");
        return stationary(VertexSpace::lattice_z(lo, hi), left_, right_);
    }

private:
    VertexSpace space_ = VertexSpace::finite_graph(1);
    std::size_t dim_ = 1;
    bool stationary_ = false;
    ComplexMatrix left_, right_;
    std::map<Vertex, std::vector<Edge>> by_source_;
};

// --- normalization validation -----------------------------------------------

struct SourceDeviation {
    Vertex source;
    double deviation; // ||sum_i B^i_j* B^i_j - I||_max
};

struct ValidationReport {
    std::vector<SourceDeviation> per_source;
    bool stationary = false; // one entry stands for every lattice site
    double max_deviation = 0.0;
    double tolerance = 1e-10;
    bool passed = false;

    bool pass(double tol) const { return max_deviation <= tol; }
};

inline double normalization_deviation(const TransitionOperators& ops, Vertex j) {
    ComplexMatrix sum(ops.chirality_dim(), ops.chirality_dim());
    ops.for_each_edge_from(j, [&](Vertex, const ComplexMatrix& m) {
        if (m.rows() != ops.chirality_dim() || m.cols() != ops.chirality_dim())
            throw DefinitionError("normalization_deviation: mismatched operator dimension");
        sum += adjoint(m) * m;
    });
    return max_abs_diff(sum, ComplexMatrix::identity(ops.chirality_dim()));
}

/// Checks sum_i B^i_j* B^i_j = I for every source, reporting each deviation.
inline ValidationReport validate_transitions(const TransitionOperators& ops,
                                             double tol = 1e-10) {
    ValidationReport report;
    report.tolerance = tol;
    if (ops.is_stationary()) {
        report.stationary = true;
        const double dev = normalization_deviation(ops, 0);
        report.per_source.push_back(SourceDeviation{0, dev});
        report.max_deviation = dev;
    } else {
        for (Vertex j : ops.sources()) {
            const double dev = normalization_deviation(ops, j);
            report.per_source.push_back(SourceDeviation{j, dev});
            report.max_deviation = std::max(report.max_deviation, dev);
        }
    }
    report.passed = report.max_deviation <= tol;
    return report;
}

// --- states and distributions ------------------------------------------------

/// Vertex -> probability, p_i = Tr(rho_i).
struct WalkDistribution {
    std::map<Vertex, double> probs;

    double at(Vertex v) const {
        auto it = probs.find(v);
        return it == probs.end() ? 0.0 : it->second;
    }

    double total() const {
        double s = 0.0;
        for (const auto& [_, p] : probs) s += p;
        return s;
    }
};

/// Block-diagonal state: positive blocks rho_i, absent vertices carry zero.
class BlockState {
public:
    BlockState(VertexSpace space, std::size_t chirality_dim)
        : space_(space), dim_(chirality_dim) {}

    // Point state rho at vertex v (grows a lattice window around v if needed).
    static BlockState point(VertexSpace space, std::size_t chirality_dim, Vertex v,
                            ComplexMatrix rho) {
        if (space.is_lattice() && !space.contains(v))
            space = VertexSpace::lattice_z(std::min(space.lo(), v), std::max(space.hi(), v));
        BlockState s(space, chirality_dim);
        s.set_block(v, std::move(rho));
        return s;
    }

    const VertexSpace& space() const { return space_; }
    std::size_t chirality_dim() const { return dim_; }
    const std::map<Vertex, ComplexMatrix>& blocks() const { return blocks_; }

    void set_block(Vertex v, ComplexMatrix rho) {
        if (rho.rows() != dim_ || rho.cols() != dim_)
            throw DimensionError("set_block: block has wrong dimension");
        if (!space_.contains(v)) {
            if (!space_.is_lattice())
                throw DefinitionError("set_block: vertex outside finite graph");
            space_ = VertexSpace::lattice_z(std::min(space_.lo(), v), std::max(space_.hi(), v));
        }
        blocks_[v] = std::move(rho);
    }

    const ComplexMatrix* block(Vertex v) const {
        auto it = blocks_.find(v);
        return it == blocks_.end() ? nullptr : &it->second;
    }

    double total_trace() const {
        double s = 0.0;
        for (const auto& [_, rho] : blocks_) s += trace(rho).real();
        return s;
    }

    // Mass dropped by pruning over the state's history. Never renormalized away.
    double pruned_mass() const { return pruned_mass_; }
    void add_pruned_mass(double m) { pruned_mass_ += m; }

    Vertex support_lo() const { return blocks_.empty() ? space_.lo() : blocks_.begin()->first; }
    Vertex support_hi() const { return blocks_.empty() ? space_.hi() : blocks_.rbegin()->first; }

    // Throws unless every block is PSD, entries are finite and total trace is 1.
    void validate(double tol = 1e-9) const {
        double total = 0.0;
        for (const auto& [v, rho] : blocks_) {
            if (!all_finite(rho))
                throw CorruptedStateError("block at vertex " + std::to_string(v) +
                                          " has non-finite entries");
            if (!is_positive_semidefinite(rho, tol))
                throw CorruptedStateError("block at vertex " + std::to_string(v) +
                                          " is not positive semidefinite");
            total += trace(rho).real();
        }
        if (std::abs(total - 1.0) > tol)
            throw CorruptedStateError("total trace deviates from 1 by " +
                                      std::to_string(total - 1.0));
    }

private:
    VertexSpace space_;
    std::size_t dim_;
    std::map<Vertex, ComplexMatrix> blocks_;
    double pruned_mass_ = 0.0;
};

struct StepOptions {
    double prune_threshold = 1e-15; // blocks below this trace are dropped
    std::int64_t window_cap = 100000; // hard limit on lattice support size
};

/// One exact step: rho'_i = sum_j B^i_j rho_j B^i_j*.
inline BlockState step(const BlockState& state, const TransitionOperators& ops,
                       const StepOptions& opts = {}) {
    if (state.chirality_dim() != ops.chirality_dim())
        throw DefinitionError("step: state and operators disagree on chirality dimension");
    if (!state.space().compatible_with(ops.space()))
        throw DefinitionError("step: state and operators live on different spaces");

    if (state.space().is_lattice()) {
        const std::int64_t next_width =
            (state.support_hi() + 1) - (state.support_lo() - 1) + 1;
        if (!state.blocks().empty() && next_width > opts.window_cap)
            throw WindowOverflowError(
                "step: lattice support would exceed the window cap of " +
                std::to_string(opts.window_cap) + " sites");
    }

    // New blocks are accumulated into a fresh map; the old state is read-only
    // throughout, and map ordering fixes the summation order per target.
    std::map<Vertex, ComplexMatrix> next;
    for (const auto& [j, rho] : state.blocks()) {
        bool any_edge = false;
        ops.for_each_edge_from(j, [&](Vertex i, const ComplexMatrix& b) {
            any_edge = true;
            ComplexMatrix contrib = b * rho * adjoint(b);
            auto it = next.find(i);
            if (it == next.end())
                next.emplace(i, std::move(contrib));
            else
                it->second += contrib;
        });
        if (!any_edge)
            throw DefinitionError("step: occupied vertex " + std::to_string(j) +
                                  " has no outgoing operators");
    }

    VertexSpace next_space = state.space();
    if (state.space().is_lattice() && !next.empty()) {
        next_space = VertexSpace::lattice_z(std::min(state.space().lo(), next.begin()->first),
                                            std::max(state.space().hi(), next.rbegin()->first));
    }
    BlockState out(next_space, state.chirality_dim());
    out.add_pruned_mass(state.pruned_mass());
    for (auto& [v, rho] : next) {
        const double tr = trace(rho).real();
        if (tr < opts.prune_threshold) {
            out.add_pruned_mass(tr);
            continue;
        }
        out.set_block(v, std::move(rho));
    }
    return out;
}

/// n-fold composition of step; evolve(s, ops, 0) returns s unchanged.
inline BlockState evolve(const BlockState& state, const TransitionOperators& ops,
                         std::int64_t n, const StepOptions& opts = {}) {
    if (n < 0) throw DomainError("evolve: negative step count");
    BlockState current = state;
    for (std::int64_t k = 0; k < n; ++k) current = step(current, ops, opts);
    return current;
}

/// Reads off p_i = Tr(rho_i), clamping round-off negatives at zero.
inline WalkDistribution distribution(const BlockState& state) {
    WalkDistribution d;
    for (const auto& [v, rho] : state.blocks()) {
        const Complex t = trace(rho);
        if (std::abs(t.imag()) > 1e-9)
            throw CorruptedStateError("distribution: block trace at vertex " +
                                      std::to_string(v) + " has imaginary part " +
                                      std::to_string(t.imag()));
        double p = t.real();
        if (p < 0.0) {
            if (p < -1e-12)
                throw CorruptedStateError("distribution: negative probability " +
                                          std::to_string(p) + " at vertex " +
                                          std::to_string(v));
            p = 0.0;
        }
        d.probs[v] = p;
    }
    return d;
}

// --- full-space map (verification surface) -----------------------------------

// 0-based register index of vertex v within the truncated space.
inline std::size_t register_index(const VertexSpace& space, Vertex v) {
    if (!space.contains(v))
        throw DimensionError("register_index: vertex outside space");
    return static_cast<std::size_t>(v - space.lo());
}

// |i><j| on the vertex register.
inline ComplexMatrix vertex_dyad(const VertexSpace& space, Vertex i, Vertex j) {
    const auto n = static_cast<std::size_t>(space.count());
    ComplexMatrix m(n, n);
    m(register_index(space, i), register_index(space, j)) = 1.0;
    return m;
}

// Embeds sum_i rho_i (x) |i><i| as a dense matrix on H (x) K.
inline ComplexMatrix embed_block_diagonal(const BlockState& state) {
    const auto d = state.chirality_dim();
    const auto v = static_cast<std::size_t>(state.space().count());
    ComplexMatrix out(d * v, d * v);
    for (const auto& [vertex, rho] : state.blocks()) {
        const std::size_t k = register_index(state.space(), vertex);
        for (std::size_t h = 0; h < d; ++h)
            for (std::size_t h2 = 0; h2 < d; ++h2)
                out(h * v + k, h2 * v + k) = rho(h, h2);
    }
    return out;
}

// Reads the K-diagonal blocks back out of a full H (x) K matrix.
inline BlockState extract_block_diagonal(const ComplexMatrix& m, const VertexSpace& space,
                                         std::size_t chirality_dim) {
    const auto v = static_cast<std::size_t>(space.count());
    if (m.rows() != chirality_dim * v || !m.is_square())
        throw DimensionError("extract_block_diagonal: size mismatch");
    BlockState out(space, chirality_dim);
    for (Vertex vert : space.vertices()) {
        const std::size_t k = register_index(space, vert);
        ComplexMatrix rho(chirality_dim, chirality_dim);
        for (std::size_t h = 0; h < chirality_dim; ++h)
            for (std::size_t h2 = 0; h2 < chirality_dim; ++h2)
                rho(h, h2) = m(h * v + k, h2 * v + k);
        if (max_abs(rho) > 0.0) out.set_block(vert, std::move(rho));
    }
    return out;
}

/// The full one-step map M(rho) = sum_ij M^i_j rho M^i_j* on H (x) K,
/// with M^i_j = B^i_j (x) |i><j|. Finite graphs only; the result is
/// block-diagonal in the vertex index whatever the input.
inline ComplexMatrix apply_full_map(const ComplexMatrix& rho,
                                    const TransitionOperators& ops) {
    if (ops.space().is_lattice())
        throw DomainError("apply_full_map: requires a finite graph walk");
    const auto d = ops.chirality_dim();
    const auto v = static_cast<std::size_t>(ops.space().count());
    if (rho.rows() != d * v || !rho.is_square())
        throw DimensionError("apply_full_map: state dimension mismatch");
    ComplexMatrix out(d * v, d * v);
    for (Vertex j : ops.sources()) {
        ops.for_each_edge_from(j, [&](Vertex i, const ComplexMatrix& b) {
            const ComplexMatrix mij = kron(b, vertex_dyad(ops.space(), i, j));
            out += mij * rho * adjoint(mij);
        });
    }
    return out;
}

} // namespace oqrw
