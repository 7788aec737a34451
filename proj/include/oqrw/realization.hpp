/** @file
 * Physical realization of the walk on H (x) K1 (x) K2: per-source unitary
 * dilations assembled into one global unitary, followed by decoherence of K1,
 * a swap of the two position registers and a refresh of K1. Also the
 * amplitude-level walk obtained by skipping the decoherence step when the
 * operators satisfy the stronger pairwise condition.
 *
 * Index conventions. The tripartite register is flattened H-major:
 * (h, k1, k2) -> (h*W + k1)*W + k2, with W the size of the truncated vertex
 * register. Dilation matrices are stored K1-major, (k1*d + h), so their d x d
 * blocks line up with the block-matrix notation (first block column = the
 * stacked transition operators).
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "oqrw/walk.hpp"

namespace oqrw {

/// Unitary dilation of one source's completely positive map. Block row r
/// acts on target target_order[r]; the first block column holds the stacked
/// transition operators, the remaining columns are a deterministic completion.
struct DilationUnitary {
    Vertex source = 0;
    ComplexMatrix matrix; // square of size chirality_dim * target_order.size()
    std::vector<Vertex> target_order;
};

namespace detail {

// Extends m (orthonormal columns) to a square unitary: the appended columns
// are the trailing Householder-Q columns, which span the orthogonal
// complement of col(m). The given columns are kept bit-for-bit.
inline ComplexMatrix complete_to_unitary(const ComplexMatrix& m) {
    const auto n = m.rows();
    const auto k = m.cols();
    if (k > n) throw DimensionError("complete_to_unitary: more columns than rows");
    ComplexMatrix out(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c) out(r, c) = m(r, c);
    if (k == n) return out;

    Eigen::MatrixXcd em(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c)
            em(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(em);
    Eigen::MatrixXcd q = qr.householderQ();
    for (std::size_t c = k; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r)
            out(r, c) = q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    return out;
}

// Stacked first block column for source j over the given target register,
// in K1-major layout; then completed to a unitary.
inline ComplexMatrix dilation_over_register(const TransitionOperators& ops, Vertex j,
                                            const std::vector<Vertex>& reg,
                                            const std::map<Vertex, std::size_t>& reg_index,
                                            bool cyclic) {
    const std::size_t d = ops.chirality_dim();
    const std::size_t w = reg.size();
    ComplexMatrix stacked(d * w, d);
    ops.for_each_edge_from(j, [&](Vertex target, const ComplexMatrix& b) {
        std::size_t idx;
        if (cyclic) {
            const auto span = static_cast<std::int64_t>(w);
            std::int64_t rel = (target - reg.front()) % span;
            if (rel < 0) rel += span;
            idx = static_cast<std::size_t>(rel);
        } else {
            auto it = reg_index.find(target);
            if (it == reg_index.end())
                throw DilationError("dilation: target " + std::to_string(target) +
                                    " outside the register");
            idx = it->second;
        }
        for (std::size_t h = 0; h < d; ++h)
            for (std::size_t h2 = 0; h2 < d; ++h2)
                stacked(idx * d + h, h2) += b(h, h2);
    });
    return complete_to_unitary(stacked);
}

} // namespace detail

/// Dilates the per-source map of j: a unitary whose first block column is the
/// stacked B^i_j in ascending target order.
inline DilationUnitary dilate(const TransitionOperators& ops, Vertex j) {
    const double dev = normalization_deviation(ops, j);
    if (dev > 1e-10)
        throw DilationError("dilate: source " + std::to_string(j) +
                            " violates normalization by " + std::to_string(dev));
    std::vector<Vertex> targets;
    ops.for_each_edge_from(j, [&](Vertex t, const ComplexMatrix&) { targets.push_back(t); });
    if (targets.empty())
        throw DilationError("dilate: source " + std::to_string(j) + " has no edges");
    std::map<Vertex, std::size_t> index;
    for (std::size_t k = 0; k < targets.size(); ++k) index[targets[k]] = k;

    DilationUnitary out;
    out.source = j;
    out.target_order = targets;
    out.matrix = detail::dilation_over_register(ops, j, targets, index, false);
    return out;
}

/// The d x d block of a dilation at block position (row, col).
inline ComplexMatrix dilation_block(const DilationUnitary& u, std::size_t row,
                                    std::size_t col) {
    const std::size_t d = u.matrix.rows() / u.target_order.size();
    ComplexMatrix b(d, d);
    for (std::size_t h = 0; h < d; ++h)
        for (std::size_t h2 = 0; h2 < d; ++h2)
            b(h, h2) = u.matrix(row * d + h, col * d + h2);
    return b;
}

/// Density state on H (x) K1 (x) K2 over a truncated vertex register.
class TripartiteState {
public:
    TripartiteState(VertexSpace space, std::size_t chirality_dim)
        : space_(space), dim_(chirality_dim) {
        const auto w = static_cast<std::size_t>(space.count());
        rho_ = ComplexMatrix(dim_ * w * w, dim_ * w * w);
    }

    const VertexSpace& space() const { return space_; }
    std::size_t chirality_dim() const { return dim_; }
    std::size_t register_size() const { return static_cast<std::size_t>(space_.count()); }
    const ComplexMatrix& matrix() const { return rho_; }
    ComplexMatrix& matrix() { return rho_; }

    std::size_t flat(std::size_t h, std::size_t k1, std::size_t k2) const {
        const std::size_t w = register_size();
        return (h * w + k1) * w + k2;
    }

    void validate(double tol = 1e-9) const {
        if (std::abs(trace(rho_).real() - 1.0) > tol)
            throw CorruptedStateError("TripartiteState: trace deviates from 1");
        if (!is_positive_semidefinite(rho_, tol))
            throw CorruptedStateError("TripartiteState: not positive semidefinite");
    }

private:
    VertexSpace space_;
    std::size_t dim_;
    ComplexMatrix rho_;
};

/// sum_k rho_k (x) |1><1| (x) |k><k| over the truncation register.
inline TripartiteState canonical_tripartite(const BlockState& state,
                                            const VertexSpace& truncation) {
    TripartiteState out(truncation, state.chirality_dim());
    const std::size_t d = state.chirality_dim();
    for (const auto& [v, rho] : state.blocks()) {
        if (!truncation.contains(v))
            throw DomainError("canonical_tripartite: state support outside truncation");
        const std::size_t k = register_index(truncation, v);
        for (std::size_t h = 0; h < d; ++h)
            for (std::size_t h2 = 0; h2 < d; ++h2)
                out.matrix()(out.flat(h, 0, k), out.flat(h2, 0, k)) = rho(h, h2);
    }
    return out;
}

/// Pinching: zeroes every element whose subsystem row index differs from its
/// subsystem column index. Exact; preserves the trace bit-for-bit.
inline ComplexMatrix decohere(const ComplexMatrix& rho, std::size_t subsystem,
                              const std::vector<std::size_t>& dims) {
    std::size_t total = 1;
    for (std::size_t d : dims) total *= d;
    if (rho.rows() != total || !rho.is_square())
        throw DimensionError("decohere: dimension list does not match the matrix");
    if (subsystem >= dims.size())
        throw DimensionError("decohere: subsystem index out of range");
    std::size_t stride = 1;
    for (std::size_t s = subsystem + 1; s < dims.size(); ++s) stride *= dims[s];
    const std::size_t span = dims[subsystem];

    ComplexMatrix out = rho;
    for (std::size_t r = 0; r < total; ++r)
        for (std::size_t c = 0; c < total; ++c)
            if ((r / stride) % span != (c / stride) % span)
                out(r, c) = Complex{0.0, 0.0};
    return out;
}

/// Conjugation by I (x) S where S exchanges the two position registers.
inline TripartiteState swap_k1_k2(const TripartiteState& s) {
    TripartiteState out(s.space(), s.chirality_dim());
    const std::size_t d = s.chirality_dim(), w = s.register_size();
    for (std::size_t h = 0; h < d; ++h)
        for (std::size_t a = 0; a < w; ++a)
            for (std::size_t b = 0; b < w; ++b)
                for (std::size_t h2 = 0; h2 < d; ++h2)
                    for (std::size_t a2 = 0; a2 < w; ++a2)
                        for (std::size_t b2 = 0; b2 < w; ++b2)
                            out.matrix()(out.flat(h, a, b), out.flat(h2, a2, b2)) =
                                s.matrix()(s.flat(h, b, a), s.flat(h2, b2, a2));
    return out;
}

/// Discards K1 (partial trace) and re-prepares it in the first basis state.
inline TripartiteState refresh_k1(const TripartiteState& s) {
    TripartiteState out(s.space(), s.chirality_dim());
    const std::size_t d = s.chirality_dim(), w = s.register_size();
    for (std::size_t h = 0; h < d; ++h)
        for (std::size_t b = 0; b < w; ++b)
            for (std::size_t h2 = 0; h2 < d; ++h2)
                for (std::size_t b2 = 0; b2 < w; ++b2) {
                    Complex sum{0.0, 0.0};
                    for (std::size_t a = 0; a < w; ++a)
                        sum += s.matrix()(s.flat(h, a, b), s.flat(h2, a, b2));
                    out.matrix()(out.flat(h, 0, b), out.flat(h2, 0, b2)) = sum;
                }
    return out;
}

namespace detail {

// Full-register dilation (K1-major) for every source of the truncation.
inline std::vector<ComplexMatrix> register_dilations(const TransitionOperators& ops,
                                                     const VertexSpace& truncation) {
    const auto reg = truncation.vertices();
    const bool cyclic = truncation.is_lattice();
    if (cyclic && reg.size() < 3)
        throw DilationError("register_dilations: a cyclic lattice truncation needs "
                            "at least 3 sites, got " + std::to_string(reg.size()));
    std::map<Vertex, std::size_t> index;
    for (std::size_t k = 0; k < reg.size(); ++k) index[reg[k]] = k;
    std::vector<ComplexMatrix> out;
    out.reserve(reg.size());
    for (Vertex j : reg) {
        const double dev = normalization_deviation(ops, j);
        if (dev > 1e-10)
            throw DilationError("build_global_unitary: source " + std::to_string(j) +
                                " violates normalization by " + std::to_string(dev));
        out.push_back(dilation_over_register(ops, j, reg, index, cyclic));
    }
    return out;
}

} // namespace detail

/// U = sum_j U(j) (x) |j><j| on H (x) K1 (x) K2, block-diagonal in K2.
/// Lattice walks are wrapped cyclically onto the register of `truncation`.
inline ComplexMatrix build_global_unitary_on(const TransitionOperators& ops,
                                             const VertexSpace& truncation) {
    const std::size_t d = ops.chirality_dim();
    const auto w = static_cast<std::size_t>(truncation.count());
    const auto dil = detail::register_dilations(ops, truncation);
    ComplexMatrix u(d * w * w, d * w * w);
    for (std::size_t j = 0; j < w; ++j) {
        const ComplexMatrix& uj = dil[j]; // K1-major, (k1*d + h)
        for (std::size_t k1 = 0; k1 < w; ++k1)
            for (std::size_t h = 0; h < d; ++h)
                for (std::size_t k1p = 0; k1p < w; ++k1p)
                    for (std::size_t h2 = 0; h2 < d; ++h2)
                        u((h * w + k1) * w + j, (h2 * w + k1p) * w + j) =
                            uj(k1 * d + h, k1p * d + h2);
    }
    return u;
}

inline ComplexMatrix build_global_unitary(const TransitionOperators& ops) {
    return build_global_unitary_on(ops, ops.space());
}

namespace detail {

inline void require_canonical(const TripartiteState& s, double tol) {
    const std::size_t d = s.chirality_dim(), w = s.register_size();
    for (std::size_t h = 0; h < d; ++h)
        for (std::size_t a = 0; a < w; ++a)
            for (std::size_t b = 0; b < w; ++b)
                for (std::size_t h2 = 0; h2 < d; ++h2)
                    for (std::size_t a2 = 0; a2 < w; ++a2)
                        for (std::size_t b2 = 0; b2 < w; ++b2) {
                            const bool allowed = (a == 0 && a2 == 0 && b == b2);
                            if (!allowed &&
                                std::abs(s.matrix()(s.flat(h, a, b), s.flat(h2, a2, b2))) > tol)
                                throw DomainError(
                                    "physical_step: input is not in canonical form");
                        }
}

} // namespace detail

/// One cycle of the four-step procedure: global unitary, decoherence of K1,
/// swap, refresh. Maps sum_k rho_k (x)|1><1|(x)|k><k| to the same shape with
/// the walk advanced one step on H (x) K2.
inline TripartiteState physical_step(const TripartiteState& s,
                                     const TransitionOperators& ops) {
    if (ops.chirality_dim() != s.chirality_dim())
        throw DefinitionError("physical_step: chirality dimensions differ");
    if (!ops.space().is_lattice() && ops.space().count() != s.space().count())
        throw DefinitionError("physical_step: register sizes differ");
    detail::require_canonical(s, 1e-9);

    const std::size_t d = s.chirality_dim(), w = s.register_size();
    const auto dil = detail::register_dilations(ops, s.space());

    // The global unitary is block-diagonal in K2 and a canonical input is
    // K2-diagonal, so conjugation acts within each diagonal K2 block. The
    // blocks are worked in the dilations' K1-major layout.
    TripartiteState out(s.space(), d);
    ComplexMatrix block(d * w, d * w);
    for (std::size_t k2 = 0; k2 < w; ++k2) {
        for (std::size_t k1 = 0; k1 < w; ++k1)
            for (std::size_t h = 0; h < d; ++h)
                for (std::size_t k1p = 0; k1p < w; ++k1p)
                    for (std::size_t h2 = 0; h2 < d; ++h2)
                        block(k1 * d + h, k1p * d + h2) =
                            s.matrix()(s.flat(h, k1, k2), s.flat(h2, k1p, k2));
        const ComplexMatrix moved = dil[k2] * block * adjoint(dil[k2]);
        for (std::size_t k1 = 0; k1 < w; ++k1)
            for (std::size_t h = 0; h < d; ++h)
                for (std::size_t k1p = 0; k1p < w; ++k1p)
                    for (std::size_t h2 = 0; h2 < d; ++h2)
                        out.matrix()(out.flat(h, k1, k2), out.flat(h2, k1p, k2)) =
                            moved(k1 * d + h, k1p * d + h2);
    }

    out.matrix() = decohere(out.matrix(), 1, {d, w, w});
    out = swap_k1_k2(out);
    return refresh_k1(out);
}

/// Partial trace over K1 followed by reading the K2-diagonal blocks.
inline BlockState read_walk_marginal(const TripartiteState& s) {
    const std::size_t d = s.chirality_dim(), w = s.register_size();
    BlockState out(s.space(), d);
    for (Vertex v : s.space().vertices()) {
        const std::size_t k = register_index(s.space(), v);
        ComplexMatrix rho(d, d);
        for (std::size_t h = 0; h < d; ++h)
            for (std::size_t h2 = 0; h2 < d; ++h2) {
                Complex sum{0.0, 0.0};
                for (std::size_t a = 0; a < w; ++a)
                    sum += s.matrix()(s.flat(h, a, k), s.flat(h2, a, k));
                rho(h, h2) = sum;
            }
        if (max_abs(rho) > 0.0) out.set_block(v, std::move(rho));
    }
    return out;
}

// --- amplitude-level walks (stronger condition) --------------------------------

struct UnitaryConditionReport {
    double max_deviation = 0.0;
    Vertex worst_j = 0;
    Vertex worst_jp = 0;
    double tolerance = 1e-10;
    bool passed = false;

    bool pass(double tol) const { return max_deviation <= tol; }
};

/// Checks sum_i B^i_j* B^i_j' = delta_jj' I over all source pairs. For a
/// stationary lattice pair this reduces to B*B + C*C = I and C*B = 0.
inline UnitaryConditionReport check_unitary_walk_condition(const TransitionOperators& ops,
                                                           double tol = 1e-10) {
    UnitaryConditionReport rep;
    rep.tolerance = tol;
    const auto d = ops.chirality_dim();
    const ComplexMatrix eye = ComplexMatrix::identity(d);
    auto consider = [&](Vertex j, Vertex jp, const ComplexMatrix& sum, bool same) {
        const double dev = same ? max_abs_diff(sum, eye) : max_abs(sum);
        if (dev > rep.max_deviation) {
            rep.max_deviation = dev;
            rep.worst_j = j;
            rep.worst_jp = jp;
        }
    };
    if (ops.is_stationary()) {
        const ComplexMatrix& b = ops.left_op();
        const ComplexMatrix& c = ops.right_op();
        consider(0, 0, adjoint(b) * b + adjoint(c) * c, true);
        // sources two sites apart share one target; closer pairs share none
        consider(0, 2, adjoint(c) * b, false);
    } else {
        const auto sources = ops.sources();
        for (Vertex j : sources)
            for (Vertex jp : sources) {
                ComplexMatrix sum(d, d);
                ops.for_each_edge_from(j, [&](Vertex i, const ComplexMatrix& bj) {
                    ops.for_each_edge_from(jp, [&](Vertex ip, const ComplexMatrix& bjp) {
                        if (i == ip) sum += adjoint(bj) * bjp;
                    });
                });
                consider(j, jp, sum, j == jp);
            }
    }
    rep.passed = rep.max_deviation <= tol;
    return rep;
}

/// Amplitude-level state: vertex-indexed wave functions with unit total norm.
struct UnitaryWalkState {
    std::map<Vertex, ComplexVector> amplitudes;

    double total_norm_squared() const {
        double s = 0.0;
        for (const auto& [_, phi] : amplitudes) s += norm_squared(phi);
        return s;
    }

    WalkDistribution distribution() const {
        WalkDistribution d;
        for (const auto& [v, phi] : amplitudes) d.probs[v] = norm_squared(phi);
        return d;
    }
};

/// phi'_i = sum_j B^i_j phi_j. Refuses operators that fail the pairwise
/// condition; under it the total norm is conserved.
inline UnitaryWalkState unitary_walk_step(const UnitaryWalkState& psi,
                                          const TransitionOperators& ops,
                                          double condition_tol = 1e-10) {
    const auto rep = check_unitary_walk_condition(ops, condition_tol);
    if (!rep.pass(condition_tol))
        throw DefinitionError("unitary_walk_step: operators violate the pairwise "
                              "condition by " + std::to_string(rep.max_deviation));
    UnitaryWalkState out;
    for (const auto& [j, phi] : psi.amplitudes) {
        ops.for_each_edge_from(j, [&](Vertex i, const ComplexMatrix& b) {
            ComplexVector moved = b * phi;
            auto it = out.amplitudes.find(i);
            if (it == out.amplitudes.end()) {
                out.amplitudes.emplace(i, std::move(moved));
            } else {
                for (std::size_t h = 0; h < moved.size(); ++h) it->second[h] += moved[h];
            }
        });
    }
    for (auto it = out.amplitudes.begin(); it != out.amplitudes.end();)
        it = (norm_squared(it->second) < 1e-30) ? out.amplitudes.erase(it) : std::next(it);
    return out;
}

/// Pure tripartite vector for the decoherence-free cycle.
class TripartitePure {
public:
    TripartitePure(VertexSpace space, std::size_t chirality_dim)
        : space_(space), dim_(chirality_dim) {
        const auto w = static_cast<std::size_t>(space.count());
        psi_.assign(dim_ * w * w, Complex{0.0, 0.0});
    }

    const VertexSpace& space() const { return space_; }
    std::size_t chirality_dim() const { return dim_; }
    std::size_t register_size() const { return static_cast<std::size_t>(space_.count()); }
    ComplexVector& vector() { return psi_; }
    const ComplexVector& vector() const { return psi_; }

    std::size_t flat(std::size_t h, std::size_t k1, std::size_t k2) const {
        const std::size_t w = register_size();
        return (h * w + k1) * w + k2;
    }

private:
    VertexSpace space_;
    std::size_t dim_;
    ComplexVector psi_;
};

/// sum_i phi_i (x) |1> (x) |i> over the truncation register.
inline TripartitePure canonical_pure(const UnitaryWalkState& psi,
                                     const VertexSpace& truncation,
                                     std::size_t chirality_dim) {
    TripartitePure out(truncation, chirality_dim);
    for (const auto& [v, phi] : psi.amplitudes) {
        if (!truncation.contains(v))
            throw DomainError("canonical_pure: amplitude support outside truncation");
        if (phi.size() != chirality_dim)
            throw DimensionError("canonical_pure: amplitude length mismatch");
        const std::size_t k = register_index(truncation, v);
        for (std::size_t h = 0; h < chirality_dim; ++h)
            out.vector()[out.flat(h, 0, k)] = phi[h];
    }
    return out;
}

/// One decoherence-free cycle: global unitary, swap, coherent refresh of K1.
/// Requires the pairwise condition; then it reproduces unitary_walk_step on
/// the H (x) K2 reading.
inline TripartitePure unitary_cycle_step(const TripartitePure& s,
                                         const TransitionOperators& ops,
                                         double condition_tol = 1e-10) {
    const auto rep = check_unitary_walk_condition(ops, condition_tol);
    if (!rep.pass(condition_tol))
        throw DefinitionError("unitary_cycle_step: operators violate the pairwise "
                              "condition by " + std::to_string(rep.max_deviation));
    const std::size_t d = s.chirality_dim(), w = s.register_size();
    const auto dil = detail::register_dilations(ops, s.space());

    // unitary, applied per K2 block
    TripartitePure stage(s.space(), d);
    ComplexVector slice(d * w), moved;
    for (std::size_t j = 0; j < w; ++j) {
        for (std::size_t k1 = 0; k1 < w; ++k1)
            for (std::size_t h = 0; h < d; ++h)
                slice[k1 * d + h] = s.vector()[s.flat(h, k1, j)];
        moved = dil[j] * slice;
        for (std::size_t k1 = 0; k1 < w; ++k1)
            for (std::size_t h = 0; h < d; ++h)
                stage.vector()[stage.flat(h, k1, j)] = moved[k1 * d + h];
    }

    // swap, then coherently re-prepare K1 in its first basis state
    TripartitePure out(s.space(), d);
    for (std::size_t h = 0; h < d; ++h)
        for (std::size_t k2 = 0; k2 < w; ++k2) {
            Complex sum{0.0, 0.0};
            for (std::size_t k1 = 0; k1 < w; ++k1)
                sum += stage.vector()[stage.flat(h, k2, k1)]; // swapped legs
            out.vector()[out.flat(h, 0, k2)] = sum;
        }
    return out;
}

/// Reads the K1 = |1> slice back as an amplitude-level state.
inline UnitaryWalkState read_pure_marginal(const TripartitePure& s, double drop = 1e-30) {
    UnitaryWalkState out;
    const std::size_t d = s.chirality_dim();
    for (Vertex v : s.space().vertices()) {
        const std::size_t k = register_index(s.space(), v);
        ComplexVector phi(d);
        for (std::size_t h = 0; h < d; ++h) phi[h] = s.vector()[s.flat(h, 0, k)];
        if (norm_squared(phi) >= drop) out.amplitudes.emplace(v, std::move(phi));
    }
    return out;
}

} // namespace oqrw
