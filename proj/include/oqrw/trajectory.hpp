/** @file
 * Quantum-trajectory unraveling: measuring the position after every step
 * turns the walk into a classical Markov chain over (vertex, local state)
 * pairs whose one-step mean reproduces the exact evolution.
 */
#pragma once

#include <cstdint>
#include <thread>
#include <variant>
#include <vector>

#include "oqrw/walk.hpp"

namespace oqrw {

/// Counter-based uniform stream keyed by (seed, stream_index, step).
/// Draws are order-insensitive across streams, so trajectory samples can be
/// computed in any order or in parallel and still reproduce bit-for-bit.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index)
        : seed_(seed), stream_(stream_index) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_index() const { return stream_; }

    // Uniform in [0, 1) for the given step counter.
    double uniform(std::uint64_t step) const {
        std::uint64_t h = mix(seed_ + GOLDEN);
        h = mix(h ^ (stream_ + GOLDEN));
        h = mix(h ^ (step + GOLDEN));
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }

    // Sequential draw interface used by trajectory stepping.
    double next() { return uniform(counter_++); }

private:
    static constexpr std::uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

struct MixedLocal {
    ComplexMatrix density; // trace 1, PSD
};

struct PureLocal {
    ComplexVector amplitudes; // unit norm
};

/// One sample of the jump chain: where the walker is and its local state.
struct TrajectoryState {
    Vertex vertex = 0;
    std::variant<MixedLocal, PureLocal> local;

    bool is_pure() const { return std::holds_alternative<PureLocal>(local); }

    void validate(std::size_t chirality_dim, double tol = 1e-9) const {
        if (is_pure()) {
            const auto& phi = std::get<PureLocal>(local).amplitudes;
            if (phi.size() != chirality_dim)
                throw DimensionError("TrajectoryState: amplitude length mismatch");
            if (std::abs(norm_squared(phi) - 1.0) > tol)
                throw CorruptedStateError("TrajectoryState: local state is not normalized");
        } else {
            const auto& rho = std::get<MixedLocal>(local).density;
            if (rho.rows() != chirality_dim || rho.cols() != chirality_dim)
                throw DimensionError("TrajectoryState: density dimension mismatch");
            if (std::abs(trace(rho).real() - 1.0) > tol)
                throw CorruptedStateError("TrajectoryState: density trace is not 1");
            if (!is_positive_semidefinite(rho, tol))
                throw CorruptedStateError("TrajectoryState: density is not PSD");
        }
    }
};

struct Branch {
    Vertex target;
    double probability; // Tr(B rho B*) or ||B phi||^2, before renormalization
    std::variant<MixedLocal, PureLocal> outcome; // already normalized
};

// Branches below this probability are excluded from sampling; the normalized
// outcome would divide by ~0.
inline constexpr double kBranchFloor = 1e-15;

/// All one-step branches out of ts, ascending target order. Branches with
/// vanishing probability carry an empty outcome and are skipped by sampling.
inline std::vector<Branch> enumerate_branches(const TrajectoryState& ts,
                                              const TransitionOperators& ops) {
    std::vector<Branch> out;
    if (ts.is_pure()) {
        const auto& phi = std::get<PureLocal>(ts.local).amplitudes;
        ops.for_each_edge_from(ts.vertex, [&](Vertex i, const ComplexMatrix& b) {
            ComplexVector moved = b * phi;
            const double p = norm_squared(moved);
            Branch br{i, p, PureLocal{}};
            if (p > kBranchFloor) {
                const double inv = 1.0 / std::sqrt(p);
                for (auto& a : moved) a *= inv;
                br.outcome = PureLocal{std::move(moved)};
            }
            out.push_back(std::move(br));
        });
    } else {
        const auto& rho = std::get<MixedLocal>(ts.local).density;
        ops.for_each_edge_from(ts.vertex, [&](Vertex i, const ComplexMatrix& b) {
            ComplexMatrix moved = b * rho * adjoint(b);
            const double p = trace(moved).real();
            Branch br{i, p, MixedLocal{}};
            if (p > kBranchFloor) {
                moved *= Complex{1.0 / p, 0.0};
                br.outcome = MixedLocal{hermitize(moved)};
            }
            out.push_back(std::move(br));
        });
    }
    return out;
}

/// One jump: draw target i with probability p(i), hand back the normalized
/// conditional state at i. Branch probabilities are renormalized by their sum
/// (off from 1 only by round-off) before the inverse-CDF draw.
inline TrajectoryState trajectory_step(const TrajectoryState& ts,
                                       const TransitionOperators& ops, RngStream& rng) {
    auto branches = enumerate_branches(ts, ops);
    double total = 0.0;
    for (const auto& b : branches)
        if (b.probability > kBranchFloor) total += b.probability;
    if (total <= kBranchFloor)
        throw DeadEndError("trajectory_step: all branch probabilities vanish at vertex " +
                           std::to_string(ts.vertex));

    const double u = rng.next() * total;
    double acc = 0.0;
    const Branch* chosen = nullptr;
    for (const auto& b : branches) {
        if (b.probability <= kBranchFloor) continue;
        chosen = &b;
        acc += b.probability;
        if (u < acc) break;
    }
    return TrajectoryState{chosen->target, chosen->outcome};
}

struct TrajectoryEnsemble {
    WalkDistribution empirical;
    std::vector<Vertex> final_vertices; // indexed by sample
};

/// Runs n_samples independent trajectories of n_steps each; stream index =
/// sample index, so the result is identical for any worker count.
inline TrajectoryEnsemble sample_trajectories(const TrajectoryState& initial,
                                              const TransitionOperators& ops,
                                              std::int64_t n_steps,
                                              std::int64_t n_samples,
                                              std::uint64_t seed,
                                              unsigned n_threads = 0) {
    if (n_samples < 1) throw DomainError("sample_trajectories: need at least one sample");
    if (n_steps < 0) throw DomainError("sample_trajectories: negative step count");
    initial.validate(ops.chirality_dim());

    TrajectoryEnsemble out;
    out.final_vertices.assign(static_cast<std::size_t>(n_samples), initial.vertex);

    auto run_range = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t s = begin; s < end; ++s) {
            RngStream rng(seed, static_cast<std::uint64_t>(s));
            TrajectoryState ts = initial;
            for (std::int64_t k = 0; k < n_steps; ++k) ts = trajectory_step(ts, ops, rng);
            out.final_vertices[static_cast<std::size_t>(s)] = ts.vertex;
        }
    };

    unsigned workers = n_threads ? n_threads : std::thread::hardware_concurrency();
    if (workers <= 1 || n_samples < 256) {
        run_range(0, n_samples);
    } else {
        workers = std::min<unsigned>(workers, 32);
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n_samples + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::int64_t begin = static_cast<std::int64_t>(w) * chunk;
            const std::int64_t end = std::min<std::int64_t>(begin + chunk, n_samples);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    // Counting in sample order keeps the aggregate thread-count invariant.
    std::map<Vertex, std::int64_t> counts;
    for (Vertex v : out.final_vertices) ++counts[v];
    for (const auto& [v, c] : counts)
        out.empirical.probs[v] =
            static_cast<double>(c) / static_cast<double>(n_samples);
    return out;
}

/// Structural check that pure trajectories never need densification: runs the
/// pure update for n_steps and confirms every intermediate norm stays at 1.
inline bool pure_stays_pure_check(const TrajectoryState& initial,
                                  const TransitionOperators& ops, std::int64_t n_steps,
                                  RngStream& rng, double tol = 1e-9) {
    if (!initial.is_pure())
        throw DomainError("pure_stays_pure_check: initial state must be pure");
    TrajectoryState ts = initial;
    for (std::int64_t k = 0; k < n_steps; ++k) {
        ts = trajectory_step(ts, ops, rng);
        if (!ts.is_pure()) return false;
        const auto& phi = std::get<PureLocal>(ts.local).amplitudes;
        if (std::abs(norm_squared(phi) - 1.0) > tol) return false;
    }
    return true;
}

} // namespace oqrw
