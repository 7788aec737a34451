#include <catch2/catch_amalgamated.hpp>

#include "oqrw/constructors.hpp"
#include "oqrw/realization.hpp"
#include "test_helpers.hpp"

using namespace oqrw;
using Catch::Approx;

namespace {

// entrywise comparison of two block states over the union of supports
double block_state_deviation(const BlockState& a, const BlockState& b) {
    double dev = 0.0;
    for (const auto& [v, rho] : a.blocks()) {
        const ComplexMatrix* other = b.block(v);
        dev = std::max(dev, other ? max_abs_diff(rho, *other) : max_abs(rho));
    }
    for (const auto& [v, rho] : b.blocks())
        if (a.block(v) == nullptr) dev = std::max(dev, max_abs(rho));
    return dev;
}

} // namespace

TEST_CASE("dilate: two-vertex sources") {
    const double p = 0.3;
    const auto ops = preset_two_vertex(p, 0.6, 0.8).ops;

    SECTION("source 2 stacks [B; C] in ascending target order") {
        const auto u = dilate(ops, 2);
        REQUIRE(u.target_order == std::vector<Vertex>{1, 2});
        CHECK(is_unitary(u.matrix, 1e-10));
        const ComplexMatrix b{{0.0, std::sqrt(p)}, {0.0, 0.0}};
        const ComplexMatrix c{{1.0, 0.0}, {0.0, std::sqrt(1.0 - p)}};
        CHECK(max_abs_diff(dilation_block(u, 0, 0), b) < 1e-14);
        CHECK(max_abs_diff(dilation_block(u, 1, 0), c) < 1e-14);
    }

    SECTION("the printed rotation dilation is an admissible completion") {
        // first block column [C; B], i.e. target order (2, 1)
        const double q = std::sqrt(1.0 - p), r = std::sqrt(p);
        const ComplexMatrix printed{{1.0, 0.0, 0.0, 0.0},
                                    {0.0, q, -r, 0.0},
                                    {0.0, r, q, 0.0},
                                    {0.0, 0.0, 0.0, 1.0}};
        CHECK(is_unitary(printed, 1e-12));
        DilationUnitary alt{2, printed, {2, 1}};
        const ComplexMatrix b{{0.0, std::sqrt(p)}, {0.0, 0.0}};
        const ComplexMatrix c{{1.0, 0.0}, {0.0, std::sqrt(1.0 - p)}};
        // block row 0 acts on target_order[0] = 2 whose operator is C
        CHECK(max_abs_diff(dilation_block(alt, 0, 0), c) < 1e-14);
        CHECK(max_abs_diff(dilation_block(alt, 1, 0), b) < 1e-14);
    }

    SECTION("source 1 stacks the diagonal pair, rotation completion admissible") {
        const double a = 0.6, alpha = 0.8;
        const double bb = std::sqrt(1 - a * a), beta = std::sqrt(1 - alpha * alpha);
        const auto u = dilate(ops, 1);
        const ComplexMatrix d1{{a, 0.0}, {0.0, alpha}};
        const ComplexMatrix d2{{bb, 0.0}, {0.0, beta}};
        CHECK(max_abs_diff(dilation_block(u, 0, 0), d1) < 1e-14);
        CHECK(max_abs_diff(dilation_block(u, 1, 0), d2) < 1e-14);
        // the closed-form completion (D1 -D2; D2 D1) is unitary as well
        ComplexMatrix rot(4, 4);
        for (std::size_t h = 0; h < 2; ++h) {
            rot(0 * 2 + h, 0 * 2 + h) = d1(h, h);
            rot(1 * 2 + h, 0 * 2 + h) = d2(h, h);
            rot(0 * 2 + h, 1 * 2 + h) = -d2(h, h);
            rot(1 * 2 + h, 1 * 2 + h) = d1(h, h);
        }
        CHECK(is_unitary(rot, 1e-12));
    }
}

TEST_CASE("dilate: single unitary target needs no padding") {
    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges;
    const double h = 1.0 / std::sqrt(2.0);
    const ComplexMatrix had{{h, h}, {h, -h}};
    edges[{2, 1}] = had;
    edges[{1, 2}] = ComplexMatrix::identity(2);
    const auto ops = TransitionOperators::graph(VertexSpace::finite_graph(2), 2,
                                                std::move(edges));
    const auto u = dilate(ops, 1);
    REQUIRE(u.target_order == std::vector<Vertex>{2});
    CHECK(u.matrix.rows() == 2);
    CHECK(max_abs_diff(u.matrix, had) == 0.0);
}

TEST_CASE("dilate: the 1/sqrt(3) pair completes to a unitary") {
    const auto preset = preset_z_sqrt3();
    const auto u = dilate(preset.ops, 0);
    REQUIRE(u.target_order == std::vector<Vertex>{-1, 1});
    CHECK(is_unitary(u.matrix, 1e-10));
    CHECK(max_abs_diff(dilation_block(u, 0, 0), preset.ops.left_op()) < 1e-14);
    CHECK(max_abs_diff(dilation_block(u, 1, 0), preset.ops.right_op()) < 1e-14);
}

TEST_CASE("dilate refuses unnormalized sources") {
    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges;
    edges[{1, 1}] = ComplexMatrix::identity(2);
    edges[{2, 1}] = ComplexMatrix::identity(2);
    edges[{2, 2}] = ComplexMatrix::identity(2);
    const auto ops = TransitionOperators::graph(VertexSpace::finite_graph(2), 2,
                                                std::move(edges));
    CHECK_THROWS_AS(dilate(ops, 1), DilationError);
}

TEST_CASE("global unitary of the two-vertex walk") {
    const auto ops = preset_two_vertex(0.3, 0.6, 0.8).ops;
    const ComplexMatrix u = build_global_unitary(ops);
    REQUIRE(u.rows() == 8);
    CHECK(is_unitary(u, 1e-10));

    // block-diagonal in K2: entries with k2 != k2' vanish
    const std::size_t d = 2, w = 2;
    double off = 0.0;
    for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c)
            if (r % w != c % w) off = std::max(off, std::abs(u(r, c)));
    CHECK(off == 0.0);

    // K2 blocks agree with the per-source dilations
    for (std::size_t j = 0; j < w; ++j) {
        const auto uj = dilate(ops, static_cast<Vertex>(j + 1));
        double dev = 0.0;
        for (std::size_t k1 = 0; k1 < w; ++k1)
            for (std::size_t h = 0; h < d; ++h)
                for (std::size_t k1p = 0; k1p < w; ++k1p)
                    for (std::size_t h2 = 0; h2 < d; ++h2)
                        dev = std::max(dev,
                                       std::abs(u((h * w + k1) * w + j, (h2 * w + k1p) * w + j) -
                                                uj.matrix(k1 * d + h, k1p * d + h2)));
        CHECK(dev == 0.0);
    }
}

TEST_CASE("global unitary of a single-vertex identity walk is the identity") {
    std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges;
    edges[{1, 1}] = ComplexMatrix::identity(2);
    const auto ops = TransitionOperators::graph(VertexSpace::finite_graph(1), 2,
                                                std::move(edges));
    const ComplexMatrix u = build_global_unitary(ops);
    CHECK(max_abs_diff(u, ComplexMatrix::identity(2)) == 0.0);
}

TEST_CASE("global unitary of the 1/sqrt(3) pair on a window is unitary") {
    const auto ops = preset_z_sqrt3().ops.with_window(-2, 2);
    const ComplexMatrix u = build_global_unitary(ops);
    REQUIRE(u.rows() == 2 * 5 * 5);
    CHECK(is_unitary(u, 1e-10));
}

TEST_CASE("decohere") {
    SECTION("already diagonal input is untouched") {
        const ComplexMatrix diag{{0.25, 0.0}, {0.0, 0.75}};
        CHECK(max_abs_diff(decohere(diag, 0, {2}), diag) == 0.0);
    }
    SECTION("equal superposition pinches to the mixed state") {
        const double h = 1.0 / std::sqrt(2.0);
        const ComplexMatrix rho = outer({Complex{h, 0.0}, Complex{h, 0.0}});
        const ComplexMatrix want{{0.5, 0.0}, {0.0, 0.5}};
        CHECK(max_abs_diff(decohere(rho, 0, {2}), want) < 1e-15);
    }
    SECTION("idempotent and trace-preserving on a composite system") {
        std::mt19937_64 rng(3);
        const ComplexMatrix rho = testing::random_density(12, rng);
        const ComplexMatrix once = decohere(rho, 1, {2, 3, 2});
        const ComplexMatrix twice = decohere(once, 1, {2, 3, 2});
        CHECK(max_abs_diff(once, twice) == 0.0);
        CHECK(trace(once) == trace(rho));
    }
}

TEST_CASE("swap of the position registers") {
    const VertexSpace space = VertexSpace::finite_graph(2);

    SECTION("canonical basis action") {
        std::mt19937_64 rng(5);
        const auto rho = testing::random_density(2, rng);
        BlockState s(space, 2);
        s.set_block(2, rho);
        const auto t = canonical_tripartite(s, space); // rho (x) |1><1| (x) |2><2|
        const auto swapped = swap_k1_k2(t);
        // now rho (x) |2><2| (x) |1><1|
        for (std::size_t h = 0; h < 2; ++h)
            for (std::size_t h2 = 0; h2 < 2; ++h2)
                CHECK(swapped.matrix()(swapped.flat(h, 1, 0), swapped.flat(h2, 1, 0)) ==
                      rho(h, h2));
        CHECK(trace(swapped.matrix()).real() == Approx(1.0).margin(1e-14));
    }
    SECTION("symmetric states are fixed and the swap is an involution") {
        std::mt19937_64 rng(7);
        // psi(h, a, b) symmetric under a <-> b
        TripartitePure psi(space, 2);
        std::normal_distribution<double> g(0.0, 1.0);
        for (std::size_t h = 0; h < 2; ++h)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t b = a; b < 2; ++b) {
                    const Complex amp{g(rng), g(rng)};
                    psi.vector()[psi.flat(h, a, b)] = amp;
                    psi.vector()[psi.flat(h, b, a)] = amp;
                }
        TripartiteState t(space, 2);
        t.matrix() = outer(psi.vector());
        const auto once = swap_k1_k2(t);
        CHECK(max_abs_diff(once.matrix(), t.matrix()) == 0.0);

        // involution on a generic state
        TripartiteState generic(space, 2);
        generic.matrix() = testing::random_density(8, rng);
        const auto back = swap_k1_k2(swap_k1_k2(generic));
        CHECK(max_abs_diff(back.matrix(), generic.matrix()) <= 1e-15);
    }
}

TEST_CASE("refresh of the first position register") {
    const VertexSpace space = VertexSpace::finite_graph(2);
    std::mt19937_64 rng(11);

    SECTION("canonical states are fixed") {
        BlockState s(space, 2);
        s.set_block(1, testing::random_density(2, rng));
        const auto t = canonical_tripartite(s, space);
        const auto r = refresh_k1(t);
        CHECK(max_abs_diff(r.matrix(), t.matrix()) == 0.0);
    }
    SECTION("maximally mixed K1 collapses to |1><1| with the rest unchanged") {
        // rho_H (x) (I/2)_K1 (x) |2><2|_K2
        const auto rho = testing::random_density(2, rng);
        TripartiteState t(space, 2);
        for (std::size_t h = 0; h < 2; ++h)
            for (std::size_t h2 = 0; h2 < 2; ++h2)
                for (std::size_t a = 0; a < 2; ++a)
                    t.matrix()(t.flat(h, a, 1), t.flat(h2, a, 1)) =
                        0.5 * rho(h, h2);
        const auto r = refresh_k1(t);
        for (std::size_t h = 0; h < 2; ++h)
            for (std::size_t h2 = 0; h2 < 2; ++h2) {
                CHECK(std::abs(r.matrix()(r.flat(h, 0, 1), r.flat(h2, 0, 1)) - rho(h, h2)) <
                      1e-15);
                CHECK(std::abs(r.matrix()(r.flat(h, 1, 1), r.flat(h2, 1, 1))) == 0.0);
            }
        CHECK(trace(r.matrix()).real() == Approx(1.0).margin(1e-14));
    }
    SECTION("refresh is idempotent") {
        TripartiteState t(space, 2);
        t.matrix() = testing::random_density(8, rng);
        const auto once = refresh_k1(t);
        const auto twice = refresh_k1(once);
        CHECK(max_abs_diff(once.matrix(), twice.matrix()) <= 1e-15);
    }
}

TEST_CASE("physical step reproduces the exact walk") {
    SECTION("two-vertex, one step from a pure block") {
        const auto preset = preset_two_vertex(0.3, 0.6, 0.8);
        const ComplexVector phi{Complex{0.6, 0.0}, Complex{0.0, 0.8}};
        auto s = BlockState::point(preset.ops.space(), 2, 2, outer(phi));
        const auto t = physical_step(canonical_tripartite(s, preset.ops.space()),
                                     preset.ops);
        const auto got = read_walk_marginal(t);
        const auto want = step(s, preset.ops);
        CHECK(block_state_deviation(got, want) < 1e-12);
    }
    SECTION("deterministic two-cycle walk moves the mass exactly") {
        std::map<std::pair<Vertex, Vertex>, ComplexMatrix> edges;
        edges[{2, 1}] = ComplexMatrix::identity(2);
        edges[{1, 2}] = ComplexMatrix::identity(2);
        const auto ops = TransitionOperators::graph(VertexSpace::finite_graph(2), 2,
                                                    std::move(edges));
        std::mt19937_64 rng(13);
        auto s = BlockState::point(ops.space(), 2, 1, testing::random_density(2, rng));
        auto t = physical_step(canonical_tripartite(s, ops.space()), ops);
        auto got = read_walk_marginal(t);
        CHECK(got.block(1) == nullptr);
        CHECK(max_abs_diff(*got.block(2), *s.block(1)) < 1e-12);
    }
    SECTION("ten iterations match evolve on the two-vertex preset") {
        const auto preset = preset_two_vertex(0.5);
        std::mt19937_64 rng(17);
        BlockState s(preset.ops.space(), 2);
        auto r1 = testing::random_density(2, rng);
        auto r2 = testing::random_density(2, rng);
        r1 *= Complex{0.35, 0.0};
        r2 *= Complex{0.65, 0.0};
        s.set_block(1, r1);
        s.set_block(2, r2);
        auto t = canonical_tripartite(s, preset.ops.space());
        for (int n = 0; n < 10; ++n) t = physical_step(t, preset.ops);
        CHECK(block_state_deviation(read_walk_marginal(t), evolve(s, preset.ops, 10)) <
              1e-10);
    }
    SECTION("chain preset fidelity over ten steps") {
        const auto preset = preset_chain(5, 0.5);
        std::mt19937_64 rng(19);
        auto s = BlockState::point(preset.ops.space(), 2, 1, testing::random_density(2, rng));
        auto t = canonical_tripartite(s, preset.ops.space());
        for (int n = 0; n < 10; ++n) t = physical_step(t, preset.ops);
        CHECK(block_state_deviation(read_walk_marginal(t), evolve(s, preset.ops, 10)) <
              1e-10);
    }
    SECTION("lattice truncation: three steps of the 1/sqrt(3) walk") {
        const auto preset = preset_z_sqrt3();
        const auto window = VertexSpace::lattice_z(-5, 5);
        auto t = canonical_tripartite(preset.initial, window);
        for (int n = 0; n < 3; ++n) t = physical_step(t, preset.ops);
        CHECK(block_state_deviation(read_walk_marginal(t),
                                    evolve(preset.initial, preset.ops, 3)) < 1e-12);
    }
    SECTION("non-canonical input is refused") {
        const auto preset = preset_two_vertex(0.5);
        std::mt19937_64 rng(23);
        TripartiteState t(preset.ops.space(), 2);
        t.matrix() = testing::random_density(8, rng);
        CHECK_THROWS_AS(physical_step(t, preset.ops), DomainError);
    }
}

TEST_CASE("pairwise condition check") {
    SECTION("coin-derived pair passes") {
        const auto rep = check_unitary_walk_condition(preset_hadamard_unitary().ops, 1e-10);
        CHECK(rep.passed);
        CHECK(rep.max_deviation < 1e-14);
    }
    SECTION("the 1/sqrt(3) pair fails with C*B = I/3") {
        const auto rep = check_unitary_walk_condition(preset_z_sqrt3().ops, 1e-10);
        CHECK_FALSE(rep.passed);
        CHECK(rep.max_deviation == Approx(1.0 / 3.0).margin(1e-14));
    }
    SECTION("pure shift passes: B = 0, C unitary") {
        std::mt19937_64 rng(31);
        const auto ops = TransitionOperators::stationary(
            VertexSpace::lattice_z(0, 0), ComplexMatrix(2, 2), testing::random_unitary(2, rng));
        CHECK(check_unitary_walk_condition(ops, 1e-10).passed);
    }
}

TEST_CASE("amplitude-level walk") {
    const auto ops = preset_hadamard_unitary().ops;
    UnitaryWalkState psi;
    psi.amplitudes[0] = {Complex{1.0, 0.0}, Complex{0.0, 0.0}};

    SECTION("one step spreads half-half") {
        const auto next = unitary_walk_step(psi, ops);
        const auto d = next.distribution();
        CHECK(d.at(-1) == Approx(0.5).margin(1e-14));
        CHECK(d.at(+1) == Approx(0.5).margin(1e-14));
    }
    SECTION("shift-only walk moves amplitudes unchanged") {
        std::mt19937_64 rng(37);
        const auto shift = TransitionOperators::stationary(
            VertexSpace::lattice_z(0, 0), ComplexMatrix(2, 2), testing::random_unitary(2, rng));
        UnitaryWalkState w;
        w.amplitudes[3] = {Complex{0.6, 0.0}, Complex{0.0, 0.8}};
        const auto moved = unitary_walk_step(w, shift);
        REQUIRE(moved.amplitudes.count(4) == 1);
        CHECK(moved.distribution().at(4) == Approx(1.0).margin(1e-12));
    }
    SECTION("norm conserved over a hundred steps") {
        UnitaryWalkState w = psi;
        for (int n = 0; n < 100; ++n) {
            w = unitary_walk_step(w, ops);
            REQUIRE(std::abs(w.total_norm_squared() - 1.0) <= 1e-12);
        }
        CHECK(std::abs(w.total_norm_squared() - 1.0) <= 1e-10);
    }
    SECTION("walks without the condition are refused") {
        CHECK_THROWS_AS(unitary_walk_step(psi, preset_z_sqrt3().ops), DefinitionError);
    }
}

TEST_CASE("decoherence-free cycle matches the amplitude walk") {
    const auto ops = preset_hadamard_unitary().ops;
    const VertexSpace window = VertexSpace::lattice_z(-8, 8);

    UnitaryWalkState psi;
    psi.amplitudes[0] = {Complex{1.0, 0.0}, Complex{0.0, 0.0}};
    TripartitePure cycle = canonical_pure(psi, window, 2);

    for (int n = 1; n <= 6; ++n) {
        cycle = unitary_cycle_step(cycle, ops);
        psi = unitary_walk_step(psi, ops);
        CHECK(std::abs(norm_squared(cycle.vector()) - 1.0) <= 1e-12);

        const auto got = read_pure_marginal(cycle);
        double dev = 0.0;
        for (const auto& [v, phi] : psi.amplitudes) {
            auto it = got.amplitudes.find(v);
            REQUIRE(it != got.amplitudes.end());
            for (std::size_t h = 0; h < phi.size(); ++h)
                dev = std::max(dev, std::abs(phi[h] - it->second[h]));
        }
        CHECK(dev < 1e-12);
    }
}

TEST_CASE("decoherence-free cycle refuses walks without the condition") {
    UnitaryWalkState psi;
    psi.amplitudes[0] = {Complex{1.0, 0.0}, Complex{0.0, 0.0}};
    const auto cycle = canonical_pure(psi, VertexSpace::lattice_z(-3, 3), 2);
    CHECK_THROWS_AS(unitary_cycle_step(cycle, preset_z_sqrt3().ops), DefinitionError);
}
