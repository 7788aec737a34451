#include <catch2/catch_amalgamated.hpp>

#include "oqrw/matrix.hpp"
#include "test_helpers.hpp"

using namespace oqrw;
using Catch::Approx;

namespace {
const Complex I{0.0, 1.0};
}

TEST_CASE("adjoint basics") {
    CHECK(max_abs_diff(adjoint(ComplexMatrix::identity(2)), ComplexMatrix::identity(2)) == 0.0);

    // sigma+ goes to sigma-
    const ComplexMatrix sp{{0.0, 1.0}, {0.0, 0.0}};
    const ComplexMatrix sm{{0.0, 0.0}, {1.0, 0.0}};
    CHECK(max_abs_diff(adjoint(sp), sm) == 0.0);

    ComplexMatrix m(2, 2);
    m(0, 1) = I;
    CHECK(adjoint(m)(1, 0) == -I);
}

TEST_CASE("adjoint is an involution bit for bit") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const auto m = testing::random_matrix(3, 5, rng);
        const auto back = adjoint(adjoint(m));
        REQUIRE(back.rows() == m.rows());
        for (std::size_t k = 0; k < m.entries().size(); ++k)
            REQUIRE(back.entries()[k] == m.entries()[k]);
    }
}

TEST_CASE("kron identities and placement") {
    CHECK(max_abs_diff(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)),
                       ComplexMatrix::identity(4)) == 0.0);

    const ComplexMatrix sp{{0.0, 1.0}, {0.0, 0.0}};
    const ComplexMatrix sm{{0.0, 0.0}, {1.0, 0.0}};
    const ComplexMatrix k = kron(sp, sm);
    ComplexMatrix want(4, 4);
    want(1, 2) = 1.0; // row 0*2+1, col 1*2+0
    CHECK(max_abs_diff(k, want) == 0.0);
}

TEST_CASE("kron is associative on integer-valued matrices") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> d(-3, 3);
    auto random_int_matrix = [&](std::size_t n) {
        ComplexMatrix m(n, n);
        for (auto& e : m.entries()) e = Complex{static_cast<double>(d(rng)), 0.0};
        return m;
    };
    for (int rep = 0; rep < 10; ++rep) {
        const auto a = random_int_matrix(2), b = random_int_matrix(3), c = random_int_matrix(2);
        CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) == 0.0);
    }
}

TEST_CASE("trace") {
    CHECK(trace(ComplexMatrix::identity(3)) == Complex{3.0, 0.0});
    CHECK(trace(ComplexMatrix{{1.0, 5.0}, {7.0, 0.0}}) == Complex{1.0, 0.0});
    CHECK_THROWS_AS(trace(ComplexMatrix(2, 3)), DimensionError);
}

TEST_CASE("trace preserved by a normalized operator pair") {
    // Tr(B rho B* + C rho C*) = Tr(rho) when B*B + C*C = I
    const double s = 1.0 / std::sqrt(3.0);
    const ComplexMatrix b{{s, s}, {0.0, s}};
    const ComplexMatrix c{{s, 0.0}, {-s, s}};
    const ComplexMatrix rho{{1.0, 0.0}, {0.0, 0.0}};
    const ComplexMatrix evolved = b * rho * adjoint(b) + c * rho * adjoint(c);
    CHECK(trace(evolved).real() == Approx(1.0).margin(1e-14));
    CHECK(std::abs(trace(evolved).imag()) < 1e-14);
}

TEST_CASE("cyclic trace property") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        const auto a = testing::random_matrix(4, 4, rng);
        const auto b = testing::random_matrix(4, 4, rng);
        const Complex tab = trace(a * b), tba = trace(b * a);
        CHECK(std::abs(tab - tba) <= 1e-10 * std::max(1.0, std::abs(tab)));
    }
}

TEST_CASE("positive semidefinite predicate") {
    CHECK(is_positive_semidefinite(ComplexMatrix::identity(2), 1e-12));
    CHECK_FALSE(is_positive_semidefinite(ComplexMatrix{{-1.0, 0.0}, {0.0, 1.0}}, 1e-12));

    const double s = 1.0 / std::sqrt(3.0);
    const ComplexMatrix b{{s, s}, {0.0, s}};
    const ComplexMatrix rho{{1.0, 0.0}, {0.0, 0.0}};
    CHECK(is_positive_semidefinite(b * rho * adjoint(b), 1e-12));

    CHECK_THROWS_AS(is_positive_semidefinite(ComplexMatrix(2, 3), 1e-9), DimensionError);
}

TEST_CASE("x* x is PSD for random x") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 25; ++rep) {
        const auto x = testing::random_matrix(4, 4, rng);
        CHECK(is_positive_semidefinite(adjoint(x) * x, 1e-9));
    }
}

TEST_CASE("unitarity predicate") {
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(is_unitary(ComplexMatrix{{h, h}, {h, -h}}, 1e-12));

    // the rotation-block dilation at p = 0.3
    const double p = 0.3, q = std::sqrt(1.0 - p), r = std::sqrt(p);
    const ComplexMatrix u{{1.0, 0.0, 0.0, 0.0},
                          {0.0, q, -r, 0.0},
                          {0.0, r, q, 0.0},
                          {0.0, 0.0, 0.0, 1.0}};
    CHECK(is_unitary(u, 1e-12));

    CHECK_FALSE(is_unitary(ComplexMatrix{{1.0, 0.0}, {0.0, 2.0}}, 1e-10));
}

TEST_CASE("vector helpers") {
    const ComplexMatrix m{{0.0, 1.0}, {1.0, 0.0}};
    const ComplexVector v{Complex{1.0, 0.0}, Complex{0.0, 0.0}};
    const auto w = m * v;
    CHECK(w[0] == Complex{0.0, 0.0});
    CHECK(w[1] == Complex{1.0, 0.0});
    CHECK(norm_squared(w) == Approx(1.0));

    const auto d = outer(w);
    CHECK(d(1, 1) == Complex{1.0, 0.0});
    CHECK(trace(d).real() == Approx(1.0));
}

TEST_CASE("finite entry check") {
    ComplexMatrix m(2, 2);
    CHECK(all_finite(m));
    m(0, 0) = Complex{std::numeric_limits<double>::quiet_NaN(), 0.0};
    CHECK_FALSE(all_finite(m));
}
