#include <cmath>
#include <vector>

#include "cstk/ensembles.hpp"
#include "cstk/error.hpp"
#include "cstk/linalg.hpp"
#include "cstk/rng.hpp"
#include "cstk/sparse_vector.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace cstk;

namespace {

oracle::Mat to_rows(const DenseMatrix& a) {
    oracle::Mat out(a.rows(), oracle::Vec(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i][j] = a(i, j);
    return out;
}

void check_close(const Vector& got, const Vector& want, double tol) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("matvec") {
    CHECK(matvec(DenseMatrix::identity(2), Vector{3, -1}) == Vector{3, -1});
    CHECK(matvec(DenseMatrix::from_rows({{1, 0, 1}, {0, 1, 1}}), Vector{1, 1, 1}) == Vector{2, 2});
    CHECK(matvec(DenseMatrix::from_rows({{1, 5, 2}, {3, -1, 7}}), Vector{0, 0, 0}) == Vector{0, 0});
    CHECK_THROWS_AS(matvec(DenseMatrix::identity(2), Vector{1, 2, 3}), DimensionError);
}

TEST_CASE("adjoint_matvec") {
    CHECK(adjoint_matvec(DenseMatrix::identity(2), Vector{1, 2}) == Vector{1, 2});
    CHECK(adjoint_matvec(DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}}), Vector{1, 1, 1}) == Vector{2, 2});
    CHECK(adjoint_matvec(DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}}), Vector{0, 0, 0}) == Vector{0, 0});
    CHECK_THROWS_AS(adjoint_matvec(DenseMatrix::identity(2), Vector{1}), DimensionError);
}

TEST_CASE("restrict_columns") {
    const auto a = DenseMatrix::from_rows({{1, 2, 3}});
    CHECK(restrict_columns(a, IndexSet::range(3)) == a);
    CHECK(restrict_columns(a, IndexSet{0, 2}) == DenseMatrix::from_rows({{1, 3}}));
    const auto e = restrict_columns(a, IndexSet{});
    CHECK(e.rows() == 1);
    CHECK(e.cols() == 0);
    CHECK_THROWS_AS(restrict_columns(a, IndexSet{3}), DimensionError);
}

TEST_CASE("DenseMatrix and IndexSet validation") {
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(DenseMatrix(1, 1, {NAN}), DomainError);
    CHECK_THROWS_AS(IndexSet({2, 1}), DomainError);
    CHECK_THROWS_AS(IndexSet({1, 1}), DomainError);
    CHECK(IndexSet::from_unsorted({3, 1, 3}) == IndexSet{1, 3});
    const IndexSet a{0, 2, 4}, b{2, 3};
    CHECK(a.unite(b) == IndexSet{0, 2, 3, 4});
    CHECK(a.intersect(b) == IndexSet{2});
    CHECK(a.minus(b) == IndexSet{0, 4});
}

TEST_CASE("least_squares examples") {
    LsConfig rich{LsMethod::richardson, 50, 1e-14};
    LsConfig cg{};

    SUBCASE("orthonormal columns: one richardson step from zero gives A^T u") {
        const DenseMatrix q = restrict_columns(dct_matrix(6), IndexSet{0, 2, 5}).transposed();
        // rows of the DCT are orthonormal, so the transpose has orthonormal columns
        const Vector u{1, -2, 0.5};
        LsConfig one{LsMethod::richardson, 1, 0.0};
        const auto r = least_squares(q, u, Vector(q.cols(), 0.0), one);
        CHECK(r.iterations == 1);
        check_close(r.z, adjoint_matvec(q, u), 1e-14);
    }
    SUBCASE("scalar") {
        const auto r = least_squares(DenseMatrix::from_rows({{2}}), Vector{6}, Vector{0}, cg);
        CHECK(r.z[0] == doctest::Approx(3.0).epsilon(1e-12));
        // M = 3 here, so the splitting iteration cannot converge
        CHECK_THROWS_AS(least_squares(DenseMatrix::from_rows({{2}}), Vector{6}, Vector{0}, rich),
                        NumericalError);
        const auto near = least_squares(DenseMatrix::from_rows({{1.05}}), Vector{2.1}, Vector{0}, rich);
        CHECK(near.z[0] == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("consistent 3x2 system") {
        const auto a = DenseMatrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
        const auto r = least_squares(a, Vector{1, 1, 2}, Vector{0, 0}, cg);
        CHECK(r.z[0] == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(r.z[1] == doctest::Approx(1.0).epsilon(1e-10));
        // A^T A = [[2,1],[1,2]] so ||M|| = 2 and richardson must report divergence
        LsConfig many{LsMethod::richardson, 200, 1e-14};
        bool diverged = false;
        try {
            least_squares(a, Vector{1, 1, 2}, Vector{0, 0}, many);
        } catch (const NumericalError&) {
            diverged = true;
        }
        CHECK(diverged);
    }
    SUBCASE("A^T u = 0 gives zero") {
        const auto a = DenseMatrix::from_rows({{1, 0}, {0, 1}, {0, 0}});
        const auto r = least_squares(a, Vector{0, 0, 5}, Vector{7, 7}, cg);
        CHECK(r.z == Vector{0, 0});
    }
    SUBCASE("config validation") {
        LsConfig bad;
        bad.tol = -1;
        CHECK_THROWS_AS(least_squares(DenseMatrix::identity(1), Vector{1}, Vector{0}, bad), DomainError);
        bad = LsConfig{};
        bad.max_iters = 0;
        CHECK_THROWS_AS(least_squares(DenseMatrix::identity(1), Vector{1}, Vector{0}, bad), DomainError);
    }
}

TEST_CASE("least_squares agrees with an elimination oracle on random tall systems") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto a = gen_matrix({Family::gaussian, 30, 6, seed});
        Vector u(30);
        CounterRng rng(seed * 77);
        for (auto& v : u) v = rng.gaussian();
        const auto want = oracle::lstsq(to_rows(a), u);
        REQUIRE(want);
        LsConfig cfg;
        cfg.max_iters = 100;
        cfg.tol = 1e-14;
        const auto got = least_squares(a, u, Vector(6, 0.0), cfg);
        for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(got.z[i] - (*want)[i]) < 1e-9);
    }
}

TEST_CASE("pseudoinverse_apply") {
    const auto id = DenseMatrix::identity(2);
    CHECK(pseudoinverse_apply(id, IndexSet{1}, Vector{0, 5}).dense() == Vector{0, 5});
    CHECK(pseudoinverse_apply(id, IndexSet{}, Vector{3, 5}).dense() == Vector{0, 0});

    const auto phi = gen_matrix({Family::gaussian, 6, 8, 12345});
    const auto x = gen_signal({8, 2, SignalKind::flat, 0.5, 99, true});
    const Vector u = matvec(phi, x.dense());
    const auto est = pseudoinverse_apply(phi, x.support(), u);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(est[i] - x[i]) < 1e-9);
    check_close(matvec(phi, est.dense()), u, 1e-9);
    CHECK_THROWS_AS(pseudoinverse_apply(phi, IndexSet::range(7), u), DomainError);
}

TEST_CASE("extreme_singular_values") {
    const auto sv = extreme_singular_values(DenseMatrix::identity(3));
    CHECK(sv.min == doctest::Approx(1.0));
    CHECK(sv.max == doctest::Approx(1.0));

    const auto two = DenseMatrix::from_rows({{1, 0.5}, {0, std::sqrt(3.0) / 2}});
    const auto sv2 = extreme_singular_values(two);
    CHECK(std::abs(sv2.min - std::sqrt(0.5)) < 1e-12);
    CHECK(std::abs(sv2.max - std::sqrt(1.5)) < 1e-12);

    const auto col = DenseMatrix::from_rows({{3}, {4}});
    const auto sv3 = extreme_singular_values(col);
    CHECK(sv3.min == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(sv3.max == doctest::Approx(5.0).epsilon(1e-12));

    CHECK_THROWS_AS(extreme_singular_values(DenseMatrix(3, 0)), DimensionError);
}

TEST_CASE("extreme_singular_values matches closed-form 2x2 and 3x3 Gram spectra") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto a = gen_matrix({Family::gaussian, 5, 2, seed});
        const auto g = gram(a);
        const auto [lo, hi] = oracle::eig2(g(0, 0), g(0, 1), g(1, 1));
        const auto sv = extreme_singular_values(a);
        CHECK(std::abs(sv.min - std::sqrt(lo)) <= 1e-8 * std::sqrt(hi));
        CHECK(std::abs(sv.max - std::sqrt(hi)) <= 1e-8 * std::sqrt(hi));
    }
    // 3x3 Gram with known spectrum: tridiagonal [[2,-1,0],[-1,2,-1],[0,-1,2]] has 2 - sqrt2, 2, 2 + sqrt2
    const auto t = DenseMatrix::from_rows({{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}});
    const auto ev = symmetric_eigenvalues(t);
    CHECK(std::abs(ev[0] - (2 - std::sqrt(2.0))) < 1e-12);
    CHECK(std::abs(ev[1] - 2.0) < 1e-12);
    CHECK(std::abs(ev[2] - (2 + std::sqrt(2.0))) < 1e-12);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto a = gen_matrix({Family::gaussian, 8, 3, seed});
        const double top = oracle::top_eig(to_rows(gram(a)));
        CHECK(std::abs(extreme_singular_values(a).max - std::sqrt(top)) < 1e-8 * std::sqrt(top));
    }
}

TEST_CASE("top_k") {
    CHECK(top_k(Vector{1, 1, 0}, 1) == IndexSet{0});
    CHECK(top_k(Vector{3, -2, 1}, 2) == IndexSet{0, 1});
    CHECK(top_k(Vector{3, -2, 1}, 3) == IndexSet{0, 1, 2});
    CHECK(top_k(Vector{3, -2, 1}, 0) == IndexSet{});
    CHECK_THROWS_AS(top_k(Vector{1, 2}, 3), DomainError);
    // ties at the cut go to the smaller index, regardless of position
    CHECK(top_k(Vector{0, 2, 5, -2, 2}, 2) == IndexSet{1, 2});
    CHECK(top_k(Vector{2, 2, 2, 2}, 3) == IndexSet{0, 1, 2});
}

TEST_CASE("top_k is permutation-equivariant on distinct magnitudes") {
    CounterRng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        Vector v(20);
        for (auto& x : v) x = rng.gaussian();
        std::vector<std::size_t> perm(20);
        for (std::size_t i = 0; i < 20; ++i) perm[i] = i;
        for (std::size_t i = 0; i < 20; ++i) std::swap(perm[i], perm[i + rng.below(20 - i)]);
        Vector w(20);
        for (std::size_t i = 0; i < 20; ++i) w[perm[i]] = v[i];
        const auto a = top_k(v, 7), b = top_k(w, 7);
        std::vector<std::size_t> mapped;
        for (auto i : a) mapped.push_back(perm[i]);
        CHECK(IndexSet::from_unsorted(mapped) == b);
    }
}

TEST_CASE("richardson contracts by 10x per step when ||M|| <= 0.1") {
    int used = 0;
    for (std::uint64_t seed = 1; used < 10 && seed < 500; ++seed) {
        // tall Gaussian blocks are near-isometries; keep only those with ||M|| <= 0.1
        const auto a = gen_matrix({Family::gaussian, 4000, 4, seed});
        const auto sv = extreme_singular_values(a);
        const double mnorm = std::max(sv.max * sv.max - 1, 1 - sv.min * sv.min);
        if (mnorm > 0.1) continue;
        ++used;
        Vector u(4000);
        CounterRng rng(seed);
        for (auto& v : u) v = rng.gaussian();
        const auto zstar = *oracle::lstsq(to_rows(a), u);
        Vector z(4, 0.0);
        const double e0 = norm2(subtract(z, zstar));
        for (int l = 1; l <= 6; ++l) {
            z = least_squares(a, u, z, {LsMethod::richardson, 1, 0.0}).z;
            const double el = norm2(subtract(z, zstar));
            CHECK(el <= std::pow(0.1, l) * e0 * (1 + 1e-6) + 1e-13);
        }
    }
    CHECK(used == 10);
}

TEST_CASE("LsConfig default iteration limit") {
    LsConfig c;
    CHECK(c.iteration_limit(4) == 12);
    c.max_iters = 3;
    CHECK(c.iteration_limit(4) == 3);
}

TEST_CASE("Cholesky solves SPD systems") {
    const auto a = DenseMatrix::from_rows({{4, 2}, {2, 3}});
    const auto x = Cholesky(a).solve(Vector{2, 1});
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(0.0));
    CHECK_THROWS_AS(Cholesky(DenseMatrix::from_rows({{1, 2}, {2, 1}})), NumericalError);
}

TEST_CASE("SparseVector") {
    SparseVector x(5);
    x.set(3, 2.0);
    x.set(1, -1.0);
    CHECK(x.support() == IndexSet{1, 3});
    CHECK(x.nnz() == 2);
    CHECK(x.restricted(IndexSet{3}).dense() == Vector{0, 0, 0, 2, 0});
    CHECK(SparseVector::scatter(4, IndexSet{0, 2}, Vector{1, 2}).dense() == Vector{1, 0, 2, 0});
    CHECK_THROWS_AS(x.set(5, 1.0), DimensionError);
}
