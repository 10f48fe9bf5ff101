#include <catch2/catch_amalgamated.hpp>

#include <padex/linalg.hpp>
#include <padex/series.hpp>

#include <random>

using namespace padex;

TEST_CASE("matrix ops over PadicInt", "[linalg]") {
    long p = 5, N = 8;
    auto z = PadicInt::zero(p, N);
    Matrix<PadicInt> a(2, 2, z), b(2, 2, z);
    a(0, 0) = PadicInt::from_integer(p, N, 1);
    a(0, 1) = PadicInt::from_integer(p, N, 2);
    a(1, 1) = PadicInt::from_integer(p, N, 3);
    b(0, 0) = PadicInt::from_integer(p, N, 4);
    b(1, 0) = PadicInt::from_integer(p, N, 1);
    auto c = a * b;
    REQUIRE(c(0, 0).equal_at_prec(PadicInt::from_integer(p, N, 6), N));
    REQUIRE(c(1, 0).equal_at_prec(PadicInt::from_integer(p, N, 3), N));
    REQUIRE(a.det().equal_at_prec(PadicInt::from_integer(p, N, 3), N));

    auto inv = padic_inverse(a);
    auto prod = a * inv;
    for (long i = 0; i < 2; ++i)
        for (long j = 0; j < 2; ++j)
            REQUIRE(prod(i, j).equal_at_prec(
                i == j ? PadicInt::one(p, N) : PadicInt::zero(p, N), N - 1));
}

TEST_CASE("padic_kernel finds exact kernels", "[linalg]") {
    long p = 5, N = 10;
    auto z = PadicInt::zero(p, N);

    // kernel of [[1, 2], [2, 4]] is spanned by (-2, 1)
    Matrix<PadicInt> a(2, 2, z);
    a(0, 0) = PadicInt::from_integer(p, N, 1);
    a(0, 1) = PadicInt::from_integer(p, N, 2);
    a(1, 0) = PadicInt::from_integer(p, N, 2);
    a(1, 1) = PadicInt::from_integer(p, N, 4);
    PivotReport rep;
    auto ker = padic_kernel(a, &rep);
    REQUIRE(rep.rank == 1);
    REQUIRE(ker.size() == 1);
    // check a * v = 0
    for (long i = 0; i < 2; ++i) {
        PadicInt acc = z;
        for (long j = 0; j < 2; ++j) acc = acc + a(i, j) * ker[0][(size_t)j];
        REQUIRE(acc.is_zero_at_prec());
    }

    // full-rank matrix has trivial kernel even with p-divisible entries
    Matrix<PadicInt> b(2, 2, z);
    b(0, 0) = PadicInt::from_integer(p, N, p);
    b(1, 1) = PadicInt::from_integer(p, N, 3);
    auto ker2 = padic_kernel(b, &rep);
    REQUIRE(ker2.empty());
    REQUIRE(rep.rank == 2);
    REQUIRE(rep.max_pivot_valuation == 1);

    // random consistency: kernel vectors annihilate
    std::mt19937_64 rng(43);
    for (int iter = 0; iter < 20; ++iter) {
        Matrix<PadicInt> m(3, 4, z);
        for (long i = 0; i < 3; ++i)
            for (long j = 0; j < 4; ++j)
                m(i, j) = PadicInt::from_integer(p, N, (long)(rng() % 40) - 20);
        auto kb = padic_kernel(m, &rep);
        REQUIRE((long)kb.size() + rep.rank == 4);
        for (auto& v : kb)
            for (long i = 0; i < 3; ++i) {
                PadicInt acc = z;
                for (long j = 0; j < 4; ++j) acc = acc + m(i, j) * v[(size_t)j];
                // precision after elimination: N minus accumulated pivot losses
                REQUIRE(acc.abs_prec() >= N - 3 * (rep.max_pivot_valuation + 1));
                REQUIRE(acc.is_zero_at_prec());
            }
    }
}

TEST_CASE("matrix of Laurent polynomials multiplies", "[linalg]") {
    long p = 5, N = 6;
    using PP = LaurentPoly<PadicInt>;
    PP z = PP::zero(1, PadicInt::zero(p, N));
    Matrix<PP> m(2, 2, z);
    m(0, 0) = PP::constant(1, PadicInt::one(p, N));
    m(0, 1) = PP::monomial(1, mono_t(1), PadicInt::one(p, N));
    m(1, 1) = PP::constant(1, PadicInt::one(p, N));
    auto sq = m * m;
    REQUIRE(sq(0, 1).coefficient(mono_t(1)).equal_at_prec(PadicInt::from_integer(p, N, 2), N));
    auto id = Matrix<PP>::identity(2, z);
    auto prod = id * m;
    REQUIRE(prod(0, 1).coefficient(mono_t(1)).equal_at_prec(PadicInt::one(p, N), N));

    // Kronecker sum of 1x1 blocks adds the scalars
    Matrix<PP> a(1, 1, z), b(1, 1, z);
    a(0, 0) = PP::constant(1, PadicInt::from_integer(p, N, 2));
    b(0, 0) = PP::constant(1, PadicInt::from_integer(p, N, 3));
    auto ks = Matrix<PP>::kron_sum(a, b);
    REQUIRE(ks(0, 0).coefficient(mono_t(0)).equal_at_prec(PadicInt::from_integer(p, N, 5), N));
}
