#include <catch2/catch_amalgamated.hpp>

#include <padex/series.hpp>

#include <random>

using namespace padex;

using PPoly = LaurentPoly<PadicInt>;

namespace {

PPoly rand_poly(std::mt19937_64& rng, long p, long N, int terms, int degspan) {
    PPoly f(1, PadicInt::zero(p, N));
    for (int i = 0; i < terms; ++i) {
        int d = (int)(rng() % (2 * degspan + 1)) - degspan;
        long c = (long)(rng() % 2000) - 1000;
        if (c == 0) c = 1;
        f.add_term(mono_t(d), PadicInt::from_integer(p, N, c));
    }
    f.prune_zeros();
    return f;
}

} // namespace

TEST_CASE("gauss norm worked values", "[series]") {
    long p = 5, N = 8;
    PadicInt pp = PadicInt::from_integer(p, N, p);

    // f = p + t at sigma = 0: max(-1, 0) = 0
    PPoly f(1, PadicInt::zero(p, N));
    f.add_term(mono_t(0), pp);
    f.add_term(mono_t(1), PadicInt::one(p, N));
    auto r = gauss_lognorm(f, {Rat(0), Rat(0)});
    REQUIRE(r.finite());
    REQUIRE(r.value == 0);

    // f = p t^{-1} at sigma = -2: -1 + (-1)(-2) = 1
    PPoly g = PPoly::monomial(1, mono_t(-1), pp);
    auto rg = gauss_lognorm(g, {Rat(-2), Rat(0)});
    REQUIRE(rg.finite());
    REQUIRE(rg.value == 1);

    // zero polynomial: -infinity
    PPoly z(1, PadicInt::zero(p, N));
    REQUIRE(gauss_lognorm(z, {Rat(0), Rat(0)}).kind == NormKind::NegInfinity);

    // ambiguity: a coefficient that is zero at precision but sits at a
    // dominating degree must poison the norm
    PPoly h(1, PadicInt::zero(p, N));
    h.add_term(mono_t(0), PadicInt::from_integer(p, 2, 7)); // known mod p^2
    h.add_term(mono_t(3), PadicInt(p, 2, 0));               // 0 mod p^2 only
    auto rh = gauss_lognorm(h, {Rat(4), Rat(0)});           // degree-3 slot could carry 3*4 - 2
    REQUIRE(rh.kind == NormKind::Ambiguous);
}

TEST_CASE("sup norm over interval vertices", "[series]") {
    long p = 5, N = 6;
    Interval I = Interval::closed(Rat(-1), Rat(1));

    // f = t: max at the upper endpoint
    PPoly f = PPoly::monomial(1, mono_t(1), PadicInt::one(p, N));
    auto r = sup_lognorm(f, I);
    REQUIRE(r.finite());
    REQUIRE(r.value == 1);

    // f = t + t^{-1}, symmetric: 1 at both endpoints
    PPoly g = f + PPoly::monomial(1, mono_t(-1), PadicInt::one(p, N));
    auto rg = sup_lognorm(g, I);
    REQUIRE(rg.value == 1);

    // constants: -v(c) regardless of I
    PPoly c = PPoly::constant(1, PadicInt::from_integer(p, N, 50));
    auto rc = sup_lognorm(c, I);
    REQUIRE(rc.value == -2);
}

TEST_CASE("gauss norm multiplicativity and ultrametric", "[series]") {
    std::mt19937_64 rng(19);
    long p = 3, N = 12;
    std::array<Rat, 2> sig{Rat(1, 2), Rat(0)};
    for (int iter = 0; iter < 30; ++iter) {
        PPoly f = rand_poly(rng, p, N, 4, 3);
        PPoly g = rand_poly(rng, p, N, 4, 3);
        if (f.empty() || g.empty()) continue;
        auto rf = gauss_lognorm(f, sig), rg = gauss_lognorm(g, sig);
        auto rfg = gauss_lognorm(f * g, sig);
        if (rf.finite() && rg.finite() && rfg.finite())
            REQUIRE(rfg.value == rf.value + rg.value);
        auto rsum = gauss_lognorm(f + g, sig);
        if (rf.finite() && rg.finite() && rsum.finite()) {
            REQUIRE(rsum.value <= std::max(rf.value, rg.value));
            if (rf.value != rg.value)
                REQUIRE(rsum.value == std::max(rf.value, rg.value));
        }
    }
}

TEST_CASE("subst_zeta is a homomorphism and isometry", "[series]") {
    long p = 5, k = 1, N = 6;

    // f = t -> zeta t ; f = t^{-2} -> zeta^{-2} t^{-2}
    PPoly t = PPoly::monomial(1, mono_t(1), PadicInt::one(p, N));
    auto zt = subst_zeta(t, k, {1, 0});
    REQUIRE((zt.coefficient(mono_t(1)) - zeta_pow(p, k, N, 1)).is_zero());

    PPoly tm2 = PPoly::monomial(1, mono_t(-2), PadicInt::one(p, N));
    auto ztm2 = subst_zeta(tm2, k, {1, 0});
    REQUIRE((ztm2.coefficient(mono_t(-2)) - zeta_pow(p, k, N, -2)).is_zero());

    // f = 1 + p t^3 -> 1 + p zeta^3 t^3
    PPoly f(1, PadicInt::zero(p, N));
    f.add_term(mono_t(0), PadicInt::one(p, N));
    f.add_term(mono_t(3), PadicInt::from_integer(p, N, p));
    auto zf = subst_zeta(f, k, {1, 0});
    REQUIRE((zf.coefficient(mono_t(3)) - zeta_pow(p, k, N, 3).scaled(BigInt(p))).is_zero());

    // ring homomorphism on products; isometry of the pi-aware norm
    std::mt19937_64 rng(29);
    for (int iter = 0; iter < 10; ++iter) {
        PPoly a = rand_poly(rng, p, N, 3, 2);
        PPoly b = rand_poly(rng, p, N, 3, 2);
        auto za = subst_zeta(a, k, {2, 0});
        auto zb = subst_zeta(b, k, {2, 0});
        auto zab = subst_zeta(a * b, k, {2, 0});
        auto diff = zab - za * zb;
        for (auto& [m, c] : diff.terms()) REQUIRE(c.is_zero());
        std::array<Rat, 2> sig{Rat(0), Rat(0)};
        auto na = gauss_lognorm(a, sig);
        auto nza = gauss_lognorm(za, sig);
        if (na.finite() && nza.finite()) REQUIRE(na.value == nza.value);
    }
}

TEST_CASE("sigma_twist bookkeeping and isometry", "[series]") {
    long p = 5, N = 8;
    std::array<Rat, 2> sig{Rat(0), Rat(0)};

    // identity twist
    PPoly f(2, PadicInt::zero(p, N));
    f.add_term(mono_t(1, 0), PadicInt::one(p, N));
    f.add_term(mono_t(0, -2), PadicInt::from_integer(p, N, 7));
    auto id = sigma_twist(f, 4, 0, PadicInt::one(p, N), sig);
    REQUIRE(id.terms().size() == f.terms().size());

    // f = t_1, j = 4, l = 1, |w| = 1 at sigma_2 = 0: t_1 w^4 t_2^4
    PPoly t1 = PPoly::monomial(2, mono_t(1, 0), PadicInt::one(p, N));
    PadicInt w = PadicInt::from_integer(p, N, 2);
    auto tw = sigma_twist(t1, 4, 1, w, sig);
    REQUIRE(tw.terms().size() == 1);
    auto& [m, c] = *tw.terms().begin();
    REQUIRE(m == mono_t(1, 4));
    REQUIRE(c.equal_at_prec(PadicInt::from_integer(p, N, 16), N));

    // norm preserved at the working radius for random f
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 15; ++iter) {
        PPoly g(2, PadicInt::zero(p, N));
        for (int i = 0; i < 5; ++i) {
            int a = (int)(rng() % 5) - 2, b = (int)(rng() % 5) - 2;
            long cc = (long)(rng() % 500) + 1;
            g.add_term(mono_t(a, b), PadicInt::from_integer(p, N, cc));
        }
        g.prune_zeros();
        auto before = gauss_lognorm(g, sig);
        auto after = gauss_lognorm(sigma_twist(g, 3, 1, w, sig), sig);
        if (before.finite() && after.finite())
            REQUIRE(before.value == after.value);
    }

    // non-isometric twist rejected
    REQUIRE_THROWS_AS(sigma_twist(t1, 4, 1, PadicInt::from_integer(p, N, p), sig),
                      std::invalid_argument);
}

TEST_CASE("window truncation records a tail certificate", "[series]") {
    long p = 5, N = 8;
    Window w{2, 4};
    PPoly f(1, PadicInt::zero(p, N), w);
    f.add_term(mono_t(2), PadicInt::from_integer(p, N, p));
    PPoly g(1, PadicInt::zero(p, N), w);
    g.add_term(mono_t(1), PadicInt::from_integer(p, N, p * p));
    PPoly prod = f * g; // degree 3 exceeds the window
    REQUIRE(prod.terms().empty());
    REQUIRE(prod.tail_bound().has_value());
    REQUIRE(*prod.tail_bound() == 3); // v(p^3)
}

TEST_CASE("s-variable norms and substitution", "[series]") {
    long p = 5, N = 8;
    PPoly f(1, PadicInt::zero(p, N));
    f.add_term(Mono{{1, 0}, 1}, PadicInt::one(p, N));   // s t
    f.add_term(Mono{{0, 0}, 0}, PadicInt::from_integer(p, N, p));
    // at sigma_t = 0, sigma_s = -1: |s t| = p^{-1}, |p| = p^{-1}
    auto r = gauss_lognorm(f, {Rat(0), Rat(0)}, Rat(-1));
    REQUIRE(r.finite());
    REQUIRE(r.value == -1);

    // s = 0 kills the s-graded part
    auto f0 = f.subst_s(PadicInt::zero(p, N));
    REQUIRE(f0.terms().size() == 1);
    // s = 5: coefficient becomes 5
    auto f5 = f.subst_s(PadicInt::from_integer(p, N, 5));
    REQUIRE(f5.coefficient(mono_t(1)).equal_at_prec(PadicInt::from_integer(p, N, 5), N));
}

TEST_CASE("derivations", "[series]") {
    long p = 5, N = 8;
    PPoly f(2, PadicInt::zero(p, N));
    f.add_term(mono_t(3, -1), PadicInt::one(p, N));
    f.add_term(Mono{{0, 0}, 2}, PadicInt::one(p, N));
    auto d0 = f.t_dlog(0);
    REQUIRE(d0.coefficient(mono_t(3, -1)).equal_at_prec(PadicInt::from_integer(p, N, 3), N));
    auto d1 = f.t_dlog(1);
    REQUIRE(d1.coefficient(mono_t(3, -1)).equal_at_prec(PadicInt::from_integer(p, N, -1), N));
    auto ds = f.d_s();
    REQUIRE(ds.coefficient(Mono{{0, 0}, 1}).equal_at_prec(PadicInt::from_integer(p, N, 2), N));
}
