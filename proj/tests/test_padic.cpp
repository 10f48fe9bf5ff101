#include <catch2/catch_amalgamated.hpp>

#include <padex/padic.hpp>

#include <random>

using namespace padex;

// independent oracle: minimum over n = 1..p^m of the defining condition
static BigInt dist_oracle(const PadicInt& a, long m) {
    BigInt pm = pow_int(a.p(), m);
    BigInt r = a.residue_mod(m);
    for (BigInt n = 1; n <= pm; ++n) {
        if ((r + n) % pm == 0 || mod_floor(r - n, pm) == 0) return n;
    }
    return pm;
}

TEST_CASE("dist_to_int closed form matches brute force", "[padic]") {
    std::mt19937_64 rng(7);
    for (long p : {2L, 3L, 5L}) {
        for (long m = 1; pow_int(p, m) <= 200; ++m) {
            BigInt pm = pow_int(p, m);
            for (BigInt r = 0; r < pm; ++r) {
                PadicInt a(p, m + 1, r);
                REQUIRE(dist_to_int(a, m) == dist_oracle(a, m));
            }
        }
    }
}

TEST_CASE("dist_to_int worked values", "[padic]") {
    // r = 0: only +-p^m works
    REQUIRE(dist_to_int(PadicInt(5, 4, 0), 2) == 25);
    // a = 3 mod 25
    REQUIRE(dist_to_int(PadicInt(5, 4, 3), 2) == 3);
    // a = 1/2 in Z_5, m = 1: residue 3 mod 5, 1/2 + 2 = 5/2
    PadicInt half = PadicInt::from_rational(5, 4, 1, 2);
    REQUIRE(half.residue_mod(1) == 3);
    REQUIRE(dist_to_int(half, 1) == 2);
}

TEST_CASE("arithmetic precision bookkeeping", "[padic]") {
    PadicInt a = PadicInt::from_rational(5, 6, 7, 3);
    PadicInt b = PadicInt::from_rational(5, 6, -2, 1);
    PadicInt s = a + b; // 7/3 - 2 = 1/3
    REQUIRE(s.equal_at_prec(PadicInt::from_rational(5, 6, 1, 3), 6));
    PadicInt prod = a * b;
    REQUIRE(prod.equal_at_prec(PadicInt::from_rational(5, 6, -14, 3), 6));
    PadicInt inv = a.inverse();
    REQUIRE((inv * a).equal_at_prec(PadicInt::one(5, 6), 6));

    // subtraction cancellation shows up on later valuation queries
    PadicInt x(5, 6, 30);
    PadicInt y(5, 6, 5);
    auto v = (x - y).valuation();
    REQUIRE(v.has_value());
    REQUIRE(*v == 2);

    // honest failure when dividing by something invisible at precision
    PadicInt z(5, 3, 125); // == 0 mod 5^3
    REQUIRE(z.is_zero_at_prec());
    REQUIRE_THROWS_AS(z.inverse(), PrecisionError);
}

TEST_CASE("negative valuation elements", "[padic]") {
    PadicInt q = PadicInt::from_rational(5, 4, 1, 5); // 1/5
    REQUIRE(q.voff() == 1);
    REQUIRE(q.abs_prec() == 4);
    auto v = q.valuation();
    REQUIRE(*v == -1);
    PadicInt five = PadicInt::from_integer(5, 6, 5);
    REQUIRE((q * five).equal_at_prec(PadicInt::one(5, 4), 4));
}

TEST_CASE("padic_binom Pascal rule and worked values", "[padic]") {
    // Pascal oracle at tracked precision: binom(a,k) = binom(a-1,k-1)+binom(a-1,k)
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 40; ++iter) {
        long p = (iter % 2) ? 5 : 7;
        long N = 8;
        BigInt u = (long)(rng() % 1000) - 500;
        BigInt v = (long)(rng() % 50) + 1;
        if (v % p == 0) v += 1;
        PadicInt a = PadicInt::from_rational(p, N, u, v);
        PadicInt am1 = a - PadicInt::one(p, N);
        for (long k = 1; k <= 5; ++k) {
            PadicInt lhs = padic_binom(a, k);
            PadicInt rhs = padic_binom(am1, k - 1) + padic_binom(am1, k);
            long prec = std::min(lhs.abs_prec(), rhs.abs_prec());
            REQUIRE(lhs.equal_at_prec(rhs, prec));
        }
    }

    // binom(a,0) = 1
    REQUIRE(padic_binom(PadicInt(7, 4, 13), 0).equal_at_prec(PadicInt::one(7, 4), 4));

    // binom(-1,3) = -1 mod 7^3
    PadicInt m1 = PadicInt::from_integer(7, 4, -1);
    PadicInt b3 = padic_binom(m1, 3);
    REQUIRE(b3.equal_at_prec(PadicInt::from_integer(7, 3, -1), 3));

    // binom(1/2,2) = -1/8 = 300 mod 343 at p=7
    PadicInt half7 = PadicInt::from_rational(7, 3, 1, 2);
    PadicInt b2 = padic_binom(half7, 2);
    REQUIRE(b2.residue_mod(3) == 300);
}

TEST_CASE("padic_binom precision exhaustion", "[padic]") {
    PadicInt a(5, 2, 7);
    // v_5(25!) = 6 > 2
    REQUIRE_THROWS_AS(padic_binom(a, 25), PrecisionError);
}

// brute-force window check used to freeze the rational expectations
static bool rational_has_witness(long p, long M, const Rat& c_max, const BigInt& u, const BigInt& v) {
    PadicInt a = PadicInt::from_rational(p, M + 2, u, v);
    auto rep = liouville_scan(a, M, c_max);
    return !rep.witnesses.empty();
}

TEST_CASE("liouville_scan separates rationals from tower-gap series", "[padic]") {
    // image of 7/3 in Z_5, M = 20: rational-like, zero witnesses
    PadicInt a = PadicInt::from_rational(5, 22, 7, 3);
    auto rep = liouville_scan(a, 20, Rat(100));
    REQUIRE(rep.witnesses.empty());
    REQUIRE(rep.verdict == LiouvilleVerdict::RationalLike);

    // a = 0: <0>_m = p^m, never a witness; digits periodic
    auto rep0 = liouville_scan(PadicInt::zero(5, 22), 20, Rat(100));
    REQUIRE(rep0.witnesses.empty());
    REQUIRE(rep0.verdict == LiouvilleVerdict::RationalLike);

    // rationals |u|,|v| <= 50 never produce witnesses at c_max = 100, M = 20
    std::mt19937_64 rng(3);
    for (long p : {2L, 3L, 5L}) {
        for (int iter = 0; iter < 60; ++iter) {
            BigInt u = (long)(rng() % 101) - 50;
            BigInt v = (long)(rng() % 50) + 1;
            if (v % p == 0) v += 1;
            if (u == 0) u = 1;
            REQUIRE_FALSE(rational_has_witness(p, 20, Rat(100), u, v));
        }
    }

    // tower-gap series at p = 2: sum of 2^{e_j}, e_{j+1} = 2^{e_j}
    // within M = 70 the partial sums give witnesses with ratio <= 2
    long M = 70;
    BigInt t = 0;
    for (long e : {1L, 2L, 4L, 16L}) t += pow_int(2, e); // e_5 = 65536 out of window
    PadicInt tower(2, M + 2, t);
    auto rept = liouville_scan(tower, M, Rat(2));
    REQUIRE(rept.verdict == LiouvilleVerdict::LiouvilleSuspect);
    bool small_ratio = false;
    for (auto& w : rept.witnesses)
        if (w.ratio <= 2) small_ratio = true;
    REQUIRE(small_ratio);
}

TEST_CASE("approx_sequence policies and negation law", "[padic]") {
    // alpha = 0: all terms 0
    auto s0 = approx_sequence(PadicInt::zero(5, 5), 4);
    for (auto& t : s0.terms) REQUIRE(t == 0);

    // alpha = -1 in Z_5, least-nonnegative: 4/5, 24/25, 124/125
    auto sm1 = approx_sequence(PadicInt::from_integer(5, 5, -1), 3);
    REQUIRE(sm1.terms[1] == Rat(4, 5));
    REQUIRE(sm1.terms[2] == Rat(24, 25));
    REQUIRE(sm1.terms[3] == Rat(124, 125));

    // negation law under the mirrored policy
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 20; ++iter) {
        BigInt u = (long)(rng() % 4000) - 2000;
        PadicInt alpha = PadicInt::from_rational(5, 8, u == 0 ? 1 : u, 3);
        for (auto pol : {ReprPolicy::LeastNonneg, ReprPolicy::BalancedUpper}) {
            auto s = approx_sequence(alpha, 6, pol);
            auto sn = approx_sequence(-alpha, 6, mirrored(pol));
            for (size_t h = 0; h < s.terms.size(); ++h)
                REQUIRE(sn.terms[h] == -s.terms[h]);
        }
    }

    // integer alpha: p^h <a_h> <= |alpha| over the window (lies in the N class)
    PadicInt seven = PadicInt::from_integer(5, 9, 7);
    auto s7 = approx_sequence(seven, 8);
    for (long h = 0; h <= 8; ++h) {
        Rat d = real_dist_to_Z(s7.terms[h]);
        REQUIRE(Rat(pow_int(5, h)) * d <= 7);
    }
}

TEST_CASE("representative policies", "[padic]") {
    BigInt ph = 25;
    REQUIRE(representative(24, ph, ReprPolicy::LeastNonneg) == 24);
    REQUIRE(representative(24, ph, ReprPolicy::LeastNonpos) == -1);
    REQUIRE(representative(13, ph, ReprPolicy::BalancedUpper) == -12);
    REQUIRE(representative(12, ph, ReprPolicy::BalancedUpper) == 12);
    REQUIRE(representative(12, ph, ReprPolicy::BalancedLower) == 12);
    REQUIRE(representative(13, ph, ReprPolicy::BalancedLower) == -12);
}
