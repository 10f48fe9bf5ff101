#pragma once

// Truncated p-adic integer arithmetic with explicit precision tracking,
// the integer-distance function <a>_m, Liouville diagnostics, p-adic
// binomial coefficients and real approximation sequences.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace padex {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline BigInt pow_int(const BigInt& b, long e) {
    BigInt r = 1, x = b;
    for (long k = e; k > 0; k >>= 1) {
        if (k & 1) r *= x;
        if (k > 1) x *= x;
    }
    return r;
}

inline BigInt mod_floor(const BigInt& a, const BigInt& m) {
    BigInt r = a % m;
    if (r < 0) r += m;
    return r;
}

// valuation of a nonzero integer at p
inline long val_p(BigInt a, long p) {
    if (a == 0) throw std::logic_error("val_p(0)");
    long v = 0;
    while (a % p == 0) { a /= p; ++v; }
    return v;
}

inline long val_p_factorial(long p, long m) {
    // Legendre: v_p(m!) = sum_{i>=1} floor(m/p^i)
    long v = 0;
    for (long q = m / p; q > 0; q /= p) v += q;
    return v;
}

inline BigInt mod_inverse(const BigInt& a, const BigInt& m) {
    BigInt r0 = m, r1 = mod_floor(a, m), s0 = 0, s1 = 1;
    while (r1 != 0) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1; r0 = r1; r1 = r2;
        BigInt s2 = s0 - q * s1; s0 = s1; s1 = s2;
    }
    if (r0 != 1) throw std::domain_error("mod_inverse: not invertible");
    return mod_floor(s0, m);
}

struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An element p^{-voff} * u of Q_p where the unit part u is known mod p^N.
// voff = 0 for Z_p elements.  The absolute precision (the modulus to which
// the value itself is pinned) is N - voff; every arithmetic result carries
// the honestly propagated precision.
class PadicInt {
public:
    PadicInt() : p_(2), prec_(1), voff_(0), residue_(0) {}

    PadicInt(long p, long prec, BigInt residue, long voff = 0)
        : p_(p), prec_(prec), voff_(voff), residue_(std::move(residue)) {
        if (prec_ < 1) throw std::invalid_argument("PadicInt: precision < 1");
        residue_ = mod_floor(residue_, pow_int(p_, prec_));
        canonicalize();
    }

    static PadicInt from_integer(long p, long prec, const BigInt& n) {
        return PadicInt(p, prec, n, 0);
    }

    // image of u/v in Q_p at absolute precision `prec`
    static PadicInt from_rational(long p, long prec, const BigInt& u, const BigInt& v) {
        if (v == 0) throw std::invalid_argument("from_rational: zero denominator");
        if (u == 0) return zero(p, prec);
        BigInt uu = u, vv = v;
        long a = val_p(uu, p), b = val_p(vv, p);
        uu /= pow_int(p, a);
        vv /= pow_int(p, b);
        long e = a - b;   // value = p^e * (uu/vv) with uu, vv units
        long voff = e < 0 ? -e : 0;
        long N = prec + voff;
        BigInt m = pow_int(p, N);
        BigInt r = mod_floor(uu, m) * mod_inverse(mod_floor(vv, m), m) % m;
        if (e > 0) r = r * pow_int(p, e) % m;
        return PadicInt(p, N, r, voff);
    }

    static PadicInt from_rational(long p, long prec, const Rat& q) {
        return from_rational(p, prec, numerator(q), denominator(q));
    }

    static PadicInt zero(long p, long prec) { return PadicInt(p, prec, 0); }
    static PadicInt one(long p, long prec) { return PadicInt(p, prec, 1); }

    long p() const { return p_; }
    long prec() const { return prec_; }
    long voff() const { return voff_; }
    const BigInt& residue() const { return residue_; }

    // modulus to which the value itself is pinned
    long abs_prec() const { return prec_ - voff_; }

    bool is_zero_at_prec() const { return residue_ == 0; }

    // exact valuation when determinable; nullopt when the element is zero
    // at the working precision (valuation >= abs_prec() only)
    std::optional<Rat> valuation() const {
        if (residue_ == 0) return std::nullopt;
        return Rat(val_p(residue_, p_) - voff_);
    }

    PadicInt operator-() const {
        return PadicInt(p_, prec_, -residue_, voff_);
    }

    friend PadicInt operator+(const PadicInt& a, const PadicInt& b) {
        a.check_compat(b);
        long voff = std::max(a.voff_, b.voff_);
        long abs = std::min(a.abs_prec(), b.abs_prec());
        long prec = abs + voff;
        BigInt m = pow_int(a.p_, prec);
        BigInt ra = a.residue_ * pow_int(a.p_, voff - a.voff_) % m;
        BigInt rb = b.residue_ * pow_int(a.p_, voff - b.voff_) % m;
        return PadicInt(a.p_, prec, ra + rb, voff);
    }

    friend PadicInt operator-(const PadicInt& a, const PadicInt& b) { return a + (-b); }

    friend PadicInt operator*(const PadicInt& a, const PadicInt& b) {
        a.check_compat(b);
        long prec = std::min(a.prec_, b.prec_);
        BigInt m = pow_int(a.p_, prec);
        return PadicInt(a.p_, prec, (a.residue_ % m) * (b.residue_ % m), a.voff_ + b.voff_);
    }

    PadicInt inverse() const {
        if (residue_ == 0)
            throw PrecisionError("inverse: zero at working precision");
        long w = val_p(residue_, p_);
        long prec = prec_ - w;
        if (prec < 1) throw PrecisionError("inverse: precision exhausted");
        BigInt unit = residue_ / pow_int(p_, w);
        BigInt m = pow_int(p_, prec);
        BigInt r = mod_inverse(unit % m, m);
        long e = voff_ - w;   // value = p^e * unit^{-1}
        if (e >= 0)
            return PadicInt(p_, prec + e, r * pow_int(p_, e), 0);
        return PadicInt(p_, prec, r, -e);
    }

    friend PadicInt operator/(const PadicInt& a, const PadicInt& b) { return a * b.inverse(); }

    // exact division by p^e (throws when residue not divisible)
    PadicInt div_exact_p(long e) const {
        if (e == 0) return *this;
        if (e < 0) return mul_p(-e);
        if (voff_ > 0) {
            long take = std::min(voff_, e);
            PadicInt r(p_, prec_, residue_, voff_ - take);
            return r.div_exact_p(e - take);
        }
        BigInt q = residue_;
        BigInt pe = pow_int(p_, e);
        if (q % pe != 0)
            throw PrecisionError("div_exact_p: residue not divisible");
        if (prec_ - e < 1) throw PrecisionError("div_exact_p: precision exhausted");
        return PadicInt(p_, prec_ - e, q / pe, 0);
    }

    PadicInt mul_p(long e) const {
        if (e <= 0) return e == 0 ? *this : div_exact_p(-e);
        if (voff_ >= e) return PadicInt(p_, prec_, residue_, voff_ - e);
        long rest = e - voff_;
        return PadicInt(p_, prec_ + rest, residue_ * pow_int(p_, rest), 0);
    }

    // residue of the value mod p^m (requires the value to lie in Z_p and m within precision)
    BigInt residue_mod(long m) const {
        if (voff_ != 0)
            throw std::domain_error("residue_mod: element not in Z_p form");
        if (m > prec_)
            throw PrecisionError("residue_mod: precision too low");
        return mod_floor(residue_, pow_int(p_, m));
    }

    // lowers (never raises) the working precision
    PadicInt truncated(long new_abs_prec) const {
        long na = std::min(new_abs_prec, abs_prec());
        if (na < 1) throw PrecisionError("truncated: precision exhausted");
        long np = na + voff_;
        return PadicInt(p_, np, mod_floor(residue_, pow_int(p_, np)), voff_);
    }

    bool equal_at_prec(const PadicInt& o, long abs) const {
        if (p_ != o.p_) return false;
        PadicInt d = *this - o;
        if (d.abs_prec() < abs)
            throw PrecisionError("equal_at_prec: operands too imprecise");
        PadicInt dd = d.truncated(abs);
        return dd.residue_ == 0;
    }

    std::string to_string() const {
        std::string s = residue_.str();
        if (voff_ > 0) s += "/" + pow_int(p_, voff_).str();
        return s;
    }

private:
    void check_compat(const PadicInt& o) const {
        if (p_ != o.p_) throw std::invalid_argument("PadicInt: mismatched primes");
    }

    void canonicalize() {
        // keep voff minimal: cancel p | residue against a positive offset
        while (voff_ > 0 && prec_ > 1 && residue_ != 0 && residue_ % p_ == 0) {
            residue_ /= p_;
            --voff_;
            --prec_;
        }
        if (residue_ == 0 && voff_ > 0) {
            // zero at precision: fold the offset into absolute precision
            long abs = prec_ - voff_;
            if (abs >= 1) { prec_ = abs; voff_ = 0; }
        }
    }

    long p_;
    long prec_;
    long voff_;
    BigInt residue_;
};

// <a>_m = min{ n in Z_{>0} : a+n or a-n in p^m Z_p }  (paper convention,
// so <0>_m = p^m).  Closed form min(r, p^m - r) with r = a mod p^m, r = 0
// giving p^m.
inline BigInt dist_to_int(const PadicInt& a, long m) {
    BigInt pm = pow_int(a.p(), m);
    BigInt r = a.residue_mod(m);
    if (r == 0) return pm;
    return std::min(r, BigInt(pm - r));
}

// Distance to the nearest integer representative allowing n = 0; this is
// the distance used by weak equivalence (reflexivity needs <0> = 0).
inline BigInt dist_to_int_z(const PadicInt& a, long m) {
    BigInt pm = pow_int(a.p(), m);
    BigInt r = a.residue_mod(m);
    return std::min(r, BigInt(pm - r));
}

struct LiouvilleWitness {
    long m;
    BigInt n;       // <a>_m
    Rat ratio;      // n/m exactly
};

enum class LiouvilleVerdict { RationalLike, LiouvilleSuspect, Inconclusive };

struct LiouvilleReport {
    PadicInt subject;
    long horizon = 0;
    Rat c_max;
    std::vector<LiouvilleWitness> witnesses;
    LiouvilleVerdict verdict = LiouvilleVerdict::Inconclusive;
    bool digits_periodic = false;
    long period = 0, preperiod = 0;
};

inline const char* to_string(LiouvilleVerdict v) {
    switch (v) {
        case LiouvilleVerdict::RationalLike: return "rational-like";
        case LiouvilleVerdict::LiouvilleSuspect: return "liouville-suspect";
        default: return "inconclusive";
    }
}

namespace detail {
// Witnesses only count at scales where p^m >= guard * c_max * m; with
// guard 64 a rational u/v with |u|,|v| < guard can never fake one.
inline constexpr long kLiouvilleGuard = 64;

inline bool in_witness_window(long p, long m, const Rat& c_max) {
    Rat lhs(pow_int(p, m));
    return lhs > Rat(kLiouvilleGuard) * c_max * m;
}

// smallest (preperiod, period) with the periodic block repeated at least
// twice inside the window; returns false when none fits
inline bool detect_periodicity(const std::vector<long>& d, long& preperiod, long& period) {
    long M = (long)d.size();
    for (long q = 1; 2 * q <= M; ++q) {
        for (long l = 0; l + 2 * q <= M; ++l) {
            bool ok = true;
            for (long i = l; i + q < M; ++i)
                if (d[i] != d[i + q]) { ok = false; break; }
            if (ok) { preperiod = l; period = q; return true; }
        }
    }
    return false;
}
} // namespace detail

// Bounded semidecision: scans <a>_m over m <= M and reports witnesses of
// <a>_m <= c_max * m inside the guarded tail window.  Never claims to
// decide Liouville-ness.
inline LiouvilleReport liouville_scan(const PadicInt& a, long M, const Rat& c_max) {
    if (M > a.prec())
        throw PrecisionError("liouville_scan: horizon beyond precision");
    LiouvilleReport rep;
    rep.subject = a;
    rep.horizon = M;
    rep.c_max = c_max;
    long p = a.p();
    long full = a.prec();
    BigInt pfull = pow_int(p, full);
    BigInt rfull = a.residue_mod(full);
    for (long m = 1; m <= M; ++m) {
        if (!detail::in_witness_window(p, m, c_max)) continue;
        BigInt n = dist_to_int(a, m);
        if (Rat(n) > c_max * m) continue;
        // a witness whose integer persists to the full working precision is
        // evidence that a IS that integer; Liouville-ness needs a not in Z
        if (mod_floor(rfull - n, pfull) == 0 || mod_floor(rfull + n, pfull) == 0) continue;
        rep.witnesses.push_back({m, n, Rat(n, m)});
    }
    // base-p digit periodicity over the window
    std::vector<long> digits;
    BigInt r = a.residue_mod(M);
    for (long i = 0; i < M; ++i) { digits.push_back((long)(r % p)); r /= p; }
    rep.digits_periodic = detail::detect_periodicity(digits, rep.preperiod, rep.period);

    if (!rep.witnesses.empty())
        rep.verdict = LiouvilleVerdict::LiouvilleSuspect;
    else if (rep.digits_periodic)
        rep.verdict = LiouvilleVerdict::RationalLike;
    else
        rep.verdict = LiouvilleVerdict::Inconclusive;
    return rep;
}

// p-adic binomial coefficient binom(a, k) = a(a-1)...(a-k+1)/k! with the
// honest precision loss v_p(k!) recorded in the output precision.
inline PadicInt padic_binom(const PadicInt& a, long k) {
    long p = a.p();
    if (k == 0) return PadicInt::one(p, a.prec());
    long loss = val_p_factorial(p, k);
    if (a.prec() <= loss)
        throw PrecisionError("padic_binom: precision exhausted by v_p(k!)");
    PadicInt num = a;
    for (long i = 1; i < k; ++i)
        num = num * (a - PadicInt::from_integer(p, a.prec(), i));
    // k! = p^loss * unit
    BigInt kf = 1;
    for (long i = 2; i <= k; ++i) kf *= i;
    BigInt unit = kf / pow_int(p, loss);
    PadicInt q = num.div_exact_p(loss);
    BigInt m = pow_int(p, q.prec());
    BigInt r = q.residue() % m * mod_inverse(unit % m, m);
    return PadicInt(p, q.prec(), r, q.voff());
}

enum class ReprPolicy { LeastNonneg, LeastNonpos, BalancedUpper, BalancedLower };

inline ReprPolicy mirrored(ReprPolicy pol) {
    switch (pol) {
        case ReprPolicy::LeastNonneg: return ReprPolicy::LeastNonpos;
        case ReprPolicy::LeastNonpos: return ReprPolicy::LeastNonneg;
        case ReprPolicy::BalancedUpper: return ReprPolicy::BalancedLower;
        default: return ReprPolicy::BalancedUpper;
    }
}

// integer representative of residue r mod p^h under the chosen policy
inline BigInt representative(const BigInt& r, const BigInt& ph, ReprPolicy pol) {
    BigInt rr = mod_floor(r, ph);
    switch (pol) {
        case ReprPolicy::LeastNonneg: return rr;
        case ReprPolicy::LeastNonpos: return rr == 0 ? rr : BigInt(rr - ph);
        case ReprPolicy::BalancedUpper: // (-p^h/2, p^h/2]
            return 2 * rr > ph ? BigInt(rr - ph) : rr;
        default: // BalancedLower: [-p^h/2, p^h/2)
            return 2 * rr >= ph ? BigInt(rr - ph) : rr;
    }
}

struct ApproxSequence {
    PadicInt subject;
    long horizon = 0;
    ReprPolicy policy = ReprPolicy::LeastNonneg;
    std::vector<Rat> terms;   // a_h = alpha_h / p^h, h = 0..H
};

inline ApproxSequence approx_sequence(const PadicInt& alpha, long H,
                                      ReprPolicy pol = ReprPolicy::LeastNonneg) {
    if (H > alpha.prec())
        throw PrecisionError("approx_sequence: horizon beyond precision");
    ApproxSequence seq;
    seq.subject = alpha;
    seq.horizon = H;
    seq.policy = pol;
    long p = alpha.p();
    for (long h = 0; h <= H; ++h) {
        BigInt ph = pow_int(p, h);
        BigInt ah = representative(alpha.residue_mod(h), ph, pol);
        seq.terms.push_back(Rat(ah, ph));
    }
    return seq;
}

// distance of a rational to the nearest integer (Appendix-style <x>)
inline Rat real_dist_to_Z(const Rat& x) {
    BigInt n = numerator(x), d = denominator(x);
    BigInt q = n / d, r = n % d;
    if (r < 0) { r += d; q -= 1; }
    Rat frac(r, d);
    return std::min(frac, Rat(1) - frac);
}

} // namespace padex
