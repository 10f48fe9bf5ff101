#pragma once

// Arithmetic in Z[zeta_{p^k}] mod (Phi_{p^k}(x), p^N): powers of the root
// of unity with p-adic-integer exponents, pi-adic valuations with
// pi = zeta - 1, and the averaged root-of-unity sums behind exponents.

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <padex/linalg.hpp>
#include <padex/padic.hpp>

namespace padex {

inline long euler_phi_pk(long p, long k) {
    if (k == 0) return 1;
    return (long)(pow_int(p, k - 1).convert_to<long>() * (p - 1));
}

// Element p^{-voff} * (sum c_i zeta^i) of Q_p(zeta_{p^k}) with the unit part
// known mod p^prec; voff = 0 for integral elements.
class CycloElem {
public:
    CycloElem() : p_(2), k_(1), prec_(1), voff_(0), c_(1, BigInt(0)) {}

    CycloElem(long p, long k, long prec, long voff = 0)
        : p_(p), k_(k), prec_(prec), voff_(voff), c_((size_t)euler_phi_pk(p, k), BigInt(0)) {}

    static CycloElem zero(long p, long k, long prec) { return CycloElem(p, k, prec); }

    static CycloElem from_scalar(long p, long k, long prec, const BigInt& s) {
        CycloElem e(p, k, prec);
        e.c_[0] = mod_floor(s, e.modulus());
        return e;
    }

    static CycloElem from_padic(const PadicInt& x, long k) {
        CycloElem e(x.p(), k, x.prec(), x.voff());
        e.c_[0] = x.residue();
        e.canonicalize();
        return e;
    }

    PadicInt scalar_as_padic() const {
        auto s = as_scalar();
        if (!s) throw std::domain_error("scalar_as_padic: element not rational");
        return PadicInt(p_, prec_, *s, voff_);
    }

    // zeta^e at level k, exponent reduced mod p^k
    static CycloElem zeta_power(long p, long k, long prec, const BigInt& e) {
        CycloElem r(p, k, prec);
        long pk = pow_int(p, k).convert_to<long>();
        long ee = mod_floor(e, pk).convert_to<long>();
        r.add_power(ee, BigInt(1));
        return r;
    }

    long p() const { return p_; }
    long level() const { return k_; }
    long prec() const { return prec_; }
    long voff() const { return voff_; }
    long abs_prec() const { return prec_ - voff_; }
    long phi() const { return (long)c_.size(); }
    BigInt modulus() const { return pow_int(p_, prec_); }
    const std::vector<BigInt>& coords() const { return c_; }

    bool is_zero() const {
        for (auto& x : c_) if (x != 0) return false;
        return true;
    }

    // adds a * zeta^e with e already reduced to [0, p^k), folding by Phi
    void add_power(long e, const BigInt& a) {
        long phi_ = phi();
        BigInt m = modulus();
        if (e < phi_) {
            c_[(size_t)e] = mod_floor(c_[(size_t)e] + a, m);
            return;
        }
        // zeta^{phi+f} = -sum_{i=0}^{p-2} zeta^{f + i p^{k-1}}
        long f = e - phi_;
        long step = pow_int(p_, k_ - 1).convert_to<long>();
        for (long i = 0; i <= p_ - 2; ++i) {
            long idx = f + i * step;
            c_[(size_t)idx] = mod_floor(c_[(size_t)idx] - a, m);
        }
    }

    friend CycloElem operator+(const CycloElem& a, const CycloElem& b) {
        a.check(b);
        long voff = std::max(a.voff_, b.voff_);
        long abs = std::min(a.abs_prec(), b.abs_prec());
        CycloElem r(a.p_, a.k_, abs + voff, voff);
        BigInt m = r.modulus();
        BigInt fa = pow_int(a.p_, voff - a.voff_), fb = pow_int(a.p_, voff - b.voff_);
        for (size_t i = 0; i < r.c_.size(); ++i)
            r.c_[i] = mod_floor(a.c_[i] * fa + b.c_[i] * fb, m);
        r.canonicalize();
        return r;
    }

    friend CycloElem operator-(const CycloElem& a, const CycloElem& b) { return a + (-b); }

    CycloElem operator-() const {
        CycloElem r(p_, k_, prec_, voff_);
        BigInt m = r.modulus();
        for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = mod_floor(-c_[i], m);
        return r;
    }

    friend CycloElem operator*(const CycloElem& a, const CycloElem& b) {
        a.check(b);
        CycloElem r(a.p_, a.k_, std::min(a.prec_, b.prec_), a.voff_ + b.voff_);
        BigInt m = r.modulus();
        // convolution with on-the-fly reduction zeta^{p^k} = 1, then Phi fold
        long pk = pow_int(a.p_, a.k_).convert_to<long>();
        std::vector<BigInt> conv((size_t)pk, BigInt(0));
        long phi_ = a.phi();
        for (long i = 0; i < phi_; ++i) {
            if (a.c_[(size_t)i] == 0) continue;
            for (long j = 0; j < phi_; ++j) {
                if (b.c_[(size_t)j] == 0) continue;
                long e = i + j;
                if (e >= pk) e -= pk;
                conv[(size_t)e] = mod_floor(conv[(size_t)e] + a.c_[(size_t)i] * b.c_[(size_t)j], m);
            }
        }
        for (long e = 0; e < pk; ++e)
            if (conv[(size_t)e] != 0) r.add_power(e, conv[(size_t)e]);
        r.canonicalize();
        return r;
    }

    CycloElem scaled(const BigInt& s) const {
        CycloElem r(p_, k_, prec_, voff_);
        BigInt m = r.modulus();
        for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = mod_floor(c_[i] * s, m);
        r.canonicalize();
        return r;
    }

    CycloElem scaled(const PadicInt& s) const {
        CycloElem r(p_, k_, std::min(prec_, s.prec()), voff_ + s.voff());
        BigInt m = r.modulus();
        for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = mod_floor(c_[i] * s.residue(), m);
        r.canonicalize();
        return r;
    }

    // multiply by zeta^e (sparse)
    CycloElem zeta_shift(const BigInt& e) const {
        long pk = pow_int(p_, k_).convert_to<long>();
        long ee = mod_floor(e, pk).convert_to<long>();
        CycloElem r(p_, k_, prec_, voff_);
        for (long i = 0; i < phi(); ++i) {
            if (c_[(size_t)i] == 0) continue;
            long idx = i + ee;
            if (idx >= pk) idx -= pk;
            r.add_power(idx, c_[(size_t)i]);
        }
        return r;
    }

    // Galois action zeta -> zeta^u for u prime to p
    CycloElem galois(long u) const {
        long pk = pow_int(p_, k_).convert_to<long>();
        long uu = mod_floor(BigInt(u), pk).convert_to<long>();
        CycloElem r(p_, k_, prec_, voff_);
        for (long i = 0; i < phi(); ++i) {
            if (c_[(size_t)i] == 0) continue;
            r.add_power((long)(((int64_t)i * uu) % pk), c_[(size_t)i]);
        }
        return r;
    }

    // unit-part scalar extraction for Galois-stable elements: all
    // non-constant coordinates must vanish at the stated precision
    std::optional<BigInt> as_scalar() const {
        for (size_t i = 1; i < c_.size(); ++i)
            if (c_[i] != 0) return std::nullopt;
        return c_[0];
    }

    // exact division by p^e, with precision drop on the integral part
    CycloElem div_exact_p(long e) const {
        if (e == 0) return *this;
        if (e < 0) return mul_p(-e);
        if (prec_ - e < 1) throw PrecisionError("CycloElem::div_exact_p: precision exhausted");
        BigInt pe = pow_int(p_, e);
        CycloElem r(p_, k_, prec_ - e, voff_);
        for (size_t i = 0; i < c_.size(); ++i) {
            if (c_[i] % pe != 0) throw PrecisionError("CycloElem::div_exact_p: not divisible");
            r.c_[i] = c_[i] / pe;
        }
        return r;
    }

    CycloElem mul_p(long e) const {
        if (e <= 0) return e == 0 ? *this : div_exact_p(-e);
        if (voff_ >= e) { CycloElem r = *this; r.voff_ -= e; return r; }
        long rest = e - voff_;
        CycloElem r(p_, k_, prec_ + rest, 0);
        BigInt f = pow_int(p_, rest), m = r.modulus();
        for (size_t i = 0; i < c_.size(); ++i) r.c_[i] = mod_floor(c_[i] * f, m);
        return r;
    }

    bool divisible_by_p(long e) const {
        BigInt pe = pow_int(p_, e);
        for (auto& x : c_) if (x % pe != 0) return false;
        return true;
    }

    // minimal p-valuation over unit-part coordinates; nullopt when zero
    std::optional<long> min_coord_valuation() const {
        std::optional<long> v;
        for (auto& x : c_) {
            if (x == 0) continue;
            long w = val_p(x, p_);
            if (!v || w < *v) v = w;
        }
        return v;
    }

private:
    void check(const CycloElem& o) const {
        if (p_ != o.p_ || k_ != o.k_)
            throw std::invalid_argument("CycloElem: mismatched cyclotomic levels");
    }

    void canonicalize() {
        while (voff_ > 0 && prec_ > 1) {
            bool all_div = true;
            bool all_zero = true;
            for (auto& x : c_) {
                if (x != 0) all_zero = false;
                if (x % p_ != 0) { all_div = false; break; }
            }
            if (all_zero) {
                long abs = prec_ - voff_;
                if (abs >= 1) { prec_ = abs; voff_ = 0; }
                return;
            }
            if (!all_div) return;
            for (auto& x : c_) x /= p_;
            --voff_;
            --prec_;
        }
    }

    long p_, k_, prec_, voff_;
    std::vector<BigInt> c_;   // unit-part coordinates in basis 1, zeta, ..., zeta^{phi-1}
};

inline CycloElem zero_like(const CycloElem& s) { return CycloElem::zero(s.p(), s.level(), s.prec()); }
inline CycloElem one_like(const CycloElem& s) { return CycloElem::from_scalar(s.p(), s.level(), s.prec(), 1); }

// zeta^e for a p-adic integer exponent: only the residue mod p^k matters
inline CycloElem zeta_pow(const PadicInt& e, long k, long prec) {
    return CycloElem::zeta_power(e.p(), k, prec, e.residue_mod(k));
}

inline CycloElem zeta_pow(long p, long k, long prec, const BigInt& e) {
    return CycloElem::zeta_power(p, k, prec, mod_floor(e, pow_int(p, k)));
}

// --- pi-adic structure ----------------------------------------------------

// Change of basis between the power basis 1,zeta,..,zeta^{phi-1} and the
// uniformizer basis 1,pi,..,pi^{phi-1} with pi = zeta-1; both triangular
// binomial transforms, exact over Z.
struct PiBasis {
    long p, k, phi;
    // zeta^j = sum_i binom(j,i) pi^i ; pi^j = sum_i (-1)^{j-i} binom(j,i) zeta^i
    std::vector<std::vector<BigInt>> zeta_to_pi, pi_to_zeta;

    PiBasis(long p_, long k_) : p(p_), k(k_), phi(euler_phi_pk(p_, k_)) {
        zeta_to_pi.assign((size_t)phi, std::vector<BigInt>((size_t)phi, BigInt(0)));
        pi_to_zeta.assign((size_t)phi, std::vector<BigInt>((size_t)phi, BigInt(0)));
        std::vector<std::vector<BigInt>> binom((size_t)phi, std::vector<BigInt>((size_t)phi, BigInt(0)));
        for (long j = 0; j < phi; ++j) {
            binom[(size_t)j][0] = 1;
            for (long i = 1; i <= j; ++i)
                binom[(size_t)j][(size_t)i] =
                    binom[(size_t)(j - 1)][(size_t)(i - 1)] +
                    ((i <= j - 1) ? binom[(size_t)(j - 1)][(size_t)i] : BigInt(0));
        }
        for (long j = 0; j < phi; ++j)
            for (long i = 0; i <= j; ++i) {
                zeta_to_pi[(size_t)j][(size_t)i] = binom[(size_t)j][(size_t)i];
                BigInt b = binom[(size_t)j][(size_t)i];
                pi_to_zeta[(size_t)j][(size_t)i] = ((j - i) % 2 == 0) ? b : -b;
            }
    }
};

inline const PiBasis& pi_basis(long p, long k) {
    static std::map<std::pair<long, long>, PiBasis> cache;
    auto key = std::make_pair(p, k);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, PiBasis(p, k)).first;
    return it->second;
}

// coordinates of x in the pi-power basis, mod p^prec
inline std::vector<BigInt> pi_coords(const CycloElem& x) {
    const PiBasis& B = pi_basis(x.p(), x.level());
    BigInt m = x.modulus();
    std::vector<BigInt> out((size_t)B.phi, BigInt(0));
    for (long j = 0; j < B.phi; ++j) {
        const BigInt& cj = x.coords()[(size_t)j];
        if (cj == 0) continue;
        for (long i = 0; i <= j; ++i)
            out[(size_t)i] = mod_floor(out[(size_t)i] + cj * B.zeta_to_pi[(size_t)j][(size_t)i], m);
    }
    return out;
}

inline CycloElem from_pi_coords(long p, long k, long prec, const std::vector<BigInt>& pc) {
    const PiBasis& B = pi_basis(p, k);
    CycloElem x(p, k, prec);
    BigInt m = x.modulus();
    std::vector<BigInt> zc((size_t)B.phi, BigInt(0));
    for (long j = 0; j < B.phi; ++j) {
        if (pc[(size_t)j] == 0) continue;
        for (long i = 0; i <= j; ++i)
            zc[(size_t)i] = mod_floor(zc[(size_t)i] + pc[(size_t)j] * B.pi_to_zeta[(size_t)j][(size_t)i], m);
    }
    CycloElem r(p, k, prec);
    for (long i = 0; i < B.phi; ++i)
        if (zc[(size_t)i] != 0) r.add_power(i, zc[(size_t)i]);
    return r;
}

// the unit pi^phi / p, needed for exact division by pi
inline CycloElem pi_phi_over_p(long p, long k, long prec) {
    CycloElem pi = CycloElem::zeta_power(p, k, prec + 1, 1) -
                   CycloElem::from_scalar(p, k, prec + 1, 1);
    CycloElem acc = CycloElem::from_scalar(p, k, prec + 1, 1);
    long phi_ = euler_phi_pk(p, k);
    for (long i = 0; i < phi_; ++i) acc = acc * pi;
    return acc.div_exact_p(1);
}

// ring inverse of a pi-valuation-0 element: solves u*y = 1 on the unit
// part by exact elimination mod p^prec, then restores the p-power offset
inline CycloElem cyclo_inverse(const CycloElem& u) {
    long phi_ = u.phi();
    BigInt m = u.modulus();
    // multiplication matrix of u in the power basis
    std::vector<std::vector<BigInt>> M((size_t)phi_, std::vector<BigInt>((size_t)phi_ + 1, BigInt(0)));
    for (long j = 0; j < phi_; ++j) {
        CycloElem col = u.zeta_shift(j);
        for (long i = 0; i < phi_; ++i) M[(size_t)i][(size_t)j] = col.coords()[(size_t)i];
    }
    M[0][(size_t)phi_] = 1; // rhs e_0
    // elimination with unit pivots
    std::vector<long> where((size_t)phi_, -1);
    long row = 0;
    for (long col = 0; col < phi_ && row < phi_; ++col) {
        long pivot = -1;
        for (long i = row; i < phi_; ++i)
            if (M[(size_t)i][(size_t)col] % u.p() != 0) { pivot = i; break; }
        if (pivot < 0) continue;
        std::swap(M[(size_t)pivot], M[(size_t)row]);
        BigInt inv = mod_inverse(M[(size_t)row][(size_t)col], m);
        for (long j = col; j <= phi_; ++j) M[(size_t)row][(size_t)j] = mod_floor(M[(size_t)row][(size_t)j] * inv, m);
        for (long i = 0; i < phi_; ++i) {
            if (i == row) continue;
            BigInt f = M[(size_t)i][(size_t)col];
            if (f == 0) continue;
            for (long j = col; j <= phi_; ++j)
                M[(size_t)i][(size_t)j] = mod_floor(M[(size_t)i][(size_t)j] - f * M[(size_t)row][(size_t)j], m);
        }
        where[(size_t)col] = row;
        ++row;
    }
    CycloElem out(u.p(), u.level(), u.prec());
    for (long col = 0; col < phi_; ++col) {
        if (where[(size_t)col] < 0) throw PrecisionError("cyclo_inverse: not a unit at precision");
        out.add_power(col, M[(size_t)where[(size_t)col]][(size_t)phi_]);
    }
    // (p^{-v} U)^{-1} = p^{v} U^{-1}
    return out.mul_p(u.voff());
}

struct PiValuation {
    bool finite = true;
    Rat value;            // in (1/phi) Z, normalized so that v(p) = 1
    long reliable_steps;  // divisions performed before precision ran out
};

// pi-adic valuation by repeated exact division by pi = zeta - 1 in the
// uniformizer basis.  Division by pi: c_0 must be divisible by p; then
// x/pi = sum_{i>=1} c_i pi^{i-1} + (c_0/p) * (pi^phi/p)^{-1} ... no:
// c_0/pi = (c_0/p)*(p/pi) = (c_0/p) * u^{-1} * pi^{phi-1} with u = pi^phi/p.
inline PiValuation pi_valuation(const CycloElem& x0) {
    PiValuation out;
    long p = x0.p(), k = x0.level();
    long phi_ = x0.phi();
    if (x0.is_zero()) {
        if (x0.prec() < 1)
            throw PrecisionError("pi_valuation: valuation ambiguous, zero at precision");
        out.finite = false;
        out.value = Rat(x0.abs_prec()); // lower bound only
        out.reliable_steps = 0;
        return out;
    }
    // p/pi = u^{-1} * pi^{phi-1} with u = pi^phi / p, precomputed once
    CycloElem uinv = cyclo_inverse(pi_phi_over_p(p, k, x0.prec()));
    CycloElem pi_elt = CycloElem::zeta_power(p, k, x0.prec(), 1) -
                       CycloElem::from_scalar(p, k, x0.prec(), 1);
    CycloElem p_over_pi = uinv;
    for (long i = 0; i < phi_ - 1; ++i) p_over_pi = p_over_pi * pi_elt;

    CycloElem x = x0;
    long w = 0;
    long budget = phi_ * (x0.prec() - 1); // stay within honest precision
    while (w < budget) {
        auto pc = pi_coords(x);
        bool zero = true;
        for (auto& c : pc) if (c != 0) { zero = false; break; }
        if (zero) { out.finite = false; out.value = Rat(x.abs_prec()); out.reliable_steps = w; return out; }
        if (pc[0] % p != 0) break; // unit part reached: valuation found
        // x/pi = sum_{i>=1} pc_i pi^{i-1} + (pc_0/p) * (p/pi)
        std::vector<BigInt> q((size_t)phi_, BigInt(0));
        for (long i = 1; i < phi_; ++i) q[(size_t)(i - 1)] = pc[(size_t)i];
        CycloElem next = from_pi_coords(p, k, x.prec(), q);
        if (pc[0] != 0)
            next = next + p_over_pi.scaled(pc[0] / p);
        x = next;
        ++w;
    }
    out.finite = true;
    out.value = Rat(w, phi_) - x0.voff();
    out.reliable_steps = w;
    return out;
}

// --- root-of-unity averaging ----------------------------------------------

struct MuSumResult {
    Matrix<CycloElem> total;        // exact sum before division by p^{nk}
    Matrix<CycloElem> quotient;     // total / p^{nk} where divisible, 0 elsewhere
    bool divisible = true;
    std::vector<std::pair<long, long>> failed_entries;
};

// Exact sum over all p^{kn} tuples zeta in mu_{p^k}^n of f(zeta); the
// divisibility of each entry by p^{nk} is checked and reported, entries
// that fail are recorded as zero contributions.
inline MuSumResult mu_sum(const std::function<Matrix<CycloElem>(const std::vector<long>&)>& f,
                          long p, long k, long n, long prec) {
    if (n < 1 || n > 2) throw std::invalid_argument("mu_sum: n must be 1 or 2");
    long pk = pow_int(p, k).convert_to<long>();
    std::vector<long> e((size_t)n, 0);
    Matrix<CycloElem> acc;
    bool first = true;
    long count = 1;
    for (long i = 0; i < n; ++i) count *= pk;
    for (long idx = 0; idx < count; ++idx) {
        long t = idx;
        for (long i = 0; i < n; ++i) { e[(size_t)i] = t % pk; t /= pk; }
        Matrix<CycloElem> m = f(e);
        if (first) { acc = m; first = false; }
        else acc = acc + m;
    }
    MuSumResult res;
    res.total = acc;
    res.quotient = acc;
    long nk = n * k;
    for (long i = 0; i < acc.rows(); ++i)
        for (long j = 0; j < acc.cols(); ++j) {
            if (acc(i, j).divisible_by_p(nk)) {
                res.quotient(i, j) = acc(i, j).div_exact_p(nk);
            } else {
                res.divisible = false;
                res.failed_entries.emplace_back(i, j);
                res.quotient(i, j) = zero_like(acc(i, j));
            }
        }
    return res;
}

} // namespace padex
