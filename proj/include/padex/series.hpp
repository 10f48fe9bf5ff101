#pragma once

// Laurent polynomials in annulus variables t_1..t_n (n <= 2) with an
// optional power-series base variable s, over PadicInt or CycloElem
// coefficients, and exact rho-Gauss norms at radii rho = p^sigma with
// sigma rational.

#include <array>
#include <map>
#include <optional>
#include <vector>

#include <padex/cyclotomic.hpp>
#include <padex/linalg.hpp>
#include <padex/padic.hpp>

namespace padex {

// log_p of a radius; all norm comparisons reduce to exact rational
// comparisons of <i, sigma> - v(coefficient)
struct Radius {
    Rat sigma;
    Radius() : sigma(0) {}
    explicit Radius(Rat s) : sigma(std::move(s)) {}
};

struct Interval {
    long n = 1;
    std::array<Rat, 2> lo{Rat(0), Rat(0)};
    std::array<Rat, 2> hi{Rat(0), Rat(0)};
    std::array<bool, 2> open_lo{false, false};
    std::array<bool, 2> open_hi{false, false};

    static Interval closed(Rat a, Rat b) {
        Interval I;
        I.n = 1;
        I.lo[0] = std::move(a);
        I.hi[0] = std::move(b);
        return I;
    }

    static Interval closed2(Rat a0, Rat b0, Rat a1, Rat b1) {
        Interval I;
        I.n = 2;
        I.lo = {std::move(a0), std::move(a1)};
        I.hi = {std::move(b0), std::move(b1)};
        return I;
    }

    // the 2^n vertex radii (in log coordinates)
    std::vector<std::array<Rat, 2>> vertices() const {
        std::vector<std::array<Rat, 2>> out;
        long count = 1L << n;
        for (long mask = 0; mask < count; ++mask) {
            std::array<Rat, 2> v{Rat(0), Rat(0)};
            for (long i = 0; i < n; ++i) v[(size_t)i] = (mask >> i & 1) ? hi[(size_t)i] : lo[(size_t)i];
            out.push_back(v);
        }
        return out;
    }

    std::array<Rat, 2> midpoint() const {
        std::array<Rat, 2> v{Rat(0), Rat(0)};
        for (long i = 0; i < n; ++i) v[(size_t)i] = (lo[(size_t)i] + hi[(size_t)i]) / 2;
        return v;
    }
};

struct Mono {
    std::array<int, 2> t{0, 0};
    int s = 0;

    friend bool operator<(const Mono& a, const Mono& b) {
        if (a.t[0] != b.t[0]) return a.t[0] < b.t[0];
        if (a.t[1] != b.t[1]) return a.t[1] < b.t[1];
        return a.s < b.s;
    }
    friend bool operator==(const Mono& a, const Mono& b) {
        return a.t == b.t && a.s == b.s;
    }
};

inline Mono mono_t(int e0, int e1 = 0, int es = 0) { return Mono{{e0, e1}, es}; }

struct Window {
    int D = 1 << 20;    // |t-exponent| bound per direction
    int Ds = 1 << 20;   // s-exponent bound
    bool contains(const Mono& m) const {
        return std::abs(m.t[0]) <= D && std::abs(m.t[1]) <= D && m.s >= 0 && m.s <= Ds;
    }
};

// coefficient trait hooks -----------------------------------------------

inline std::optional<Rat> coeff_valuation(const PadicInt& c) { return c.valuation(); }
inline Rat coeff_zero_bound(const PadicInt& c) { return Rat(c.abs_prec()); }
inline PadicInt coeff_scale_int(const PadicInt& c, long m) {
    return c * PadicInt::from_integer(c.p(), c.prec(), m);
}

inline std::optional<Rat> coeff_valuation(const CycloElem& c) {
    auto v = pi_valuation(c);
    if (!v.finite) return std::nullopt;
    return v.value;
}
inline Rat coeff_zero_bound(const CycloElem& c) { return Rat(c.abs_prec()); }
inline CycloElem coeff_scale_int(const CycloElem& c, long m) { return c.scaled(BigInt(m)); }

enum class NormKind { Finite, NegInfinity, Ambiguous };

struct NormResult {
    NormKind kind = NormKind::NegInfinity;
    Rat value;       // log_p |f|_rho when Finite
    Rat upper_bound; // when Ambiguous or NegInfinity: certified upper bound

    bool finite() const { return kind == NormKind::Finite; }
};

// true when the norm is certified to be <= bound (used for residual checks)
inline bool lognorm_at_most(const NormResult& r, const Rat& bound) {
    switch (r.kind) {
        case NormKind::NegInfinity: return true;
        case NormKind::Finite: return r.value <= bound;
        default: return r.upper_bound <= bound && r.value <= bound;
    }
}

template <class C>
class LaurentPoly {
public:
    LaurentPoly() : n_(1) {}
    LaurentPoly(long n, C proto, Window w = Window{})
        : n_(n), win_(w), proto_(zero_like(proto)) {}

    static LaurentPoly zero(long n, const C& proto, Window w = Window{}) {
        return LaurentPoly(n, proto, w);
    }

    static LaurentPoly constant(long n, const C& c, Window w = Window{}) {
        LaurentPoly f(n, c, w);
        f.add_term(Mono{}, c);
        f.prune_zeros();
        return f;
    }

    static LaurentPoly monomial(long n, const Mono& m, const C& c, Window w = Window{}) {
        LaurentPoly f(n, c, w);
        f.add_term(m, c);
        f.prune_zeros();
        return f;
    }

    long arity() const { return n_; }
    const Window& window() const { return win_; }
    void set_window(Window w) { win_ = w; }
    const std::map<Mono, C>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    const C& proto() const { return proto_; }

    // lower bound on the valuation of discarded mass; nullopt = lossless
    const std::optional<Rat>& tail_bound() const { return tail_; }
    void absorb_tail(const std::optional<Rat>& t) {
        if (!t) return;
        tail_ = tail_ ? std::min(*tail_, *t) : *t;
    }

    void add_term(const Mono& m, const C& c) {
        if (!win_.contains(m)) {
            record_discard(c);
            return;
        }
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            it->second = it->second + c;
        }
    }

    void prune_zeros() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            bool zero;
            if constexpr (std::is_same_v<C, PadicInt>) zero = it->second.is_zero_at_prec();
            else zero = it->second.is_zero();
            if (zero) {
                // pinned only to the coefficient's stated precision
                absorb_tail(coeff_zero_bound(it->second));
                it = terms_.erase(it);
            } else ++it;
        }
    }

    C coeff_or_zero(const Mono& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? proto_ : it->second;
    }

    friend LaurentPoly operator+(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r = a;
        r.absorb_tail(b.tail_);
        for (auto& [m, c] : b.terms_) r.add_term(m, c);
        r.prune_zeros();
        return r;
    }

    friend LaurentPoly operator-(const LaurentPoly& a, const LaurentPoly& b) {
        return a + b.negated();
    }

    LaurentPoly negated() const {
        LaurentPoly r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }

    friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
        LaurentPoly r(a.n_, a.proto_, Window{std::min(a.win_.D, b.win_.D), std::min(a.win_.Ds, b.win_.Ds)});
        r.absorb_tail(a.tail_);
        r.absorb_tail(b.tail_);
        for (auto& [ma, ca] : a.terms_)
            for (auto& [mb, cb] : b.terms_) {
                Mono m{{ma.t[0] + mb.t[0], ma.t[1] + mb.t[1]}, ma.s + mb.s};
                r.add_term(m, ca * cb);
            }
        r.prune_zeros();
        return r;
    }

    LaurentPoly scaled(const C& c) const {
        LaurentPoly r = *this;
        for (auto& [m, cc] : r.terms_) cc = cc * c;
        r.prune_zeros();
        return r;
    }

    LaurentPoly scaled_int(long k) const {
        LaurentPoly r = *this;
        for (auto& [m, cc] : r.terms_) cc = coeff_scale_int(cc, k);
        r.prune_zeros();
        return r;
    }

    LaurentPoly shifted(const Mono& d) const {
        LaurentPoly r(n_, proto_, win_);
        r.tail_ = tail_;
        for (auto& [m, c] : terms_)
            r.add_term(Mono{{m.t[0] + d.t[0], m.t[1] + d.t[1]}, m.s + d.s}, c);
        return r;
    }

    // t_i d/dt_i
    LaurentPoly t_dlog(long dir) const {
        LaurentPoly r(n_, proto_, win_);
        r.tail_ = tail_;
        for (auto& [m, c] : terms_) {
            long e = m.t[(size_t)dir];
            if (e == 0) continue;
            r.add_term(m, coeff_scale_int(c, e));
        }
        r.prune_zeros();
        return r;
    }

    // d/ds
    LaurentPoly d_s() const {
        LaurentPoly r(n_, proto_, win_);
        r.tail_ = tail_;
        for (auto& [m, c] : terms_) {
            if (m.s == 0) continue;
            Mono mm = m;
            mm.s -= 1;
            r.add_term(mm, coeff_scale_int(c, m.s));
        }
        r.prune_zeros();
        return r;
    }

    // substitute s = value (PadicInt); collapses the s grading
    LaurentPoly subst_s(const PadicInt& value) const {
        static_assert(std::is_same_v<C, PadicInt>);
        LaurentPoly r(n_, proto_, win_);
        r.tail_ = tail_;
        for (auto& [m, c] : terms_) {
            C cc = c;
            for (int i = 0; i < m.s; ++i) cc = cc * value;
            Mono mm = m;
            mm.s = 0;
            r.add_term(mm, cc);
        }
        r.prune_zeros();
        return r;
    }

    // constant coefficient in t (still a polynomial in s unless s_zero)
    LaurentPoly t_constant_part() const {
        LaurentPoly r(n_, proto_, win_);
        for (auto& [m, c] : terms_)
            if (m.t[0] == 0 && m.t[1] == 0) r.add_term(m, c);
        return r;
    }

    C coefficient(const Mono& m) const { return coeff_or_zero(m); }

private:
    void record_discard(const C& c) {
        auto v = coeff_valuation(c);
        Rat bound = v ? *v : coeff_zero_bound(c);
        absorb_tail(bound);
    }

    long n_;
    Window win_;
    C proto_;
    std::map<Mono, C> terms_;
    std::optional<Rat> tail_;
};

template <class C>
inline LaurentPoly<C> zero_like(const LaurentPoly<C>& f) {
    return LaurentPoly<C>::zero(f.arity(), f.proto(), f.window());
}

template <class C>
inline LaurentPoly<C> one_like(const LaurentPoly<C>& f) {
    return LaurentPoly<C>::constant(f.arity(), one_like(f.proto()), f.window());
}

// --- Gauss norms -----------------------------------------------------------

// log_p |f|_rho = max over support of (<i, sigma> + e_s * sigma_s - v(coeff))
template <class C>
inline NormResult gauss_lognorm(const LaurentPoly<C>& f,
                                const std::array<Rat, 2>& sigma,
                                const Rat& sigma_s = Rat(0)) {
    NormResult out;
    bool have = false;
    Rat best(0), pending(0);
    bool have_pending = false;
    for (auto& [m, c] : f.terms()) {
        Rat deg = sigma[0] * m.t[0] + sigma[1] * m.t[1] + sigma_s * m.s;
        auto v = coeff_valuation(c);
        if (v) {
            Rat ln = deg - *v;
            if (!have || ln > best) { best = ln; have = true; }
        } else {
            Rat ub = deg - coeff_zero_bound(c);
            if (!have_pending || ub > pending) { pending = ub; have_pending = true; }
        }
    }
    if (f.tail_bound()) {
        // discarded mass: valuation floor without degree information makes
        // only a crude bound; treat like a pending contribution at degree 0
        Rat ub = -*f.tail_bound();
        if (!have_pending || ub > pending) { pending = ub; have_pending = true; }
    }
    if (!have) {
        if (have_pending) {
            out.kind = NormKind::Ambiguous;
            out.value = pending;
            out.upper_bound = pending;
        } else {
            out.kind = NormKind::NegInfinity;
        }
        return out;
    }
    if (have_pending && pending > best) {
        out.kind = NormKind::Ambiguous;
        out.value = best;
        out.upper_bound = pending;
        return out;
    }
    out.kind = NormKind::Finite;
    out.value = best;
    out.upper_bound = best;
    return out;
}

// |f|_I = max over the vertex radii of the closed polysegment
template <class C>
inline NormResult sup_lognorm(const LaurentPoly<C>& f, const Interval& I,
                              const Rat& sigma_s = Rat(0)) {
    NormResult out;
    bool first = true;
    for (auto& v : I.vertices()) {
        NormResult r = gauss_lognorm(f, v, sigma_s);
        if (r.kind == NormKind::Ambiguous) return r;
        if (r.kind == NormKind::NegInfinity) continue;
        if (first || r.value > out.value) out = r;
        first = false;
    }
    if (first) out.kind = NormKind::NegInfinity;
    return out;
}

// --- substitutions ---------------------------------------------------------

// f(t) -> f(zeta t): coefficient of t^i is multiplied by zeta^{<i, e>}
inline LaurentPoly<CycloElem> subst_zeta(const LaurentPoly<PadicInt>& f,
                                         long k, const std::array<long, 2>& zeta_exp) {
    CycloElem proto = CycloElem::zero(f.proto().p(), k, f.proto().prec());
    LaurentPoly<CycloElem> r(f.arity(), proto, f.window());
    r.absorb_tail(f.tail_bound());
    for (auto& [m, c] : f.terms()) {
        BigInt e = BigInt(zeta_exp[0]) * m.t[0] + BigInt(zeta_exp[1]) * m.t[1];
        CycloElem cc = CycloElem::from_padic(c, k).zeta_shift(mod_floor(e, pow_int(c.p(), k)));
        r.add_term(m, cc);
    }
    return r;
}

inline LaurentPoly<CycloElem> subst_zeta(const LaurentPoly<CycloElem>& f,
                                         const std::array<long, 2>& zeta_exp) {
    LaurentPoly<CycloElem> r(f.arity(), f.proto(), f.window());
    r.absorb_tail(f.tail_bound());
    long p = f.proto().p(), k = f.proto().level();
    for (auto& [m, c] : f.terms()) {
        BigInt e = BigInt(zeta_exp[0]) * m.t[0] + BigInt(zeta_exp[1]) * m.t[1];
        r.add_term(m, c.zeta_shift(mod_floor(e, pow_int(p, k))));
    }
    return r;
}

// Isometric monomial twist: t_0 -> t_0 (w t_n^l)^j with t_n the last
// variable fixed.  Requires |w| p^{sigma_n l} = 1 at the working radius.
inline LaurentPoly<PadicInt> sigma_twist(const LaurentPoly<PadicInt>& f, long j, long l,
                                         const PadicInt& w, const std::array<Rat, 2>& sigma) {
    if (f.arity() < 2) {
        if (l != 0) throw std::invalid_argument("sigma_twist: needs two variables");
        return f;
    }
    // isometry precondition
    auto vw = w.valuation();
    if (l != 0) {
        if (!vw) throw PrecisionError("sigma_twist: twist unit has ambiguous valuation");
        if (*vw != Rat(l) * sigma[1])
            throw std::invalid_argument("sigma_twist: non-isometric twist");
    }
    LaurentPoly<PadicInt> r(f.arity(), f.proto(), Window{});
    r.absorb_tail(f.tail_bound());
    for (auto& [m, c] : f.terms()) {
        long e = (long)m.t[0] * j;   // exponent of (w t_n^l) picked up by t_0^{a}
        Mono mm = m;
        mm.t[1] += (int)(l * e);
        PadicInt cc = c;
        if (e >= 0)
            for (long i = 0; i < e; ++i) cc = cc * w;
        else {
            PadicInt wi = w.inverse();
            for (long i = 0; i < -e; ++i) cc = cc * wi;
        }
        r.add_term(mm, cc);
    }
    r.prune_zeros();
    return r;
}

} // namespace padex
