#pragma once

// Bidistinguished detection, Weierstrass-type factorization on annuli, and
// Birkhoff splitting H = s^N L M over the punctured-disc coefficient rings.
// The single Laurent variable of an arity-1 polynomial plays the role of t
// (or of s for the Birkhoff routines).

#include <string>
#include <variant>
#include <vector>

#include <padex/linalg.hpp>
#include <padex/series.hpp>

namespace padex {

struct FactorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using PPoly = LaurentPoly<PadicInt>;

struct BidistCertificate {
    long d_lo = 0, d_hi = 0;
    Rat lognorm;                                // |f|_rho in log form
    std::vector<std::pair<long, Rat>> margins;  // strict gaps outside [d_lo, d_hi]
};

struct BidistResult {
    bool ok = false;
    BidistCertificate cert;
    long violating_index = 0;
    std::string reason;
};

namespace detail {

// per-degree log-norm profile in the pivot variable
template <class C>
std::map<long, Rat> degree_profile(const LaurentPoly<C>& f, const std::array<Rat, 2>& sigma,
                                   const Rat& sigma_s, long pivot) {
    std::map<long, Rat> prof;
    for (auto& [m, c] : f.terms()) {
        auto v = coeff_valuation(c);
        if (!v) continue;
        Rat ln = -*v + sigma_s * m.s;
        for (long dir = 0; dir < 2; ++dir)
            if (dir != pivot) ln += sigma[(size_t)dir] * m.t[(size_t)dir];
        long d = m.t[(size_t)pivot];
        Rat full = ln + sigma[(size_t)pivot] * d;
        auto it = prof.find(d);
        if (it == prof.end() || full > it->second) prof[d] = full;
    }
    return prof;
}

// a coefficient slice is a unit when one monomial strictly dominates
template <class C>
bool slice_is_unit(const LaurentPoly<C>& f, long pivot, long d,
                   const std::array<Rat, 2>& sigma, const Rat& sigma_s) {
    long count = 0;
    Rat best(0), second(0);
    bool have_best = false, have_second = false;
    for (auto& [m, c] : f.terms()) {
        if (m.t[(size_t)pivot] != d) continue;
        ++count;
        auto v = coeff_valuation(c);
        if (!v) return false;
        Rat ln = -*v + sigma_s * m.s;
        for (long dir = 0; dir < 2; ++dir)
            if (dir != pivot) ln += sigma[(size_t)dir] * m.t[(size_t)dir];
        if (!have_best || ln > best) {
            if (have_best) { second = best; have_second = true; }
            best = ln;
            have_best = true;
        } else if (!have_second || ln > second) {
            second = ln;
            have_second = true;
        }
    }
    if (count == 0) return false;
    if (count == 1) return true;
    return best > second;
}

} // namespace detail

// Certificate (d_lo, d_hi): slices at the extreme max-attaining degrees are
// units, and every degree strictly outside loses by a positive margin.
template <class C>
BidistResult detect_bidistinguished(const LaurentPoly<C>& f, const std::array<Rat, 2>& sigma,
                                    const Rat& sigma_s = Rat(0), long pivot = 0) {
    BidistResult out;
    auto prof = detail::degree_profile(f, sigma, sigma_s, pivot);
    if (prof.empty()) {
        out.reason = "zero at working precision";
        return out;
    }
    Rat maxv = prof.begin()->second;
    for (auto& [d, v] : prof) maxv = std::max(maxv, v);
    long d_lo = 0, d_hi = 0;
    bool first = true;
    for (auto& [d, v] : prof)
        if (v == maxv) {
            if (first) { d_lo = d; first = false; }
            d_hi = d;
        }
    // strict dominance outside [d_lo, d_hi]
    for (auto& [d, v] : prof) {
        if (d >= d_lo && d <= d_hi) continue;
        if (v >= maxv) {
            out.violating_index = d;
            out.reason = "no strict dominance at degree " + std::to_string(d);
            return out;
        }
        out.cert.margins.emplace_back(d, maxv - v);
    }
    if (!detail::slice_is_unit(f, pivot, d_lo, sigma, sigma_s)) {
        out.violating_index = d_lo;
        out.reason = "lower extreme coefficient is not a unit";
        return out;
    }
    if (!detail::slice_is_unit(f, pivot, d_hi, sigma, sigma_s)) {
        out.violating_index = d_hi;
        out.reason = "upper extreme coefficient is not a unit";
        return out;
    }
    out.ok = true;
    out.cert.d_lo = d_lo;
    out.cert.d_hi = d_hi;
    out.cert.lognorm = maxv;
    return out;
}

// sigma_j twist search: j = 3L+1, 3L+2, ... until the twisted element is
// bidistinguished in the last variable; a batch shares one j.
struct TwistPlan {
    long j = 0, l = 0;
    PadicInt w;
};

inline std::pair<TwistPlan, BidistResult> make_bidistinguished(const PPoly& f,
                                                               const std::array<Rat, 2>& sigma) {
    if (f.arity() == 1) {
        auto det = detect_bidistinguished(f, sigma);
        return {TwistPlan{0, 0, PadicInt::one(f.proto().p(), f.proto().prec())}, det};
    }
    long L = 1;
    for (auto& [m, c] : f.terms())
        L = std::max({L, (long)std::abs(m.t[0]), (long)std::abs(m.t[1])});
    long l = (long)denominator(sigma[1]).convert_to<long>();
    long vw = (long)(Rat(l) * sigma[1]).convert_to<long>();
    long p = f.proto().p();
    PadicInt w = PadicInt::one(p, f.proto().prec()).mul_p(vw);
    for (long j = 3 * L + 1; j <= 3 * L + 16; ++j) {
        PPoly tw = sigma_twist(f, j, l, w, sigma);
        auto det = detect_bidistinguished(tw, sigma, Rat(0), 1);
        if (det.ok) return {TwistPlan{j, l, w}, det};
    }
    BidistResult fail;
    fail.reason = "no twist in the search range produced a bidistinguished element";
    return {TwistPlan{}, fail};
}

// --- splitting helpers ------------------------------------------------------

namespace detail {

inline PPoly part_nonpos(const PPoly& f) {
    PPoly r = zero_like(f);
    r.absorb_tail(f.tail_bound());
    for (auto& [m, c] : f.terms())
        if (m.t[0] <= 0) r.add_term(m, c);
    return r;
}

inline PPoly part_pos(const PPoly& f) {
    PPoly r = zero_like(f);
    for (auto& [m, c] : f.terms())
        if (m.t[0] > 0) r.add_term(m, c);
    return r;
}

inline PPoly part_neg(const PPoly& f) {
    PPoly r = zero_like(f);
    r.absorb_tail(f.tail_bound());
    for (auto& [m, c] : f.terms())
        if (m.t[0] < 0) r.add_term(m, c);
    return r;
}

inline PPoly part_nonneg(const PPoly& f) {
    PPoly r = zero_like(f);
    for (auto& [m, c] : f.terms())
        if (m.t[0] >= 0) r.add_term(m, c);
    return r;
}

// (1 + x)^{-1} with x supported in strictly positive (dir=+1) or strictly
// negative (dir=-1) degrees; exact coefficientwise Neumann series within
// the degree window W
inline PPoly invert_one_plus(const PPoly& x, long W, int dir) {
    PPoly acc = one_like(x);
    PPoly pw = x;
    long guard = 0;
    while (!pw.terms().empty() && guard <= W + 1) {
        acc = (guard % 2 == 0) ? acc - pw : acc + pw;
        pw = pw * x;
        // drop terms beyond the window to terminate
        PPoly trimmed = zero_like(pw);
        trimmed.absorb_tail(pw.tail_bound());
        for (auto& [m, c] : pw.terms())
            if ((dir > 0 && m.t[0] <= W) || (dir < 0 && m.t[0] >= -W)) trimmed.add_term(m, c);
        pw = trimmed;
        ++guard;
    }
    return acc;
}

inline Window meet(Window a, long W) {
    return Window{(int)std::min<long>(a.D, W), a.Ds};
}

} // namespace detail

struct WeierstrassFactors {
    PPoly g;                 // 1 + positive-degree part, |g - 1| < 1
    PPoly h;                 // nonpositive degrees, |h| = |h_0| = 1
    long iterations = 0;
    Rat residual_bound;      // log-norm bound on f - f_{d_hi} t^{d_hi} g h
};

// Unique factorization f = f_{d_hi} t^{d_hi} g h of a bidistinguished
// element.  Normalize F = f / (f_{d_hi} t^{d_hi}); F is supported in
// [-S_lo, S_hi], and the true factors are then polynomial boxes
// h in degrees [-S_lo, 0], g in [0, S_hi] with g_0 = 1 (the factorization
// equation closes on the box: supp(g h) stays inside supp-range of F).
// Newton steps split the additive correction into the plus part (into g)
// and the nonpositive part (into h); the linearized solve is a square
// exact p-adic system, and each round squares the residual norm.
inline WeierstrassFactors weierstrass_factor(const PPoly& f, const std::array<Rat, 2>& sigma,
                                             const BidistCertificate& cert,
                                             long target_prec = -1,
                                             const PPoly* initial_h = nullptr) {
    if (f.arity() != 1)
        throw std::invalid_argument("weierstrass_factor: univariate pivot expected");
    long p = f.proto().p();
    long N = target_prec > 0 ? target_prec : f.proto().prec();
    (void)p;

    PadicInt lead = f.coefficient(Mono{{(int)cert.d_hi, 0}, 0});
    PadicInt lead_inv = lead.inverse();
    PPoly F = f.shifted(mono_t((int)-cert.d_hi)).scaled(lead_inv);

    long S_lo = 0, S_hi = 0;
    for (auto& [m, c] : F.terms()) {
        S_lo = std::max(S_lo, (long)-m.t[0]);
        S_hi = std::max(S_hi, (long)m.t[0]);
    }

    PPoly g = one_like(F);
    PPoly h = initial_h ? *initial_h : detail::part_nonpos(F);

    auto box_trim = [&](const PPoly& x, long lo, long hi) {
        PPoly r = zero_like(x);
        for (auto& [m, c] : x.terms())
            if (m.t[0] >= lo && m.t[0] <= hi) r.add_term(m, c);
        return r;
    };
    h = box_trim(h, -S_lo, 0);

    long n_unknowns = S_lo + S_hi + 1;   // h_{-S_lo..0} and g_{1..S_hi}
    Rat target = -Rat(N);
    WeierstrassFactors out;
    bool converged = false;
    for (long iter = 0; iter < 40; ++iter) {
        out.iterations = iter + 1;
        PPoly r = F - g * h;
        auto nr = gauss_lognorm(r, sigma);
        if (nr.kind == NormKind::NegInfinity || lognorm_at_most(nr, target)) {
            converged = true;
            break;
        }
        // linearized equation: delta_g * h + g * delta_h = r on the box
        Matrix<PadicInt> J(n_unknowns, n_unknowns, zero_like(F.proto()));
        auto row_of = [&](long d) { return d + S_lo; };
        for (long e = -S_lo; e <= 0; ++e) {          // delta_h columns
            long col = e + S_lo;
            for (auto& [m, c] : g.terms()) {
                long d = m.t[0] + e;
                if (d < -S_lo || d > S_hi) continue;
                J(row_of(d), col) = J(row_of(d), col) + c;
            }
        }
        for (long j = 1; j <= S_hi; ++j) {           // delta_g columns
            long col = S_lo + j;
            for (auto& [m, c] : h.terms()) {
                long d = m.t[0] + j;
                if (d < -S_lo || d > S_hi) continue;
                J(row_of(d), col) = J(row_of(d), col) + c;
            }
        }
        Matrix<PadicInt> Jinv;
        try {
            Jinv = padic_inverse(J);
        } catch (const PrecisionError&) {
            throw FactorError("weierstrass_factor: linearized system singular; "
                              "contraction margin consumed");
        }
        std::vector<PadicInt> rhs((size_t)n_unknowns, zero_like(F.proto()));
        for (auto& [m, c] : r.terms())
            if (m.t[0] >= -S_lo && m.t[0] <= S_hi) rhs[(size_t)row_of(m.t[0])] = c;
        for (long i = 0; i < n_unknowns; ++i) {
            PadicInt delta = zero_like(F.proto());
            for (long j = 0; j < n_unknowns; ++j) delta = delta + Jinv(i, j) * rhs[(size_t)j];
            if (i <= S_lo) h.add_term(mono_t((int)(i - S_lo)), delta);
            else g.add_term(mono_t((int)(i - S_lo)), delta);
        }
        g.prune_zeros();
        h.prune_zeros();
    }
    if (!converged)
        throw FactorError("weierstrass_factor: no convergence within iteration cap");

    // report the honest reconstruction residual
    PPoly recon = (g * h).shifted(mono_t((int)cert.d_hi)).scaled(lead);
    PPoly resid = f - recon;
    auto nr = gauss_lognorm(resid, sigma);
    out.residual_bound = nr.kind == NormKind::NegInfinity ? -Rat(N + 1)
                        : (nr.finite() ? nr.value : nr.upper_bound);
    out.g = g;
    out.h = h;
    return out;
}

// Monic-polynomial form (post-processing): clears h into a polynomial in
// the pivot variable times a unit; f = P * u with P monic of degree
// deg(t^{D_h} h) at the working precision.
struct MonicForm {
    PPoly P;   // monic polynomial in t
    PPoly u;   // unit: f = P u within the residual certificate
};

inline MonicForm monic_form(const PPoly& f, const BidistCertificate& cert,
                            const WeierstrassFactors& wf) {
    long Dh = 0;
    for (auto& [m, c] : wf.h.terms()) Dh = std::max(Dh, (long)-m.t[0]);
    PadicInt h0 = wf.h.coefficient(Mono{});
    MonicForm out;
    out.P = wf.h.shifted(mono_t((int)Dh)).scaled(h0.inverse());
    PadicInt lead = f.coefficient(Mono{{(int)cert.d_hi, 0}, 0});
    out.u = wf.g.shifted(mono_t((int)(cert.d_hi - Dh))).scaled(lead * h0);
    return out;
}

// --- Birkhoff factorization -------------------------------------------------

struct BirkhoffTriple {
    std::vector<long> N;     // diagonal integer matrix
    Matrix<PPoly> L;         // no positive powers of s, L(infinity) = I
    Matrix<PPoly> M;         // no negative powers of s, invertible at precision
    Rat residual_bound;
    long iterations = 0;
};

// scalar case: exact reduction to weierstrass_factor in the variable s
inline BirkhoffTriple birkhoff_scalar(const PPoly& H, const Rat& sigma_s) {
    std::array<Rat, 2> sig{sigma_s, Rat(0)};
    auto det = detect_bidistinguished(H, sig);
    if (!det.ok) throw FactorError("birkhoff_scalar: " + det.reason);
    auto wf = weierstrass_factor(H, sig, det.cert);
    PadicInt lead = H.coefficient(Mono{{(int)det.cert.d_hi, 0}, 0});
    PadicInt h0 = wf.h.coefficient(Mono{});
    BirkhoffTriple out;
    out.N = {det.cert.d_hi};
    out.L = Matrix<PPoly>(1, 1, wf.h.scaled(h0.inverse()));
    out.M = Matrix<PPoly>(1, 1, wf.g.scaled(lead * h0));
    out.residual_bound = wf.residual_bound;
    out.iterations = wf.iterations;
    return out;
}

namespace detail {

inline Matrix<PPoly> mat_part(const Matrix<PPoly>& A, bool negative) {
    Matrix<PPoly> r = A;
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            r(i, j) = negative ? part_neg(A(i, j)) : part_nonneg(A(i, j));
    return r;
}

inline std::optional<Rat> mat_lognorm(const Matrix<PPoly>& A, const std::array<Rat, 2>& sig) {
    std::optional<Rat> best;
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j) {
            auto r = gauss_lognorm(A(i, j), sig);
            if (r.kind == NormKind::NegInfinity) continue;
            Rat v = r.finite() ? r.value : std::max(r.value, r.upper_bound);
            if (!best || v > *best) best = v;
        }
    return best;
}

// inverse of I + X with X strictly one-sided in degree; Neumann within W
inline Matrix<PPoly> mat_invert_one_plus(const Matrix<PPoly>& X, long W, int dir) {
    long r = X.rows();
    PPoly z = zero_like(X(0, 0));
    Matrix<PPoly> acc = Matrix<PPoly>::identity(r, z);
    Matrix<PPoly> pw = X;
    for (long j = 1; j <= W + 1; ++j) {
        bool empty = true;
        for (long a = 0; a < r && empty; ++a)
            for (long b = 0; b < r; ++b)
                if (!pw(a, b).terms().empty()) { empty = false; break; }
        if (empty) break;
        acc = (j % 2) ? acc - pw : acc + pw;
        pw = pw * X;
        for (long a = 0; a < r; ++a)
            for (long b = 0; b < r; ++b) {
                PPoly trimmed = zero_like(pw(a, b));
                trimmed.absorb_tail(pw(a, b).tail_bound());
                for (auto& [m, c] : pw(a, b).terms())
                    if ((dir > 0 && m.t[0] <= W) || (dir < 0 && m.t[0] >= -W))
                        trimmed.add_term(m, c);
                pw(a, b) = trimmed;
            }
    }
    return acc;
}

// inverse of M with invertible constant term and support >= 0
inline Matrix<PPoly> mat_invert_nonneg(const Matrix<PPoly>& M, long W) {
    long r = M.rows();
    Matrix<PadicInt> M0(r, r, M(0, 0).proto());
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j) M0(i, j) = M(i, j).coefficient(Mono{});
    Matrix<PadicInt> M0inv = padic_inverse(M0);
    PPoly z = zero_like(M(0, 0));
    Matrix<PPoly> M0invP(r, r, z);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j)
            M0invP(i, j) = PPoly::constant(1, M0inv(i, j), M(0, 0).window());
    Matrix<PPoly> X = M0invP * M - Matrix<PPoly>::identity(r, z);
    return mat_invert_one_plus(X, W, +1) * M0invP;
}

} // namespace detail

// Matrix case: iterative projection splitting with declared iteration cap.
// N is read off the per-row dominant-degree profile; failure is reported,
// never silently accepted.
inline BirkhoffTriple birkhoff_factor(const Matrix<PPoly>& H, const Rat& sigma_s,
                                      long iteration_cap = 40) {
    long r = H.rows();
    if (r == 1) return birkhoff_scalar(H(0, 0), sigma_s);
    std::array<Rat, 2> sig{sigma_s, Rat(0)};
    long p = H(0, 0).proto().p();
    long Nprec = H(0, 0).proto().prec();
    (void)p;

    // determinant norm guards against singular input
    {
        auto d = H.det();
        auto nd = gauss_lognorm(d, sig);
        if (!nd.finite())
            throw FactorError("birkhoff_factor: singular input at working precision");
    }

    // initial N from each row's first max-attaining s-degree
    std::vector<long> N(r, 0);
    for (long i = 0; i < r; ++i) {
        std::map<long, Rat> prof;
        for (long j = 0; j < r; ++j) {
            auto pj = detail::degree_profile(H(i, j), sig, Rat(0), 0);
            for (auto& [d, v] : pj) {
                auto it = prof.find(d);
                if (it == prof.end() || v > it->second) prof[d] = v;
            }
        }
        if (prof.empty()) throw FactorError("birkhoff_factor: zero row");
        Rat maxv = prof.begin()->second;
        for (auto& [d, v] : prof) maxv = std::max(maxv, v);
        for (auto& [d, v] : prof)
            if (v == maxv) { N[(size_t)i] = d; break; }
    }

    long W = 0;
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j)
            for (auto& [m, c] : H(i, j).terms()) W = std::max(W, (long)std::abs(m.t[0]));
    W += Nprec + 4;

    PPoly z = zero_like(H(0, 0));
    Matrix<PPoly> R(r, r, z);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j)
            R(i, j) = H(i, j).shifted(mono_t((int)-N[(size_t)i]));

    Matrix<PPoly> L = Matrix<PPoly>::identity(r, z);
    Matrix<PPoly> M = detail::mat_part(R, false);

    BirkhoffTriple out;
    out.N = N;
    Rat target = -Rat(Nprec);
    for (long iter = 0; iter < iteration_cap; ++iter) {
        out.iterations = iter + 1;
        Matrix<PPoly> Linv = detail::mat_invert_one_plus(
            L - Matrix<PPoly>::identity(r, z), W, -1);
        Matrix<PPoly> Minv = detail::mat_invert_nonneg(M, W);
        Matrix<PPoly> U = Linv * R * Minv;
        Matrix<PPoly> E = U - Matrix<PPoly>::identity(r, z);
        auto ne = detail::mat_lognorm(E, sig);
        if (!ne || *ne <= target) {
            out.L = L;
            out.M = M;
            // measured reconstruction residual
            Matrix<PPoly> recon = L * M;
            Matrix<PPoly> resid(r, r, z);
            for (long i = 0; i < r; ++i)
                for (long j = 0; j < r; ++j) resid(i, j) = R(i, j) - recon(i, j);
            auto nr = detail::mat_lognorm(resid, sig);
            out.residual_bound = nr ? *nr : -Rat(Nprec + 1);
            return out;
        }
        if (*ne >= 0)
            throw FactorError("birkhoff_factor: initialization not contracting; "
                              "row profile gave an unusable N");
        L = L * (Matrix<PPoly>::identity(r, z) + detail::mat_part(E, true));
        M = (Matrix<PPoly>::identity(r, z) + detail::mat_part(E, false)) * M;
    }
    throw FactorError("birkhoff_factor: iteration cap exceeded");
}

} // namespace padex
