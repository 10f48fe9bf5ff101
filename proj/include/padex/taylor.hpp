#pragma once

// The root-of-unity Taylor action zeta^*(x) = sum (zeta-1)^a binom(tD, a)(x)
// on differential modules, evaluated per cyclotomic level at one primitive
// root; Galois conjugates are reconstructed by coordinate permutation, and
// the mu_{p^k}-averages S_{k,A} reduce to Ramanujan-sum weighted traces.
//
// The binomial operator matrices follow the recurrence
//   B_{m+1} = (tD - m) B_m / (m+1),
// never expanding factorials; working precision is raised by v_p(M_T!) so
// the divisions keep an honest certificate.

#include <padex/nabla.hpp>

namespace padex {

using CPoly = LaurentPoly<CycloElem>;
using CMat = Matrix<CPoly>;

struct TaylorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// one step of the binomial operator recurrence on basis-image matrices
inline PMat binom_step(const NablaModule& P, const PMat& V, long m, long dir) {
    long r = P.rank;
    PMat out = P.G[(size_t)dir] * V;
    PadicInt minv = PadicInt::from_rational(P.p, V(0, 0).proto().prec(), 1, m + 1);
    PadicInt mm = PadicInt::from_integer(P.p, V(0, 0).proto().prec(), m);
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j) {
            out(i, j) = out(i, j) + V(i, j).t_dlog(dir) - V(i, j).scaled(mm);
            out(i, j) = out(i, j).scaled(minv);
        }
    return out;
}

inline std::optional<Rat> mat_sup_lognorm(const PMat& M, const Interval& I, const Rat& sigma_s) {
    std::optional<Rat> best;
    for (long i = 0; i < M.rows(); ++i)
        for (long j = 0; j < M.cols(); ++j) {
            auto r = sup_lognorm(M(i, j), I, sigma_s);
            if (r.kind == NormKind::NegInfinity) continue;
            Rat v = r.finite() ? r.value : std::max(r.value, r.upper_bound);
            if (!best || v > *best) best = v;
        }
    return best;
}

} // namespace detail

// E(zeta) for one primitive level-k root (n = 1), with the truncation
// certificate estimated from the measured term norms per the semidecision
// contract: discarded terms are assumed no larger than the trailing
// maximum of the computed ones.
struct LevelAction {
    long k = 0;
    long M_T = 0;
    CMat E;
    Rat cert;                                   // valuation floor of truncation error
    std::vector<std::pair<long, Rat>> trace;    // m -> sup log-norm of B_m
    bool diverged = false;
};

inline LevelAction eval_level_primitive(const NablaModule& P, long k, long M_T) {
    if (P.n != 1) throw TaylorError("eval_level_primitive: arity-1 fast path only");
    long p = P.p;
    long phi = euler_phi_pk(p, k);
    long cprec = P.prec;
    Rat sig_s = P.base == BaseKind::None ? Rat(0) : P.gamma;

    LevelAction out;
    out.k = k;
    out.M_T = M_T;

    CycloElem czero = CycloElem::zero(p, k, cprec);
    CPoly cz(1, czero, P.G[0](0, 0).window());
    out.E = CMat(P.rank, P.rank, cz);

    CycloElem pi_pow = CycloElem::from_scalar(p, k, cprec, 1);  // (zeta-1)^m
    CycloElem pi_elt = CycloElem::zeta_power(p, k, cprec, 1) -
                       CycloElem::from_scalar(p, k, cprec, 1);

    PMat V = PMat::identity(P.rank, P.G[0](0, 0));
    Rat trailing_max(-100000);
    for (long m = 0; m <= M_T; ++m) {
        // accumulate V_m * (zeta-1)^m
        for (long i = 0; i < P.rank; ++i)
            for (long j = 0; j < P.rank; ++j)
                for (auto& [mono, c] : V(i, j).terms())
                    out.E(i, j).add_term(mono, pi_pow.scaled(c));
        auto nv = detail::mat_sup_lognorm(V, P.I, sig_s);
        Rat b = nv ? *nv : Rat(-100000);
        out.trace.emplace_back(m, b);
        if (m > (3 * M_T) / 4) trailing_max = std::max(trailing_max, b);
        if (m == M_T) break;
        V = detail::binom_step(P, V, m, 0);
        pi_pow = pi_pow * pi_elt;
    }
    for (long i = 0; i < P.rank; ++i)
        for (long j = 0; j < P.rank; ++j) out.E(i, j).prune_zeros();

    // divergence screen: term bounds b_m - m/phi must not trend upward
    long half = (long)out.trace.size() / 2;
    Rat first_half(-100000), second_half(-100000);
    for (size_t i = 0; i < out.trace.size(); ++i) {
        Rat t = out.trace[i].second - Rat(out.trace[i].first, phi);
        if ((long)i < half) first_half = std::max(first_half, t);
        else second_half = std::max(second_half, t);
    }
    if (second_half > first_half && second_half > 0) out.diverged = true;

    out.cert = Rat(M_T + 1, phi) - std::max(trailing_max, Rat(0));
    return out;
}

// Ramanujan sum c_{p^j}(d): the Galois trace of zeta_{p^j}^d
inline long ramanujan_pk(long p, long j, long d) {
    if (j == 0) return 1;
    long pj = pow_int(p, j).convert_to<long>();
    long pj1 = pj / p;
    long dd = ((d % pj) + pj) % pj;
    if (dd == 0) return pj - pj1;        // phi(p^j)
    if (dd % pj1 == 0) return -pj1;      // order exactly p
    return 0;
}

// One ladder per module: E at the primitive root of every level 1..K, each
// with enough terms that S-matrices at level K keep `target_digits` of
// certified precision after the p^{-k} averaging.
struct ActionLadder {
    long p = 5;
    long K = 0;
    long target_digits = 8;
    std::vector<LevelAction> levels;   // [0] unused sentinel; [k] at level k
    std::vector<long> mat_prec;        // materialization precision per level
};

inline long ladder_terms(long p, long k, long digits) {
    return (digits + k + 1) * euler_phi_pk(p, k) + euler_phi_pk(p, k);
}

inline ActionLadder build_ladder(const ModuleSpec& spec, long K, long target_digits,
                                 Window w = Window{}) {
    ActionLadder lad;
    lad.p = spec.p;
    lad.K = K;
    lad.target_digits = target_digits;
    lad.levels.resize((size_t)K + 1);
    lad.mat_prec.resize((size_t)K + 1, 0);
    for (long k = 1; k <= K; ++k) {
        long M_T = ladder_terms(spec.p, k, target_digits);
        long cprec = target_digits + k + val_p_factorial(spec.p, M_T) + 4;
        NablaModule Pk = materialize(spec, cprec, w);
        lad.levels[(size_t)k] = eval_level_primitive(Pk, k, M_T);
        lad.mat_prec[(size_t)k] = cprec;
        if (lad.levels[(size_t)k].diverged)
            throw TaylorError("build_ladder: divergence detected at level " + std::to_string(k));
    }
    return lad;
}

// S_{k,A} = p^{-k} sum_{zeta in mu_{p^k}} E(zeta) zeta^{-A}, assembled as
// Ramanujan-weighted traces of the per-level primitive actions.  Columns
// carry the residues A_c mod p^k.  Entries land in Q_p exactly (the trace
// is Galois-stable by construction).
struct SkaResult {
    Matrix<LaurentPoly<PadicInt>> S;
    long k = 0;
    Rat cert;            // semantic certificate from the ladder truncation
    bool integral = true;
    std::vector<std::pair<long, long>> nonintegral_entries;
};

inline SkaResult ska_from_ladder(const ActionLadder& lad, const std::vector<BigInt>& A_cols,
                                 long k) {
    if (k > lad.K) throw TaylorError("ska_from_ladder: level beyond ladder");
    long p = lad.p;
    long r = (long)A_cols.size();
    long pk = pow_int(p, k).convert_to<long>();

    long work_prec = 4 + lad.target_digits + k;
    for (long j = 1; j <= k; ++j)
        work_prec = std::max(work_prec, lad.mat_prec[(size_t)j]);

    PadicInt pzero = PadicInt::zero(p, work_prec);
    LaurentPoly<PadicInt> zp(1, pzero);
    SkaResult out;
    out.k = k;
    out.S = Matrix<LaurentPoly<PadicInt>>(r, r, zp);

    // level 0: E(1) = I contributes the identity
    for (long c = 0; c < r; ++c)
        out.S(c, c).add_term(Mono{}, PadicInt::one(p, work_prec));

    Rat cert(1000000);
    for (long j = 1; j <= k; ++j) {
        const LevelAction& la = lad.levels[(size_t)j];
        cert = std::min(cert, la.cert);
        long pj = pow_int(p, j).convert_to<long>();
        for (long i = 0; i < r; ++i)
            for (long c = 0; c < r; ++c) {
                long a = mod_floor(A_cols[(size_t)c], pj).convert_to<long>();
                for (auto& [mono, ce] : la.E(i, c).terms()) {
                    // trace of ce * zeta^{-a}: sum_e coords[e] * ram(e - a)
                    BigInt tot = 0;
                    const auto& coords = ce.coords();
                    for (long e = 0; e < (long)coords.size(); ++e) {
                        if (coords[(size_t)e] == 0) continue;
                        long w = ramanujan_pk(p, j, e - a);
                        if (w != 0) tot += coords[(size_t)e] * w;
                    }
                    if (tot == 0) continue;
                    PadicInt val(p, ce.prec(), tot, ce.voff());
                    out.S(i, c).add_term(mono, val);
                }
            }
    }
    // divide by p^k (exact Q_p arithmetic via the valuation offset)
    for (long i = 0; i < r; ++i)
        for (long c = 0; c < r; ++c) {
            LaurentPoly<PadicInt> scaled = zero_like(out.S(i, c));
            for (auto& [mono, v] : out.S(i, c).terms())
                scaled.add_term(mono, v.mul_p(-k));
            scaled.prune_zeros();
            out.S(i, c) = scaled;
            for (auto& [mono, v] : out.S(i, c).terms())
                if (v.voff() > 0) {
                    out.integral = false;
                    out.nonintegral_entries.emplace_back(i, c);
                    break;
                }
        }
    out.cert = cert - k;
    return out;
}

// E at an arbitrary level-k tuple by direct summation (supports n = 1, 2);
// used by the public taylor_action surface and the small-n tests.
struct TaylorActionMatrix {
    long k = 0;
    std::array<long, 2> zeta_exp{1, 0};
    CMat E;
    Rat cert;
    std::vector<std::pair<long, Rat>> trace;
    bool diverged = false;
};

inline TaylorActionMatrix taylor_action(const NablaModule& P, long k,
                                        const std::array<long, 2>& zeta_exp, long M_T) {
    long p = P.p;
    long phi = euler_phi_pk(p, k);
    long cprec = P.prec;
    Rat sig_s = P.base == BaseKind::None ? Rat(0) : P.gamma;

    TaylorActionMatrix out;
    out.k = k;
    out.zeta_exp = zeta_exp;
    CycloElem czero = CycloElem::zero(p, k, cprec);
    CPoly cz(P.n, czero, P.G[0](0, 0).window());
    out.E = CMat(P.rank, P.rank, cz);

    // v_pi of (zeta^e - 1): depends on the order of zeta^e
    auto pi_val_of = [&](long e) -> Rat {
        long ee = mod_floor(BigInt(e), pow_int(p, k)).convert_to<long>();
        if (ee == 0) return Rat(cprec); // (1 - 1) = 0: treated as +infinity scale
        long order_level = k;
        while (order_level > 1 && ee % p == 0) { ee /= p; --order_level; }
        return Rat(1, euler_phi_pk(p, order_level));
    };

    if (P.n == 1) {
        CycloElem pi1 = CycloElem::zeta_power(p, k, cprec, zeta_exp[0]) -
                        CycloElem::from_scalar(p, k, cprec, 1);
        CycloElem pw = CycloElem::from_scalar(p, k, cprec, 1);
        PMat V = PMat::identity(P.rank, P.G[0](0, 0));
        Rat trailing(-100000);
        for (long m = 0; m <= M_T; ++m) {
            for (long i = 0; i < P.rank; ++i)
                for (long j = 0; j < P.rank; ++j)
                    for (auto& [mono, c] : V(i, j).terms())
                        out.E(i, j).add_term(mono, pw.scaled(c));
            auto nv = detail::mat_sup_lognorm(V, P.I, sig_s);
            Rat b = nv ? *nv : Rat(-100000);
            out.trace.emplace_back(m, b);
            if (m > (3 * M_T) / 4) trailing = std::max(trailing, b);
            if (m == M_T) break;
            V = detail::binom_step(P, V, m, 0);
            pw = pw * pi1;
        }
        out.cert = Rat(M_T + 1) * pi_val_of(zeta_exp[0]) - std::max(trailing, Rat(0));
    } else {
        // nested two-direction recurrence, |alpha| <= M_T
        CycloElem pi1 = CycloElem::zeta_power(p, k, cprec, zeta_exp[0]) -
                        CycloElem::from_scalar(p, k, cprec, 1);
        CycloElem pi2 = CycloElem::zeta_power(p, k, cprec, zeta_exp[1]) -
                        CycloElem::from_scalar(p, k, cprec, 1);
        Rat trailing(-100000);
        PMat V1 = PMat::identity(P.rank, P.G[0](0, 0));
        CycloElem pw1 = CycloElem::from_scalar(p, k, cprec, 1);
        for (long a = 0; a <= M_T; ++a) {
            PMat V = V1;
            CycloElem pw = pw1;
            for (long b = 0; a + b <= M_T; ++b) {
                for (long i = 0; i < P.rank; ++i)
                    for (long j = 0; j < P.rank; ++j)
                        for (auto& [mono, c] : V(i, j).terms())
                            out.E(i, j).add_term(mono, pw.scaled(c));
                if (a + b == M_T) break;
                V = detail::binom_step(P, V, b, 1);
                pw = pw * pi2;
            }
            auto nv = detail::mat_sup_lognorm(V1, P.I, sig_s);
            Rat bb = nv ? *nv : Rat(-100000);
            out.trace.emplace_back(a, bb);
            if (a > (3 * M_T) / 4) trailing = std::max(trailing, bb);
            if (a == M_T) break;
            V1 = detail::binom_step(P, V1, a, 0);
            pw1 = pw1 * pi1;
        }
        Rat vmin = std::min(pi_val_of(zeta_exp[0]), pi_val_of(zeta_exp[1]));
        out.cert = Rat(M_T + 1) * vmin - std::max(trailing, Rat(0));
    }
    for (long i = 0; i < P.rank; ++i)
        for (long j = 0; j < P.rank; ++j) out.E(i, j).prune_zeros();
    (void)phi;
    return out;
}

// --- Robba probe -------------------------------------------------------------

enum class RobbaVerdict { Pass, Fail, Inconclusive };

struct RobbaReport {
    RobbaVerdict verdict = RobbaVerdict::Inconclusive;
    std::vector<std::pair<long, Rat>> trace;   // m -> term bound b_m
    long depth = 0;
};

inline const char* to_string(RobbaVerdict v) {
    switch (v) {
        case RobbaVerdict::Pass: return "pass";
        case RobbaVerdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

// Semidecision: term bounds log|binom(tD, m)| + m * v(zeta_p - 1) must sink
// below -N within the probe depth (pass), or grow steadily (fail).
inline RobbaReport robba_probe(const ModuleSpec& spec, long depth, long N_target) {
    long p = spec.p;
    long cprec = N_target + val_p_factorial(p, depth) + 4;
    NablaModule P = materialize(spec, cprec);
    Rat sig_s = P.base == BaseKind::None ? Rat(0) : P.gamma;
    RobbaReport rep;
    rep.depth = depth;
    Rat piv(1, p - 1);
    std::vector<PMat> dirs;
    PMat V = PMat::identity(P.rank, P.G[0](0, 0));
    bool all_empty_tail = true;
    for (long m = 1; m <= depth; ++m) {
        // probe the first direction; the Robba condition is per-direction
        // and the report carries the trace for the probed one
        V = detail::binom_step(P, V, m - 1, 0);
        auto nv = detail::mat_sup_lognorm(V, P.I, sig_s);
        Rat b = (nv ? *nv : Rat(-1000)) + piv * m;
        rep.trace.emplace_back(m, b);
        if (m > depth / 2 && nv) all_empty_tail = false;
    }
    long half = depth / 2;
    Rat head(-100000), tail(-100000);
    bool nondecreasing_tail = true;
    for (size_t i = 0; i < rep.trace.size(); ++i) {
        if ((long)i < half) head = std::max(head, rep.trace[i].second);
        else tail = std::max(tail, rep.trace[i].second);
    }
    for (size_t i = (size_t)half + 1; i < rep.trace.size(); ++i)
        if (rep.trace[i].second < rep.trace[i - 1].second) nondecreasing_tail = false;

    if (all_empty_tail || tail <= -Rat(N_target))
        rep.verdict = RobbaVerdict::Pass;
    else if (nondecreasing_tail && tail > head && tail > 0)
        rep.verdict = RobbaVerdict::Fail;
    else
        rep.verdict = RobbaVerdict::Inconclusive;
    return rep;
}

} // namespace padex
