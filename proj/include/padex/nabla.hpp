#pragma once

// Differential modules on annuli and on relative annuli over a disc:
// construction, gauge transformation, functorial operations and fibers.
// A module is described exactly (rational Laurent data) by ModuleSpec and
// materialized at any working precision as a NablaModule; consumers that
// need deep p-adic precision re-materialize rather than pretending the
// truncated data carries more digits than it does.

#include <optional>

#include <padex/factor.hpp>
#include <padex/series.hpp>

namespace padex {

// --- exact rational Laurent data -------------------------------------------

struct RatPoly {
    long n = 1;
    std::map<Mono, Rat> terms;

    static RatPoly zero(long n) { return RatPoly{n, {}}; }
    static RatPoly constant(long n, const Rat& c) {
        RatPoly f{n, {}};
        if (c != 0) f.terms[Mono{}] = c;
        return f;
    }
    static RatPoly monomial(long n, const Mono& m, const Rat& c) {
        RatPoly f{n, {}};
        if (c != 0) f.terms[m] = c;
        return f;
    }

    void add(const Mono& m, const Rat& c) {
        auto it = terms.find(m);
        if (it == terms.end()) {
            if (c != 0) terms[m] = c;
        } else {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }

    friend RatPoly operator+(const RatPoly& a, const RatPoly& b) {
        RatPoly r = a;
        for (auto& [m, c] : b.terms) r.add(m, c);
        return r;
    }
    friend RatPoly operator-(const RatPoly& a, const RatPoly& b) {
        RatPoly r = a;
        for (auto& [m, c] : b.terms) r.add(m, -c);
        return r;
    }
    RatPoly operator-() const {
        RatPoly r = *this;
        for (auto& [m, c] : r.terms) c = -c;
        return r;
    }
    friend RatPoly operator*(const RatPoly& a, const RatPoly& b) {
        RatPoly r{a.n, {}};
        for (auto& [ma, ca] : a.terms)
            for (auto& [mb, cb] : b.terms)
                r.add(Mono{{ma.t[0] + mb.t[0], ma.t[1] + mb.t[1]}, ma.s + mb.s}, ca * cb);
        return r;
    }
    RatPoly scaled(const Rat& c) const {
        RatPoly r{n, {}};
        if (c == 0) return r;
        for (auto& [m, cc] : terms) r.terms[m] = cc * c;
        return r;
    }
    RatPoly shifted(const Mono& d) const {
        RatPoly r{n, {}};
        for (auto& [m, c] : terms)
            r.terms[Mono{{m.t[0] + d.t[0], m.t[1] + d.t[1]}, m.s + d.s}] = c;
        return r;
    }
    RatPoly t_dlog(long dir) const {
        RatPoly r{n, {}};
        for (auto& [m, c] : terms)
            if (m.t[(size_t)dir] != 0) r.terms[m] = c * m.t[(size_t)dir];
        return r;
    }
    RatPoly d_s() const {
        RatPoly r{n, {}};
        for (auto& [m, c] : terms)
            if (m.s != 0) {
                Mono mm = m;
                mm.s -= 1;
                r.add(mm, c * m.s);
            }
        return r;
    }
    bool is_zero() const { return terms.empty(); }
};

inline RatPoly zero_like(const RatPoly& f) { return RatPoly::zero(f.n); }
inline RatPoly one_like(const RatPoly& f) { return RatPoly::constant(f.n, Rat(1)); }

inline LaurentPoly<PadicInt> materialize_poly(const RatPoly& f, long p, long prec,
                                              Window w = Window{}) {
    LaurentPoly<PadicInt> r(f.n, PadicInt::zero(p, prec), w);
    for (auto& [m, c] : f.terms) r.add_term(m, PadicInt::from_rational(p, prec, c));
    r.prune_zeros();
    return r;
}

// exact division by a monomial-plus-nothing determinant; the unimodular
// gauges this library plants always have monomial determinants
inline RatPoly rat_div_monomial(const RatPoly& f, const Mono& m, const Rat& c) {
    RatPoly r{f.n, {}};
    for (auto& [mm, cc] : f.terms)
        r.terms[Mono{{mm.t[0] - m.t[0], mm.t[1] - m.t[1]}, mm.s - m.s}] = cc / c;
    return r;
}

inline Matrix<RatPoly> rat_adjugate(const Matrix<RatPoly>& H) {
    long r = H.rows();
    Matrix<RatPoly> adj(r, r, RatPoly::zero(H(0, 0).n));
    if (r == 1) {
        adj(0, 0) = one_like(H(0, 0));
        return adj;
    }
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j) {
            Matrix<RatPoly> minor(r - 1, r - 1, RatPoly::zero(H(0, 0).n));
            for (long a = 0, ai = 0; a < r; ++a) {
                if (a == i) continue;
                for (long b = 0, bj = 0; b < r; ++b) {
                    if (b == j) continue;
                    minor(ai, bj) = H(a, b);
                    ++bj;
                }
                ++ai;
            }
            RatPoly cof = minor.det();
            adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
        }
    return adj;
}

// inverse of a matrix whose determinant is a single monomial (exact)
inline Matrix<RatPoly> rat_matrix_inverse(const Matrix<RatPoly>& H) {
    RatPoly d = H.det();
    if (d.terms.size() != 1)
        throw std::domain_error("rat_matrix_inverse: determinant is not a monomial");
    auto& [dm, dc] = *d.terms.begin();
    Matrix<RatPoly> adj = rat_adjugate(H);
    Matrix<RatPoly> inv(H.rows(), H.cols(), RatPoly::zero(H(0, 0).n));
    for (long i = 0; i < H.rows(); ++i)
        for (long j = 0; j < H.cols(); ++j) inv(i, j) = rat_div_monomial(adj(i, j), dm, dc);
    return inv;
}

// --- module descriptions -----------------------------------------------------

enum class BaseKind { None, Disc, GaussPoint };

struct ModuleSpec {
    long p = 5;
    long rank = 1;
    long n = 1;
    Interval I;
    BaseKind base = BaseKind::None;
    Rat gamma;                        // log radius of the base disc
    std::vector<Matrix<RatPoly>> G;   // one matrix per direction, t_i d/dt_i action
    std::optional<Matrix<RatPoly>> Gs;

    static ModuleSpec diagonal(long p, const std::vector<std::vector<Rat>>& xis,
                               const Interval& I_) {
        ModuleSpec s;
        s.p = p;
        s.rank = (long)xis.size();
        s.n = I_.n;
        s.I = I_;
        for (long d = 0; d < s.n; ++d) {
            Matrix<RatPoly> Gd(s.rank, s.rank, RatPoly::zero(s.n));
            for (long i = 0; i < s.rank; ++i)
                Gd(i, i) = RatPoly::constant(s.n, xis[(size_t)i][(size_t)d]);
            s.G.push_back(Gd);
        }
        return s;
    }
};

// exact gauge at the spec level: G' = H^{-1} G H + H^{-1} (t_i d/dt_i H),
// with H unimodular (monomial determinant)
inline ModuleSpec spec_gauge(const ModuleSpec& s, const Matrix<RatPoly>& H) {
    Matrix<RatPoly> Hinv = rat_matrix_inverse(H);
    ModuleSpec out = s;
    for (long d = 0; d < s.n; ++d) {
        Matrix<RatPoly> dH(s.rank, s.rank, RatPoly::zero(s.n));
        for (long i = 0; i < s.rank; ++i)
            for (long j = 0; j < s.rank; ++j) dH(i, j) = H(i, j).t_dlog(d);
        out.G[(size_t)d] = Hinv * s.G[(size_t)d] * H + Hinv * dH;
    }
    if (s.Gs) {
        Matrix<RatPoly> dH(s.rank, s.rank, RatPoly::zero(s.n));
        for (long i = 0; i < s.rank; ++i)
            for (long j = 0; j < s.rank; ++j) dH(i, j) = H(i, j).d_s();
        out.Gs = Hinv * *s.Gs * H + Hinv * dH;
    }
    return out;
}

inline ModuleSpec spec_dsum(const ModuleSpec& a, const ModuleSpec& b) {
    if (a.p != b.p || a.n != b.n) throw std::invalid_argument("spec_dsum: shape mismatch");
    ModuleSpec out = a;
    out.rank = a.rank + b.rank;
    out.G.clear();
    for (long d = 0; d < a.n; ++d)
        out.G.push_back(Matrix<RatPoly>::block_diag(a.G[(size_t)d], b.G[(size_t)d]));
    if (a.Gs && b.Gs) out.Gs = Matrix<RatPoly>::block_diag(*a.Gs, *b.Gs);
    else out.Gs.reset();
    return out;
}

inline ModuleSpec spec_tensor(const ModuleSpec& a, const ModuleSpec& b) {
    if (a.p != b.p || a.n != b.n) throw std::invalid_argument("spec_tensor: shape mismatch");
    ModuleSpec out = a;
    out.rank = a.rank * b.rank;
    out.G.clear();
    for (long d = 0; d < a.n; ++d)
        out.G.push_back(Matrix<RatPoly>::kron_sum(a.G[(size_t)d], b.G[(size_t)d]));
    if (a.Gs && b.Gs) out.Gs = Matrix<RatPoly>::kron_sum(*a.Gs, *b.Gs);
    else out.Gs.reset();
    return out;
}

inline ModuleSpec spec_dual(const ModuleSpec& a) {
    ModuleSpec out = a;
    for (long d = 0; d < a.n; ++d)
        out.G[(size_t)d] = -(a.G[(size_t)d].transpose());
    if (a.Gs) out.Gs = -(a.Gs->transpose());
    return out;
}

// --- materialized modules ----------------------------------------------------

using PMat = Matrix<LaurentPoly<PadicInt>>;

struct NablaModule {
    long p = 5;
    long prec = 8;
    long rank = 1;
    long n = 1;
    Interval I;
    BaseKind base = BaseKind::None;
    Rat gamma;
    std::vector<PMat> G;
    std::optional<PMat> Gs;
};

inline NablaModule materialize(const ModuleSpec& s, long prec, Window w = Window{}) {
    NablaModule m;
    m.p = s.p;
    m.prec = prec;
    m.rank = s.rank;
    m.n = s.n;
    m.I = s.I;
    m.base = s.base;
    m.gamma = s.gamma;
    auto conv = [&](const Matrix<RatPoly>& M) {
        PMat out(M.rows(), M.cols(), LaurentPoly<PadicInt>(s.n, PadicInt::zero(s.p, prec), w));
        for (long i = 0; i < M.rows(); ++i)
            for (long j = 0; j < M.cols(); ++j) out(i, j) = materialize_poly(M(i, j), s.p, prec, w);
        return out;
    };
    for (auto& Gd : s.G) m.G.push_back(conv(Gd));
    if (s.Gs) m.Gs = conv(*s.Gs);
    return m;
}

// integrability residual: max log-norm over directions of the
// derivation-adjusted commutators, at the interval vertices
inline std::optional<Rat> integrability_residual(const NablaModule& P) {
    std::optional<Rat> worst;
    auto upd = [&](const NormResult& r) {
        if (r.kind == NormKind::NegInfinity) return;
        Rat v = r.finite() ? r.value : std::max(r.value, r.upper_bound);
        if (!worst || v > *worst) worst = v;
    };
    auto dmat = [&](const PMat& M, long dir) {
        PMat out = M;
        for (long i = 0; i < M.rows(); ++i)
            for (long j = 0; j < M.cols(); ++j) out(i, j) = M(i, j).t_dlog(dir);
        return out;
    };
    Rat sig_s = P.base == BaseKind::None ? Rat(0) : P.gamma;
    for (long i = 0; i < P.n; ++i)
        for (long j = i + 1; j < P.n; ++j) {
            PMat comm = dmat(P.G[(size_t)j], i) - dmat(P.G[(size_t)i], j) +
                        P.G[(size_t)i] * P.G[(size_t)j] - P.G[(size_t)j] * P.G[(size_t)i];
            for (long a = 0; a < P.rank; ++a)
                for (long b = 0; b < P.rank; ++b)
                    for (auto& v : P.I.vertices()) upd(gauss_lognorm(comm(a, b), v, sig_s));
        }
    if (P.Gs) {
        auto dsmat = [&](const PMat& M) {
            PMat out = M;
            for (long i = 0; i < M.rows(); ++i)
                for (long j = 0; j < M.cols(); ++j) out(i, j) = M(i, j).d_s();
            return out;
        };
        for (long i = 0; i < P.n; ++i) {
            PMat comm = dsmat(P.G[(size_t)i]) - dmat(*P.Gs, i) +
                        P.Gs.value() * P.G[(size_t)i] - P.G[(size_t)i] * P.Gs.value();
            for (long a = 0; a < P.rank; ++a)
                for (long b = 0; b < P.rank; ++b)
                    for (auto& v : P.I.vertices()) upd(gauss_lognorm(comm(a, b), v, sig_s));
        }
    }
    return worst;
}

inline NablaModule make_diagonal(long p, long prec, const std::vector<std::vector<Rat>>& xis,
                                 const Interval& I) {
    return materialize(ModuleSpec::diagonal(p, xis, I), prec);
}

// Laurent-matrix inverse at precision: adjugate over the exact Laurent ring
// divided by the determinant, which must have a single dominant pivot at
// every vertex of the interval (otherwise: singular gauge).
inline PMat laurent_matrix_inverse(const PMat& H, const Interval& I, const Rat& sigma_s = Rat(0)) {
    long r = H.rows();
    using PP = LaurentPoly<PadicInt>;
    PP d = H.det();
    // uniform single-pivot check across vertices
    std::optional<long> pivot;
    Rat margin(1000000);
    for (auto& v : I.vertices()) {
        auto det = detect_bidistinguished(d, v, sigma_s);
        if (!det.ok || det.cert.d_lo != det.cert.d_hi)
            throw FactorError("laurent_matrix_inverse: singular gauge (no uniform pivot)");
        if (pivot && *pivot != det.cert.d_lo)
            throw FactorError("laurent_matrix_inverse: singular gauge (pivot drifts)");
        pivot = det.cert.d_lo;
        for (auto& [nu, m] : det.cert.margins) margin = std::min(margin, m);
    }
    PadicInt lead = d.coefficient(mono_t((int)*pivot));
    PP x = d.shifted(mono_t((int)-*pivot)).scaled(lead.inverse()) -
           PP::constant(d.arity(), PadicInt::one(H(0, 0).proto().p(), H(0, 0).proto().prec()));
    // Neumann inverse of 1 + x, |x| < 1 at all vertices
    long W = (long)(Rat(H(0, 0).proto().prec() + 2) / std::min(margin, Rat(1))).convert_to<double>() + 4;
    PP dinv = one_like(x) - x;
    PP pw = x * x;
    for (long j = 2; j <= 2 * W; ++j) {
        bool done = true;
        if (!pw.terms().empty()) {
            // stop once the power's norm everywhere is below precision
            for (auto& v : I.vertices()) {
                auto nr = gauss_lognorm(pw, v, sigma_s);
                if (nr.kind != NormKind::NegInfinity &&
                    !lognorm_at_most(nr, -Rat(H(0, 0).proto().prec()))) done = false;
            }
        }
        if (done) break;
        dinv = (j % 2 == 0) ? dinv + pw : dinv - pw;
        pw = pw * x;
    }
    dinv = dinv.shifted(mono_t((int)-*pivot)).scaled(lead.inverse());

    // adjugate
    PMat adj(r, r, zero_like(H(0, 0)));
    if (r == 1) {
        adj(0, 0) = one_like(H(0, 0));
    } else {
        for (long i = 0; i < r; ++i)
            for (long j = 0; j < r; ++j) {
                PMat minor(r - 1, r - 1, zero_like(H(0, 0)));
                for (long a = 0, ai = 0; a < r; ++a) {
                    if (a == i) continue;
                    for (long b = 0, bj = 0; b < r; ++b) {
                        if (b == j) continue;
                        minor(ai, bj) = H(a, b);
                        ++bj;
                    }
                    ++ai;
                }
                PP cof = minor.det();
                adj(j, i) = ((i + j) % 2 == 0) ? cof : cof.negated();
            }
    }
    PMat inv(r, r, zero_like(H(0, 0)));
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j) inv(i, j) = adj(i, j) * dinv;
    return inv;
}

// gauge change of basis: G' = H^{-1} G H + H^{-1} t_i d/dt_i(H)
inline NablaModule gauge(const NablaModule& P, const PMat& H) {
    PMat Hinv = laurent_matrix_inverse(H, P.I, P.base == BaseKind::None ? Rat(0) : P.gamma);
    NablaModule out = P;
    for (long d = 0; d < P.n; ++d) {
        PMat dH(P.rank, P.rank, zero_like(H(0, 0)));
        for (long i = 0; i < P.rank; ++i)
            for (long j = 0; j < P.rank; ++j) dH(i, j) = H(i, j).t_dlog(d);
        out.G[(size_t)d] = Hinv * P.G[(size_t)d] * H + Hinv * dH;
    }
    if (P.Gs) {
        PMat dH(P.rank, P.rank, zero_like(H(0, 0)));
        for (long i = 0; i < P.rank; ++i)
            for (long j = 0; j < P.rank; ++j) dH(i, j) = H(i, j).d_s();
        out.Gs = Hinv * *P.Gs * H + Hinv * dH;
    }
    return out;
}

inline NablaModule dsum(const NablaModule& a, const NablaModule& b) {
    if (a.p != b.p || a.n != b.n) throw std::invalid_argument("dsum: shape mismatch");
    NablaModule out = a;
    out.rank = a.rank + b.rank;
    out.G.clear();
    for (long d = 0; d < a.n; ++d)
        out.G.push_back(PMat::block_diag(a.G[(size_t)d], b.G[(size_t)d]));
    if (a.Gs && b.Gs) out.Gs = PMat::block_diag(*a.Gs, *b.Gs);
    else out.Gs.reset();
    return out;
}

inline NablaModule tensor(const NablaModule& a, const NablaModule& b) {
    if (a.p != b.p || a.n != b.n) throw std::invalid_argument("tensor: shape mismatch");
    NablaModule out = a;
    out.rank = a.rank * b.rank;
    out.G.clear();
    for (long d = 0; d < a.n; ++d)
        out.G.push_back(PMat::kron_sum(a.G[(size_t)d], b.G[(size_t)d]));
    if (a.Gs && b.Gs) out.Gs = PMat::kron_sum(*a.Gs, *b.Gs);
    else out.Gs.reset();
    return out;
}

inline NablaModule dual(const NablaModule& a) {
    NablaModule out = a;
    for (long d = 0; d < a.n; ++d) {
        PMat m = a.G[(size_t)d].transpose();
        for (long i = 0; i < out.rank; ++i)
            for (long j = 0; j < out.rank; ++j) m(i, j) = m(i, j).negated();
        out.G[(size_t)d] = m;
    }
    if (a.Gs) {
        PMat m = a.Gs->transpose();
        for (long i = 0; i < out.rank; ++i)
            for (long j = 0; j < out.rank; ++j) m(i, j) = m(i, j).negated();
        out.Gs = m;
    }
    return out;
}

struct FiberPoint {
    bool gauss = false;
    Rat value;   // rational point c with |c| <= p^gamma when not Gauss
};

// restriction to a fiber of the base disc: s -> c, or the symbolic Gauss
// point (coefficients stay polynomial in s; norms use sigma_s = gamma)
inline NablaModule fiber(const NablaModule& P, const FiberPoint& pt) {
    if (P.base == BaseKind::None) return P;
    NablaModule out = P;
    if (pt.gauss) {
        out.base = BaseKind::GaussPoint;
        return out;
    }
    // |c| <= p^gamma
    if (pt.value != 0) {
        Rat vc(val_p(numerator(pt.value), P.p) - val_p(denominator(pt.value), P.p));
        if (-vc > P.gamma)
            throw std::invalid_argument("fiber: point outside the base disc");
    }
    PadicInt c = PadicInt::from_rational(P.p, P.prec, pt.value);
    auto sub = [&](const PMat& M) {
        PMat out2 = M;
        for (long i = 0; i < M.rows(); ++i)
            for (long j = 0; j < M.cols(); ++j) out2(i, j) = M(i, j).subst_s(c);
        return out2;
    };
    out.G.clear();
    for (auto& Gd : P.G) out.G.push_back(sub(Gd));
    out.Gs.reset();
    out.base = BaseKind::None;
    return out;
}

} // namespace padex
