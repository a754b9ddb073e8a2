#pragma once

#include "core.hpp"
#include "poly.hpp"
#include "projective.hpp"

#include <utility>
#include <vector>

namespace qpdyn {

// Linear fractional transformation (a z + b) / (c z + d), det != 0.
struct Mobius {
    Rat a{1}, b{0}, c{0}, d{1};

    bool isIdentity() const { return b == 0 && c == 0 && a == d; }

    Mobius inverse() const { return Mobius{d, -b, -c, a}; }

    ProjectivePointExact apply(const ProjectivePointExact& P, const PrimeContext& ctx) const {
        return ProjectivePointExact(a * P.x + b * P.y, c * P.x + d * P.y, ctx);
    }
};

// Rational map f/g over Q_p, stored with the common rational factor cancelled
// and coefficients scaled so that min_i v_p = 0.
class RationalMap {
public:
    RationalMap(Poly num, Poly den, const PrimeContext& ctx) {
        polyTrim(num); polyTrim(den);
        if (polyDeg(den) < 0) throw ZeroDenominator("denominator polynomial is zero");
        if (polyDeg(num) < 0) {
            num_ = {Rat(0)}; den_ = {Rat(1)}; deg_ = 0;
            return;
        }
        Poly gcd = polyGcd(num, den);
        if (polyDeg(gcd) > 0) {
            num = polyDiv(num, gcd);
            den = polyDiv(den, gcd);
        }
        // p-normalize: min valuation over all coefficients becomes 0
        val_t m = val_inf;
        for (const auto& c : num) if (c != 0) m = std::min(m, valuation(c, ctx));
        for (const auto& c : den) if (c != 0) m = std::min(m, valuation(c, ctx));
        if (m == val_inf) throw NotNormalizable("map has no nonzero coefficient");
        if (m != 0) {
            Rat scale = (m > 0) ? Rat(1) / ctx.pPow(static_cast<int>(m))
                                : Rat(ctx.pPow(static_cast<int>(-m)));
            num = polyScale(num, scale);
            den = polyScale(den, scale);
        }
        num_ = std::move(num);
        den_ = std::move(den);
        deg_ = std::max(polyDeg(num_), polyDeg(den_));
    }

    int degree() const { return deg_; }
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    Rat numCoeff(int i) const {
        return i < static_cast<int>(num_.size()) ? num_[static_cast<std::size_t>(i)] : Rat(0);
    }
    Rat denCoeff(int i) const {
        return i < static_cast<int>(den_.size()) ? den_[static_cast<std::size_t>(i)] : Rat(0);
    }

    bool operator==(const RationalMap& o) const {
        // equality as rational functions; both sides stored reduced
        return polyDeg(polySub(polyMul(num_, o.den_), polyMul(o.num_, den_))) < 0;
    }

private:
    Poly num_, den_;
    int deg_ = 0;
};

inline RationalMap identityMap(const PrimeContext& ctx) {
    return RationalMap(Poly{Rat(0), Rat(1)}, Poly{Rat(1)}, ctx);
}

// ---- reduction mod p ----

struct ReducedMap {
    FpPoly rawNum;     // coefficient-wise reductions, before cancellation
    FpPoly rawDen;
    FpPoly numCoeffs;  // after F_p[z] gcd cancellation
    FpPoly denCoeffs;
    int reducedDegree;
};

inline ReducedMap reduceModP(const RationalMap& phi, const PrimeContext& ctx) {
    auto red = [&](const Poly& f) {
        FpPoly r;
        for (const auto& c : f) r.push_back(toResidue(c, 1, ctx).value);
        fpTrim(r);
        return r;
    };
    FpPoly fn = red(phi.num()), fd = red(phi.den());
    ReducedMap out{fn, fd, {}, {}, 0};
    if (fpDeg(fd) < 0) { out.numCoeffs = FpPoly{Int(1)}; return out; }  // constant infinity
    if (fpDeg(fn) < 0) { out.denCoeffs = FpPoly{Int(1)}; return out; }  // constant zero
    FpPoly g = fpGcd(fn, fd, ctx.p);
    if (fpDeg(g) > 0) {
        fn = fpDiv(fn, g, ctx.p);
        fd = fpDiv(fd, g, ctx.p);
    }
    out.numCoeffs = std::move(fn);
    out.denCoeffs = std::move(fd);
    out.reducedDegree = std::max(fpDeg(out.numCoeffs), fpDeg(out.denCoeffs));
    return out;
}

inline bool hasGoodReduction(const RationalMap& phi, const PrimeContext& ctx) {
    return reduceModP(phi, ctx).reducedDegree == phi.degree();
}

// Nonexpansion certificate weaker than good reduction: the degree-d
// homogenizations of the reduced numerator and denominator have no common
// zero on P^1(F_p). Then max(|F(P)|, |G(P)|) = 1 for every normalized
// rational point P, and since F(X)G(Y) - F(Y)G(X) is divisible by
// (x1 y2 - x2 y1) over the integers, the map is 1-Lipschitz on P^1(Q_p).
// Good reduction (no common zero over the algebraic closure) is the special
// case with a trivial gcd.
inline bool noCommonResidueZero(const RationalMap& phi, const PrimeContext& ctx) {
    ReducedMap r = reduceModP(phi, ctx);
    int d = phi.degree();
    // common zero at infinity = both degree-d coefficients vanish mod p
    if (fpDeg(r.rawNum) < d && fpDeg(r.rawDen) < d) return false;
    auto at = [&](const FpPoly& f, const Int& c) {
        Int acc = 0;
        for (auto it = f.rbegin(); it != f.rend(); ++it) acc = mod_reduce(acc * c + *it, ctx.p);
        return acc;
    };
    for (Int c = 0; c < ctx.p; ++c)
        if (at(r.rawNum, c) == 0 && at(r.rawDen, c) == 0) return false;
    return true;
}

// ---- evaluation ----

inline ProjectivePointExact evaluate(const RationalMap& phi, const ProjectivePointExact& P,
                                     const PrimeContext& ctx) {
    int d = phi.degree();
    // homogenized pair (F, G) of degree d
    Rat F = 0, G = 0, xi = 1;
    std::vector<Rat> ypow(static_cast<std::size_t>(d + 1));
    ypow[static_cast<std::size_t>(d)] = 1;
    for (int i = d - 1; i >= 0; --i)
        ypow[static_cast<std::size_t>(i)] = ypow[static_cast<std::size_t>(i + 1)] * P.y;
    for (int i = 0; i <= d; ++i) {
        F += phi.numCoeff(i) * xi * ypow[static_cast<std::size_t>(i)];
        G += phi.denCoeff(i) * xi * ypow[static_cast<std::size_t>(i)];
        xi *= P.x;
    }
    if (F == 0 && G == 0) throw IndeterminatePoint("both homogeneous forms vanish");
    return ProjectivePointExact(F, G, ctx);
}

// ---- charts ----

enum class Chart { Identity, Inversion };

inline Chart chartFor(const ProjectivePointExact& P, const PrimeContext& ctx) {
    return ballOf(P, 1, ctx).side == BallSide::Finite ? Chart::Identity : Chart::Inversion;
}

inline Rat localCoord(const ProjectivePointExact& P, Chart chart) {
    if (chart == Chart::Identity) {
        if (P.isInfinity()) throw PoleAtPoint("infinity has no Identity-chart coordinate");
        return P.affine();
    }
    if (P.isInfinity()) return Rat(0);
    Rat z = P.affine();
    if (z == 0) throw PoleAtPoint("0 has no Inversion-chart coordinate");
    return Rat(1) / z;
}

namespace detail {

// numerator/denominator of outChart . phi . inChart^{-1} as polynomials in t
inline std::pair<Poly, Poly> chartComposite(const RationalMap& phi, Chart in, Chart out) {
    std::size_t n = static_cast<std::size_t>(phi.degree()) + 1;
    Poly f(n, Rat(0)), g(n, Rat(0));
    for (std::size_t i = 0; i < n; ++i) {
        f[i] = phi.numCoeff(static_cast<int>(i));
        g[i] = phi.denCoeff(static_cast<int>(i));
    }
    if (in == Chart::Inversion) { // z = 1/t: reverse padded coefficients
        std::reverse(f.begin(), f.end());
        std::reverse(g.begin(), g.end());
    }
    if (out == Chart::Inversion) std::swap(f, g);
    return {std::move(f), std::move(g)};
}

} // namespace detail

inline Rat chartDerivative(const RationalMap& phi, const ProjectivePointExact& P,
                           Chart in, Chart out) {
    auto [f, g] = detail::chartComposite(phi, in, out);
    Rat t = localCoord(P, in);
    Rat gv = polyEval(g, t);
    if (gv == 0) throw PoleAtPoint("chart composite has a pole at the point");
    Rat fv = polyEval(f, t);
    Rat fd = polyEval(polyDeriv(f), t);
    Rat gd = polyEval(polyDeriv(g), t);
    return (fd * gv - fv * gd) / (gv * gv);
}

inline Rat chartSecondDerivative(const RationalMap& phi, const ProjectivePointExact& P,
                                 Chart in, Chart out) {
    auto [f, g] = detail::chartComposite(phi, in, out);
    Rat t = localCoord(P, in);
    Rat gv = polyEval(g, t);
    if (gv == 0) throw PoleAtPoint("chart composite has a pole at the point");
    Rat fv = polyEval(f, t);
    Poly f1 = polyDeriv(f), g1 = polyDeriv(g);
    Rat fd = polyEval(f1, t), gd = polyEval(g1, t);
    Rat fdd = polyEval(polyDeriv(f1), t), gdd = polyEval(polyDeriv(g1), t);
    return ((fdd * gv - fv * gdd) * gv - 2 * gd * (fd * gv - fv * gd)) / (gv * gv * gv);
}

// ---- standardization ----

namespace detail {

// substitute z = (a t + b)/(c t + d) into phi, keeping total degree d
inline std::pair<Poly, Poly> precompose(const RationalMap& phi, const Mobius& m) {
    int d = phi.degree();
    Poly lin1{m.b, m.a};  // a t + b
    Poly lin2{m.d, m.c};  // c t + d
    std::vector<Poly> pow1(static_cast<std::size_t>(d + 1)), pow2(pow1.size());
    pow1[0] = Poly{Rat(1)};
    pow2[0] = Poly{Rat(1)};
    for (int i = 1; i <= d; ++i) {
        pow1[static_cast<std::size_t>(i)] = polyMul(pow1[static_cast<std::size_t>(i - 1)], lin1);
        pow2[static_cast<std::size_t>(i)] = polyMul(pow2[static_cast<std::size_t>(i - 1)], lin2);
    }
    Poly num, den;
    for (int i = 0; i <= d; ++i) {
        Poly term = polyMul(pow1[static_cast<std::size_t>(i)], pow2[static_cast<std::size_t>(d - i)]);
        num = polyAdd(num, polyScale(term, phi.numCoeff(i)));
        den = polyAdd(den, polyScale(term, phi.denCoeff(i)));
    }
    return {std::move(num), std::move(den)};
}

} // namespace detail

// g . phi . g^{-1}
inline RationalMap conjugate(const RationalMap& phi, const Mobius& g, const PrimeContext& ctx) {
    auto [num, den] = detail::precompose(phi, g.inverse());
    Poly outNum = polyAdd(polyScale(num, g.a), polyScale(den, g.b));
    Poly outDen = polyAdd(polyScale(num, g.c), polyScale(den, g.d));
    return RationalMap(std::move(outNum), std::move(outDen), ctx);
}

inline bool isStandardShape(const RationalMap& phi) {
    int d = phi.degree();
    return d >= 1 && phi.denCoeff(0) == 0 && phi.numCoeff(d) != 0 &&
           phi.numCoeff(d) == phi.denCoeff(d);
}

// Monic standardized coefficients (a_0..a_d, b_0..b_d) with a_d = b_d = 1, b_0 = 0.
inline std::pair<std::vector<Rat>, std::vector<Rat>> standardCoeffs(const RationalMap& phi) {
    if (!isStandardShape(phi)) throw WrongForm("map is not in standardized shape");
    int d = phi.degree();
    Rat lead = phi.numCoeff(d);
    std::vector<Rat> a, b;
    for (int i = 0; i <= d; ++i) {
        a.push_back(phi.numCoeff(i) / lead);
        b.push_back(phi.denCoeff(i) / lead);
    }
    return {std::move(a), std::move(b)};
}

// Conjugate phi into the shape with psi(0) = infinity, psi(infinity) = 1.
inline std::pair<RationalMap, Mobius> standardize(const RationalMap& phi, const PrimeContext& ctx) {
    if (phi.degree() < 2) throw DegreeTooSmall("standardize requires degree >= 2");
    if (isStandardShape(phi)) return {phi, Mobius{}};

    int d = phi.degree();
    // points with z, phi(z), phi^2(z) not pairwise distinct are periodic of
    // period <= 2; there are at most d^2 + d + 2 of them
    long bound = static_cast<long>(d) * d + d + 3;
    for (long k = 0; k < bound; ++k) {
        ProjectivePointExact P0 = ProjectivePointExact::finite(Rat(k), ctx);
        ProjectivePointExact P1 = evaluate(phi, P0, ctx);
        ProjectivePointExact P2 = evaluate(phi, P1, ctx);
        if (P0 == P1 || P0 == P2 || P1 == P2) continue;

        Rat q0 = P0.affine();
        Mobius g;
        if (P1.isInfinity()) {
            Rat q2 = P2.affine();
            g = Mobius{Rat(1), -q0, Rat(0), q2 - q0};
        } else if (P2.isInfinity()) {
            Rat q1 = P1.affine();
            g = Mobius{Rat(1), -q0, Rat(1), -q1};
        } else {
            Rat q1 = P1.affine(), q2 = P2.affine();
            g = Mobius{q2 - q1, -q0 * (q2 - q1), q2 - q0, -q1 * (q2 - q0)};
        }
        RationalMap psi = conjugate(phi, g, ctx);
        if (!isStandardShape(psi))
            throw error("standardize: conjugated map is not in standard shape");
        return {std::move(psi), g};
    }
    throw NoValidBasePoint("no base point with distinct z0, phi(z0), phi^2(z0)");
}

// Coefficient criterion (5.1) certifying 1-Lipschitz continuity for p = 2,
// on the monic standardized form.
inline bool isOneLipschitzStandardP2Coeffs(const std::vector<Rat>& a, const std::vector<Rat>& b,
                                           const PrimeContext& ctx) {
    if (ctx.p != 2) throw WrongForm("criterion applies only for p = 2");
    Rat A = 0, B = 0;
    for (const auto& c : a) {
        if (valuation(c, ctx) < 0) return false;
        A += c;
    }
    for (std::size_t j = 1; j < b.size(); ++j) {
        if (valuation(b[j], ctx) < 0) return false;
        B += b[j];
    }
    return toResidue(a[0], 1, ctx).value == 1 &&
           toResidue(A, 1, ctx).value == 0 &&
           toResidue(B, 1, ctx).value == 1;
}

inline bool isOneLipschitzStandardP2(const RationalMap& phi, const PrimeContext& ctx) {
    auto [a, b] = standardCoeffs(phi);
    return isOneLipschitzStandardP2Coeffs(a, b, ctx);
}

} // namespace qpdyn
