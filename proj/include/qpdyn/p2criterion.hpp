#pragma once

#include "core.hpp"
#include "ratmap.hpp"

#include <string>
#include <vector>

namespace qpdyn {

// Coefficient sums and the local derivative terms of the standardized monic
// form, all exact. The derivative quotients are left at 0 when their
// denominator vanishes (the congruence checks never consult them then).
struct CriterionTerms {
    int degree;
    Rat A;      // sum a_i
    Rat B;      // sum_{j>=1} b_j
    Rat A1;     // sum a_{2i+1}
    Rat A2;     // sum a_{4i+1}
    Rat A3;     // sum a_{4i+3}
    Rat Ad1;    // sum i a_i
    Rat Bd1;    // sum i b_i
    Rat Ad2;    // sum i(i-1) a_i
    Rat Bd2;    // sum i(i-1) b_i
    Rat eta1;   // (1/phi)'(0)      = b_1 / a_0
    Rat eta2;   // (phi(1/z))'(0)   = a_{d-1} - b_{d-1}
    Rat eta;    // phi'(1)          = (A' B - B' A) / B^2
    Rat xi1;    // (1/phi)''(0)
    Rat xi2;    // (phi(1/z))''(0)
    Rat xi;     // phi''(1)
};

inline CriterionTerms computeTermsCoeffs(const std::vector<Rat>& a, const std::vector<Rat>& b) {
    int d = static_cast<int>(a.size()) - 1;
    if (d < 2 || static_cast<int>(b.size()) != d + 1 || a[static_cast<std::size_t>(d)] != 1 ||
        b[static_cast<std::size_t>(d)] != 1 || b[0] != 0)
        throw WrongForm("expected monic standardized coefficients with b_0 = 0");
    CriterionTerms t{};
    t.degree = d;
    for (int i = 0; i <= d; ++i) {
        const Rat& ai = a[static_cast<std::size_t>(i)];
        const Rat& bi = b[static_cast<std::size_t>(i)];
        t.A += ai;
        if (i >= 1) t.B += bi;
        if (i % 2 == 1) t.A1 += ai;
        if (i % 4 == 1) t.A2 += ai;
        if (i % 4 == 3) t.A3 += ai;
        t.Ad1 += Rat(i) * ai;
        t.Bd1 += Rat(i) * bi;
        t.Ad2 += Rat(i) * Rat(i - 1) * ai;
        t.Bd2 += Rat(i) * Rat(i - 1) * bi;
    }
    const Rat& a0 = a[0];
    t.eta2 = a[static_cast<std::size_t>(d - 1)] - b[static_cast<std::size_t>(d - 1)];
    t.xi2 = 2 * (a[static_cast<std::size_t>(d - 2)] - b[static_cast<std::size_t>(d - 2)]) +
            2 * (b[static_cast<std::size_t>(d - 1)] * b[static_cast<std::size_t>(d - 1)] -
                 a[static_cast<std::size_t>(d - 1)] * b[static_cast<std::size_t>(d - 1)]);
    if (a0 != 0) {
        t.eta1 = b[1] / a0;
        t.xi1 = (2 * b[2] * a0 * a0 - 2 * a[1] * b[1] * a0) / (a0 * a0 * a0);
    }
    if (t.B != 0) {
        t.eta = (t.Ad1 * t.B - t.Bd1 * t.A) / (t.B * t.B);
        t.xi = (t.Ad2 * t.B * t.B - t.Bd2 * t.A * t.B +
                2 * (t.A * t.Bd1 * t.Bd1 - t.Ad1 * t.Bd1 * t.B)) / (t.B * t.B * t.B);
    }
    return t;
}

inline CriterionTerms computeTerms(const RationalMap& phi, const PrimeContext& ctx) {
    if (ctx.p != 2) throw WrongForm("criterion terms are defined for p = 2");
    auto [a, b] = standardCoeffs(phi);
    return computeTermsCoeffs(a, b);
}

struct CongruenceFlag {
    std::string name;
    bool pass;
    std::string residue; // computed residue, or "-" when not 2-integral
};

struct Criterion12Verdict {
    std::vector<CongruenceFlag> flags;
    bool overall;
};

// The eight congruences characterizing good-reduction-style minimality at p = 2.
inline Criterion12Verdict checkCriterion12Coeffs(const std::vector<Rat>& a,
                                                 const std::vector<Rat>& b,
                                                 const PrimeContext& ctx) {
    if (ctx.p != 2) throw WrongForm("criterion applies only for p = 2");
    CriterionTerms t = computeTermsCoeffs(a, b);
    int d = t.degree;

    bool integral = true;
    for (const auto& c : a) integral = integral && valuation(c, ctx) >= 0;
    for (const auto& c : b) integral = integral && valuation(c, ctx) >= 0;

    Criterion12Verdict v{};
    v.flags.push_back({"a_i, b_j integral", integral, integral ? "Z_2" : "-"});

    auto addMod = [&](const std::string& name, const Rat& value, int level, const Int& want) {
        if (!integral) {
            v.flags.push_back({name, false, "-"});
            return;
        }
        Int r = toResidue(value, level, ctx).value;
        v.flags.push_back({name, r == want, r.str()});
    };
    addMod("a_0 = 1 (mod 2)", a[0], 1, 1);
    addMod("B = 1 (mod 2)", t.B, 1, 1);
    addMod("A = 2 (mod 4)", t.A, 2, 2);
    addMod("A_1 = 1 (mod 2)", t.A1, 1, 1);
    addMod("b_1 = 1 (mod 2)", b[1], 1, 1);
    addMod("a_{d-1} - b_{d-1} = 1 (mod 2)", t.eta2, 1, 1);
    Rat final4 = a[0] * b[1] * t.eta2 * (t.A2 - t.A3) * t.B +
                 2 * (b[2] - a[1] + a[static_cast<std::size_t>(d - 2)] -
                      b[static_cast<std::size_t>(d - 2)] + b[static_cast<std::size_t>(d - 1)] + t.A3);
    addMod("final congruence = 1 (mod 4)", final4, 2, 1);

    v.overall = true;
    for (const auto& f : v.flags) v.overall = v.overall && f.pass;
    return v;
}

inline Criterion12Verdict checkCriterion12(const RationalMap& phi, const PrimeContext& ctx) {
    auto [a, b] = standardCoeffs(phi);
    return checkCriterion12Coeffs(a, b, ctx);
}

// (phi^3)'(0) through the eta terms
inline Rat firstDerivativeAt0OfCube(const CriterionTerms& t) {
    return t.eta1 * t.eta2 * t.eta;
}

// (phi^3)''(0) through the eta/xi terms
inline Rat secondDerivativeAt0OfCube(const RationalMap& phi, const PrimeContext& ctx) {
    CriterionTerms t = computeTerms(phi, ctx);
    return t.eta * t.eta2 * t.xi1 + t.eta * t.eta1 * t.eta1 * t.xi2 +
           t.xi * t.eta1 * t.eta1 * t.eta2 * t.eta2;
}

// Independent route: exact second-order chain rule along 0 -> infinity -> 1,
// using generic rational-function differentiation in charts.
inline Rat secondDerivativeAt0OfCubeChainRule(const RationalMap& phi, const PrimeContext& ctx) {
    if (!isStandardShape(phi)) throw WrongForm("map is not in standardized shape");
    ProjectivePointExact z0 = ProjectivePointExact::finite(Rat(0), ctx);
    ProjectivePointExact zInf = ProjectivePointExact::infinity(ctx);
    ProjectivePointExact z1 = ProjectivePointExact::finite(Rat(1), ctx);
    // u = 1/phi at 0, v = phi(1/t) at 0, w = phi at 1
    Rat u1 = chartDerivative(phi, z0, Chart::Identity, Chart::Inversion);
    Rat u2 = chartSecondDerivative(phi, z0, Chart::Identity, Chart::Inversion);
    Rat v1 = chartDerivative(phi, zInf, Chart::Inversion, Chart::Identity);
    Rat v2 = chartSecondDerivative(phi, zInf, Chart::Inversion, Chart::Identity);
    Rat w1 = chartDerivative(phi, z1, Chart::Identity, Chart::Identity);
    Rat w2 = chartSecondDerivative(phi, z1, Chart::Identity, Chart::Identity);
    Rat g1 = v1 * u1;
    Rat g2 = v2 * u1 * u1 + v1 * u2;
    return w2 * g1 * g1 + w1 * g2;
}

} // namespace qpdyn
