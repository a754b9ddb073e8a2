#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <limits>
#include <stdexcept>
#include <string>

namespace qpdyn {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// -log_p scale for distances and valuations; val_inf marks v_p(0).
using val_t = long;
inline constexpr val_t val_inf = std::numeric_limits<val_t>::max();

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonUnitDenominator : error { using error::error; };
struct NotInvertible : error { using error::error; };
struct ParseError : error { using error::error; };
struct ZeroDenominator : error { using error::error; };
struct NotNormalizable : error { using error::error; };
struct IndeterminatePoint : error { using error::error; };
struct PoleAtPoint : error { using error::error; };
struct NoValidBasePoint : error { using error::error; };
struct WrongForm : error { using error::error; };
struct NotCertifiedLipschitz : error { using error::error; };
struct RepresentativeDisagreement : error { using error::error; };
struct InsufficientValuation : error { using error::error; };
struct ClassificationMismatch : error { using error::error; };
struct BadReduction : error { using error::error; };
struct DegreeTooSmall : error { using error::error; };
struct ConfigError : error { using error::error; };

inline bool is_prime(const Int& p) {
    if (p < 2) return false;
    for (Int d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

struct PrimeContext {
    Int p;
    int maxLevel;

    PrimeContext(Int prime, int max_level) : p(std::move(prime)), maxLevel(max_level) {
        if (!is_prime(p)) throw ConfigError("p = " + p.str() + " is not prime");
        if (maxLevel < 3) throw ConfigError("maxLevel must be >= 3");
    }

    Int pPow(int n) const {
        Int m = 1;
        for (int i = 0; i < n; ++i) m *= p;
        return m;
    }
};

inline val_t valuation_int(Int x, const Int& p) {
    if (x == 0) return val_inf;
    val_t v = 0;
    while (x % p == 0) { x /= p; ++v; }
    return v;
}

inline val_t valuation(const Rat& x, const PrimeContext& ctx) {
    if (x == 0) return val_inf;
    return valuation_int(numerator(x), ctx.p) - valuation_int(denominator(x), ctx.p);
}

inline Int mod_reduce(const Int& x, const Int& m) {
    Int r = x % m;
    if (r < 0) r += m;
    return r;
}

// value in [0, p^level)
struct Residue {
    int level;
    Int modulus;
    Int value;

    Residue(int n, Int mod, Int val)
        : level(n), modulus(std::move(mod)), value(mod_reduce(val, modulus)) {}

    bool operator==(const Residue& o) const {
        return level == o.level && modulus == o.modulus && value == o.value;
    }
};

inline Int inv_mod_int(const Int& a, const Int& m) {
    // extended Euclid
    Int r0 = m, r1 = mod_reduce(a, m);
    Int t0 = 0, t1 = 1;
    while (r1 != 0) {
        Int q = r0 / r1;
        Int r2 = r0 - q * r1; r0 = r1; r1 = r2;
        Int t2 = t0 - q * t1; t0 = t1; t1 = t2;
    }
    if (r0 != 1) throw NotInvertible("residue not invertible");
    return mod_reduce(t0, m);
}

inline Residue invMod(const Residue& r) {
    return Residue(r.level, r.modulus, inv_mod_int(r.value, r.modulus));
}

inline Residue toResidue(const Rat& x, int n, const PrimeContext& ctx) {
    Int m = ctx.pPow(n);
    Int den = denominator(x);
    if (den % ctx.p == 0)
        throw NonUnitDenominator("denominator of " + x.str() + " is not a p-adic unit");
    return Residue(n, m, mod_reduce(numerator(x), m) * inv_mod_int(den, m));
}

// Reduce a p-integral rational modulo p^n; non-integral values pass through
// unchanged (callers detect them by valuation).
inline Rat truncateRat(const Rat& x, int n, const PrimeContext& ctx) {
    if (x == 0 || valuation(x, ctx) < 0) return x;
    return Rat(toResidue(x, n, ctx).value);
}

} // namespace qpdyn
