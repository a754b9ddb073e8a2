#pragma once

#include "core.hpp"

#include <vector>

namespace qpdyn {

// Dense polynomial helpers. Coefficient order is ascending (c[0] + c[1] z + ...).
using Poly = std::vector<Rat>;

inline int polyDeg(const Poly& f) {
    for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i)
        if (f[static_cast<std::size_t>(i)] != 0) return i;
    return -1; // zero polynomial
}

inline void polyTrim(Poly& f) {
    f.resize(static_cast<std::size_t>(polyDeg(f) + 1));
}

inline Poly polyMul(const Poly& a, const Poly& b) {
    if (polyDeg(a) < 0 || polyDeg(b) < 0) return {};
    Poly c(a.size() + b.size() - 1, Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] += a[i] * b[j];
    polyTrim(c);
    return c;
}

inline Poly polyAdd(const Poly& a, const Poly& b) {
    Poly c(std::max(a.size(), b.size()), Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) c[i] += b[i];
    polyTrim(c);
    return c;
}

inline Poly polyScale(const Poly& a, const Rat& s) {
    Poly c = a;
    for (auto& v : c) v *= s;
    polyTrim(c);
    return c;
}

inline Poly polySub(const Poly& a, const Poly& b) {
    return polyAdd(a, polyScale(b, Rat(-1)));
}

inline Rat polyEval(const Poly& f, const Rat& z) {
    Rat acc = 0;
    for (auto it = f.rbegin(); it != f.rend(); ++it) acc = acc * z + *it;
    return acc;
}

inline Poly polyDeriv(const Poly& f) {
    if (f.size() <= 1) return {};
    Poly d(f.size() - 1);
    for (std::size_t i = 1; i < f.size(); ++i) d[i - 1] = f[i] * Rat(static_cast<unsigned>(i));
    return d;
}

// remainder of a by b (b nonzero), over Q
inline Poly polyRem(Poly a, const Poly& b) {
    int db = polyDeg(b);
    polyTrim(a);
    while (polyDeg(a) >= db) {
        int da = polyDeg(a);
        Rat q = a[static_cast<std::size_t>(da)] / b[static_cast<std::size_t>(db)];
        for (int i = 0; i <= db; ++i)
            a[static_cast<std::size_t>(da - db + i)] -= q * b[static_cast<std::size_t>(i)];
        polyTrim(a);
    }
    return a;
}

inline Poly polyGcd(Poly a, Poly b) {
    polyTrim(a); polyTrim(b);
    while (polyDeg(b) >= 0) {
        Poly r = polyRem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    if (polyDeg(a) >= 0) {
        Rat lead = a[static_cast<std::size_t>(polyDeg(a))];
        for (auto& c : a) c /= lead; // monic
    }
    return a;
}

// exact division (throws if not divisible)
inline Poly polyDiv(Poly a, const Poly& b) {
    int db = polyDeg(b);
    if (db < 0) throw ZeroDenominator("polynomial division by zero");
    Poly q(a.size(), Rat(0));
    polyTrim(a);
    while (polyDeg(a) >= db) {
        int da = polyDeg(a);
        Rat c = a[static_cast<std::size_t>(da)] / b[static_cast<std::size_t>(db)];
        q[static_cast<std::size_t>(da - db)] = c;
        for (int i = 0; i <= db; ++i)
            a[static_cast<std::size_t>(da - db + i)] -= c * b[static_cast<std::size_t>(i)];
        polyTrim(a);
    }
    if (polyDeg(a) >= 0) throw error("polyDiv: inexact division");
    polyTrim(q);
    return q;
}

// ---- polynomials over F_p, coefficients as Int in [0, p) ----
using FpPoly = std::vector<Int>;

inline int fpDeg(const FpPoly& f) {
    for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i)
        if (f[static_cast<std::size_t>(i)] != 0) return i;
    return -1;
}

inline void fpTrim(FpPoly& f) { f.resize(static_cast<std::size_t>(fpDeg(f) + 1)); }

inline FpPoly fpRem(FpPoly a, const FpPoly& b, const Int& p) {
    int db = fpDeg(b);
    Int inv = inv_mod_int(b[static_cast<std::size_t>(db)], p);
    fpTrim(a);
    while (fpDeg(a) >= db) {
        int da = fpDeg(a);
        Int q = mod_reduce(a[static_cast<std::size_t>(da)] * inv, p);
        for (int i = 0; i <= db; ++i) {
            auto& c = a[static_cast<std::size_t>(da - db + i)];
            c = mod_reduce(c - q * b[static_cast<std::size_t>(i)], p);
        }
        fpTrim(a);
    }
    return a;
}

inline FpPoly fpGcd(FpPoly a, FpPoly b, const Int& p) {
    fpTrim(a); fpTrim(b);
    while (fpDeg(b) >= 0) {
        FpPoly r = fpRem(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (fpDeg(a) >= 0) {
        Int inv = inv_mod_int(a[static_cast<std::size_t>(fpDeg(a))], p);
        for (auto& c : a) c = mod_reduce(c * inv, p);
    }
    return a;
}

inline FpPoly fpDiv(FpPoly a, const FpPoly& b, const Int& p) {
    int db = fpDeg(b);
    if (db < 0) throw ZeroDenominator("fp polynomial division by zero");
    Int inv = inv_mod_int(b[static_cast<std::size_t>(db)], p);
    FpPoly q(a.size(), Int(0));
    fpTrim(a);
    while (fpDeg(a) >= db) {
        int da = fpDeg(a);
        Int c = mod_reduce(a[static_cast<std::size_t>(da)] * inv, p);
        q[static_cast<std::size_t>(da - db)] = c;
        for (int i = 0; i <= db; ++i) {
            auto& ai = a[static_cast<std::size_t>(da - db + i)];
            ai = mod_reduce(ai - c * b[static_cast<std::size_t>(i)], p);
        }
        fpTrim(a);
    }
    if (fpDeg(a) >= 0) throw error("fpDiv: inexact division");
    fpTrim(q);
    return q;
}

} // namespace qpdyn
