#pragma once

#include "core.hpp"

#include <algorithm>
#include <vector>

namespace qpdyn {

// Homogeneous pair [x : y], canonicalized so that min(v_p(x), v_p(y)) = 0
// and the first unit coordinate equals 1.
struct ProjectivePointExact {
    Rat x;
    Rat y;

    ProjectivePointExact(Rat xx, Rat yy, const PrimeContext& ctx)
        : x(std::move(xx)), y(std::move(yy)) {
        if (x == 0 && y == 0) throw ConfigError("[0:0] is not a projective point");
        val_t vx = valuation(x, ctx), vy = valuation(y, ctx);
        val_t v = std::min(vx, vy);
        if (v != 0) {
            Rat scale = (v > 0) ? Rat(1) / pow_p(ctx, v) : Rat(pow_p(ctx, -v));
            x *= scale; y *= scale;
            vx = valuation(x, ctx); vy = valuation(y, ctx);
        }
        Rat unit = (vx == 0) ? x : y;
        x /= unit; y /= unit;
    }

    static ProjectivePointExact finite(const Rat& z, const PrimeContext& ctx) {
        return ProjectivePointExact(z, 1, ctx);
    }
    static ProjectivePointExact infinity(const PrimeContext& ctx) {
        return ProjectivePointExact(1, 0, ctx);
    }

    bool isInfinity() const { return y == 0; }
    // affine coordinate; only valid when not infinity
    Rat affine() const { return x / y; }

    bool operator==(const ProjectivePointExact& o) const {
        return x * o.y == o.x * y;
    }

private:
    static Int pow_p(const PrimeContext& ctx, val_t n) {
        Int m = 1;
        for (val_t i = 0; i < n; ++i) m *= ctx.p;
        return m;
    }
};

enum class BallSide { Finite, InfinitySide };

// Level-n ball of P^1(Q_p). Finite side: B_n(i) with rep i in [0, p^n).
// Infinity side: B_n(1/i) with rep i in [0, p^n), p | i, and 1/0 = infinity.
struct ProjectiveBall {
    int level;
    BallSide side;
    Int rep;

    bool operator==(const ProjectiveBall& o) const {
        return level == o.level && side == o.side && rep == o.rep;
    }

    std::string label() const {
        return side == BallSide::Finite ? rep.str() : "~" + rep.str();
    }

    // Canonical representative point: the label read as an exact rational.
    ProjectivePointExact representative(const PrimeContext& ctx) const {
        if (side == BallSide::Finite) return ProjectivePointExact(Rat(rep), 1, ctx);
        if (rep == 0) return ProjectivePointExact::infinity(ctx);
        return ProjectivePointExact(1, Rat(rep), ctx);
    }
};

// -log_p of the spherical distance; val_inf iff P == Q.
inline val_t sphericalDistance(const ProjectivePointExact& P,
                               const ProjectivePointExact& Q,
                               const PrimeContext& ctx) {
    // canonical pairs have max(|x|,|y|) = 1, so only the cross term remains
    return valuation(P.x * Q.y - Q.x * P.y, ctx);
}

inline ProjectiveBall ballOf(const ProjectivePointExact& P, int n, const PrimeContext& ctx) {
    if (!P.isInfinity()) {
        Rat z = P.affine();
        if (valuation(z, ctx) >= 0)
            return ProjectiveBall{n, BallSide::Finite, toResidue(z, n, ctx).value};
        return ProjectiveBall{n, BallSide::InfinitySide, toResidue(Rat(1) / z, n, ctx).value};
    }
    return ProjectiveBall{n, BallSide::InfinitySide, 0};
}

// Deterministic census: finite reps 0..p^n-1, then infinity-side reps 0, p, 2p, ...
inline std::vector<ProjectiveBall> enumerateBalls(int n, const PrimeContext& ctx) {
    if (n > ctx.maxLevel) throw ConfigError("level exceeds maxLevel");
    std::vector<ProjectiveBall> out;
    Int pn = ctx.pPow(n);
    for (Int i = 0; i < pn; ++i) out.push_back({n, BallSide::Finite, i});
    for (Int i = 0; i < pn; i += ctx.p) out.push_back({n, BallSide::InfinitySide, i});
    return out;
}

// Index of a ball in the enumerateBalls(n, ctx) order.
inline std::size_t ballIndex(const ProjectiveBall& B, const PrimeContext& ctx) {
    Int pn = ctx.pPow(B.level);
    if (B.side == BallSide::Finite) return static_cast<std::size_t>(B.rep);
    return static_cast<std::size_t>(pn + B.rep / ctx.p);
}

inline std::vector<ProjectiveBall> subBalls(const ProjectiveBall& B, const PrimeContext& ctx) {
    if (B.level + 1 > ctx.maxLevel) throw ConfigError("subBalls would exceed maxLevel");
    Int pn = ctx.pPow(B.level);
    std::vector<ProjectiveBall> out;
    for (Int t = 0; t < ctx.p; ++t)
        out.push_back({B.level + 1, B.side, B.rep + t * pn});
    return out;
}

} // namespace qpdyn
