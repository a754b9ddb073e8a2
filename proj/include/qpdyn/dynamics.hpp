#pragma once

#include "core.hpp"
#include "projective.hpp"
#include "ratmap.hpp"

#include <optional>
#include <vector>

namespace qpdyn {

inline bool hasLipschitzCertificate(const RationalMap& phi, const PrimeContext& ctx) {
    if (noCommonResidueZero(phi, ctx)) return true;
    return ctx.p == 2 && isStandardShape(phi) && isOneLipschitzStandardP2(phi, ctx);
}

// The induced map of phi on the level-n balls, as a total transition function
// over the enumerateBalls(n) order.
struct LevelSystem {
    int level;
    std::vector<std::size_t> transition;
};

inline ProjectiveBall imageBall(const RationalMap& phi, const ProjectiveBall& B,
                                const PrimeContext& ctx) {
    return ballOf(evaluate(phi, B.representative(ctx), ctx), B.level, ctx);
}

inline LevelSystem buildLevelSystem(const RationalMap& phi, int n, const PrimeContext& ctx,
                                    bool consistencyProbe = false) {
    if (!hasLipschitzCertificate(phi, ctx))
        throw NotCertifiedLipschitz("map carries no 1-Lipschitz certificate");
    auto balls = enumerateBalls(n, ctx);
    LevelSystem sys{n, {}};
    sys.transition.reserve(balls.size());
    Int pn = ctx.pPow(n);
    for (const auto& B : balls) {
        ProjectiveBall img = imageBall(phi, B, ctx);
        if (consistencyProbe) {
            // second representative: label shifted by p^n inside the same ball
            ProjectivePointExact alt = (B.side == BallSide::Finite)
                ? ProjectivePointExact::finite(Rat(B.rep + pn), ctx)
                : ProjectivePointExact(1, Rat(B.rep + pn), ctx);
            if (!(ballOf(evaluate(phi, alt, ctx), n, ctx) == img))
                throw RepresentativeDisagreement("induced image depends on the representative");
        }
        sys.transition.push_back(ballIndex(img, ctx));
    }
    return sys;
}

// Functional-graph decomposition: cycles in deterministic order (by smallest
// ball index, rotated to start at it) plus, for each ball, the cycle it
// eventually reaches.
struct FunctionalGraph {
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<std::size_t> eventualCycle; // ball index -> cycle id
    std::vector<bool> onCycle;
};

inline FunctionalGraph cyclesOf(const std::vector<std::size_t>& transition) {
    std::size_t n = transition.size();
    FunctionalGraph fg;
    fg.eventualCycle.assign(n, 0);
    fg.onCycle.assign(n, false);
    std::vector<int> state(n, 0); // 0 unvisited, 1 in progress, 2 done
    for (std::size_t start = 0; start < n; ++start) {
        if (state[start] != 0) continue;
        std::vector<std::size_t> path;
        std::size_t v = start;
        while (state[v] == 0) {
            state[v] = 1;
            path.push_back(v);
            v = transition[v];
        }
        std::size_t cycleId;
        if (state[v] == 1) {
            // new cycle: v closes it
            auto it = std::find(path.begin(), path.end(), v);
            std::vector<std::size_t> cyc(it, path.end());
            std::size_t minPos = static_cast<std::size_t>(
                std::min_element(cyc.begin(), cyc.end()) - cyc.begin());
            std::rotate(cyc.begin(), cyc.begin() + static_cast<std::ptrdiff_t>(minPos), cyc.end());
            cycleId = fg.cycles.size();
            for (std::size_t u : cyc) fg.onCycle[u] = true;
            fg.cycles.push_back(std::move(cyc));
        } else {
            cycleId = fg.eventualCycle[v];
        }
        for (std::size_t u : path) {
            fg.eventualCycle[u] = cycleId;
            state[u] = 2;
        }
    }
    // deterministic: order cycles by smallest member
    std::vector<std::size_t> order(fg.cycles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fg.cycles[a][0] < fg.cycles[b][0];
    });
    std::vector<std::size_t> rank(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    std::vector<std::vector<std::size_t>> sorted;
    for (std::size_t i : order) sorted.push_back(std::move(fg.cycles[i]));
    fg.cycles = std::move(sorted);
    for (auto& c : fg.eventualCycle) c = rank[c];
    return fg;
}

enum class CycleClass { Grows, Splits, GrowsTails, PartiallySplits };

inline const char* cycleClassName(CycleClass c) {
    switch (c) {
        case CycleClass::Grows: return "grows";
        case CycleClass::Splits: return "splits";
        case CycleClass::GrowsTails: return "grows-tails";
        case CycleClass::PartiallySplits: return "partially-splits";
    }
    return "?";
}

struct CycleNode {
    int level;
    std::vector<ProjectiveBall> balls;
    Int alphaModP;
    std::optional<Int> betaModP; // defined only when alpha == 1 (mod p)
    CycleClass classification;
    long ell = 1; // multiplicative order of alpha, for PartiallySplits

    std::size_t length() const { return balls.size(); }
};

inline long multiplicativeOrder(const Int& a, const Int& p) {
    Int x = mod_reduce(a, p);
    long ord = 1;
    Int acc = x;
    while (acc != 1) {
        acc = mod_reduce(acc * x, p);
        ++ord;
    }
    return ord;
}

// Replace a point by the canonical representative of its level-W ball. For a
// certified nonexpanding map the orbit and its chart derivatives only need to
// be tracked modulo p^W; without this, exact orbit coordinates grow
// exponentially with the cycle length.
inline ProjectivePointExact truncatePoint(const ProjectivePointExact& P, int level,
                                          const PrimeContext& ctx) {
    return ballOf(P, level, ctx).representative(ctx);
}

// alpha / beta invariants and the four-way classification of a level-n cycle.
inline CycleNode analyzeCycle(const RationalMap& phi, const std::vector<ProjectiveBall>& cycle,
                              const PrimeContext& ctx) {
    int n = cycle.front().level;
    std::size_t K = cycle.size();
    // alpha is needed mod p and delta mod p^{n+1}; each step is 1-Lipschitz
    // with p-integral chart derivative, so working mod p^{n+2} is exact enough
    int W = n + 2;
    ProjectivePointExact P = cycle.front().representative(ctx);
    Chart chart0 = chartFor(P, ctx);
    Rat alpha = 1;
    Chart in = chart0;
    ProjectivePointExact cur = P;
    for (std::size_t j = 0; j < K; ++j) {
        ProjectivePointExact next = truncatePoint(evaluate(phi, cur, ctx), W, ctx);
        Chart out = chartFor(next, ctx);
        alpha *= chartDerivative(phi, cur, in, out);
        alpha = truncateRat(alpha, W, ctx);
        cur = next;
        in = out;
    }
    if (valuation(alpha, ctx) < 0)
        throw error("cycle multiplier is not p-integral; input is not 1-Lipschitz");

    CycleNode node{n, cycle, toResidue(alpha, 1, ctx).value, std::nullopt,
                   CycleClass::Grows, 1};

    if (node.alphaModP == 1) {
        Rat delta = localCoord(cur, chart0) - localCoord(P, chart0);
        val_t v = valuation(delta, ctx);
        if (v < n) throw InsufficientValuation("phi^K does not fix the cycle ball");
        Int beta = (delta == 0) ? Int(0)
                                : toResidue(delta / Rat(ctx.pPow(n)), 1, ctx).value;
        node.betaModP = beta;
        node.classification = (beta != 0) ? CycleClass::Grows : CycleClass::Splits;
    } else if (node.alphaModP == 0) {
        node.classification = CycleClass::GrowsTails;
    } else {
        node.classification = CycleClass::PartiallySplits;
        node.ell = multiplicativeOrder(node.alphaModP, ctx.p);
    }
    return node;
}

// Cycles of the level-(n+1) system restricted to the sub-balls of a cycle,
// analyzed and checked against the predicted lift-length multiset.
inline std::vector<CycleNode> liftCycle(const RationalMap& phi, const CycleNode& node,
                                        const PrimeContext& ctx) {
    int n1 = node.level + 1;
    if (n1 > ctx.maxLevel) throw ConfigError("lift would exceed maxLevel");
    std::vector<ProjectiveBall> subs;
    for (const auto& B : node.balls)
        for (const auto& S : subBalls(B, ctx)) subs.push_back(S);

    // local transition on the sub-balls
    std::vector<std::size_t> globalIdx(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) globalIdx[i] = ballIndex(subs[i], ctx);
    std::vector<std::size_t> local(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        std::size_t g = ballIndex(imageBall(phi, subs[i], ctx), ctx);
        auto it = std::find(globalIdx.begin(), globalIdx.end(), g);
        if (it == globalIdx.end())
            throw error("sub-ball image escapes the cycle's clopen set");
        local[i] = static_cast<std::size_t>(it - globalIdx.begin());
    }

    FunctionalGraph fg = cyclesOf(local);
    std::vector<CycleNode> lifts;
    for (const auto& cyc : fg.cycles) {
        std::vector<ProjectiveBall> balls;
        for (std::size_t i : cyc) balls.push_back(subs[i]);
        // canonical rotation: smallest global ball index first
        std::size_t minPos = 0;
        for (std::size_t i = 1; i < cyc.size(); ++i)
            if (globalIdx[cyc[i]] < globalIdx[cyc[minPos]]) minPos = i;
        std::rotate(balls.begin(), balls.begin() + static_cast<std::ptrdiff_t>(minPos), balls.end());
        lifts.push_back(analyzeCycle(phi, balls, ctx));
    }
    std::sort(lifts.begin(), lifts.end(), [&](const CycleNode& a, const CycleNode& b) {
        return ballIndex(a.balls[0], ctx) < ballIndex(b.balls[0], ctx);
    });

    // predicted lift-length multiset, per classification
    std::size_t K = node.length();
    std::size_t p = static_cast<std::size_t>(ctx.p);
    auto mismatch = [&] { throw ClassificationMismatch("observed lifts contradict classification"); };
    switch (node.classification) {
        case CycleClass::Grows:
            if (lifts.size() != 1 || lifts[0].length() != p * K) mismatch();
            break;
        case CycleClass::Splits:
            if (lifts.size() != p) mismatch();
            for (const auto& l : lifts) if (l.length() != K) mismatch();
            break;
        case CycleClass::GrowsTails:
            if (lifts.size() != 1 || lifts[0].length() != K) mismatch();
            break;
        case CycleClass::PartiallySplits: {
            std::size_t ell = static_cast<std::size_t>(node.ell);
            std::size_t sameLen = 0, longLen = 0;
            for (const auto& l : lifts) {
                if (l.length() == K) ++sameLen;
                else if (l.length() == K * ell) ++longLen;
                else mismatch();
            }
            if (sameLen != 1 || longLen != (p - 1) / ell) mismatch();
            break;
        }
    }
    return lifts;
}

inline bool checkMinimalAtLevel(const RationalMap& phi, int n, const PrimeContext& ctx) {
    LevelSystem sys = buildLevelSystem(phi, n, ctx);
    FunctionalGraph fg = cyclesOf(sys.transition);
    return fg.cycles.size() == 1 && fg.cycles[0].size() == sys.transition.size();
}

struct MinimalThm11Verdict {
    bool transitiveLevel1;
    bool derivCond;
    bool valuationCond;
    bool extraCondP23;
    bool minimal;
};

namespace detail {

// derivative of phi^m at 0 via per-step chart chain rule; the orbit and the
// accumulated derivative are tracked modulo p^4, exact for everything the
// minimality conditions consult (valuations up to 2, derivative mod p)
inline std::pair<Rat, ProjectivePointExact> iterateDerivativeAtZero(
        const RationalMap& phi, long m, const PrimeContext& ctx) {
    constexpr int W = 4;
    ProjectivePointExact cur = ProjectivePointExact::finite(Rat(0), ctx);
    Chart in = Chart::Identity;
    Rat deriv = 1;
    for (long j = 0; j < m; ++j) {
        ProjectivePointExact next = truncatePoint(evaluate(phi, cur, ctx), W, ctx);
        Chart out = chartFor(next, ctx);
        deriv *= chartDerivative(phi, cur, in, out);
        deriv = truncateRat(deriv, W, ctx);
        cur = next;
        in = out;
    }
    return {deriv, cur};
}

inline ProjectivePointExact iterate(const RationalMap& phi, ProjectivePointExact P, long m,
                                    const PrimeContext& ctx) {
    constexpr int W = 4;
    for (long j = 0; j < m; ++j) P = truncatePoint(evaluate(phi, P, ctx), W, ctx);
    return P;
}

} // namespace detail

// Minimality on the whole projective line via the three-condition criterion.
inline MinimalThm11Verdict checkMinimalThm11(const RationalMap& phi, const PrimeContext& ctx) {
    if (phi.degree() < 2) throw DegreeTooSmall("criterion requires degree >= 2");
    if (!noCommonResidueZero(phi, ctx))
        throw BadReduction("reduced forms share a rational zero; map is not certified nonexpanding");

    MinimalThm11Verdict v{};
    LevelSystem sys = buildLevelSystem(phi, 1, ctx);
    FunctionalGraph fg = cyclesOf(sys.transition);
    v.transitiveLevel1 = fg.cycles.size() == 1 && fg.cycles[0].size() == sys.transition.size();

    long m = static_cast<long>(ctx.p) + 1;
    auto [deriv, end] = detail::iterateDerivativeAtZero(phi, m, ctx);
    v.derivCond = valuation(deriv, ctx) >= 0 && toResidue(deriv, 1, ctx).value == 1;
    v.valuationCond = !end.isInfinity() && valuation(end.affine(), ctx) == 1;

    if (ctx.p == 2 || ctx.p == 3) {
        ProjectivePointExact w = detail::iterate(phi, end, m * (static_cast<long>(ctx.p) - 1), ctx);
        // w = phi^{(p+1)p}(0)
        v.extraCondP23 = !w.isInfinity() && valuation(w.affine(), ctx) == 2;
    } else {
        v.extraCondP23 = true;
    }
    v.minimal = v.transitiveLevel1 && v.derivCond && v.valuationCond && v.extraCondP23;
    return v;
}

// Minimality via transitivity at the deciding finite level.
inline bool checkMinimalLevels(const RationalMap& phi, const PrimeContext& ctx) {
    if (phi.degree() < 2) throw DegreeTooSmall("criterion requires degree >= 2");
    if (!noCommonResidueZero(phi, ctx))
        throw BadReduction("reduced forms share a rational zero; map is not certified nonexpanding");
    int level = (ctx.p == 2 || ctx.p == 3) ? 3 : 2;
    return checkMinimalAtLevel(phi, level, ctx);
}

} // namespace qpdyn
