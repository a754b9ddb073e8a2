// Acceptance gate: one line per criterion, nonzero exit if any fails.
#include <qpdyn/parser.hpp>
#include <qpdyn/decomposition.hpp>
#include <qpdyn/search.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace qpdyn;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point from) {
    return std::chrono::duration<double>(Clock::now() - from).count();
}

RationalMap randGoodMap(std::mt19937& rng, int d, const PrimeContext& ctx) {
    for (;;) {
        Poly num(static_cast<std::size_t>(d) + 1), den(static_cast<std::size_t>(d) + 1);
        for (auto& c : num) c = Rat(Int(rng() % 41) - 20);
        for (auto& c : den) c = Rat(Int(rng() % 41) - 20);
        if (polyDeg(num) < 0 || polyDeg(den) < 0) continue;
        RationalMap phi(num, den, ctx);
        if (phi.degree() == d && hasGoodReduction(phi, ctx)) return phi;
    }
}

// derivative of phi^m along the orbit of P, charts chained per step,
// everything truncated at level W (exact mod p^W under the 1-Lipschitz bound)
std::pair<Rat, ProjectivePointExact> orbitDerivative(const RationalMap& phi,
                                                     ProjectivePointExact P, long m, int W,
                                                     const PrimeContext& ctx) {
    Chart in = chartFor(P, ctx);
    Rat deriv = 1;
    for (long j = 0; j < m; ++j) {
        ProjectivePointExact next = truncatePoint(evaluate(phi, P, ctx), W, ctx);
        Chart out = chartFor(next, ctx);
        deriv *= chartDerivative(phi, P, in, out);
        deriv = truncateRat(deriv, W, ctx);
        P = next;
        in = out;
    }
    return {deriv, P};
}

void expand(const ProjectiveBall& B, int maxLevel, const PrimeContext& ctx,
            std::multiset<std::string>& out) {
    if (B.level == maxLevel) {
        out.insert(B.label());
        return;
    }
    for (const auto& S : subBalls(B, ctx)) expand(S, maxLevel, ctx, out);
}

// criterion 1: the worked cubic over Q_3 behaves exactly as documented
bool crit1() {
    auto t0 = Clock::now();
    PrimeContext ctx{Int(3), 5};
    auto phi = parseMap("-(2z^2+2z+1)/(z^3-3z^2+z+1)", ctx);
    bool ok = phi.degree() == 3;

    ReducedMap r = reduceModP(phi, ctx);
    ok = ok && r.rawNum == FpPoly{Int(2), Int(1), Int(1)};
    ok = ok && r.rawDen == FpPoly{Int(1), Int(1), Int(0), Int(1)};
    ok = ok && r.reducedDegree == 1;
    ok = ok && !hasGoodReduction(phi, ctx);
    ok = ok && noCommonResidueZero(phi, ctx);

    // level-1 dynamics: one 4-cycle through 1, infinity, 0, 2
    LevelSystem sys = buildLevelSystem(phi, 1, ctx, true);
    FunctionalGraph fg = cyclesOf(sys.transition);
    ok = ok && fg.cycles.size() == 1 && fg.cycles[0].size() == 4;
    auto P1 = ProjectivePointExact::finite(Rat(1), ctx);
    ok = ok && evaluate(phi, P1, ctx).isInfinity();
    ok = ok && evaluate(phi, ProjectivePointExact::infinity(ctx), ctx).affine() == 0;
    ok = ok && toResidue(evaluate(phi, ProjectivePointExact::finite(Rat(0), ctx), ctx).affine(),
                         1, ctx).value == 2;

    auto [d4, p4] = orbitDerivative(phi, P1, 4, 5, ctx);
    ok = ok && toResidue(d4, 1, ctx).value == 1;
    ok = ok && !p4.isInfinity() && toResidue(p4.affine(), 3, ctx).value == 7;
    auto [d12, p12] = orbitDerivative(phi, P1, 12, 5, ctx);
    (void)d12;
    ok = ok && !p12.isInfinity() && toResidue(p12.affine(), 3, ctx).value == 19;

    ok = ok && checkMinimalThm11(phi, ctx).minimal;
    ok = ok && checkMinimalLevels(phi, ctx);
    return ok && seconds(t0) < 1.0;
}

// criterion 2: the worked quadratic over Q_3
bool crit2() {
    auto t0 = Clock::now();
    PrimeContext ctx{Int(3), 4};
    auto phi = parseMap("(2z+3)/((z-1)(z-2))", ctx);
    bool ok = chartDerivative(phi, ProjectivePointExact::finite(Rat(0), ctx),
                              Chart::Identity, Chart::Identity) == Rat(13) / 4;

    ProjectiveBall B = ballOf(ProjectivePointExact::finite(Rat(0), ctx), 3, ctx);
    std::vector<std::string> orbit{B.label()};
    for (int i = 0; i < 3; ++i) {
        B = imageBall(phi, B, ctx);
        orbit.push_back(B.label());
    }
    ok = ok && orbit == std::vector<std::string>{"0", "15", "3", "18"};

    DecompositionReport rep = decompose(phi, ctx);
    ok = ok && rep.periodicOrbits.empty() && rep.unresolved.empty();
    ok = ok && rep.components.size() == 1;
    if (ok) {
        const auto& c = rep.components[0];
        ok = c.balls.size() == 1 && c.balls[0].label() == "0" && c.k == 1 && c.ell == 1
             && c.observedLengths == std::vector<std::size_t>{1, 3, 9, 27};
        ok = ok && odometerStructure(c, ctx) == std::vector<Int>{Int(1), Int(1), Int(3), Int(9)};
    }
    ok = ok && rep.basin.size() == 81;
    for (const auto& [label, target] : rep.basin) ok = ok && target == "component:0";
    return ok && seconds(t0) < 1.0;
}

// criterion 3: the degree-4 coefficient search reproduces the frozen table
bool crit3() {
    auto t0 = Clock::now();
    PrimeContext ctx{Int(2), 4};
    SearchSpec spec{Int(2), 4, 4, SearchMode::Criterion12};
    auto hits = runSearch(spec, ctx);
    bool ok = hits.size() == 64;
    std::ifstream in(std::string(QPDYN_GOLDEN_DIR) + "/degree4_p2_criterion.txt",
                     std::ios::binary);
    std::ostringstream golden;
    golden << in.rdbuf();
    ok = ok && in.good() && renderSearchText(spec, hits) == golden.str();
    return ok && seconds(t0) < 10.0;
}

// criterion 4: no good-reduction minimal maps of degree 2-4 over Q_2
bool crit4() {
    auto t0 = Clock::now();
    PrimeContext ctx{Int(2), 4};
    bool ok = true;
    for (int d : {2, 3}) {
        SearchSpec spec{Int(2), d, 8, SearchMode::GoodReductionMinimal};
        ok = ok && runSearch(spec, ctx).empty();
    }
    SearchSpec both{Int(2), 4, 4, SearchMode::Both};
    auto hits = runSearch(both, ctx);
    for (const auto& h : hits) {
        ok = ok && h.criterion12;               // nothing accepted on good reduction alone
        ok = ok && !h.goodReduction;            // every congruence hit has bad reduction
    }
    ok = ok && hits.size() == 64;
    return ok && seconds(t0) < 60.0;
}

// criterion 5: the derivative-based and level-based minimality tests agree
bool crit5() {
    bool ok = true;
    int total = 0;
    for (Int p : {Int(2), Int(3), Int(5), Int(7)}) {
        PrimeContext ctx{p, 5};
        std::mt19937 rng(static_cast<unsigned>(p.convert_to<int>()) * 48611 + 9);
        for (int trial = 0; trial < 75; ++trial) {
            int d = 2 + static_cast<int>(rng() % 4);
            RationalMap phi = randGoodMap(rng, d, ctx);
            ok = ok && checkMinimalThm11(phi, ctx).minimal == checkMinimalLevels(phi, ctx);
            ++total;
        }
    }
    return ok && total >= 300;
}

// criterion 6: over all 16384 degree-4 coefficient tuples mod 4, the eight
// congruences hold iff the map is certified nonexpanding and acts as one full
// cycle on the 12 level-3 balls
bool crit6() {
    PrimeContext ctx{Int(2), 4};
    int d = 4;
    std::vector<Int> tuple(7, Int(0));
    bool ok = true;
    long seen = 0, agree = 0;
    for (;;) {
        auto [a, b] = detail::tupleToCoeffs(tuple, d);
        bool lhs = checkCriterion12Coeffs(a, b, ctx).overall;
        RationalMap phi(a, b, ctx);
        bool rhs = phi.degree() == d && hasLipschitzCertificate(phi, ctx)
                   && checkMinimalAtLevel(phi, 3, ctx);
        ok = ok && lhs == rhs;
        agree += (lhs == rhs);
        ++seen;
        std::size_t i = tuple.size();
        bool done = true;
        while (i > 0) {
            --i;
            if (++tuple[i] < 4) { done = false; break; }
            tuple[i] = 0;
        }
        if (done) break;
    }
    return ok && seen == 16384 && agree == 16384;
}

// criterion 7: lift-length bookkeeping and representative independence
bool crit7() {
    bool ok = true;
    int mapsChecked = 0;
    for (Int p : {Int(2), Int(3), Int(5), Int(7)}) {
        PrimeContext ctx{p, 5};
        std::mt19937 rng(static_cast<unsigned>(p.convert_to<int>()) * 15013 + 21);
        for (int trial = 0; trial < 50; ++trial) {
            int d = 2 + static_cast<int>(rng() % 4);
            RationalMap phi = randGoodMap(rng, d, ctx);
            LevelSystem sys = buildLevelSystem(phi, 1, ctx);
            FunctionalGraph fg = cyclesOf(sys.transition);
            auto balls = enumerateBalls(1, ctx);
            for (const auto& cycIdx : fg.cycles) {
                std::vector<ProjectiveBall> cyc;
                for (std::size_t i : cycIdx) cyc.push_back(balls[i]);
                CycleNode node = analyzeCycle(phi, cyc, ctx);
                try {
                    liftCycle(phi, node, ctx); // validates the length multiset
                } catch (const error&) {
                    ok = false;
                }
                // recompute alpha (and beta) from a perturbed representative
                int n = node.level;
                ProjectivePointExact P0 = cyc[0].representative(ctx);
                Chart chart0 = chartFor(P0, ctx);
                Rat x0 = localCoord(P0, chart0) + Rat(ctx.pPow(n)) * Rat(Int(rng() % 7) + 1);
                ProjectivePointExact P = (chart0 == Chart::Identity)
                    ? ProjectivePointExact::finite(x0, ctx)
                    : (x0 == 0 ? ProjectivePointExact::infinity(ctx)
                               : ProjectivePointExact::finite(1 / x0, ctx));
                auto [alpha, end] = orbitDerivative(phi, P, static_cast<long>(node.length()),
                                                    n + 2, ctx);
                ok = ok && toResidue(alpha, 1, ctx).value == node.alphaModP;
                if (node.betaModP.has_value()) {
                    Rat delta = localCoord(end, chartFor(P, ctx)) - localCoord(P, chartFor(P, ctx));
                    Int beta = (delta == 0) ? Int(0)
                        : toResidue(delta / Rat(ctx.pPow(n)), 1, ctx).value;
                    ok = ok && beta == *node.betaModP;
                }
            }
            ++mapsChecked;
        }
    }
    return ok && mapsChecked >= 200;
}

// criterion 8: decomposition reports are sound
bool crit8() {
    bool ok = true;
    for (Int p : {Int(2), Int(3), Int(5)}) {
        PrimeContext ctx{p, 4};
        std::mt19937 rng(static_cast<unsigned>(p.convert_to<int>()) * 2667 + 1);
        std::vector<RationalMap> maps;
        if (p == 3) {
            maps.push_back(parseMap("-(2z^2+2z+1)/(z^3-3z^2+z+1)", ctx));
            maps.push_back(parseMap("(2z+3)/((z-1)(z-2))", ctx));
            maps.push_back(parseMap("z^2", ctx));
        }
        for (int trial = 0; trial < 10; ++trial)
            maps.push_back(randGoodMap(rng, 2 + static_cast<int>(rng() % 3), ctx));

        for (const auto& phi : maps) {
            DecompositionReport r = decompose(phi, ctx);

            // (a) the pieces tile the finest-level census exactly once
            std::multiset<std::string> covered;
            std::map<std::string, std::set<std::string>> own;
            for (std::size_t i = 0; i < r.components.size(); ++i) {
                std::multiset<std::string> s;
                for (const auto& B : r.components[i].balls) expand(B, r.maxLevel, ctx, s);
                own["component:" + std::to_string(i)] = {s.begin(), s.end()};
                covered.insert(s.begin(), s.end());
            }
            for (std::size_t i = 0; i < r.periodicOrbits.size(); ++i) {
                std::set<std::string> s;
                for (const auto& B : r.periodicOrbits[i].points) s.insert(B.label());
                own["orbit:" + std::to_string(i)] = s;
                covered.insert(s.begin(), s.end());
            }
            for (const auto& node : r.unresolved)
                for (const auto& B : node.balls) expand(B, r.maxLevel, ctx, covered);
            for (const auto& [label, target] : r.basin) {
                covered.insert(label);
                (void)target;
            }
            std::multiset<std::string> census;
            for (const auto& B : enumerateBalls(r.maxLevel, ctx)) census.insert(B.label());
            ok = ok && covered == census;

            // (b) recorded periods have the admissible k * ell * p^e shape
            ok = ok && periodicLengthCheck(r, ctx);

            // (c) orbit balls are fixed by the period-th power of the ball map
            for (const auto& orbit : r.periodicOrbits) {
                ok = ok && orbit.points.size() == orbit.period;
                for (const auto& B : orbit.points) {
                    ProjectiveBall cur = B;
                    for (std::size_t i = 0; i < orbit.period; ++i)
                        cur = imageBall(phi, cur, ctx);
                    ok = ok && cur == B;
                }
            }

            // (d) basins are forward-invariant until they arrive
            std::map<std::string, ProjectiveBall> byLabel;
            for (const auto& B : enumerateBalls(r.maxLevel, ctx)) byLabel.emplace(B.label(), B);
            for (const auto& [label, target] : r.basin) {
                std::string img = imageBall(phi, byLabel.at(label), ctx).label();
                bool stays = r.basin.count(img) && r.basin.at(img) == target;
                bool arrived = own.count(target) && own[target].count(img);
                ok = ok && (stays || arrived);
            }
        }
    }
    return ok;
}

} // namespace

int main() {
    struct Criterion {
        const char* what;
        bool (*run)();
    };
    const Criterion criteria[] = {
        {"worked cubic over Q_3: reduction, 4-cycle, iterates, minimality", crit1},
        {"worked quadratic over Q_3: derivative, ball orbit, decomposition", crit2},
        {"degree-4 congruence search matches the frozen table", crit3},
        {"no good-reduction minimal maps of degree 2-4 over Q_2", crit4},
        {"minimality criteria agree on 300 random good-reduction maps", crit5},
        {"congruence test = certificate + full level-3 cycle on all 16384 tuples", crit6},
        {"cycle lifting bookkeeping and representative independence", crit7},
        {"decomposition reports partition, period shapes, invariance", crit8},
    };
    int failures = 0;
    int idx = 0;
    for (const auto& c : criteria) {
        ++idx;
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            std::cout << "criterion " << idx << ": FAIL (" << c.what
                      << "): exception: " << e.what() << "\n";
            ++failures;
            continue;
        }
        std::cout << "criterion " << idx << ": " << (ok ? "PASS" : "FAIL") << " (" << c.what
                  << ")\n";
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
