#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <qpdyn/parser.hpp>
#include <qpdyn/dynamics.hpp>

#include <map>
#include <random>
#include <set>

using namespace qpdyn;

namespace {

// random degree-d map with integral coefficients and good reduction
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

} // namespace

TEST_SUITE("level-systems") {

TEST_CASE("induced self-map on balls, with representative probe") {
    PrimeContext ctx{Int(3), 5};
    auto ex2 = parseMap("(2z+3)/((z-1)(z-2))", ctx);
    for (int n = 1; n <= 4; ++n) {
        LevelSystem sys;
        CHECK_NOTHROW(sys = buildLevelSystem(ex2, n, ctx, true));
        CHECK(sys.transition.size() == enumerateBalls(n, ctx).size());
        for (std::size_t t : sys.transition) CHECK(t < sys.transition.size());
    }
    // the orbit of the ball of 0 at level 3 walks the residues 0, 15, 3, 18
    auto balls = enumerateBalls(3, ctx);
    ProjectiveBall B = ballOf(ProjectivePointExact::finite(Rat(0), ctx), 3, ctx);
    std::vector<std::string> labels{B.label()};
    for (int i = 0; i < 3; ++i) {
        B = imageBall(ex2, B, ctx);
        labels.push_back(B.label());
    }
    CHECK(labels == std::vector<std::string>{"0", "15", "3", "18"});
    CHECK(imageBall(ex2, B, ctx).label() == "6");

    auto badCert = parseMap("(z^2+2z)/(z^2+4z+2)", PrimeContext{Int(2), 4});
    CHECK_THROWS_AS(buildLevelSystem(badCert, 1, PrimeContext{Int(2), 4}, false),
                    NotCertifiedLipschitz);
}

TEST_CASE("cycle extraction against a brute-force oracle") {
    std::mt19937 rng(91);
    for (int trial = 0; trial < 40; ++trial) {
        std::size_t n = 3 + rng() % 28;
        std::vector<std::size_t> f(n);
        for (auto& v : f) v = rng() % n;
        FunctionalGraph fg = cyclesOf(f);

        // oracle: x is on a cycle iff f^n(x) returns to x within n more steps
        std::set<std::size_t> cyclic;
        for (std::size_t x = 0; x < n; ++x) {
            std::size_t y = x;
            for (std::size_t i = 0; i < n; ++i) y = f[y];
            std::size_t z = y;
            for (std::size_t i = 0; i < n; ++i) {
                z = f[z];
                if (z == y) break;
            }
            if (x == y || [&] { std::size_t w = y; for (std::size_t i = 0; i < n; ++i) { if (w == x) return true; w = f[w]; } return false; }())
                cyclic.insert(x);
        }
        std::set<std::size_t> found;
        for (const auto& cyc : fg.cycles) {
            // each reported cycle really is one: f maps consecutively
            for (std::size_t i = 0; i < cyc.size(); ++i)
                CHECK(f[cyc[i]] == cyc[(i + 1) % cyc.size()]);
            CHECK(cyc.front() == *std::min_element(cyc.begin(), cyc.end()));
            for (std::size_t v : cyc) found.insert(v);
        }
        CHECK(found == cyclic);
        for (std::size_t x = 0; x < n; ++x) {
            CHECK(fg.onCycle[x] == (cyclic.count(x) > 0));
            // eventualCycle: iterating n steps lands inside the indicated cycle
            std::size_t y = x;
            for (std::size_t i = 0; i < n; ++i) y = f[y];
            const auto& cyc = fg.cycles[fg.eventualCycle[x]];
            CHECK(std::find(cyc.begin(), cyc.end(), y) != cyc.end());
        }
    }
}

TEST_CASE("multiplicative order") {
    CHECK(multiplicativeOrder(Int(1), Int(7)) == 1);
    CHECK(multiplicativeOrder(Int(2), Int(7)) == 3);
    CHECK(multiplicativeOrder(Int(3), Int(7)) == 6);
    CHECK(multiplicativeOrder(Int(6), Int(7)) == 2);
    CHECK(multiplicativeOrder(Int(9), Int(7)) == 3);
    CHECK(multiplicativeOrder(Int(4), Int(5)) == 2);
}

} // suite level-systems

TEST_SUITE("cycle-analysis") {

TEST_CASE("full level-1 cycle of a minimal cubic grows on lifting") {
    PrimeContext ctx{Int(3), 5};
    auto ex1 = parseMap("-(2z^2+2z+1)/(z^3-3z^2+z+1)", ctx);
    LevelSystem sys = buildLevelSystem(ex1, 1, ctx);
    FunctionalGraph fg = cyclesOf(sys.transition);
    REQUIRE(fg.cycles.size() == 1);
    REQUIRE(fg.cycles[0].size() == 4);
    auto balls = enumerateBalls(1, ctx);
    std::vector<ProjectiveBall> cyc;
    std::vector<std::string> labels;
    for (std::size_t i : fg.cycles[0]) {
        cyc.push_back(balls[i]);
        labels.push_back(balls[i].label());
    }
    CHECK(labels == std::vector<std::string>{"0", "2", "1", "~0"});

    CycleNode node = analyzeCycle(ex1, cyc, ctx);
    CHECK(node.alphaModP == 1);
    REQUIRE(node.betaModP.has_value());
    CHECK(*node.betaModP == 2);
    CHECK(node.classification == CycleClass::Grows);

    // one lift of length 12, again growing, and so on: lengths 4, 12, 36
    auto l2 = liftCycle(ex1, node, ctx);
    REQUIRE(l2.size() == 1);
    CHECK(l2[0].length() == 12);
    CHECK(l2[0].classification == CycleClass::Grows);
    auto l3 = liftCycle(ex1, l2[0], ctx);
    REQUIRE(l3.size() == 1);
    CHECK(l3[0].length() == 36);
    CHECK(l3[0].classification == CycleClass::Grows);
}

TEST_CASE("indifferent fixed ball of the quadratic example splits into one fixed lift") {
    PrimeContext ctx{Int(3), 5};
    auto ex2 = parseMap("(2z+3)/((z-1)(z-2))", ctx);
    LevelSystem sys = buildLevelSystem(ex2, 1, ctx);
    FunctionalGraph fg = cyclesOf(sys.transition);
    REQUIRE(fg.cycles.size() == 1);
    REQUIRE(fg.cycles[0].size() == 1);
    auto balls = enumerateBalls(1, ctx);
    CycleNode node = analyzeCycle(ex2, {balls[fg.cycles[0][0]]}, ctx);
    CHECK(node.balls[0].label() == "0");
    // phi'(0) = 13/4 == 1 (mod 3), and phi(0) = 3/2 leaves the level-1 ball
    // displaced by valuation exactly 1, so the ball grows
    CHECK(node.alphaModP == 1);
    CHECK(node.classification == CycleClass::Grows);
    auto l2 = liftCycle(ex2, node, ctx);
    REQUIRE(l2.size() == 1);
    CHECK(l2[0].length() == 3);
}

TEST_CASE("lift bookkeeping and representative independence over random maps") {
    int mapsChecked = 0;
    for (Int p : {Int(2), Int(3), Int(5), Int(7)}) {
        PrimeContext ctx{p, 5};
        std::mt19937 rng(static_cast<unsigned>(p.convert_to<int>()) * 7919 + 5);
        for (int trial = 0; trial < 16; ++trial) {
            int d = 2 + static_cast<int>(rng() % 4);
            RationalMap phi = randGoodMap(rng, d, ctx);
            LevelSystem sys = buildLevelSystem(phi, 1, ctx);
            FunctionalGraph fg = cyclesOf(sys.transition);
            auto balls = enumerateBalls(1, ctx);
            for (const auto& cycIdx : fg.cycles) {
                std::vector<ProjectiveBall> cyc;
                for (std::size_t i : cycIdx) cyc.push_back(balls[i]);
                CycleNode node = analyzeCycle(phi, cyc, ctx);
                // liftCycle validates the predicted length multiset internally
                std::vector<CycleNode> lifts;
                CHECK_NOTHROW(lifts = liftCycle(phi, node, ctx));
                // every lift ball refines a ball of the parent cycle
                std::set<std::string> parents;
                for (const auto& B : cyc) parents.insert(B.label());
                std::size_t total = 0;
                for (const auto& l : lifts) {
                    total += l.length();
                    for (const auto& B : l.balls) {
                        ProjectiveBall up = ballOf(B.representative(ctx), 1, ctx);
                        CHECK(parents.count(up.label()) == 1);
                    }
                }
                CHECK(total <= cyc.size() * static_cast<std::size_t>(ctx.p));

                // alpha mod p (and beta when defined) do not depend on which
                // point of the starting ball we differentiate along
                int n = node.level;
                std::size_t K = node.length();
                ProjectivePointExact P0 = cyc[0].representative(ctx);
                Chart chart0 = chartFor(P0, ctx);
                Rat shift = Rat(ctx.pPow(n)) * Rat(Int(rng() % 5) + 1);
                Rat x0 = localCoord(P0, chart0) + shift;
                ProjectivePointExact P = (chart0 == Chart::Identity)
                    ? ProjectivePointExact::finite(x0, ctx)
                    : (x0 == 0 ? ProjectivePointExact::infinity(ctx)
                               : ProjectivePointExact::finite(1 / x0, ctx));
                ProjectivePointExact cur = P;
                Chart in = chartFor(cur, ctx);
                Rat alpha = 1;
                int W = n + 2;
                for (std::size_t j = 0; j < K; ++j) {
                    ProjectivePointExact next = truncatePoint(evaluate(phi, cur, ctx), W, ctx);
                    Chart out = chartFor(next, ctx);
                    alpha *= chartDerivative(phi, cur, in, out);
                    alpha = truncateRat(alpha, W, ctx);
                    cur = next;
                    in = out;
                }
                CHECK(toResidue(alpha, 1, ctx).value == node.alphaModP);
                if (node.betaModP.has_value()) {
                    Rat delta = localCoord(cur, chartFor(P, ctx)) - localCoord(P, chartFor(P, ctx));
                    Int beta = (delta == 0) ? Int(0)
                        : toResidue(delta / Rat(ctx.pPow(n)), 1, ctx).value;
                    CHECK(beta == *node.betaModP);
                }
            }
            ++mapsChecked;
        }
    }
    CHECK(mapsChecked == 64);
}

} // suite cycle-analysis

TEST_SUITE("minimality") {

TEST_CASE("worked examples") {
    PrimeContext ctx{Int(3), 5};
    auto ex1 = parseMap("-(2z^2+2z+1)/(z^3-3z^2+z+1)", ctx);
    MinimalThm11Verdict v = checkMinimalThm11(ex1, ctx);
    CHECK(v.transitiveLevel1);
    CHECK(v.derivCond);
    CHECK(v.valuationCond);
    CHECK(v.extraCondP23);
    CHECK(v.minimal);
    CHECK(checkMinimalLevels(ex1, ctx));

    auto ex2 = parseMap("(2z+3)/((z-1)(z-2))", ctx);
    MinimalThm11Verdict w = checkMinimalThm11(ex2, ctx);
    CHECK_FALSE(w.transitiveLevel1);
    CHECK_FALSE(w.minimal);
    CHECK_FALSE(checkMinimalLevels(ex2, ctx));

    CHECK_THROWS_AS(checkMinimalThm11(identityMap(ctx), ctx), DegreeTooSmall);
    PrimeContext c2{Int(2), 4};
    auto bad = parseMap("(z^2+2z)/(z^2+4z+2)", c2);
    CHECK_THROWS_AS(checkMinimalThm11(bad, c2), BadReduction);
    CHECK_THROWS_AS(checkMinimalLevels(bad, c2), BadReduction);
}

TEST_CASE("derivative-based and level-based criteria agree on random maps") {
    int agreed = 0;
    for (Int p : {Int(2), Int(3), Int(5), Int(7)}) {
        PrimeContext ctx{p, 5};
        std::mt19937 rng(static_cast<unsigned>(p.convert_to<int>()) * 33331 + 17);
        for (int trial = 0; trial < 25; ++trial) {
            int d = 2 + static_cast<int>(rng() % 4);
            RationalMap phi = randGoodMap(rng, d, ctx);
            bool a = checkMinimalThm11(phi, ctx).minimal;
            bool b = checkMinimalLevels(phi, ctx);
            CHECK(a == b);
            agreed += (a == b);
        }
    }
    CHECK(agreed == 100);
}

TEST_CASE("transitivity at the deciding level matches the cycle census") {
    PrimeContext ctx{Int(3), 5};
    auto ex1 = parseMap("-(2z^2+2z+1)/(z^3-3z^2+z+1)", ctx);
    for (int n = 1; n <= 4; ++n) CHECK(checkMinimalAtLevel(ex1, n, ctx));
    auto ex2 = parseMap("(2z+3)/((z-1)(z-2))", ctx);
    CHECK_FALSE(checkMinimalAtLevel(ex2, 1, ctx));
}

} // suite minimality
