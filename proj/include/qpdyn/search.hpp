#pragma once

#include "core.hpp"
#include "dynamics.hpp"
#include "p2criterion.hpp"
#include "ratmap.hpp"

#include <json.hpp>

#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace qpdyn {

enum class SearchMode { Criterion12, GoodReductionMinimal, Both };

inline const char* searchModeName(SearchMode m) {
    switch (m) {
        case SearchMode::Criterion12: return "criterion12";
        case SearchMode::GoodReductionMinimal: return "good-reduction-minimal";
        case SearchMode::Both: return "both";
    }
    return "?";
}

struct SearchSpec {
    Int p{2};
    int degree{4};
    Int modulus{4};        // coefficients range over 0..modulus-1
    SearchMode mode{SearchMode::Criterion12};
};

// One accepted tuple (a_0..a_{d-1}, b_1..b_{d-1}) with a_d = b_d = 1, b_0 = 0.
struct SearchHit {
    std::vector<Int> tuple;
    std::vector<std::string> orbitLabels; // level-3 cycle through ball 0, when single
    bool criterion12 = false;
    bool goodReduction = false;
    bool minimalAtRequiredLevel = false;
};

namespace detail {

inline std::pair<std::vector<Rat>, std::vector<Rat>> tupleToCoeffs(const std::vector<Int>& t,
                                                                   int d) {
    std::vector<Rat> a, b;
    for (int i = 0; i < d; ++i) a.push_back(Rat(t[static_cast<std::size_t>(i)]));
    a.push_back(Rat(1));
    b.push_back(Rat(0));
    for (int j = 1; j < d; ++j) b.push_back(Rat(t[static_cast<std::size_t>(d + j - 1)]));
    b.push_back(Rat(1));
    return {std::move(a), std::move(b)};
}

// labels of the level-n cycle, rotated to start at the ball of 0, when the
// functional graph has a single full-size cycle
inline std::vector<std::string> fullCycleLabels(const RationalMap& phi, int n,
                                                const PrimeContext& ctx) {
    LevelSystem sys = buildLevelSystem(phi, n, ctx);
    FunctionalGraph fg = cyclesOf(sys.transition);
    if (fg.cycles.size() != 1 || fg.cycles[0].size() != sys.transition.size()) return {};
    auto balls = enumerateBalls(n, ctx);
    std::vector<std::string> labels;
    for (std::size_t i : fg.cycles[0]) labels.push_back(balls[i].label());
    return labels; // cyclesOf already rotates to the smallest index, i.e. ball 0
}

} // namespace detail

// Lexicographic scan over all monic tuples of the given degree and modulus.
inline std::vector<SearchHit> runSearch(const SearchSpec& spec, const PrimeContext& ctx) {
    if (spec.p != ctx.p) throw ConfigError("search prime differs from context prime");
    if (spec.degree < 2) throw DegreeTooSmall("search requires degree >= 2");
    if (spec.modulus < 2) throw ConfigError("search modulus must be >= 2");
    bool wantCrit = spec.mode == SearchMode::Criterion12 || spec.mode == SearchMode::Both;
    bool wantGR = spec.mode == SearchMode::GoodReductionMinimal || spec.mode == SearchMode::Both;
    if (wantCrit && ctx.p != 2)
        throw ConfigError("criterion search is defined only for p = 2");

    int d = spec.degree;
    std::size_t digits = static_cast<std::size_t>(2 * d - 1);
    std::vector<Int> tuple(digits, Int(0));
    std::vector<SearchHit> hits;

    for (;;) {
        auto [a, b] = detail::tupleToCoeffs(tuple, d);

        SearchHit hit;
        hit.tuple = tuple;
        bool accept = false;

        if (wantCrit) {
            hit.criterion12 = checkCriterion12Coeffs(a, b, ctx).overall;
            accept = accept || hit.criterion12;
        }
        if (wantGR || hit.criterion12) {
            RationalMap phi(a, b, ctx);
            // cancellation can drop the degree; those tuples never have good
            // reduction as degree-d maps
            if (phi.degree() == d) {
                hit.goodReduction = hasGoodReduction(phi, ctx);
                if (hit.goodReduction)
                    hit.minimalAtRequiredLevel = checkMinimalLevels(phi, ctx);
            }
            if (hit.criterion12)
                hit.orbitLabels = detail::fullCycleLabels(phi, 3, ctx);
            if (wantGR) accept = accept || (hit.goodReduction && hit.minimalAtRequiredLevel);
        }
        if (accept) hits.push_back(std::move(hit));

        // odometer increment, most significant digit first = lexicographic order
        std::size_t i = digits;
        while (i > 0) {
            --i;
            if (++tuple[i] < spec.modulus) break;
            tuple[i] = 0;
            if (i == 0) return hits;
        }
    }
}

// Hits grouped by their orbit line, groups ordered by first occurrence.
inline std::vector<std::pair<std::string, std::vector<const SearchHit*>>>
classifyHitsByOrbit(const std::vector<SearchHit>& hits) {
    std::vector<std::pair<std::string, std::vector<const SearchHit*>>> groups;
    for (const auto& h : hits) {
        std::string key;
        for (std::size_t i = 0; i < h.orbitLabels.size(); ++i) {
            if (i) key += " -> ";
            key += h.orbitLabels[i];
        }
        bool found = false;
        for (auto& g : groups)
            if (g.first == key) { g.second.push_back(&h); found = true; break; }
        if (!found) groups.push_back({key, {&h}});
    }
    return groups;
}

inline std::string renderSearchText(const SearchSpec& spec, const std::vector<SearchHit>& hits) {
    std::ostringstream out;
    out << "# search p=" << spec.p << " degree=" << spec.degree
        << " modulus=" << spec.modulus << " mode=" << searchModeName(spec.mode) << "\n";
    out << "# hits: " << hits.size() << "\n";
    auto groups = classifyHitsByOrbit(hits);
    for (const auto& g : groups) {
        out << "\n";
        if (!g.first.empty()) out << "orbit: " << g.first << "\n";
        for (const SearchHit* h : g.second) {
            for (std::size_t i = 0; i < h->tuple.size(); ++i) {
                if (i) out << " ";
                out << h->tuple[i];
            }
            out << "\n";
        }
    }
    return out.str();
}

inline nlohmann::json searchToJson(const SearchSpec& spec, const std::vector<SearchHit>& hits) {
    nlohmann::json j;
    j["p"] = spec.p.str();
    j["degree"] = spec.degree;
    j["modulus"] = spec.modulus.str();
    j["mode"] = searchModeName(spec.mode);
    j["hit_count"] = hits.size();
    j["groups"] = nlohmann::json::array();
    for (const auto& g : classifyHitsByOrbit(hits)) {
        nlohmann::json grp;
        grp["orbit"] = g.first;
        grp["tuples"] = nlohmann::json::array();
        for (const SearchHit* h : g.second) {
            nlohmann::json t = nlohmann::json::array();
            for (const auto& c : h->tuple) t.push_back(c.str());
            grp["tuples"].push_back(std::move(t));
        }
        j["groups"].push_back(std::move(grp));
    }
    return j;
}

} // namespace qpdyn
