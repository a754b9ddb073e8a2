#include <qpdyn/core.hpp>
#include <qpdyn/parser.hpp>
#include <qpdyn/dynamics.hpp>
#include <qpdyn/decomposition.hpp>
#include <qpdyn/p2criterion.hpp>
#include <qpdyn/search.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace qpdyn;

namespace {

// exit codes: 0 ok, 2 parse, 3 config, 4 precondition, 5 internal invariant
constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitPrecondition = 4;
constexpr int kExitInternal = 5;

std::string fpToString(const FpPoly& f) {
    if (fpDeg(f) < 0) return "0";
    std::string out;
    for (int i = fpDeg(f); i >= 0; --i) {
        const Int& c = f[static_cast<std::size_t>(i)];
        if (c == 0) continue;
        if (!out.empty()) out += "+";
        if (i == 0) { out += c.str(); continue; }
        if (c != 1) out += c.str();
        out += "z";
        if (i > 1) out += "^" + std::to_string(i);
    }
    return out.empty() ? "0" : out;
}

struct CommonOpts {
    long long p = 0;
    int maxLevel = 4;
    std::string mapText;
    std::string coeffsJson;
    std::string format = "text";
};

void addCommon(CLI::App* cmd, CommonOpts& o, bool needMap = true) {
    cmd->add_option("--p", o.p, "prime p")->required();
    cmd->add_option("--max-level", o.maxLevel, "working ball level (>= 3)");
    if (needMap) {
        cmd->add_option("expr", o.mapText, "map expression, e.g. \"(2z+3)/((z-1)(z-2))\"");
        cmd->add_option("--map", o.mapText, "map expression");
        cmd->add_option("--coeffs", o.coeffsJson,
                        "JSON {\"num\": [...], \"den\": [...]} coefficient form");
    }
    cmd->add_option("--format", o.format, "output format: text | json | dot")
        ->check(CLI::IsMember({"text", "json", "dot"}));
}

RationalMap loadMap(const CommonOpts& o, const PrimeContext& ctx) {
    if (!o.mapText.empty() && !o.coeffsJson.empty())
        throw ConfigError("give exactly one of a map expression or --coeffs");
    if (!o.coeffsJson.empty()) return parseMapJson(o.coeffsJson, ctx);
    if (!o.mapText.empty()) return parseMap(o.mapText, ctx);
    throw ConfigError("no map given");
}

int cmdReduce(const CommonOpts& o) {
    PrimeContext ctx{Int(o.p), o.maxLevel};
    RationalMap phi = loadMap(o, ctx);
    ReducedMap r = reduceModP(phi, ctx);
    bool good = r.reducedDegree == phi.degree();
    if (o.format == "json") {
        nlohmann::json j;
        auto arr = [](const FpPoly& f) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& c : f) a.push_back(c.str());
            return a;
        };
        j["raw_num"] = arr(r.rawNum);
        j["raw_den"] = arr(r.rawDen);
        j["num"] = arr(r.numCoeffs);
        j["den"] = arr(r.denCoeffs);
        j["reduced_degree"] = r.reducedDegree;
        j["degree"] = phi.degree();
        j["good_reduction"] = good;
        j["nonexpanding_certificate"] = hasLipschitzCertificate(phi, ctx);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << fpToString(r.numCoeffs) << " / " << fpToString(r.denCoeffs)
                  << "; good reduction: " << (good ? "yes" : "no") << "\n";
    }
    return 0;
}

int cmdCheck(const CommonOpts& o) {
    PrimeContext ctx{Int(o.p), o.maxLevel};
    RationalMap phi = loadMap(o, ctx);
    MinimalThm11Verdict v = checkMinimalThm11(phi, ctx);
    bool byLevels = checkMinimalLevels(phi, ctx);
    if (v.minimal != byLevels)
        throw error("minimality checkers disagree");
    if (o.format == "json") {
        nlohmann::json j;
        j["level1_transitive"] = v.transitiveLevel1;
        j["derivative_condition"] = v.derivCond;
        j["valuation_condition"] = v.valuationCond;
        j["extra_condition_p23"] = v.extraCondP23;
        j["minimal_by_conditions"] = v.minimal;
        j["minimal_by_levels"] = byLevels;
        j["minimal"] = v.minimal;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "level-1 transitive: " << (v.transitiveLevel1 ? "yes" : "no") << "\n"
                  << "derivative condition: " << (v.derivCond ? "yes" : "no") << "\n"
                  << "valuation condition: " << (v.valuationCond ? "yes" : "no") << "\n";
        if (o.p == 2 || o.p == 3)
            std::cout << "second valuation condition: " << (v.extraCondP23 ? "yes" : "no") << "\n";
        std::cout << "level checker agrees: yes\n";
        if (v.minimal) std::cout << "minimal: yes\n";
        else if (!v.transitiveLevel1) std::cout << "minimal: no (level-1 not transitive)\n";
        else std::cout << "minimal: no\n";
    }
    return 0;
}

int cmdDecompose(const CommonOpts& o) {
    PrimeContext ctx{Int(o.p), o.maxLevel};
    RationalMap phi = loadMap(o, ctx);
    DecompositionReport rep = decompose(phi, ctx);
    if (o.format == "dot") std::cout << toDot(rep);
    else std::cout << toJson(rep, ctx).dump(2) << "\n";
    return 0;
}

int cmdOrbit(const CommonOpts& o, const std::string& start, int iters, int modLevel) {
    PrimeContext ctx{Int(o.p), std::max(o.maxLevel, modLevel)};
    RationalMap phi = loadMap(o, ctx);
    if (!hasLipschitzCertificate(phi, ctx))
        throw NotCertifiedLipschitz("orbit listing needs a nonexpansion certificate");
    ProjectivePointExact P = (start == "inf" || start == "~0")
        ? ProjectivePointExact::infinity(ctx)
        : ProjectivePointExact::finite(parseRat(start), ctx);
    ProjectiveBall B = ballOf(P, modLevel, ctx);
    std::vector<std::string> labels{B.label()};
    for (int i = 0; i < iters; ++i) {
        B = imageBall(phi, B, ctx);
        labels.push_back(B.label());
    }
    if (o.format == "json") {
        nlohmann::json j;
        j["level"] = modLevel;
        j["labels"] = labels;
        std::cout << j.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < labels.size(); ++i)
            std::cout << (i ? ", " : "") << labels[i];
        std::cout << "\n";
    }
    return 0;
}

int cmdCriterionP2(const CommonOpts& o) {
    PrimeContext ctx{Int(o.p), o.maxLevel};
    if (o.p != 2) throw ConfigError("criterion-p2 requires --p 2");
    RationalMap phi = loadMap(o, ctx);
    if (!isStandardShape(phi)) phi = standardize(phi, ctx).first;
    Criterion12Verdict v = checkCriterion12(phi, ctx);
    if (o.format == "json") {
        nlohmann::json j;
        j["conditions"] = nlohmann::json::array();
        for (const auto& f : v.flags)
            j["conditions"].push_back({{"name", f.name}, {"pass", f.pass}, {"residue", f.residue}});
        j["overall"] = v.overall;
        std::cout << j.dump(2) << "\n";
    } else {
        for (const auto& f : v.flags)
            std::cout << f.name << ": " << (f.pass ? "pass" : "fail")
                      << " (" << f.residue << ")\n";
        std::cout << "overall: " << (v.overall ? "pass" : "fail") << "\n";
    }
    return 0;
}

int cmdSearch(const CommonOpts& o, int degree, long long modulus, const std::string& mode,
              const std::string& goldenPath) {
    PrimeContext ctx{Int(o.p), o.maxLevel};
    SearchSpec spec;
    spec.p = Int(o.p);
    spec.degree = degree;
    spec.modulus = Int(modulus);
    if (mode == "criterion12") spec.mode = SearchMode::Criterion12;
    else if (mode == "good-reduction-minimal") spec.mode = SearchMode::GoodReductionMinimal;
    else if (mode == "both") spec.mode = SearchMode::Both;
    else throw ConfigError("unknown search mode: " + mode);

    auto hits = runSearch(spec, ctx);
    std::string text = renderSearchText(spec, hits);
    if (!goldenPath.empty()) {
        std::ifstream in(goldenPath, std::ios::binary);
        if (!in) throw ConfigError("cannot open golden file: " + goldenPath);
        std::stringstream buf;
        buf << in.rdbuf();
        if (buf.str() != text) {
            std::cerr << "golden mismatch against " << goldenPath << "\n";
            std::cout << text;
            return 1;
        }
        std::cout << "golden match: " << goldenPath << " (" << hits.size() << " hits)\n";
        return 0;
    }
    if (o.format == "json") std::cout << searchToJson(spec, hits).dump(2) << "\n";
    else std::cout << text;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact dynamics of rational maps on the projective line over Q_p"};
    app.require_subcommand(1);

    CommonOpts oReduce, oCheck, oDecompose, oOrbit, oCrit, oSearch;
    std::string start = "0", searchMode = "criterion12", goldenPath;
    int iters = 4, modLevel = 3, degree = 4;
    long long modulus = 4;

    addCommon(app.add_subcommand("reduce", "reduce the map mod p"), oReduce);
    addCommon(app.add_subcommand("check", "decide minimality on the whole line"), oCheck);
    addCommon(app.add_subcommand("decompose", "minimal decomposition report"), oDecompose);
    auto* orbit = app.add_subcommand("orbit", "orbit of a ball at a given level");
    addCommon(orbit, oOrbit);
    orbit->add_option("--start", start, "starting point (rational or 'inf')");
    orbit->add_option("--iters", iters, "number of iterates");
    orbit->add_option("--mod-level", modLevel, "ball level for residues");
    addCommon(app.add_subcommand("criterion-p2", "p = 2 coefficient criterion"), oCrit);
    auto* search = app.add_subcommand("search", "exhaustive coefficient search");
    addCommon(search, oSearch, false);
    search->add_option("--degree", degree, "map degree");
    search->add_option("--modulus", modulus, "coefficients range over 0..M-1");
    search->add_option("--mode", searchMode,
                       "criterion12 | good-reduction-minimal | both");
    search->add_option("--golden", goldenPath, "compare text output against this file");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand("reduce")) return cmdReduce(oReduce);
        if (app.got_subcommand("check")) return cmdCheck(oCheck);
        if (app.got_subcommand("decompose")) return cmdDecompose(oDecompose);
        if (app.got_subcommand("orbit")) return cmdOrbit(oOrbit, start, iters, modLevel);
        if (app.got_subcommand("criterion-p2")) return cmdCriterionP2(oCrit);
        if (app.got_subcommand("search")) return cmdSearch(oSearch, degree, modulus, searchMode, goldenPath);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DegreeTooSmall& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BadReduction& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const NotCertifiedLipschitz& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const NonUnitDenominator& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const WrongForm& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const ZeroDenominator& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const error& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
