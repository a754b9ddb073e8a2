#pragma once

#include "core.hpp"
#include "dynamics.hpp"

#include <json.hpp>

#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace qpdyn {

struct MinimalComponent {
    int definingLevel;
    std::vector<ProjectiveBall> balls; // the K balls of the forever-growing cycle
    long k;                            // level-1 cycle length above the component
    long ell;                          // product of partial-split orders on the path
    std::string rule;                  // which stabilization rule certified it
    std::vector<std::size_t> observedLengths; // cycle lengths at definingLevel..maxLevel
};

struct PeriodicOrbitRecord {
    enum class Kind { Attracting, Indifferent };
    std::size_t period;
    Kind kind;
    std::vector<ProjectiveBall> points; // level-maxLevel balls, residues mod p^maxLevel
};

struct LiftTreeEntry {
    int id;
    int parent; // -1 for level-1 roots
    CycleNode node;
    std::string status;
};

struct DecompositionReport {
    std::vector<PeriodicOrbitRecord> periodicOrbits;
    std::vector<MinimalComponent> components;
    std::map<std::string, std::string> basin; // maxLevel ball label -> target id
    std::vector<CycleNode> unresolved;
    std::vector<LiftTreeEntry> liftTree;
    int maxLevel;
    Int p;
};

// structure sequence (k, k*ell, k*ell*p, k*ell*p^2, ...) of the odometer
inline std::vector<Int> odometerStructure(const MinimalComponent& c, const PrimeContext& ctx,
                                          std::size_t terms = 4) {
    std::vector<Int> seq;
    Int cur = c.k;
    seq.push_back(cur);
    cur *= c.ell;
    for (std::size_t i = 1; i < terms; ++i) {
        seq.push_back(cur);
        cur *= ctx.p;
    }
    return seq;
}

inline bool periodicLengthCheck(const DecompositionReport& report, const PrimeContext& ctx) {
    long p = static_cast<long>(ctx.p);
    for (const auto& orbit : report.periodicOrbits) {
        long K = static_cast<long>(orbit.period);
        bool ok = false;
        for (long k = 1; k <= p + 1 && !ok; ++k) {
            if (K == k) ok = true;
            for (long ell = 1; ell <= p - 1 && !ok; ++ell)
                if ((p - 1) % ell == 0 && K == k * ell) ok = true;
            if ((p == 2 || p == 3) && K == k * p) ok = true;
        }
        if (!ok) return false;
    }
    return true;
}

namespace detail {

class DecomposeEngine {
public:
    DecomposeEngine(const RationalMap& phi, const PrimeContext& ctx)
        : phi_(phi), ctx_(ctx) {}

    DecompositionReport run() {
        report_.maxLevel = ctx_.maxLevel;
        report_.p = ctx_.p;

        LevelSystem sys = buildLevelSystem(phi_, 1, ctx_);
        auto balls1 = enumerateBalls(1, ctx_);
        FunctionalGraph fg = cyclesOf(sys.transition);
        for (const auto& cyc : fg.cycles) {
            std::vector<ProjectiveBall> cb;
            for (std::size_t i : cyc) cb.push_back(balls1[i]);
            CycleNode node = analyzeCycle(phi_, cb, ctx_);
            int id = addTreeEntry(node, -1);
            process(node, id, static_cast<long>(cyc.size()), 1, false);
        }
        assignBasin();
        return std::move(report_);
    }

private:
    const RationalMap& phi_;
    const PrimeContext& ctx_;
    DecompositionReport report_;
    std::map<std::size_t, std::string> owner_; // maxLevel ball index -> target id

    int addTreeEntry(const CycleNode& node, int parent) {
        int id = static_cast<int>(report_.liftTree.size());
        report_.liftTree.push_back({id, parent, node, "open"});
        return id;
    }
    void setStatus(int id, const std::string& s) {
        report_.liftTree[static_cast<std::size_t>(id)].status = s;
    }

    void claim(const ProjectiveBall& B, const std::string& target) {
        // claim all level-maxLevel descendants of B
        std::vector<ProjectiveBall> frontier{B};
        while (frontier.front().level < ctx_.maxLevel) {
            std::vector<ProjectiveBall> next;
            for (const auto& F : frontier)
                for (const auto& S : subBalls(F, ctx_)) next.push_back(S);
            frontier = std::move(next);
        }
        for (const auto& F : frontier) {
            std::size_t idx = ballIndex(F, ctx_);
            if (owner_.count(idx)) throw error("decomposition coverage overlap at " + F.label());
            owner_[idx] = target;
        }
    }

    void process(CycleNode node, int treeId, long k, long ell, bool prevGrows) {
        switch (node.classification) {
            case CycleClass::Grows: {
                long p = static_cast<long>(ctx_.p);
                bool certified =
                    (p >= 5) || (p == 3 && node.level >= 2) || (p == 2 && prevGrows);
                if (certified) {
                    emitComponent(node, treeId, k, ell, stabilizationRule(prevGrows));
                    return;
                }
                if (node.level == ctx_.maxLevel) {
                    setStatus(treeId, "unresolved");
                    markUnresolved(node);
                    return;
                }
                auto lifts = liftCycle(phi_, node, ctx_);
                int childId = addTreeEntry(lifts[0], treeId);
                if (lifts[0].classification == CycleClass::Grows) {
                    setStatus(childId, "growth-witness");
                    emitComponent(node, treeId, k, ell, "confirmed by growing lift");
                } else {
                    process(lifts[0], childId, k, ell, true);
                }
                return;
            }
            case CycleClass::Splits: {
                if (node.level == ctx_.maxLevel) {
                    setStatus(treeId, "unresolved");
                    markUnresolved(node);
                    return;
                }
                setStatus(treeId, "recursed");
                for (const auto& lift : liftCycle(phi_, node, ctx_)) {
                    int childId = addTreeEntry(lift, treeId);
                    process(lift, childId, k, ell, false);
                }
                return;
            }
            case CycleClass::GrowsTails: {
                setStatus(treeId, "attracting-orbit");
                CycleNode cur = node;
                int curId = treeId;
                while (cur.level < ctx_.maxLevel) {
                    auto lifts = liftCycle(phi_, cur, ctx_);
                    cur = lifts[0];
                    curId = addTreeEntry(cur, curId);
                    setStatus(curId, "attracting-orbit");
                }
                std::string target = "orbit:" + std::to_string(report_.periodicOrbits.size());
                for (const auto& B : cur.balls) claim(B, target);
                report_.periodicOrbits.push_back(
                    {node.length(), PeriodicOrbitRecord::Kind::Attracting, cur.balls});
                return;
            }
            case CycleClass::PartiallySplits: {
                setStatus(treeId, "indifferent-orbit");
                std::size_t K = node.length();
                CycleNode cur = node;
                int curId = treeId;
                while (cur.level < ctx_.maxLevel) {
                    auto lifts = liftCycle(phi_, cur, ctx_);
                    long liftEll = cur.ell;
                    const CycleNode* persistent = nullptr;
                    int persistentId = -1;
                    for (const auto& lift : lifts) {
                        int childId = addTreeEntry(lift, curId);
                        if (lift.length() == K && persistent == nullptr) {
                            persistent = &lift;
                            persistentId = childId;
                            setStatus(childId, "indifferent-orbit");
                        } else {
                            process(lift, childId, k, ell * liftEll, false);
                        }
                    }
                    if (persistent->classification != CycleClass::PartiallySplits)
                        throw ClassificationMismatch("persistent lift does not partially split");
                    cur = *persistent;
                    curId = persistentId;
                }
                std::string target = "orbit:" + std::to_string(report_.periodicOrbits.size());
                for (const auto& B : cur.balls) claim(B, target);
                report_.periodicOrbits.push_back(
                    {K, PeriodicOrbitRecord::Kind::Indifferent, cur.balls});
                return;
            }
        }
    }

    std::string stabilizationRule(bool prevGrows) const {
        if (ctx_.p >= 5) return "grows at any level (p >= 5)";
        if (ctx_.p == 3) return "grows at level >= 2 (p = 3)";
        return prevGrows ? "two consecutive growing levels (p = 2)" : "";
    }

    void emitComponent(const CycleNode& node, int treeId, long k, long ell,
                       const std::string& rule) {
        setStatus(treeId, "component");
        // forever-growing certification is re-checked level by level, not assumed
        std::vector<std::size_t> lengths{node.length()};
        CycleNode cur = node;
        while (cur.level < ctx_.maxLevel) {
            auto lifts = liftCycle(phi_, cur, ctx_);
            if (lifts.size() != 1 ||
                lifts[0].length() != static_cast<std::size_t>(ctx_.p) * cur.length())
                throw ClassificationMismatch("component growth certificate failed");
            cur = lifts[0];
            lengths.push_back(cur.length());
        }
        std::string target = "component:" + std::to_string(report_.components.size());
        for (const auto& B : node.balls) claim(B, target);
        report_.components.push_back(
            {node.level, node.balls, k, ell, rule, std::move(lengths)});
    }

    void markUnresolved(const CycleNode& node) {
        for (const auto& B : node.balls)
            claim(B, "unresolved:" + std::to_string(report_.unresolved.size()));
        report_.unresolved.push_back(node);
    }

    void assignBasin() {
        LevelSystem sys = buildLevelSystem(phi_, ctx_.maxLevel, ctx_);
        auto balls = enumerateBalls(ctx_.maxLevel, ctx_);
        std::vector<std::string> memo(balls.size());
        for (std::size_t i = 0; i < balls.size(); ++i) {
            if (owner_.count(i) || !memo[i].empty()) continue;
            std::vector<std::size_t> path;
            std::size_t v = i;
            while (!owner_.count(v) && memo[v].empty()) {
                if (path.size() > balls.size())
                    throw error("basin walk found a cycle not claimed by any target");
                path.push_back(v);
                v = sys.transition[v];
            }
            std::string target = owner_.count(v) ? owner_[v] : memo[v];
            for (std::size_t u : path) {
                memo[u] = target;
                report_.basin[balls[u].label()] = target;
            }
        }
    }
};

} // namespace detail

inline DecompositionReport decompose(const RationalMap& phi, const PrimeContext& ctx) {
    if (phi.degree() < 2) throw DegreeTooSmall("decomposition requires degree >= 2");
    if (!hasLipschitzCertificate(phi, ctx))
        throw BadReduction("decomposition requires a nonexpansion certificate");
    return detail::DecomposeEngine(phi, ctx).run();
}

// ---- rendering ----

inline nlohmann::json toJson(const DecompositionReport& r, const PrimeContext& ctx) {
    nlohmann::json j;
    j["p"] = r.p.str();
    j["max_level"] = r.maxLevel;
    Int mod = ctx.pPow(r.maxLevel);
    j["periodic_orbits"] = nlohmann::json::array();
    for (const auto& orbit : r.periodicOrbits) {
        nlohmann::json o;
        o["period"] = orbit.period;
        o["kind"] = orbit.kind == PeriodicOrbitRecord::Kind::Attracting ? "attracting"
                                                                        : "indifferent";
        o["points"] = nlohmann::json::array();
        for (const auto& B : orbit.points)
            o["points"].push_back({{"label", B.label()}, {"modulus", mod.str()}});
        j["periodic_orbits"].push_back(std::move(o));
    }
    j["components"] = nlohmann::json::array();
    for (const auto& c : r.components) {
        nlohmann::json o;
        o["level"] = c.definingLevel;
        o["balls"] = nlohmann::json::array();
        for (const auto& B : c.balls) o["balls"].push_back(B.label());
        o["k"] = c.k;
        o["ell"] = c.ell;
        o["structure_sequence_head"] = nlohmann::json::array();
        for (const auto& t : odometerStructure(c, ctx)) o["structure_sequence_head"].push_back(t.str());
        o["observed_lengths"] = c.observedLengths;
        o["rule"] = c.rule;
        j["components"].push_back(std::move(o));
    }
    j["basin"] = nlohmann::json::object();
    for (const auto& [label, target] : r.basin) j["basin"][label] = target;
    j["unresolved"] = nlohmann::json::array();
    for (const auto& node : r.unresolved) {
        nlohmann::json o;
        o["level"] = node.level;
        o["balls"] = nlohmann::json::array();
        for (const auto& B : node.balls) o["balls"].push_back(B.label());
        o["classification"] = cycleClassName(node.classification);
        j["unresolved"].push_back(std::move(o));
    }
    return j;
}

// lift tree with nodes colored by classification
inline std::string toDot(const DecompositionReport& r) {
    auto color = [](CycleClass c) {
        switch (c) {
            case CycleClass::Grows: return "palegreen";
            case CycleClass::Splits: return "lightblue";
            case CycleClass::GrowsTails: return "salmon";
            case CycleClass::PartiallySplits: return "gold";
        }
        return "white";
    };
    std::ostringstream out;
    out << "digraph lifts {\n  node [style=filled];\n";
    for (const auto& e : r.liftTree) {
        out << "  n" << e.id << " [label=\"level " << e.node.level << " | K="
            << e.node.length() << " | " << cycleClassName(e.node.classification);
        if (!e.status.empty() && e.status != "open") out << "\\n" << e.status;
        out << "\" fillcolor=\"" << color(e.node.classification) << "\"];\n";
        if (e.parent >= 0) out << "  n" << e.parent << " -> n" << e.id << ";\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace qpdyn
