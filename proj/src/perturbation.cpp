#include "gia/perturbation.hpp"

#include "gia/bundle_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>

namespace gia {

using nlohmann::json;

Index InjectionPerturbation::degree(Index local) const {
    Index d = static_cast<Index>(neighbors[static_cast<std::size_t>(local)].size());
    for (const auto& e : internal) d += (e.u == local) + (e.v == local);
    return d;
}

PerturbedGraph apply_injection(const GraphBundle& g, const InjectionPerturbation& pert) {
    require(pert.features.rows() == pert.size(), "injection: feature rows do not match the node count");
    require(pert.size() == 0 || pert.features.cols() == g.feature_dim(), "injection: feature width mismatch");
    const Index n = g.num_nodes();
    PerturbedGraph out;
    out.view = GraphView::of(g);
    out.view.num_nodes = n + pert.size();
    for (Index w = 0; w < pert.size(); ++w)
        for (Index v : pert.neighbors[static_cast<std::size_t>(w)]) out.view.extra.push_back({n + w, v, 1.0});
    for (const auto& e : pert.internal) out.view.extra.push_back({n + e.u, n + e.v, 1.0});
    out.features.resize(n + pert.size(), g.feature_dim());
    out.features.topRows(n) = g.features();
    if (pert.size() > 0) out.features.bottomRows(pert.size()) = pert.features;
    return out;
}

GraphView apply_flips(const GraphBundle& g, const EdgeFlipPerturbation& pert) {
    GraphView view = GraphView::of(g);
    view.base_removed.assign(g.edges().size(), false);
    for (const auto& f : pert.flips) {
        const Edge e{std::min(f.u, f.v), std::max(f.u, f.v)};
        if (f.add) {
            require(!g.has_edge(e.u, e.v), "flip adds an existing edge");
            view.extra.push_back({e.u, e.v, 1.0});
        } else {
            const auto it = std::lower_bound(g.edges().begin(), g.edges().end(), e);
            require(it != g.edges().end() && *it == e, "flip removes a missing edge");
            view.base_removed[static_cast<std::size_t>(it - g.edges().begin())] = true;
        }
    }
    return view;
}

InjectionPerturbation append_injection(InjectionPerturbation a, const InjectionPerturbation& b) {
    const Index offset = a.size();
    Matrix x(a.size() + b.size(), std::max(a.features.cols(), b.features.cols()));
    if (a.size() > 0) x.topRows(a.size()) = a.features;
    if (b.size() > 0) x.bottomRows(b.size()) = b.features;
    a.features = std::move(x);
    a.neighbors.insert(a.neighbors.end(), b.neighbors.begin(), b.neighbors.end());
    for (const auto& e : b.internal) a.internal.push_back({e.u + offset, e.v + offset});
    return a;
}

BudgetReport budget_check(const InjectionPerturbation& pert, const AttackBudget& budget, const GraphBundle& g) {
    BudgetReport r;
    auto fail = [&](std::string s) { r.violations.push_back(std::move(s)); };
    if (pert.size() > budget.max_nodes)
        fail("injected node count " + std::to_string(pert.size()) + " exceeds " + std::to_string(budget.max_nodes));
    if (pert.features.rows() != pert.size()) fail("feature rows do not match injected node count");
    if (pert.size() > 0 && pert.features.cols() != g.feature_dim()) fail("feature width mismatch");
    for (Index w = 0; w < pert.size(); ++w) {
        const auto& nb = pert.neighbors[static_cast<std::size_t>(w)];
        const Index d = pert.degree(w);
        if (d < 1 || d > budget.max_degree)
            fail("injected node " + std::to_string(w) + " has degree " + std::to_string(d) + " outside [1, " +
                 std::to_string(budget.max_degree) + "]");
        std::set<Index> seen;
        for (Index v : nb) {
            if (v < 0 || v >= g.num_nodes()) fail("injected node " + std::to_string(w) + " links to invalid node " + std::to_string(v));
            if (!seen.insert(v).second) fail("injected node " + std::to_string(w) + " links twice to " + std::to_string(v));
        }
    }
    for (const auto& e : pert.internal)
        if (e.u < 0 || e.v < 0 || e.u >= pert.size() || e.v >= pert.size() || e.u == e.v)
            fail("invalid injected-injected edge");
    for (Index i = 0; i < pert.features.rows(); ++i)
        for (Index j = 0; j < pert.features.cols(); ++j) {
            const Real v = pert.features(i, j);
            if (!(v >= budget.box.lo && v <= budget.box.hi)) {
                fail("feature (" + std::to_string(i) + "," + std::to_string(j) + ") = " + std::to_string(v) +
                     " outside the feature box");
            }
        }
    return r;
}

BudgetReport budget_check(const EdgeFlipPerturbation& pert, const AttackBudget& budget, const GraphBundle& g) {
    BudgetReport r;
    if (static_cast<Index>(pert.flips.size()) > budget.max_flips)
        r.violations.push_back("flip count " + std::to_string(pert.flips.size()) + " exceeds " +
                               std::to_string(budget.max_flips));
    std::vector<bool> in_training(static_cast<std::size_t>(g.num_nodes()), false);
    for (Index u : g.splits().train) in_training[static_cast<std::size_t>(u)] = true;
    for (Index u : g.splits().val) in_training[static_cast<std::size_t>(u)] = true;
    std::set<Edge> seen;
    for (const auto& f : pert.flips) {
        const Edge e{std::min(f.u, f.v), std::max(f.u, f.v)};
        if (e.u < 0 || e.v >= g.num_nodes() || e.u == e.v) {
            r.violations.push_back("invalid flip pair");
            continue;
        }
        if (!seen.insert(e).second) r.violations.push_back("duplicate flip (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
        if (in_training[static_cast<std::size_t>(e.u)] && in_training[static_cast<std::size_t>(e.v)])
            r.violations.push_back("flip inside the training subgraph (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
        if (f.add == g.has_edge(e.u, e.v)) r.violations.push_back("flip kind does not match the graph");
    }
    return r;
}

namespace {

json budget_json(const AttackBudget& b) {
    return {{"mode", b.mode == AttackBudget::Mode::GIA ? "GIA" : "GMA"},
            {"max_nodes", b.max_nodes},
            {"max_degree", b.max_degree},
            {"max_flips", b.max_flips},
            {"feature_box", {b.box.lo, b.box.hi}}};
}

AttackBudget budget_from_json(const json& j) {
    AttackBudget b;
    b.mode = j.at("mode").get<std::string>() == "GIA" ? AttackBudget::Mode::GIA : AttackBudget::Mode::GMA;
    b.max_nodes = j.at("max_nodes").get<Index>();
    b.max_degree = j.at("max_degree").get<Index>();
    b.max_flips = j.at("max_flips").get<Index>();
    b.box = {j.at("feature_box")[0].get<Real>(), j.at("feature_box")[1].get<Real>()};
    return b;
}

}  // namespace

void write_perturbation(const std::filesystem::path& json_path, const InjectionPerturbation& pert,
                        const AttackBudget& budget) {
    json injected = json::array();
    std::string blob;
    for (Index w = 0; w < pert.size(); ++w) {
        injected.push_back({{"features_ref", blob.size()}, {"neighbors", pert.neighbors[static_cast<std::size_t>(w)]}});
        append_f32(blob, pert.features.row(w));
    }
    json internal = json::array();
    for (const auto& e : pert.internal) internal.push_back({e.u, e.v});
    const json doc = {{"mode", "GIA"},      {"injected", injected}, {"internal", internal},
                      {"flips", json::array()}, {"budget", budget_json(budget)}, {"seed", pert.seed},
                      {"strategy", pert.strategy}, {"lambda", pert.lambda}, {"hao", pert.hao},
                      {"feature_dim", pert.features.cols()}};
    write_file(json_path, doc.dump(2) + "\n");
    write_file(json_path.parent_path() / "xatk.bin", blob);
}

void write_flips(const std::filesystem::path& json_path, const EdgeFlipPerturbation& pert, const AttackBudget& budget,
                 std::uint64_t seed, const std::string& strategy) {
    json flips = json::array();
    for (const auto& f : pert.flips) flips.push_back({f.u, f.v, f.add ? "add" : "remove"});
    const json doc = {{"mode", "GMA"},   {"injected", json::array()}, {"flips", flips},
                      {"budget", budget_json(budget)}, {"seed", seed}, {"strategy", strategy},
                      {"lambda", 0.0},   {"exhausted", pert.exhausted}};
    write_file(json_path, doc.dump(2) + "\n");
}

PerturbationFile read_perturbation(const std::filesystem::path& json_path, Index feature_dim) {
    const json doc = json::parse(read_file(json_path));
    PerturbationFile out;
    out.mode = doc.at("mode").get<std::string>();
    out.budget = budget_from_json(doc.at("budget"));
    for (const auto& f : doc.at("flips"))
        out.flips.flips.push_back({f[0].get<Index>(), f[1].get<Index>(), f[2].get<std::string>() == "add"});
    out.flips.exhausted = doc.value("exhausted", false);

    auto& inj = out.injection;
    inj.strategy = doc.value("strategy", std::string());
    inj.seed = doc.value("seed", std::uint64_t{0});
    inj.lambda = doc.value("lambda", 0.0);
    inj.hao = doc.value("hao", false);
    const auto& nodes = doc.at("injected");
    inj.features.resize(static_cast<Index>(nodes.size()), feature_dim);
    if (!nodes.empty()) {
        const std::string blob = read_file(json_path.parent_path() / "xatk.bin");
        for (std::size_t w = 0; w < nodes.size(); ++w) {
            inj.features.row(static_cast<Index>(w)) =
                parse_f32(blob, nodes[w].at("features_ref").get<std::size_t>(), 1, feature_dim);
            inj.neighbors.push_back(nodes[w].at("neighbors").get<IndexList>());
        }
    }
    if (doc.contains("internal"))
        for (const auto& e : doc["internal"]) inj.internal.push_back({e[0].get<Index>(), e[1].get<Index>()});
    return out;
}

}  // namespace gia
