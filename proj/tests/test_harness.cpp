#include "gia/harness.hpp"
#include "gia/homophily.hpp"
#include "gia/sbm.hpp"
#include "scenario.hpp"

#include <doctest.h>

#include <set>

using namespace gia;

namespace {

SbmSpec small_sbm(std::uint64_t seed) {
    SbmSpec s;
    s.n = 120;
    s.p_in = 0.12;
    s.p_out = 0.02;
    s.feature_dim = 4;
    s.sigma = 0.5;
    s.connect_isolated = true;
    s.seed = seed;
    return s;
}

ExperimentSpec small_experiment(const GraphBundle& g) {
    ExperimentSpec e;
    e.graph = &g;
    e.surrogate_dims = {0, 16, 0, 2};
    e.surrogate_train.epochs = 40;
    e.defense_train.epochs = 40;
    DefenseSpec gcn;
    gcn.name = "gcn";
    gcn.hidden = 16;
    gcn.layers = 2;
    DefenseSpec pruned = gcn;
    pruned.name = "gcn+prune";
    pruned.prune = true;
    pruned.category = Category::Homo;
    e.roster = {gcn, pruned};
    e.budget = AttackBudget::injection(g, 6, 4);
    AttackSpec none;
    none.method = "none";
    AttackSpec pgd;
    pgd.pgd = {20, 0.05, 20};
    e.attacks = {none, pgd};
    e.repeats = 2;
    return e;
}

}  // namespace

TEST_CASE("budget table") {
    const auto cora = budget_table("cora");
    CHECK(cora.max_nodes == 60);
    CHECK(cora.max_degree == 20);
    CHECK(budget_table("cora-nontargeted").max_nodes == 60);
    const auto citeseer = budget_table("citeseer-nontargeted");
    CHECK(citeseer.max_nodes == 90);
    CHECK(citeseer.max_degree == 10);
    CHECK(budget_table("computers").max_nodes == 300);
    CHECK(budget_table("arxiv").max_degree == 100);
    CHECK(budget_table("computers-targeted").max_nodes == 100);
    CHECK(budget_table("reddit-targeted").max_nodes == 300);
    CHECK_THROWS_AS(budget_table("pubmed"), Error);
}

TEST_CASE("SBM generation") {
    SbmSpec s;
    s.classes = 2;
    s.seed = 1;
    const auto g = generate_sbm(s);
    for (Index u = 0; u < g.num_nodes(); ++u) {
        const Real y = g.labels()[u] == 0 ? 1.0 : -1.0;
        CHECK(g.features()(u, 0) == y);
        CHECK(g.features()(u, 1) == -y);
    }

    s.p_out = 0.0;
    s.n = 200;
    const auto pure = generate_sbm(s);
    for (const auto& e : pure.edges()) CHECK(pure.labels()[e.u] == pure.labels()[e.v]);

    s.n = 1000;
    s.p_in = 0.02;
    s.p_out = 0.002;
    s.classes = 3;
    const auto big = generate_sbm(s);
    // Expected share of intra-class edges from the pair counts of each kind.
    Real intra_pairs = 0, inter_pairs = 0;
    for (Index u = 0; u < s.n; ++u)
        for (Index v = u + 1; v < s.n; ++v) (u % 3 == v % 3 ? intra_pairs : inter_pairs) += 1;
    const Real expected = intra_pairs * s.p_in / (intra_pairs * s.p_in + inter_pairs * s.p_out);
    Real intra = 0;
    for (const auto& e : big.edges()) intra += big.labels()[e.u] == big.labels()[e.v];
    CHECK(std::abs(intra / big.num_edges() - expected) <= 0.03);

    IndexList count(3, 0);
    for (Index y : big.labels()) ++count[y];
    CHECK(*std::max_element(count.begin(), count.end()) - *std::min_element(count.begin(), count.end()) <= 1);
    const auto& sp = big.splits();
    CHECK(sp.train.size() + sp.val.size() + sp.test.size() == 1000);
    CHECK(std::abs(static_cast<Real>(sp.train.size()) - 500) <= 3);
    CHECK(std::abs(static_cast<Real>(sp.val.size()) - 200) <= 3);

    SbmSpec bad;
    bad.p_in = 0.01;
    bad.p_out = 0.1;
    CHECK_THROWS_AS(generate_sbm(bad), Error);
}

TEST_CASE("training fits a separable SBM") {
    SbmSpec s;
    s.n = 200;
    s.p_in = 0.05;
    s.p_out = 0.005;
    s.seed = 3;
    const auto g = generate_sbm(s);
    TrainConfig cfg;
    cfg.epochs = 100;
    const auto result = train(init_model(Arch::GCN, {2, 16, 2, 2}, {}, 3), training_subgraph(g), cfg);
    CHECK(result.history.back().train_accuracy >= 0.99);
}

TEST_CASE("target selection") {
    const auto sc = testing::trained_scenario(small_sbm(5));
    const auto& g = sc.graph;
    IndexList test = g.splits().test;
    std::sort(test.begin(), test.end());
    CHECK(select_targets(sc.surrogate, g, TargetMode::all_test()) == test);

    const Index m = static_cast<Index>(test.size());
    CHECK(select_targets(sc.surrogate, g, TargetMode::margin_mix(m / 4, m / 4, m - 2 * (m / 4)), 9) == test);

    // Full-sort oracle on the surrogate's own margins.
    const Matrix logits = forward(sc.surrogate, NormAdjView(GraphView::of(g)), g.features());
    std::vector<std::pair<Real, Index>> margins;
    for (Index u : test) {
        Real top = -1e300, second = -1e300;
        for (Index c = 0; c < logits.cols(); ++c) {
            const Real z = logits(u, c);
            if (z > top) second = top, top = z;
            else if (z > second) second = z;
        }
        margins.push_back({top - second, u});
    }
    std::sort(margins.begin(), margins.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const auto hi_only = select_targets(sc.surrogate, g, TargetMode::margin_mix(5, 0, 0));
    std::set<Index> expect_hi;
    for (int i = 0; i < 5; ++i) expect_hi.insert(margins[i].second);
    CHECK(std::set<Index>(hi_only.begin(), hi_only.end()) == expect_hi);

    const auto lo_only = select_targets(sc.surrogate, g, TargetMode::margin_mix(0, 5, 0));
    std::set<Index> expect_lo;
    std::stable_sort(margins.begin(), margins.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    });
    for (int i = 0; i < 5; ++i) expect_lo.insert(margins[i].second);
    CHECK(std::set<Index>(lo_only.begin(), lo_only.end()) == expect_lo);

    const auto mix = select_targets(sc.surrogate, g, TargetMode::margin_mix(5, 5, 7), 1);
    CHECK(mix.size() == 17);
    CHECK(std::is_sorted(mix.begin(), mix.end()));
    for (Index u : hi_only) CHECK(std::binary_search(mix.begin(), mix.end(), u));
    CHECK(mix == select_targets(sc.surrogate, g, TargetMode::margin_mix(5, 5, 7), 1));
}

TEST_CASE("attack never depends on test labels") {
    const auto sc = testing::trained_scenario(small_sbm(6));
    const auto& g = sc.graph;
    IndexList scrambled = g.labels();
    for (Index u : g.splits().test) scrambled[u] = (scrambled[u] + 1) % g.num_classes();
    const auto g2 = build_graph(g.edges(), g.features(), scrambled, g.splits(), g.num_classes());

    const auto victims = select_targets(sc.surrogate, g, TargetMode::all_test());
    const auto budget = AttackBudget::injection(g, 5, 3);
    for (const char* method : {"pgd", "atdgia", "gma"}) {
        AttackSpec a;
        a.method = method;
        a.hao = true;
        a.lambda = 1.0;
        a.pgd = {15, 0.05, 15};
        const auto x = run_attack(g, sc.surrogate, victims, budget, a, 4);
        const auto y = run_attack(g2, sc.surrogate, victims, budget, a, 4);
        CHECK(x.injection.features == y.injection.features);
        CHECK(x.injection.neighbors == y.injection.neighbors);
        CHECK(x.flips.flips.size() == y.flips.flips.size());
        CHECK(x.graph.view.base == &g);
    }
}

TEST_CASE("black-box evaluation") {
    const auto g = generate_sbm(small_sbm(7));
    auto spec = small_experiment(g);
    const auto report = run_blackbox_eval(spec);

    // clean + 2 attacks, 2 defenses, 2 seeds
    REQUIRE(report.cells.size() == 12);
    for (const auto& c : report.cells) CHECK(c.accuracy.has_value());
    for (const char* d : {"gcn", "gcn+prune"}) CHECK(report.mean_accuracy("none", d) == report.mean_accuracy("clean", d));
    CHECK(report.category_max("pgd", Category::Homo) == report.mean_accuracy("pgd", "gcn+prune"));
    REQUIRE(report.attack_runs.size() == 4);
    CHECK(report.attack_runs[0].nodes_used == 0);
    CHECK(report.attack_runs[0].homophily_shift == 0.0);
    CHECK(report.attack_runs[1].nodes_used == 6);
    CHECK(report.attack_runs[1].edges_used <= 24);

    const auto again = run_blackbox_eval(spec);
    REQUIRE(again.cells.size() == report.cells.size());
    for (std::size_t i = 0; i < again.cells.size(); ++i) CHECK(again.cells[i].accuracy == report.cells[i].accuracy);
    CHECK(report_csv(again) == report_csv(report));

    const auto round = report_from_json(report_to_json(report));
    CHECK(report_csv(round) == report_csv(report));
    CHECK(round.categories.size() == report.categories.size());

    const auto csv = report_csv(report);
    CHECK(csv.substr(0, csv.find('\n')) == "attack,hao,lambda,defense,category,seed,accuracy");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
}

TEST_CASE("evaluation isolates failing cells") {
    const auto g = generate_sbm(small_sbm(8));
    auto spec = small_experiment(g);
    spec.repeats = 1;
    spec.roster[0].layers = 0;  // cannot be built
    AttackSpec broken;
    broken.method = "nosuch";
    spec.attacks.push_back(broken);
    const auto report = run_blackbox_eval(spec);
    REQUIRE(report.cells.size() == 8);
    for (const auto& c : report.cells) {
        if (c.defense == "gcn") {
            CHECK_FALSE(c.accuracy.has_value());
            CHECK(c.error.rfind("training:", 0) == 0);
        } else if (c.attack == "nosuch") {
            CHECK_FALSE(c.accuracy.has_value());
            CHECK(c.error.rfind("attack:", 0) == 0);
        } else {
            CHECK(c.accuracy.has_value());
        }
    }
    CHECK_THROWS_AS(report.mean_accuracy("clean", "gcn"), Error);

    spec.roster.clear();
    CHECK_THROWS_AS(run_blackbox_eval(spec), Error);
    spec = small_experiment(g);
    spec.repeats = 0;
    CHECK_THROWS_AS(run_blackbox_eval(spec), Error);
}

TEST_CASE("roster files") {
    const auto roster = default_roster();
    std::set<std::string> names;
    for (const auto& d : roster) names.insert(d.name);
    CHECK(names.size() == roster.size());
    auto find = [&](const std::string& n) {
        for (const auto& d : roster)
            if (d.name == n) return d.category;
        FAIL("missing " << n);
        return Category::Vanilla;
    };
    CHECK(find("gcn") == Category::Vanilla);
    CHECK(find("gcn+ln") == Category::Robust);
    CHECK(find("gcn+flag") == Category::Robust);
    CHECK(find("gcn+ln+lni") == Category::Combo);
    CHECK(find("gcn+flag+ln+lni") == Category::Combo);
    CHECK(find("eguard") == Category::Homo);
    CHECK(find("gcn+prune") == Category::Homo);

    const auto back = parse_roster(roster_to_json(roster));
    REQUIRE(back.size() == roster.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].name == roster[i].name);
        CHECK(back[i].tau == roster[i].tau);
        CHECK(back[i].flag == roster[i].flag);
    }
    const auto j = nlohmann::json::parse(R"([{"arch": "rgat", "options": {"tau": 0.2}, "category": "Homo"}])");
    const auto one = parse_roster(j);
    CHECK(one[0].name == "rgat");
    CHECK(one[0].options.guard_threshold == 0.2);
    CHECK_THROWS_AS(parse_roster(nlohmann::json::parse(R"([{"arch": "gcn", "category": "Best"}])")), Error);
    CHECK_THROWS_AS(parse_roster(nlohmann::json::parse("[]")), Error);
}
