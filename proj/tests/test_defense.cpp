#include "gia/defense.hpp"
#include "gia/homophily.hpp"
#include "gia/sbm.hpp"
#include "gia/train.hpp"
#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

using namespace gia;

namespace {

std::set<Edge> removed_set(const PruneResult& r) {
    std::set<Edge> s;
    for (const auto& e : r.removed) s.insert({e.u, e.v});
    return s;
}

}  // namespace

TEST_CASE("pruning boundaries") {
    std::mt19937_64 rng(1);
    auto g = testing::random_graph(rng, 30, 4, 0.2, 2);
    CHECK(prune_graph(GraphView::of(g), g.features(), -1.0).removed.empty());

    const Matrix parallel = Matrix::Constant(30, 4, 0.7);
    auto flat = build_graph(g.edges(), parallel, g.labels(), {});
    CHECK(prune_graph(GraphView::of(flat), parallel, 0.5).removed.empty());

    const Real s = min_edge_similarity(g);
    const auto r = prune_graph(GraphView::of(g), g.features(), s);
    CHECK_FALSE(r.removed.empty());
    for (const auto& e : g.edges()) {
        const bool low = cosine(g.features().row(e.u), g.features().row(e.v)) <= s;
        CHECK(removed_set(r).count(e) == (low ? 1u : 0u));
    }
}

TEST_CASE("pruning is monotone and never adds edges") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        auto g = testing::random_graph(rng, 25, 3, 0.25, 2);
        GraphView view = GraphView::of(g);
        view.num_nodes = 27;
        Matrix x(27, 3);
        x.topRows(25) = g.features();
        x.bottomRows(2).setRandom();
        view.extra = {{25, 0, 1.0}, {25, 3, 1.0}, {26, 7, 1.0}};
        std::set<Edge> prev;
        std::size_t prev_edges = g.edges().size() + 3;
        for (Real tau : {-0.8, -0.3, 0.0, 0.2, 0.5, 0.9}) {
            const auto r = prune_graph(view, x, tau);
            const auto now = removed_set(r);
            CHECK(std::includes(now.begin(), now.end(), prev.begin(), prev.end()));
            std::size_t kept = r.view.extra.size();
            for (std::size_t i = 0; i < g.edges().size(); ++i) kept += r.view.base_edge_kept(i);
            CHECK(kept + r.removed.size() == g.edges().size() + 3);
            CHECK(kept <= prev_edges);
            CHECK(r.view.num_nodes == view.num_nodes);
            prev = now;
            prev_edges = kept;
        }
    }
}

TEST_CASE("prune audit CSV") {
    Matrix x(3, 2);
    x << 1, 0, -1, 0, 1, 0.1;
    auto g = build_graph({{0, 1}, {0, 2}}, x, {0, 1, 0}, {});
    GraphView view = GraphView::of(g);
    view.num_nodes = 4;
    Matrix xx(4, 2);
    xx << 1, 0, -1, 0, 1, 0.1, -1, 0;
    view.extra = {{3, 2, 1.0}};
    const auto r = prune_graph(view, xx, 0.0);
    REQUIRE(r.removed.size() == 2);
    const auto path = std::filesystem::temp_directory_path() / "gia_audit.csv";
    write_prune_audit(path, r);
    std::ifstream in(path);
    std::string header, first, second;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    CHECK(header == "u,v,similarity,origin");
    CHECK(first == "0,1,-1,original");
    CHECK(second.substr(0, 4) == "3,2,");
    CHECK(second.substr(second.size() - 9) == ",injected");
    std::filesystem::remove(path);
}

TEST_CASE("defended evaluation") {
    std::mt19937_64 rng(3);
    auto g = testing::random_graph(rng, 20, 3, 0.2, 2);
    Defense d{init_model(Arch::GCN, {3, 8, 2, 2}, {}, 1), true, -1.0};
    Defense bare = d;
    bare.prune = false;
    IndexList all(20);
    std::iota(all.begin(), all.end(), Index{0});
    CHECK(defended_logits(d, GraphView::of(g), g.features()) == defended_logits(bare, GraphView::of(g), g.features()));
    CHECK(defended_evaluate(d, GraphView::of(g), g.features(), all, g.labels()) ==
          defended_evaluate(bare, GraphView::of(g), g.features(), all, g.labels()));

    Matrix x(5, 2);
    x << 1, 0, 0, 1, 0, 1, 0, 1, 0, 1;
    auto star = build_graph({{0, 1}, {0, 2}, {0, 3}, {0, 4}}, x, {0, 1, 1, 1, 1}, {});
    auto empty = build_graph({}, x, {0, 1, 1, 1, 1}, {});
    Defense s{init_model(Arch::GCN, {2, 4, 2, 2}, {}, 2), true, 0.0};
    CHECK(defended_logits(s, GraphView::of(star), x) == forward(s.model, NormAdjView(GraphView::of(empty)), x));

    Defense guard{init_model(Arch::EGuardGCN, {2, 4, 2, 2}, {}, 2), false, 0.1};
    CHECK(with_threshold(guard, 0.15).model.options.guard_threshold == 0.15);
    CHECK_THROWS_AS(with_threshold(guard, 1.5), Error);
}

TEST_CASE("threshold calibration") {
    const auto grid = default_threshold_grid();
    CHECK(std::find(grid.begin(), grid.end(), 0.1) != grid.end());
    CHECK(std::find(grid.begin(), grid.end(), 0.15) != grid.end());
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 0.3);

    SbmSpec spec;
    spec.n = 60;
    spec.p_in = 0.2;
    spec.p_out = 0.05;
    spec.feature_dim = 3;
    spec.sigma = 0.6;
    spec.seed = 4;
    const auto g = generate_sbm(spec);
    TrainConfig cfg;
    cfg.epochs = 60;
    const auto model = train(init_model(Arch::GCN, {3, 8, 2, 2}, {}, 4), training_subgraph(g), cfg).model;
    const Defense d{model, true, 0.1};
    const auto cal = calibrate_threshold(d, g, {}, g.splits().test, g.labels());
    REQUIRE(cal.table.size() == grid.size());
    Real best = -1;
    Real best_tau = 0;
    for (const auto& row : cal.table) {
        CHECK(row.perturbed == 1.0);
        if (row.clean >= best) best = row.clean, best_tau = row.tau;
    }
    CHECK(cal.tau == best_tau);
    CHECK_THROWS_AS(calibrate_threshold(d, g, {}, g.splits().test, g.labels(), {}), Error);
}

TEST_CASE("certificate arithmetic and rejection") {
    Matrix x(2, 2);
    x << 1, -1, 1, -1;
    auto pair = build_graph({{0, 1}}, x, {0, 0}, {}, 2);
    auto lin = init_model(Arch::LinearizedGNN, {2, 0, 2, 1}, {}, 0);
    lin.weights[0] = Matrix::Identity(2, 2);
    const auto c = certify_node(pair, lin, 0, 0.0);
    CHECK(c.degree_factor == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(c.homophily == doctest::Approx(1.0));
    CHECK(c.gamma == 2.0);

    Matrix bad(2, 2);
    bad << 1, 0, 0, 1;
    auto other = build_graph({{0, 1}}, bad, {0, 1}, {}, 2);
    CHECK_THROWS_AS(certify_node(other, lin, 0, 0.0), Error);
    auto gcn = init_model(Arch::GCN, {2, 4, 2, 2}, {}, 0);
    CHECK_THROWS_AS(certify_node(pair, gcn, 0, 0.0), Error);
}

TEST_CASE("certified node survives an exhaustive single injection") {
    // Node 0 sits in a same-class clique, so its margin is large.
    Matrix x(6, 2);
    x << 1, -1, 1, -1, 1, -1, 1, -1, -1, 1, -1, 1;
    auto g = build_graph({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {2, 3}, {4, 5}}, x, {0, 0, 0, 0, 1, 1}, {}, 2);
    auto lin = init_model(Arch::LinearizedGNN, {2, 0, 2, 2}, {}, 0);
    lin.weights[0] = Matrix::Identity(2, 2);
    const auto c = certify_node(g, lin, 0, 0.0);
    CHECK(c.certified);
    CHECK(c.bound < 0.0);

    const Defense d{lin, true, 0.0};
    for (Real a = -1.0; a <= 1.0 + 1e-9; a += 0.1)
        for (Real b = -1.0; b <= 1.0 + 1e-9; b += 0.1) {
            GraphView view = GraphView::of(g);
            view.num_nodes = 7;
            view.extra = {{6, 0, 1.0}};
            Matrix xx(7, 2);
            xx.topRows(6) = x;
            xx.row(6) << a, b;
            CHECK(argmax_rows(defended_logits(d, view, xx))[0] == c.predicted);
        }
}
