#include "gia/checkpoint.hpp"
#include "gia/train.hpp"
#include "gradcheck.hpp"

#include <doctest.h>

#include <filesystem>

using namespace gia;

namespace {

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace

TEST_CASE("init_model shapes and determinism") {
    const ModelDims cora{1433, 64, 7, 3};
    const auto a = init_model(Arch::GCN, cora, {}, 42);
    const auto b = init_model(Arch::GCN, cora, {}, 42);
    REQUIRE(a.weights.size() == 3);
    CHECK(a.weights[0].rows() == 1433);
    CHECK(a.weights[0].cols() == 64);
    CHECK(a.weights[1].rows() == 64);
    CHECK(a.weights[1].cols() == 64);
    CHECK(a.weights[2].rows() == 64);
    CHECK(a.weights[2].cols() == 7);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.weights[i] == b.weights[i]);
    const Real bound = std::sqrt(6.0 / (1433 + 64));
    CHECK(a.weights[0].cwiseAbs().maxCoeff() <= bound);
    CHECK(init_model(Arch::GCN, cora, {}, 43).weights[0] != a.weights[0]);
    CHECK_THROWS_AS(init_model(Arch::GCN, {10, 0, 2, 3}, {}, 1), Error);
}

TEST_CASE("linearized identity propagation") {
    Matrix x(3, 3);
    x << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    auto g = build_graph({}, x, {0, 1, 2}, {});
    auto m = init_model(Arch::LinearizedGNN, {3, 0, 3, 1}, {}, 0);
    m.weights[0] = Matrix::Identity(3, 3);
    CHECK(forward(m, NormAdjView(GraphView::of(g)), x) == x);
}

TEST_CASE("linearized forward equals dense Â^k X Θ") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = testing::random_graph(rng, 20 + 8 * trial, 5, 0.1, 3);
        const Index k = 1 + trial % 3;
        auto m = init_model(Arch::LinearizedGNN, {5, 0, 3, k}, {}, static_cast<std::uint64_t>(trial));
        const Matrix a = testing::dense_normalized(testing::dense_adjacency(g));
        Matrix expected = g.features() * m.weights[0];
        for (Index i = 0; i < k; ++i) expected = a * expected;
        const Matrix got = forward(m, NormAdjView(GraphView::of(g)), g.features());
        CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("two-layer GCN matches a dense replay") {
    std::mt19937_64 rng(9);
    auto g = testing::random_graph(rng, 5, 3, 0.5, 2);
    auto m = init_model(Arch::GCN, {3, 4, 2, 2}, {}, 5);
    m.biases[0].setConstant(0.1);
    m.biases[1].setConstant(-0.2);
    const Matrix a = testing::dense_normalized(testing::dense_adjacency(g));
    Matrix h = relu(a * g.features() * m.weights[0] + Matrix::Constant(5, 4, 0.1));
    const Matrix expected = a * h * m.weights[1] + Matrix::Constant(5, 2, -0.2);
    const Matrix got = forward(m, NormAdjView(GraphView::of(g)), g.features());
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("forward is deterministic and rejects NaN") {
    std::mt19937_64 rng(10);
    auto g = testing::random_graph(rng, 12, 3, 0.3, 2);
    auto m = init_model(Arch::GCN, {3, 8, 2, 3}, {}, 1);
    const NormAdjView view(GraphView::of(g));
    CHECK(forward(m, view, g.features()) == forward(m, view, g.features()));
    Matrix bad = g.features();
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(forward(m, view, bad), Error);
}

TEST_CASE("EGuard with every neighbor masked aggregates self only") {
    Matrix x(3, 2);
    x << 1, 0, -1, 0, 0, 1;
    auto g = build_graph({{0, 1}, {0, 2}}, x, {0, 1, 0}, {});
    ModelOptions opt;
    opt.guard_threshold = 0.5;
    auto guard = init_model(Arch::EGuardGCN, {2, 4, 2, 1}, opt, 3);
    auto mlp = init_model(Arch::MLP, {2, 4, 2, 1}, opt, 3);
    mlp.weights = guard.weights;
    mlp.biases = guard.biases;
    const NormAdjView view(GraphView::of(g));
    const Matrix coeff = Matrix(eguard_coefficients(view, x, 0.5));
    CHECK(coeff == Matrix::Identity(3, 3));
    CHECK((forward(guard, view, x) - forward(mlp, view, x)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("guard coefficients are row-stochastic and monotone in the threshold") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = testing::random_graph(rng, 25, 4, 0.2, 2);
        const NormAdjView view(GraphView::of(g));
        Index prev_kept = std::numeric_limits<Index>::max();
        for (Real tau : {-0.5, 0.0, 0.1, 0.3, 0.6}) {
            const Matrix e = Matrix(eguard_coefficients(view, g.features(), tau));
            const Matrix r = Matrix(rgat_coefficients(view, g.features(), tau));
            for (Index u = 0; u < 25; ++u) {
                CHECK(e.row(u).sum() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(r.row(u).sum() == doctest::Approx(1.0).epsilon(1e-12));
                Real uniform = -1;
                for (Index v = 0; v < 25; ++v)
                    if (r(u, v) > 0) {
                        if (uniform < 0) uniform = r(u, v);
                        CHECK(r(u, v) == doctest::Approx(uniform).epsilon(1e-14));
                    }
            }
            const Index kept = static_cast<Index>((e.array() > 0).count());
            CHECK(kept <= prev_kept);
            prev_kept = kept;
        }
    }
}

TEST_CASE("guard edge gradients vanish on masked pairs") {
    Matrix x(3, 2);
    x << 1, 0, -1, 0, 1, 0.1;
    auto g = build_graph({{0, 1}, {0, 2}}, x, {0, 1, 0}, {});
    auto m = init_model(Arch::EGuardGCN, {2, 4, 2, 2}, {}, 3);
    GradRequest req;
    req.edge_pairs = {{0, 1}, {0, 2}};
    const auto grad = gradients(m, NormAdjView(GraphView::of(g)), x,
                                [](const Matrix& l) { return cross_entropy(l, {0, 1, 2}, {0, 1, 0}); }, req);
    CHECK(grad.edges[0] == 0.0);
}

TEST_CASE("gradient check on a handful of instances") {
    ModelOptions ln;
    ln.layer_norm_pre = ln.layer_norm_inter = true;
    struct Case {
        Arch arch;
        ModelOptions options;
    };
    for (const Case& c : {Case{Arch::LinearizedGNN, {}}, Case{Arch::GCN, {}}, Case{Arch::GCN, ln}, Case{Arch::MLP, {}}})
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto r = testing::gradient_check_instance(c.arch, c.options, seed);
            INFO(arch_name(c.arch) << " seed " << seed);
            CHECK(r.params < 1e-4);
            CHECK(r.features < 1e-4);
            CHECK(r.edges < 1e-4);
        }
}

TEST_CASE("gradient of a loss that ignores a row is zero there") {
    std::mt19937_64 rng(14);
    auto g = build_graph({{0, 1}}, Matrix::Random(3, 2), {0, 1, 0}, {});
    auto m = init_model(Arch::GCN, {2, 4, 2, 2}, {}, 3);
    GradRequest req;
    req.features = true;
    req.feature_rows = {2};
    const auto grad = gradients(m, NormAdjView(GraphView::of(g)), g.features(),
                                [](const Matrix& l) { return cross_entropy(l, {0}, {0, 1, 0}); }, req);
    CHECK(grad.features.isZero(0));
}

TEST_CASE("margins, accuracy and influence") {
    Matrix onehot = Matrix::Zero(2, 3);
    onehot(0, 1) = 1.0;
    CHECK(decision_margin(onehot, 0, 1) == 1.0);
    CHECK(decision_margin(onehot, 1, 0) == 0.0);

    Matrix logits(4, 2);
    logits << 2, 1, 0, 3, 1, 1, -1, -2;
    CHECK(predict_accuracy(logits, {0, 1, 2, 3}, {0, 1, 0, 1}) == doctest::Approx(0.75));
    CHECK(predict_accuracy(Matrix::Zero(4, 2), {0, 1, 2, 3}, {0, 1, 0, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(predict_accuracy(logits, {}, {}), Error);

    std::mt19937_64 rng(15);
    std::normal_distribution<Real> normal;
    for (int t = 0; t < 20; ++t) {
        Matrix l(1, 4);
        for (Index c = 0; c < 4; ++c) l(0, c) = normal(rng);
        const Index y = t % 4;
        Real other = -1e9;
        for (Index c = 0; c < 4; ++c)
            if (c != y) other = std::max(other, l(0, c));
        CHECK(decision_margin(l, 0, y) == l(0, y) - other);
    }

    Matrix x = Matrix::Zero(4, 1);
    auto path = build_graph({{0, 1}, {1, 2}, {2, 3}}, x, {0, 0, 0, 0}, {});
    const NormAdjView view(GraphView::of(path));
    const Matrix a = testing::dense_normalized(testing::dense_adjacency(path));
    CHECK(influence_scores(view, 1, 0) == Vector::Unit(4, 1));
    Matrix ak = Matrix::Identity(4, 4);
    for (Index k = 1; k <= 4; ++k) {
        ak = ak * a;
        CHECK((influence_scores(view, 1, k).transpose() - ak.row(1)).cwiseAbs().maxCoeff() < 1e-12);
    }
    auto lonely = build_graph({}, x, {0, 0, 0, 0}, {});
    CHECK(influence_scores(NormAdjView(GraphView::of(lonely)), 2, 5) == Vector::Unit(4, 2));
}

TEST_CASE("checkpoint round trip") {
    ModelOptions opt;
    opt.layer_norm_pre = true;
    opt.layer_norm_inter = true;
    auto m = init_model(Arch::GCN, {5, 6, 3, 3}, opt, 8);
    const auto path = std::filesystem::temp_directory_path() / "gia_ckpt_test.bin";
    save_checkpoint(m, path);
    const auto back = load_checkpoint(path);
    CHECK(back.arch == Arch::GCN);
    CHECK(back.options.layer_norm_pre);
    const auto a = m.parameters();
    const auto b = back.parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((*a[i] - *b[i]).cwiseAbs().maxCoeff() < 1e-6);
    std::filesystem::remove(path);
}
