#include "gia/objective.hpp"

#include "gia/homophily.hpp"
#include "gia/train.hpp"

#include <cmath>

namespace gia {

AttackTarget make_attack_target(const GraphBundle& g, const GnnModel& surrogate, IndexList victims) {
    require(!victims.empty(), "attack target: empty victim set");
    for (Index v : victims) require(v >= 0 && v < g.num_nodes(), "attack target: victim out of range");
    AttackTarget t;
    t.graph = &g;
    t.surrogate = &surrogate;
    t.victims = std::move(victims);
    const Matrix logits = forward(surrogate, NormAdjView(GraphView::of(g)), g.features());
    t.pseudo_labels = argmax_rows(logits);
    t.clean_probs = softmax_rows(logits);
    return t;
}

LossValue atk_loss(const Matrix& logits, const IndexList& pseudo_labels, const IndexList& victims, Real hinge_tau) {
    require(!victims.empty(), "atk_loss: empty victim set");
    LossValue lv;
    lv.grad = Matrix::Zero(logits.rows(), logits.cols());
    const Real w = 1.0 / static_cast<Real>(victims.size());
    for (Index u : victims) {
        const Index y = pseudo_labels[static_cast<std::size_t>(u)];
        const Real top = logits.row(u).maxCoeff();
        const RowVector e = (logits.row(u).array() - top).exp().matrix();
        const RowVector p = e / e.sum();
        Real kept = 0.0;
        for (Index c = 0; c < logits.cols(); ++c)
            if (p[c] >= hinge_tau) kept += e[c];
        Real ce = std::log(kept) + top;
        for (Index c = 0; c < logits.cols(); ++c)
            if (p[c] >= hinge_tau) lv.grad(u, c) = -w * e[c] / kept;
        if (p[y] >= hinge_tau) {
            ce -= logits(u, y);
            lv.grad(u, y) += w;
        }
        lv.value -= w * ce;
    }
    return lv;
}

HaoValue hao_objective(const GnnModel& model, const NormAdjView& view, const Matrix& features,
                       const IndexList& victims, const IndexList& pseudo_labels, const IndexList& injected,
                       const HaoConfig& hao, const HaoRequest& request) {
    require(hao.lambda >= 0 && hao.lambda_a >= 0 && hao.hinge_tau >= 0, "HAO: negative coefficient");
    GradRequest req;
    req.features = !request.feature_rows.empty();
    req.feature_rows = request.feature_rows;
    req.edge_pairs = request.edge_pairs;
    const LossFn loss = [&](const Matrix& logits) { return atk_loss(logits, pseudo_labels, victims, hao.hinge_tau); };
    Gradients g = gradients(model, view, features, loss, req);

    HaoValue out;
    out.atk = g.loss;
    out.value = g.loss;
    out.logits = std::move(g.logits);
    out.features = std::move(g.features);
    out.edges = std::move(g.edges);
    if ((hao.lambda == 0 && hao.lambda_a == 0) || injected.empty()) return out;

    const auto h = mean_homophily_gradient(view.adjacency(), features, injected, request.edge_pairs);
    out.homophily = h.value;
    out.value = out.atk - hao.lambda * h.value;
    for (std::size_t i = 0; i < request.feature_rows.size(); ++i)
        out.features.row(static_cast<Index>(i)) -= hao.lambda * h.features.row(request.feature_rows[i]);
    for (std::size_t i = 0; i < out.edges.size(); ++i) out.edges[i] -= hao.lambda_a * h.edges[i];
    return out;
}

PgdResult pgd_feature_update(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& victims,
                             const HaoConfig& hao, const PgdConfig& config, const IndexList& active,
                             const PgdTrace& trace) {
    require(config.steps >= 0 && config.patience >= 0, "PGD: negative step count or patience");
    PgdResult result;
    if (pert.size() == 0) return result;
    const GraphBundle& g = *target.graph;
    const Index n = g.num_nodes();

    IndexList rows = active;
    if (rows.empty())
        for (Index w = 0; w < pert.size(); ++w) rows.push_back(w);
    HaoRequest req;
    for (Index w : rows) {
        require(w >= 0 && w < pert.size(), "PGD: active row out of range");
        req.feature_rows.push_back(n + w);
    }

    PerturbedGraph pg = apply_injection(g, pert);
    const NormAdjView view(pg.view);
    Matrix x = std::move(pg.features);
    const FeatureBox box = g.feature_box();
    Matrix best = pert.features;
    int since_best = 0;
    for (int t = 0;; ++t) {
        const HaoValue v =
            hao_objective(*target.surrogate, view, x, victims, target.pseudo_labels, req.feature_rows, hao, req);
        const Real acc = predict_accuracy(v.logits, victims, target.pseudo_labels);
        if (trace) trace(t, x.bottomRows(pert.size()));
        result.steps_run = t;
        if (t == 0 || acc < result.best_accuracy || (acc == result.best_accuracy && v.value < result.best_objective)) {
            result.best_accuracy = acc;
            result.best_objective = v.value;
            best = x.bottomRows(pert.size());
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
        if (t == config.steps) break;
        for (std::size_t i = 0; i < req.feature_rows.size(); ++i) {
            const Index r = req.feature_rows[i];
            const RowVector step = v.features.row(static_cast<Index>(i)).unaryExpr([](Real d) { return Real((d > 0) - (d < 0)); });
            x.row(r) = project_features(x.row(r) - config.lr * step, box);
        }
    }
    pert.features = std::move(best);
    return result;
}

}  // namespace gia
