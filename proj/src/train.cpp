#include "gia/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gia {

void Adam::step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
    require(params.size() == grads.size(), "Adam: parameter and gradient counts differ");
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    ++t_;
    const Real c1 = 1.0 - std::pow(beta1_, static_cast<Real>(t_));
    const Real c2 = 1.0 - std::pow(beta2_, static_cast<Real>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i].cwiseProduct(grads[i]);
        params[i]->array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
}

Real predict_accuracy(const Matrix& logits, const IndexList& nodes, const IndexList& labels) {
    require(!nodes.empty(), "predict_accuracy: empty node set");
    const IndexList pred = argmax_rows(logits);
    Index hits = 0;
    for (Index u : nodes) hits += pred[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(u)];
    return static_cast<Real>(hits) / static_cast<Real>(nodes.size());
}

Real predict_accuracy(const GnnModel& model, const NormAdjView& view, const Matrix& features, const IndexList& nodes,
                      const IndexList& labels) {
    return predict_accuracy(forward(model, view, features), nodes, labels);
}

Real decision_margin(const Matrix& logits, Index u, Index label) {
    require(label >= 0 && label < logits.cols(), "decision_margin: label unknown");
    require(logits.cols() >= 2, "decision_margin: need at least two classes");
    Real other = -std::numeric_limits<Real>::infinity();
    for (Index c = 0; c < logits.cols(); ++c)
        if (c != label) other = std::max(other, logits(u, c));
    return logits(u, label) - other;
}

Vector influence_scores(const NormAdjView& view, Index u, Index k) {
    require(k >= 0, "influence_scores: negative depth");
    require(u >= 0 && u < view.num_nodes(), "influence_scores: node out of range");
    Vector row = Vector::Zero(view.num_nodes());
    row[u] = 1.0;
    // Â is symmetric, so row u of Â^k equals Â^k e_u.
    for (Index i = 0; i < k; ++i) row = view.normalized() * row;
    return row;
}

GraphBundle training_subgraph(const GraphBundle& g) {
    IndexList keep = g.splits().train;
    keep.insert(keep.end(), g.splits().val.begin(), g.splits().val.end());
    std::sort(keep.begin(), keep.end());
    auto [sub, old] = induced_subgraph(g, keep);
    std::vector<bool> is_test(static_cast<std::size_t>(g.num_nodes()), false);
    for (Index t : g.splits().test) is_test[static_cast<std::size_t>(t)] = true;
    for (Index o : old) require(!is_test[static_cast<std::size_t>(o)], "training graph contains a test node");
    for (const auto& e : sub.edges())
        require(!is_test[static_cast<std::size_t>(old[static_cast<std::size_t>(e.u)])] &&
                    !is_test[static_cast<std::size_t>(old[static_cast<std::size_t>(e.v)])],
                "training graph contains an edge incident to a test node");
    return std::move(sub);
}

TrainResult train(GnnModel model, const GraphBundle& graph, const TrainConfig& config) {
    require(config.epochs >= 0, "train: negative epoch count");
    require(config.patience >= 0, "train: negative patience");
    const auto& train_nodes = graph.splits().train;
    const auto& val_nodes = graph.splits().val;
    require(!train_nodes.empty() && !val_nodes.empty(), "train: train and val splits must be non-empty");

    const NormAdjView view(GraphView::of(graph));
    const Matrix& x = graph.features();
    const IndexList& labels = graph.labels();
    std::mt19937_64 rng(config.seed);
    Adam adam(config.lr);

    TrainResult result;
    result.model = model;
    result.best_val_accuracy = config.epochs > 0 ? -1.0 : predict_accuracy(forward(model, view, x), val_nodes, labels);
    result.best_epoch = 0;
    Real best_val_loss = std::numeric_limits<Real>::infinity();
    int since_best = 0;

    LossFn loss = [&](const Matrix& logits) { return cross_entropy(logits, train_nodes, labels); };
    GradRequest params_only;
    params_only.params = true;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Gradients g;
        if (config.flag.enabled) {
            // Ascent on a feature perturbation, accumulating parameter gradients at every step.
            std::uniform_real_distribution<Real> unif(-config.flag.step_size, config.flag.step_size);
            Matrix delta(x.rows(), x.cols());
            for (Index i = 0; i < delta.size(); ++i) delta.data()[i] = unif(rng);
            GradRequest both = params_only;
            both.features = true;
            const int steps = std::max(config.flag.steps, 1);
            std::vector<Matrix> acc;
            for (int s = 0; s < steps; ++s) {
                Gradients step = gradients(model, view, x + delta, loss, both, &rng);
                if (acc.empty()) {
                    acc = std::move(step.params);
                } else {
                    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += step.params[i];
                }
                delta += config.flag.step_size * step.features.unaryExpr([](Real v) { return Real((v > 0) - (v < 0)); });
                g.loss = step.loss;
            }
            for (auto& a : acc) a /= static_cast<Real>(steps);
            g.params = std::move(acc);
        } else {
            g = gradients(model, view, x, loss, params_only, &rng);
        }
        if (!std::isfinite(g.loss)) throw Error("train: loss diverged at epoch " + std::to_string(epoch));
        if (config.weight_decay > 0) {
            auto params = model.parameters();
            for (std::size_t i = 0; i < params.size(); ++i) g.params[i] += config.weight_decay * *params[i];
        }
        adam.step(model.parameters(), g.params);

        const Matrix logits = forward(model, view, x);
        EpochRecord rec{epoch, g.loss, predict_accuracy(logits, train_nodes, labels),
                        predict_accuracy(logits, val_nodes, labels), cross_entropy(logits, val_nodes, labels).value};
        result.history.push_back(rec);
        if (rec.val_accuracy > result.best_val_accuracy ||
            (rec.val_accuracy == result.best_val_accuracy && rec.val_loss < best_val_loss)) {
            result.best_val_accuracy = rec.val_accuracy;
            best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.model = model;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    return result;
}

}  // namespace gia
