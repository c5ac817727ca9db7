#pragma once

#include "gia/model.hpp"

namespace gia {

struct FlagConfig {
    bool enabled = false;
    Real step_size = 1e-3;
    int steps = 3;
};

struct TrainConfig {
    int epochs = 400;
    int patience = 100;
    Real lr = 0.01;
    Real weight_decay = 0.0;
    FlagConfig flag;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    int epoch = 0;
    Real loss = 0.0;
    Real train_accuracy = 0.0;
    Real val_accuracy = 0.0;
    Real val_loss = 0.0;
};

struct TrainResult {
    GnnModel model;  // best-validation snapshot; equal accuracy falls back to lower val loss
    std::vector<EpochRecord> history;
    int best_epoch = -1;
    Real best_val_accuracy = 0.0;
};

/// Adam with bias correction over a list of parameter blocks.
class Adam {
public:
    explicit Adam(Real lr, Real beta1 = 0.9, Real beta2 = 0.999, Real eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads);

private:
    Real lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Matrix> m_, v_;
};

/// Full-batch training on the train split of `graph`, early stopping on the val
/// split. The caller supplies the (inductive) training graph.
TrainResult train(GnnModel model, const GraphBundle& graph, const TrainConfig& config);

/// Fraction of `nodes` whose argmax logit equals the label.
Real predict_accuracy(const Matrix& logits, const IndexList& nodes, const IndexList& labels);
Real predict_accuracy(const GnnModel& model, const NormAdjView& view, const Matrix& features, const IndexList& nodes,
                      const IndexList& labels);

/// logit[label] - max over other classes.
Real decision_margin(const Matrix& logits, Index u, Index label);

/// Row u of Â^k by k sparse propagations.
Vector influence_scores(const NormAdjView& view, Index u, Index k);

/// Inductive training graph: the subgraph induced by train and val nodes.
/// Throws if the result still touches a test node.
GraphBundle training_subgraph(const GraphBundle& g);

}  // namespace gia
