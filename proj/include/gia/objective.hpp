#pragma once

#include "gia/model.hpp"
#include "gia/perturbation.hpp"

namespace gia {

/// What the attacker works against: the clean graph, a surrogate, and the
/// surrogate's clean predictions used as pseudo-labels.
struct AttackTarget {
    const GraphBundle* graph = nullptr;
    const GnnModel* surrogate = nullptr;
    IndexList victims;
    IndexList pseudo_labels;  // argmax of the surrogate on the clean graph, one per original node
    Matrix clean_probs;
};

AttackTarget make_attack_target(const GraphBundle& g, const GnnModel& surrogate, IndexList victims);

/// Mean over victims of the negative hinged cross-entropy. Classes whose softmax
/// probability is below tau are left out of the log-sum, and the pseudo-label
/// term is dropped when its own probability is below tau.
LossValue atk_loss(const Matrix& logits, const IndexList& pseudo_labels, const IndexList& victims, Real hinge_tau);

struct HaoConfig {
    Real lambda = 0.0;
    Real lambda_a = 0.0;
    Real hinge_tau = 1e-8;
};

struct HaoRequest {
    IndexList feature_rows;        // global node indices; empty means no feature gradient
    std::vector<Edge> edge_pairs;  // global node pairs
};

struct HaoValue {
    Real value = 0.0;
    Real atk = 0.0;
    Real homophily = 0.0;  // mean over injected nodes; 0 when both lambdas are 0
    Matrix logits;
    Matrix features;  // one row per requested feature row
    std::vector<Real> edges;
};

/// atk - lambda * mean homophily of `injected` on the perturbed graph. Edge
/// gradients use lambda_a for the homophily part.
HaoValue hao_objective(const GnnModel& model, const NormAdjView& view, const Matrix& features,
                       const IndexList& victims, const IndexList& pseudo_labels, const IndexList& injected,
                       const HaoConfig& hao, const HaoRequest& request = {});

struct PgdConfig {
    int steps = 500;
    Real lr = 0.01;
    int patience = 100;
};

using PgdTrace = std::function<void(int step, const Matrix& injected_features)>;

struct PgdResult {
    int steps_run = 0;
    Real best_accuracy = 1.0;
    Real best_objective = 0.0;
};

/// Sign-gradient descent on the injected features with box projection. Keeps the
/// iterate with the lowest victim accuracy against the pseudo-labels (objective as
/// tie-break). `active` lists local injected rows to update; empty means all.
PgdResult pgd_feature_update(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& victims,
                             const HaoConfig& hao, const PgdConfig& config, const IndexList& active = {},
                             const PgdTrace& trace = {});

}  // namespace gia
