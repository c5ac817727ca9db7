#pragma once

#include "gia/sparse.hpp"

#include <functional>
#include <optional>
#include <random>

namespace gia {

enum class Arch { LinearizedGNN, GCN, EGuardGCN, RGAT, MLP };

std::string arch_name(Arch arch);
Arch parse_arch(const std::string& name);

struct ModelOptions {
    bool layer_norm_pre = false;
    bool layer_norm_inter = false;
    Real dropout = 0.5;
    Real guard_threshold = 0.1;
    bool bias = true;
};

/// For LinearizedGNN `layers` is the propagation depth k and `hidden` is unused.
struct ModelDims {
    Index input = 0;
    Index hidden = 64;
    Index output = 0;
    Index layers = 3;
};

struct GnnModel {
    Arch arch = Arch::GCN;
    ModelDims dims;
    ModelOptions options;
    std::uint64_t seed = 0;

    std::vector<Matrix> weights;
    std::vector<Matrix> biases;      // 1 x width per layer, empty when bias is off
    Matrix ln_pre_gain, ln_pre_shift;  // 1 x input when layer_norm_pre
    std::vector<Matrix> ln_gain, ln_shift;  // 1 x hidden per hidden layer when layer_norm_inter

    /// Every trainable block in a fixed order; gradients use the same order.
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;
};

/// Glorot-uniform weights, zero biases, unit LN gains. Deterministic in `seed`.
GnnModel init_model(Arch arch, ModelDims dims, ModelOptions options, std::uint64_t seed);

/// Eval-mode logits, one row per node of the view.
Matrix forward(const GnnModel& model, const NormAdjView& view, const Matrix& features);

struct LossValue {
    Real value = 0.0;
    Matrix grad;  // dL/dlogits
};
using LossFn = std::function<LossValue(const Matrix& logits)>;

struct GradRequest {
    bool params = false;
    bool features = false;
    IndexList feature_rows;   // empty means all rows
    std::vector<Edge> edge_pairs;  // any node pairs; absent pairs are differentiated at weight 0
};

struct Gradients {
    Real loss = 0.0;
    Matrix logits;
    std::vector<Matrix> params;
    Matrix features;  // one row per requested feature row
    std::vector<Real> edges;
};

/// Exact reverse-mode gradients of loss(forward(...)). Guard aggregation weights
/// are held constant; their edge gradients are zero for masked pairs.
/// With `training_rng` the pass runs in training mode (dropout on).
Gradients gradients(const GnnModel& model, const NormAdjView& view, const Matrix& features, const LossFn& loss,
                    const GradRequest& request, std::mt19937_64* training_rng = nullptr);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);
/// Argmax per row, lowest class on ties.
IndexList argmax_rows(const Matrix& logits);

/// Mean cross-entropy over `nodes` against `labels` (indexed by node).
LossValue cross_entropy(const Matrix& logits, const IndexList& nodes, const IndexList& labels);

/// Guard aggregation matrix for one layer input (exposed for inspection and tests).
SparseMatrix eguard_coefficients(const NormAdjView& view, const Matrix& hidden, Real threshold);
SparseMatrix rgat_coefficients(const NormAdjView& view, const Matrix& raw_features, Real threshold);

}  // namespace gia
