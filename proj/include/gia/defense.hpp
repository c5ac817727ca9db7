#pragma once

#include "gia/model.hpp"
#include "gia/perturbation.hpp"

#include <filesystem>

namespace gia {

struct PrunedEdge {
    Index u = 0;
    Index v = 0;
    Real similarity = 0.0;
    bool injected = false;  // an extra edge of the view rather than a base edge
};

struct PruneResult {
    GraphView view;  // same base graph, pruned edges dropped
    std::vector<PrunedEdge> removed;
};

/// Drops every edge whose endpoint features have cosine <= tau (1e-12 slack).
/// Never adds edges or touches features.
PruneResult prune_graph(const GraphView& view, const Matrix& features, Real tau);

/// CSV u,v,similarity,origin with origin original|injected.
void write_prune_audit(const std::filesystem::path& path, const PruneResult& result);

/// A trained model, optionally behind the pruning sanitizer. Guard models carry
/// their own threshold in model.options.guard_threshold.
struct Defense {
    GnnModel model;
    bool prune = false;
    Real tau = 0.1;
};

/// Moves the defense's similarity threshold: the pruning threshold for sanitized
/// models, the guard threshold for guard architectures.
Defense with_threshold(Defense d, Real tau);

Matrix defended_logits(const Defense& defense, const GraphView& view, const Matrix& features);
Real defended_evaluate(const Defense& defense, const GraphView& view, const Matrix& features, const IndexList& nodes,
                       const IndexList& labels);

struct CalibrationRow {
    Real tau = 0.0;
    Real clean = 0.0;
    Real perturbed = 1.0;  // worst over samples; 1 when there are none
};

struct Calibration {
    Real tau = 0.0;
    std::vector<CalibrationRow> table;
};

std::vector<Real> default_threshold_grid();

/// Picks the grid threshold maximizing min(clean, worst perturbed) accuracy on
/// `nodes`; ties go to the largest threshold.
Calibration calibrate_threshold(const Defense& defense, const GraphBundle& clean,
                                const std::vector<PerturbedGraph>& samples, const IndexList& nodes,
                                const IndexList& labels, std::vector<Real> grid = default_threshold_grid());

struct Certificate {
    bool certified = false;
    Index predicted = 0;        // defended clean prediction
    Real bound = -2.0;          // max cos(X_u, X_w) over effective injections; -2 when none exist
    Real margin = 0.0;          // defended clean margin before injection
    Real gamma = 0.0;           // feature-only (MLP) margin
    Real homophily = 0.0;       // tau_u
    Real degree_factor = 0.0;   // sqrt(d_u / (d_u + 1))
    Real influence_self = 0.0;  // I^k_uu
    Real influence_injected = 0.0;  // I^k_uw after injection
    Real zeta = 0.0;
    Real alpha = 0.0;
    Real beta = 0.0;
    Real closed_form_bound = 0.0;     // -alpha * degree_factor * (tau_u + beta * gamma)
};

/// Single-node direct injection certificate for the pruning defender in the binary
/// indicator-feature setting, against a linearized surrogate. Node u is certified
/// when every injected feature vector in the box that would flip u's defended
/// prediction has cosine to X_u at or below tau, so its edge is pruned.
Certificate certify_node(const GraphBundle& g, const GnnModel& linearized, Index u, Real tau);

}  // namespace gia
