#pragma once

#include "gia/sbm.hpp"
#include "gia/train.hpp"

namespace gia::testing {

/// An SBM graph with a surrogate trained inductively on its train and val nodes.
struct Scenario {
    GraphBundle graph;
    GnnModel surrogate;
};

inline Scenario trained_scenario(const SbmSpec& spec, Arch arch = Arch::GCN, ModelDims dims = {0, 16, 0, 2},
                                 int epochs = 100) {
    Scenario s;
    s.graph = generate_sbm(spec);
    dims.input = s.graph.feature_dim();
    dims.output = s.graph.num_classes();
    const GraphBundle inductive = training_subgraph(s.graph);
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = spec.seed;
    s.surrogate = train(init_model(arch, dims, {}, spec.seed), inductive, cfg).model;
    return s;
}

}  // namespace gia::testing
