#pragma once

#include "gia/graph.hpp"

namespace gia {

/// Planted-partition graph with class-indicator features
/// X_u = C/(C-1) e_{Y_u} - 1/(C-1), optionally widened and noised.
struct SbmSpec {
    Index n = 100;
    Index classes = 2;
    Real p_in = 0.1;
    Real p_out = 0.01;
    Index feature_dim = 0;  // 0 means classes; extra dims carry the constant -1/(C-1)
    Real sigma = 0.0;       // Gaussian noise added to every feature
    bool connect_isolated = false;  // link each isolated node to a random same-class node
    std::uint64_t seed = 0;
};

/// Labels u mod C, independent edges, splits 50/20/30 stratified by class.
GraphBundle generate_sbm(const SbmSpec& spec);

}  // namespace gia
