#pragma once

#include "gia/objective.hpp"

namespace gia {

/// Greedy gradient edge flipping over pairs touching a victim. Each step adds the
/// absent pair with the most negative gradient or removes the present pair with the
/// most positive one, whichever is larger in magnitude; ties go to the lowest pair.
/// Pairs with both endpoints in train or val are never flipped.
EdgeFlipPerturbation gma_attack(const AttackTarget& target, Index max_flips, Real hinge_tau = 1e-8,
                                bool additions_only = false);

/// Turns every added edge (u, v) into an injected node w adjacent to u and v, with
/// features solving, jointly over all injected nodes, for the surrogate's k-hop
/// propagation at each victim endpoint to equal the GMA graph's. Exact for
/// linearized surrogates; features are not projected onto the box.
InjectionPerturbation map_m2(const AttackTarget& target, const EdgeFlipPerturbation& flips);

/// One-layer closed form sqrt(3) / sqrt(d_v + 1) * X_v, with d_v the clean degree of
/// v counting its self-loop.
RowVector m2_one_layer_features(const GraphBundle& g, Index v);

}  // namespace gia
