#pragma once

#include "gia/objective.hpp"

#include <random>

namespace gia {

enum class Strategy { PgdRandom, Atdgia, Agia, MetaGia };
std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

/// Vulnerability (1 - p) * [still predicted as the pseudo-label] * (0.9 / sqrt(b d) + 0.1 / d).
Real atdgia_score(Real pseudo_label_prob, bool still_predicted, Real degree, Index b);
/// One score per victim from the current softmax and raw degrees (indexed by node).
Vector atdgia_scores(const Matrix& current_probs, const IndexList& pseudo_labels, const IndexList& victims,
                     const Vector& degrees, Index b);

/// Neighbor lists for `count` injected nodes, each linked to min(b, |victims|)
/// victims drawn uniformly without replacement.
std::vector<IndexList> inject_pgd_random(const IndexList& victims, Index count, Index b, std::mt19937_64& rng);

struct AgiaConfig {
    int outer = 2;
    int inner_a = 20;
    Real lr_a = 0.1;
    Real beta = 0.0;  // 0 means 1 / b
};

struct SparsityPenalty {
    Real value = 0.0;
    Matrix grad;
};
/// beta * mean over rows of |b - sum(row)|.
SparsityPenalty sparsity_penalty(const Matrix& weights, Index b, Real beta);

/// Edge-update epochs for a round of `nodes` injected nodes: ceil(nodes / 6).
Index metagia_epochs(Index nodes);

struct SeqGiaConfig {
    bool enabled = true;
    Real gamma = 0.2;
};

struct SeqPlan {
    Index per_round = 0;  // injected nodes per round
    Index batch = 0;      // victims per round
    Index rounds = 0;
};
SeqPlan seqgia_plan(Index max_nodes, Index num_victims, Index b, const SeqGiaConfig& seq);

struct InjectionConfig {
    Strategy strategy = Strategy::PgdRandom;
    HaoConfig hao;
    PgdConfig pgd;
    AgiaConfig agia;
    SeqGiaConfig seq{false, 0.2};
    std::uint64_t seed = 0;
};

/// Sequential driver: each round ranks the victims by vulnerability, takes the top
/// batch and injects the next group of nodes with the chosen strategy against it.
/// With seq disabled there is a single round over every victim.
InjectionPerturbation run_injection_attack(const AttackTarget& target, const AttackBudget& budget,
                                           const InjectionConfig& config);

InjectionPerturbation agia_attack(const AttackTarget& target, const AttackBudget& budget, InjectionConfig config);
InjectionPerturbation metagia_attack(const AttackTarget& target, const AttackBudget& budget, InjectionConfig config);

}  // namespace gia
