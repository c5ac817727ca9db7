#pragma once

#include "gia/defense.hpp"
#include "gia/injection.hpp"
#include "gia/train.hpp"

#include <json.hpp>

#include <functional>
#include <optional>

namespace gia {

enum class Category { Vanilla, Robust, Combo, Homo };
std::string category_name(Category c);
Category parse_category(const std::string& name);

struct TargetMode {
    enum class Kind { AllTest, MarginMix };
    Kind kind = Kind::AllTest;
    Index k_hi = 200;
    Index k_lo = 200;
    Index k_rand = 400;

    static TargetMode all_test() { return {}; }
    static TargetMode margin_mix(Index hi, Index lo, Index rand) { return {Kind::MarginMix, hi, lo, rand}; }
};

/// Victims among the test split. margin_mix ranks test nodes by the surrogate's
/// clean-graph margin against its own prediction (never the true label), takes the
/// k_hi highest and k_lo lowest (ties to the lower index), then k_rand uniformly
/// from the rest. Sorted, deduplicated.
IndexList select_targets(const GnnModel& surrogate, const GraphBundle& g, const TargetMode& mode,
                         std::uint64_t seed = 0);

/// Injection budget (nodes, degree) for a dataset tag such as "cora" or
/// "computers-targeted". Flips reuse the node count.
AttackBudget budget_table(const std::string& dataset_tag, const GraphBundle* g = nullptr);

struct AttackSpec {
    std::string method = "pgd";  // none | pgd | atdgia | agia | metagia | gma | m2
    bool seq = false;
    bool hao = false;
    Real lambda = 0.0;
    PgdConfig pgd;
    AgiaConfig agia;
    Real hinge_tau = 1e-8;
    bool additions_only = false;  // gma only; m2 always maps additions

    std::string label() const;
};

struct DefenseSpec {
    std::string name;
    Arch arch = Arch::GCN;
    ModelOptions options;
    bool flag = false;
    bool prune = false;
    Real tau = 0.1;
    Category category = Category::Vanilla;
    Index hidden = 64;
    Index layers = 3;
};

/// GCN, EGuardGCN and RGAT with the LN / LNi / FLAG variants, plus the
/// edge-pruned GCN. Guard models and the pruned GCN are tagged Homo.
std::vector<DefenseSpec> default_roster();
/// Roster file entries: {"arch", "options": {ln, lni, flag, prune, tau, dropout,
/// hidden, layers}, "category", optional "name"}.
std::vector<DefenseSpec> parse_roster(const nlohmann::json& j);
nlohmann::json roster_to_json(const std::vector<DefenseSpec>& roster);

struct ExperimentSpec {
    const GraphBundle* graph = nullptr;
    std::string dataset = "graph";
    ModelDims surrogate_dims{0, 64, 0, 3};
    TrainConfig surrogate_train;
    TrainConfig defense_train;
    std::vector<AttackSpec> attacks;
    std::vector<DefenseSpec> roster;
    AttackBudget budget;
    TargetMode targets;
    int repeats = 1;
    std::vector<std::uint64_t> seeds;  // empty means 0 .. repeats-1
};

struct CellResult {
    std::string attack;  // "clean" for the unperturbed graph
    bool hao = false;
    Real lambda = 0.0;
    std::string defense;
    Category category = Category::Vanilla;
    std::uint64_t seed = 0;
    std::optional<Real> accuracy;  // empty when a stage failed
    std::string error;
};

struct AttackRun {
    std::string attack;
    std::uint64_t seed = 0;
    Real homophily_shift = 0.0;  // W1 between clean and perturbed node homophily
    Index nodes_used = 0;
    Index edges_used = 0;
    Index flips_used = 0;
    Real seconds = 0.0;
    std::string error;
};

struct DefenseSummary {
    std::string attack;
    std::string defense;
    Category category = Category::Vanilla;
    Real mean = 0.0;
    Index runs = 0;
};

struct CategorySummary {
    std::string attack;
    Category category = Category::Vanilla;
    Real mean = 0.0;
    Real max = 0.0;
};

struct EvalReport {
    std::string dataset;
    std::vector<CellResult> cells;
    std::vector<AttackRun> attack_runs;
    std::vector<DefenseSummary> defenses;
    std::vector<CategorySummary> categories;
    Real seconds = 0.0;

    /// Mean accuracy of `defense` under `attack`; throws when absent.
    Real mean_accuracy(const std::string& attack, const std::string& defense) const;
    /// Max over the category's per-defense means; throws when absent.
    Real category_max(const std::string& attack, Category c) const;
};

/// Per-(attack, seed) perturbation with the evaluation view on the original graph.
struct AttackOutcome {
    PerturbedGraph graph;
    InjectionPerturbation injection;
    EdgeFlipPerturbation flips;
    bool is_injection = true;
};

/// Maps GMA edge additions to injected nodes, projects them onto the box and
/// refines the features with PGD (HAO when spec.hao).
InjectionPerturbation m2_attack(const AttackTarget& target, const EdgeFlipPerturbation& flips, const FeatureBox& box,
                                const AttackSpec& spec, std::uint64_t seed);

/// Runs one attack against a surrogate. The attacker gets a label-stripped copy
/// of the graph; the returned view is rebuilt over `g` itself.
AttackOutcome run_attack(const GraphBundle& g, const GnnModel& surrogate, const IndexList& victims,
                         const AttackBudget& budget, const AttackSpec& spec, std::uint64_t seed);

/// W1 distance between the clean node homophily of g and that of every node in
/// the perturbed graph, injected ones included.
Real homophily_shift(const GraphBundle& g, const PerturbedGraph& perturbed);

struct TrainedRoster {
    std::vector<std::optional<Defense>> defenses;
    std::vector<std::string> errors;  // nonempty where training failed
};

/// Trains every defense on the (inductive) training graph; failures are recorded.
TrainedRoster train_roster(const GraphBundle& train_graph, const std::vector<DefenseSpec>& roster,
                           const TrainConfig& config, std::uint64_t seed);

struct ScoredAttack {
    std::string attack;
    bool hao = false;
    Real lambda = 0.0;
    std::optional<PerturbedGraph> graph;  // empty means the clean graph
    std::string error;
};

/// One cell per defense: accuracy on `victims` of the attacked graph.
std::vector<CellResult> score_roster(const GraphBundle& g, const std::vector<DefenseSpec>& roster,
                                     const TrainedRoster& trained, const IndexList& victims,
                                     const ScoredAttack& attack, std::uint64_t seed);

/// Rebuilds the per-defense means and per-category mean and max from the cells.
void summarize(EvalReport& report);

/// Evasion, inductive, black-box sweep: surrogate and defenses train on the
/// train+val subgraph, the attacker sees the clean graph with non-train labels
/// removed, and every defense is scored on the victims of the perturbed graph.
EvalReport run_blackbox_eval(const ExperimentSpec& spec);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
/// attack,hao,lambda,defense,category,seed,accuracy
std::string report_csv(const EvalReport& report);

/// Runs f(0..n-1) over hardware threads; each index exactly once.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace gia
