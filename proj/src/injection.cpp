#include "gia/injection.hpp"

#include "gia/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gia {

namespace {

const char* const kStrategyNames[] = {"pgd", "atdgia", "agia", "metagia"};

Matrix random_features(Index rows, Index cols, const FeatureBox& box, std::mt19937_64& rng) {
    std::uniform_real_distribution<Real> unif(box.lo, box.hi);
    Matrix x(rows, cols);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = unif(rng);
    return x;
}

/// Appends `count` nodes with random features and the given neighbor lists.
IndexList append_nodes(InjectionPerturbation& pert, const GraphBundle& g, std::vector<IndexList> neighbors,
                       std::mt19937_64& rng) {
    InjectionPerturbation fresh;
    fresh.features = random_features(static_cast<Index>(neighbors.size()), g.feature_dim(), g.feature_box(), rng);
    fresh.neighbors = std::move(neighbors);
    const Index first = pert.size();
    pert = append_injection(std::move(pert), fresh);
    IndexList rows(static_cast<std::size_t>(pert.size() - first));
    std::iota(rows.begin(), rows.end(), first);
    return rows;
}

/// Features are drawn before the topology so strategies share feature initializations.
IndexList append_random_topology(InjectionPerturbation& pert, const GraphBundle& g, const IndexList& batch,
                                 Index count, Index b, std::mt19937_64& rng) {
    const IndexList rows = append_nodes(pert, g, std::vector<IndexList>(static_cast<std::size_t>(count)), rng);
    auto topology = inject_pgd_random(batch, count, b, rng);
    for (std::size_t i = 0; i < rows.size(); ++i) pert.neighbors[static_cast<std::size_t>(rows[i])] = std::move(topology[i]);
    return rows;
}

/// Victim indices ordered by descending score, ties by lowest node.
IndexList rank_victims(const IndexList& victims, const Vector& scores) {
    IndexList order(victims.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return victims[static_cast<std::size_t>(a)] < victims[static_cast<std::size_t>(b)];
    });
    return order;
}

Vector current_scores(const AttackTarget& target, const InjectionPerturbation& pert, const IndexList& victims, Index b) {
    const PerturbedGraph pg = apply_injection(*target.graph, pert);
    const NormAdjView view(pg.view);
    const Matrix probs = softmax_rows(forward(*target.surrogate, view, pg.features));
    const Vector raw_degree = view.degrees().array() - (view.self_loops() ? 1.0 : 0.0);
    return atdgia_scores(probs, target.pseudo_labels, victims, raw_degree, b);
}

PgdResult optimize_rows(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& batch,
                        const IndexList& rows, const InjectionConfig& cfg) {
    return pgd_feature_update(target, pert, batch, cfg.hao, cfg.pgd, rows);
}

/// Pairs (injected row, batch victim) as global node pairs.
std::vector<Edge> candidate_pairs(Index n, const IndexList& rows, const IndexList& batch) {
    std::vector<Edge> pairs;
    for (Index w : rows)
        for (Index v : batch) pairs.push_back({n + w, v});
    return pairs;
}

/// Objective gradient w.r.t. weights on `pairs`, with the new rows' discrete edges
/// replaced by `weights` (rows x batch).
std::vector<Real> pair_gradients(const AttackTarget& target, const InjectionPerturbation& pert, const IndexList& rows,
                                 const IndexList& batch, const Matrix* weights, const std::vector<Edge>& pairs,
                                 const HaoConfig& hao) {
    InjectionPerturbation bare = pert;
    for (Index w : rows) bare.neighbors[static_cast<std::size_t>(w)].clear();
    PerturbedGraph pg = apply_injection(*target.graph, bare);
    const Index n = target.graph->num_nodes();
    if (weights) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < batch.size(); ++j) {
                const Real w = (*weights)(static_cast<Index>(i), static_cast<Index>(j));
                if (w > 0) pg.view.extra.push_back({n + rows[i], batch[j], w});
            }
    } else {
        for (Index w : rows)
            for (Index v : pert.neighbors[static_cast<std::size_t>(w)]) pg.view.extra.push_back({n + w, v, 1.0});
    }
    IndexList injected;
    for (Index w : rows) injected.push_back(n + w);
    HaoRequest req;
    req.edge_pairs = pairs;
    return hao_objective(*target.surrogate, NormAdjView(pg.view), pg.features, batch, target.pseudo_labels, injected,
                         hao, req)
        .edges;
}

void round_pgd_random(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& batch, Index count,
                      Index b, const InjectionConfig& cfg, std::mt19937_64& rng) {
    const IndexList rows = append_random_topology(pert, *target.graph, batch, count, b, rng);
    optimize_rows(target, pert, batch, rows, cfg);
}

void round_atdgia(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& batch, Index count,
                  Index b, const InjectionConfig& cfg, std::mt19937_64& rng) {
    for (Index i = 0; i < count; ++i) {
        const Vector scores = current_scores(target, pert, batch, b);
        const IndexList order = rank_victims(batch, scores);
        IndexList chosen;
        for (Index k : order) {
            if (static_cast<Index>(chosen.size()) == b || scores[k] <= 0) break;
            chosen.push_back(batch[static_cast<std::size_t>(k)]);
        }
        if (chosen.empty()) return;
        std::sort(chosen.begin(), chosen.end());
        const IndexList rows = append_nodes(pert, *target.graph, {chosen}, rng);
        optimize_rows(target, pert, batch, rows, cfg);
    }
}

void round_agia(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& batch, Index count, Index b,
                const InjectionConfig& cfg, std::mt19937_64& rng) {
    const IndexList rows = append_random_topology(pert, *target.graph, batch, count, b, rng);
    if (cfg.agia.outer <= 0) return;
    const Index n = target.graph->num_nodes();
    const Real beta = cfg.agia.beta > 0 ? cfg.agia.beta : 1.0 / static_cast<Real>(b);
    const Index keep = std::min<Index>(b, static_cast<Index>(batch.size()));
    const std::vector<Edge> pairs = candidate_pairs(n, rows, batch);
    HaoConfig edge_hao = cfg.hao;
    edge_hao.lambda = 0.0;

    for (int outer = 0; outer < cfg.agia.outer; ++outer) {
        optimize_rows(target, pert, batch, rows, cfg);

        Matrix weights = Matrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(batch.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (Index v : pert.neighbors[static_cast<std::size_t>(rows[i])]) {
                const auto it = std::find(batch.begin(), batch.end(), v);
                weights(static_cast<Index>(i), it - batch.begin()) = 1.0;
            }
        Adam adam(cfg.agia.lr_a);
        for (int step = 0; step < cfg.agia.inner_a; ++step) {
            const auto g = pair_gradients(target, pert, rows, batch, &weights, pairs, edge_hao);
            Matrix grad = sparsity_penalty(weights, b, beta).grad;
            for (std::size_t p = 0; p < pairs.size(); ++p)
                grad.data()[p] += g[p];
            adam.step({&weights}, {grad});
            weights = weights.cwiseMax(0.0).cwiseMin(1.0);
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            IndexList order(batch.size());
            std::iota(order.begin(), order.end(), Index{0});
            const auto row = weights.row(static_cast<Index>(i));
            std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) { return row[a] > row[c]; });
            IndexList chosen;
            for (Index k = 0; k < keep; ++k) chosen.push_back(batch[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])]);
            std::sort(chosen.begin(), chosen.end());
            pert.neighbors[static_cast<std::size_t>(rows[i])] = std::move(chosen);
        }
    }
    optimize_rows(target, pert, batch, rows, cfg);
}

void round_metagia(const AttackTarget& target, InjectionPerturbation& pert, const IndexList& batch, Index count,
                   Index b, const InjectionConfig& cfg, std::mt19937_64& rng) {
    const IndexList rows = append_nodes(pert, *target.graph, std::vector<IndexList>(static_cast<std::size_t>(count)), rng);
    const Index n = target.graph->num_nodes();
    const Index cap = std::min<Index>(b, static_cast<Index>(batch.size()));
    const Index total_steps = (count * cap + b - 1) / b;
    const Index epochs = std::min(metagia_epochs(count), total_steps);
    Index steps_done = 0;
    for (Index epoch = 0; epoch < epochs; ++epoch) {
        optimize_rows(target, pert, batch, rows, cfg);
        const Index steps = total_steps / epochs + (epoch < total_steps % epochs ? 1 : 0);
        for (Index s = 0; s < steps; ++s, ++steps_done) {
            std::vector<Edge> pairs;
            for (Index w : rows) {
                const auto& nb = pert.neighbors[static_cast<std::size_t>(w)];
                if (static_cast<Index>(nb.size()) >= cap) continue;
                for (Index v : batch)
                    if (std::find(nb.begin(), nb.end(), v) == nb.end()) pairs.push_back({n + w, v});
            }
            if (pairs.empty()) break;
            const auto g = pair_gradients(target, pert, rows, batch, nullptr, pairs, cfg.hao);
            IndexList order(pairs.size());
            std::iota(order.begin(), order.end(), Index{0});
            std::stable_sort(order.begin(), order.end(), [&](Index a, Index c) {
                if (g[static_cast<std::size_t>(a)] != g[static_cast<std::size_t>(c)])
                    return g[static_cast<std::size_t>(a)] < g[static_cast<std::size_t>(c)];
                return pairs[static_cast<std::size_t>(a)] < pairs[static_cast<std::size_t>(c)];
            });
            Index added = 0;
            for (Index k : order) {
                if (added == b) break;
                const Edge e = pairs[static_cast<std::size_t>(k)];
                auto& nb = pert.neighbors[static_cast<std::size_t>(e.u - n)];
                if (static_cast<Index>(nb.size()) >= cap) continue;
                nb.push_back(e.v);
                ++added;
            }
        }
    }
    for (Index w : rows) std::sort(pert.neighbors[static_cast<std::size_t>(w)].begin(), pert.neighbors[static_cast<std::size_t>(w)].end());
    optimize_rows(target, pert, batch, rows, cfg);
}

}  // namespace

std::string strategy_name(Strategy s) { return kStrategyNames[static_cast<int>(s)]; }

Strategy parse_strategy(const std::string& name) {
    for (int i = 0; i < 4; ++i)
        if (name == kStrategyNames[i]) return static_cast<Strategy>(i);
    throw Error("unknown attack strategy '" + name + "'");
}

Real atdgia_score(Real pseudo_label_prob, bool still_predicted, Real degree, Index b) {
    require(b >= 1, "ATDGIA: degree budget must be positive");
    if (!still_predicted) return 0.0;
    const Real d = std::max<Real>(degree, 1.0);
    return (1.0 - pseudo_label_prob) * (0.9 / std::sqrt(static_cast<Real>(b) * d) + 0.1 / d);
}

Vector atdgia_scores(const Matrix& current_probs, const IndexList& pseudo_labels, const IndexList& victims,
                     const Vector& degrees, Index b) {
    const IndexList pred = argmax_rows(current_probs);
    Vector s(static_cast<Index>(victims.size()));
    for (std::size_t i = 0; i < victims.size(); ++i) {
        const Index u = victims[i];
        const Index y = pseudo_labels[static_cast<std::size_t>(u)];
        s[static_cast<Index>(i)] = atdgia_score(current_probs(u, y), pred[static_cast<std::size_t>(u)] == y, degrees[u], b);
    }
    return s;
}

std::vector<IndexList> inject_pgd_random(const IndexList& victims, Index count, Index b, std::mt19937_64& rng) {
    require(count >= 0 && b >= 0, "random injection: negative budget");
    std::vector<IndexList> out;
    if (count == 0) return out;
    require(!victims.empty() && b >= 1, "random injection: no victims to connect to");
    const Index k = std::min<Index>(b, static_cast<Index>(victims.size()));
    IndexList pool = victims;
    for (Index w = 0; w < count; ++w) {
        for (Index i = 0; i < k; ++i) {
            std::uniform_int_distribution<Index> pick(i, static_cast<Index>(pool.size()) - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        }
        IndexList chosen(pool.begin(), pool.begin() + k);
        std::sort(chosen.begin(), chosen.end());
        out.push_back(std::move(chosen));
    }
    return out;
}

SparsityPenalty sparsity_penalty(const Matrix& weights, Index b, Real beta) {
    SparsityPenalty p;
    p.grad = Matrix::Zero(weights.rows(), weights.cols());
    if (weights.rows() == 0) return p;
    const Real scale = beta / static_cast<Real>(weights.rows());
    for (Index i = 0; i < weights.rows(); ++i) {
        const Real gap = static_cast<Real>(b) - weights.row(i).sum();
        p.value += scale * std::abs(gap);
        p.grad.row(i).setConstant(-scale * Real((gap > 0) - (gap < 0)));
    }
    return p;
}

Index metagia_epochs(Index nodes) { return (nodes + 5) / 6; }

SeqPlan seqgia_plan(Index max_nodes, Index num_victims, Index b, const SeqGiaConfig& seq) {
    require(max_nodes >= 0 && num_victims >= 0 && b >= 0, "SeqGIA: negative budget");
    require(!seq.enabled || (seq.gamma > 0 && seq.gamma <= 1), "SeqGIA: batch fraction must be in (0, 1]");
    SeqPlan plan;
    if (max_nodes == 0) return plan;
    if (seq.enabled) {
        plan.per_round = std::max<Index>(1, static_cast<Index>(std::floor(seq.gamma * static_cast<Real>(max_nodes))));
        plan.batch = std::min(num_victims, plan.per_round * b);
    } else {
        plan.per_round = max_nodes;
        plan.batch = num_victims;
    }
    plan.rounds = (max_nodes + plan.per_round - 1) / plan.per_round;
    return plan;
}

InjectionPerturbation run_injection_attack(const AttackTarget& target, const AttackBudget& budget,
                                           const InjectionConfig& config) {
    require(budget.mode == AttackBudget::Mode::GIA, "injection attack needs a GIA budget");
    const GraphBundle& g = *target.graph;
    InjectionPerturbation pert = InjectionPerturbation::empty(g.feature_dim());
    pert.strategy = strategy_name(config.strategy);
    pert.seed = config.seed;
    pert.lambda = config.hao.lambda;
    pert.hao = config.hao.lambda > 0;
    if (budget.max_nodes == 0 || budget.max_degree == 0) return pert;

    std::mt19937_64 rng(config.seed);
    const Index b = budget.max_degree;
    const SeqPlan plan = seqgia_plan(budget.max_nodes, static_cast<Index>(target.victims.size()), b, config.seq);
    Index remaining = budget.max_nodes;
    while (remaining > 0) {
        const Index count = std::min(plan.per_round, remaining);
        IndexList batch = target.victims;
        if (plan.batch < static_cast<Index>(batch.size())) {
            const IndexList order = rank_victims(target.victims, current_scores(target, pert, target.victims, b));
            batch.clear();
            for (Index i = 0; i < plan.batch; ++i) batch.push_back(target.victims[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
            std::sort(batch.begin(), batch.end());
        }
        const Index before = pert.size();
        switch (config.strategy) {
            case Strategy::PgdRandom: round_pgd_random(target, pert, batch, count, b, config, rng); break;
            case Strategy::Atdgia: round_atdgia(target, pert, batch, count, b, config, rng); break;
            case Strategy::Agia: round_agia(target, pert, batch, count, b, config, rng); break;
            case Strategy::MetaGia: round_metagia(target, pert, batch, count, b, config, rng); break;
        }
        const Index added = pert.size() - before;
        remaining -= added;
        if (added < count) break;
    }
    return pert;
}

InjectionPerturbation agia_attack(const AttackTarget& target, const AttackBudget& budget, InjectionConfig config) {
    config.strategy = Strategy::Agia;
    return run_injection_attack(target, budget, config);
}

InjectionPerturbation metagia_attack(const AttackTarget& target, const AttackBudget& budget, InjectionConfig config) {
    config.strategy = Strategy::MetaGia;
    return run_injection_attack(target, budget, config);
}

}  // namespace gia
