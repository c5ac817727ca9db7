#include "gia/harness.hpp"

#include "gia/gma.hpp"
#include "gia/homophily.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace gia {

namespace {

using Clock = std::chrono::steady_clock;

Real seconds_since(Clock::time_point t0) {
    return std::chrono::duration<Real>(Clock::now() - t0).count();
}

std::string format_real(Real x) {
    std::ostringstream out;
    out << x;
    return out.str();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string defense_label(const DefenseSpec& d) {
    if (!d.name.empty()) return d.name;
    std::string s = arch_name(d.arch);
    if (d.prune) s += "+prune";
    if (d.flag) s += "+flag";
    if (d.options.layer_norm_pre) s += "+ln";
    if (d.options.layer_norm_inter) s += "+lni";
    return s;
}

HaoConfig hao_config(const AttackSpec& spec) {
    HaoConfig hao;
    hao.hinge_tau = spec.hinge_tau;
    if (spec.hao) hao.lambda = hao.lambda_a = spec.lambda;
    return hao;
}

}  // namespace

std::string category_name(Category c) {
    switch (c) {
        case Category::Vanilla: return "Vanilla";
        case Category::Robust: return "Robust";
        case Category::Combo: return "Combo";
        case Category::Homo: return "Homo";
    }
    return "unknown";
}

Category parse_category(const std::string& name) {
    for (Category c : {Category::Vanilla, Category::Robust, Category::Combo, Category::Homo})
        if (category_name(c) == name) return c;
    throw Error("unknown defense category '" + name + "'");
}

IndexList select_targets(const GnnModel& surrogate, const GraphBundle& g, const TargetMode& mode,
                         std::uint64_t seed) {
    IndexList test = g.splits().test;
    std::sort(test.begin(), test.end());
    if (mode.kind == TargetMode::Kind::AllTest) return test;
    require(mode.k_hi >= 0 && mode.k_lo >= 0 && mode.k_rand >= 0, "targets: negative count");

    const Matrix logits = forward(surrogate, NormAdjView(GraphView::of(g)), g.features());
    const IndexList pred = argmax_rows(logits);
    std::vector<std::pair<Real, Index>> ranked;
    for (Index u : test) ranked.push_back({decision_margin(logits, u, pred[u]), u});
    std::vector<char> chosen(static_cast<std::size_t>(g.num_nodes()), 0);

    auto hi = ranked;
    std::stable_sort(hi.begin(), hi.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (Index i = 0; i < std::min<Index>(mode.k_hi, hi.size()); ++i) chosen[hi[i].second] = 1;
    auto lo = ranked;
    std::stable_sort(lo.begin(), lo.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (Index i = 0; i < std::min<Index>(mode.k_lo, lo.size()); ++i) chosen[lo[i].second] = 1;

    IndexList rest;
    for (Index u : test)
        if (!chosen[u]) rest.push_back(u);
    std::mt19937_64 rng(seed);
    const Index take = std::min<Index>(mode.k_rand, rest.size());
    for (Index i = 0; i < take; ++i) {
        std::uniform_int_distribution<Index> pick(i, static_cast<Index>(rest.size()) - 1);
        std::swap(rest[i], rest[pick(rng)]);
        chosen[rest[i]] = 1;
    }

    IndexList out;
    for (Index u : test)
        if (chosen[u]) out.push_back(u);
    return out;
}

AttackBudget budget_table(const std::string& dataset_tag, const GraphBundle* g) {
    static const std::map<std::string, std::pair<Index, Index>> table = {
        {"cora", {60, 20}},
        {"citeseer", {90, 10}},
        {"computers", {300, 150}},
        {"arxiv", {1500, 100}},
        {"computers-targeted", {100, 150}},
        {"arxiv-targeted", {120, 100}},
        {"aminer-targeted", {150, 50}},
        {"reddit-targeted", {300, 100}},
    };
    std::string tag = dataset_tag;
    std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::string suffix = "-nontargeted";
    if (tag.size() > suffix.size() && tag.compare(tag.size() - suffix.size(), suffix.size(), suffix) == 0)
        tag.resize(tag.size() - suffix.size());
    const auto it = table.find(tag);
    require(it != table.end(), "no budget for dataset tag '" + dataset_tag + "'");
    AttackBudget b;
    b.max_nodes = it->second.first;
    b.max_degree = it->second.second;
    b.max_flips = it->second.first;
    if (g) b.box = g->feature_box();
    return b;
}

std::string AttackSpec::label() const {
    std::string s = method;
    if (seq) s = "seq" + s;
    if (hao) s += "+hao@" + format_real(lambda);
    return s;
}

std::vector<DefenseSpec> default_roster() {
    std::vector<DefenseSpec> out;
    // Each robustness trick moves a model up one category.
    const Category levels[] = {Category::Vanilla, Category::Robust, Category::Combo, Category::Combo, Category::Combo};
    for (int mask = 0; mask < 8; ++mask) {
        DefenseSpec d;
        d.arch = Arch::GCN;
        d.options.layer_norm_pre = mask & 1;
        d.options.layer_norm_inter = mask & 2;
        d.flag = mask & 4;
        d.category = levels[std::popcount(static_cast<unsigned>(mask))];
        out.push_back(d);
    }
    for (int mask = 0; mask < 8; ++mask) {
        DefenseSpec d;
        d.arch = Arch::EGuardGCN;
        d.tau = 0.15;
        d.options.guard_threshold = 0.15;
        d.options.layer_norm_pre = mask & 1;
        d.options.layer_norm_inter = mask & 2;
        d.flag = mask & 4;
        d.category = Category::Homo;
        out.push_back(d);
    }
    for (int mask : {0, 1, 4, 5}) {
        DefenseSpec d;
        d.arch = Arch::RGAT;
        d.options.layer_norm_pre = mask & 1;
        d.flag = mask & 4;
        d.category = Category::Homo;
        out.push_back(d);
    }
    DefenseSpec pruned;
    pruned.prune = true;
    pruned.category = Category::Homo;
    out.push_back(pruned);
    for (auto& d : out) d.name = defense_label(d);
    return out;
}

std::vector<DefenseSpec> parse_roster(const nlohmann::json& j) {
    require(j.is_array(), "roster: expected a JSON array");
    std::vector<DefenseSpec> out;
    for (const auto& e : j) {
        DefenseSpec d;
        d.arch = parse_arch(e.at("arch").get<std::string>());
        const auto opts = e.value("options", nlohmann::json::object());
        d.options.layer_norm_pre = opts.value("ln", false);
        d.options.layer_norm_inter = opts.value("lni", false);
        d.options.dropout = opts.value("dropout", d.options.dropout);
        d.flag = opts.value("flag", false);
        d.prune = opts.value("prune", false);
        d.tau = opts.value("tau", d.arch == Arch::EGuardGCN ? 0.15 : 0.1);
        require(d.tau >= -1.0 && d.tau <= 1.0, "roster: tau must lie in [-1, 1]");
        d.options.guard_threshold = d.tau;
        d.hidden = opts.value("hidden", d.hidden);
        d.layers = opts.value("layers", d.layers);
        d.category = parse_category(e.at("category").get<std::string>());
        d.name = e.value("name", defense_label(d));
        out.push_back(d);
    }
    require(!out.empty(), "roster: no defenses");
    return out;
}

nlohmann::json roster_to_json(const std::vector<DefenseSpec>& roster) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : roster) {
        out.push_back({{"name", d.name},
                       {"arch", arch_name(d.arch)},
                       {"category", category_name(d.category)},
                       {"options",
                        {{"ln", d.options.layer_norm_pre},
                         {"lni", d.options.layer_norm_inter},
                         {"dropout", d.options.dropout},
                         {"flag", d.flag},
                         {"prune", d.prune},
                         {"tau", d.tau},
                         {"hidden", d.hidden},
                         {"layers", d.layers}}}});
    }
    return out;
}

Real EvalReport::mean_accuracy(const std::string& attack, const std::string& defense) const {
    for (const auto& d : defenses)
        if (d.attack == attack && d.defense == defense) return d.mean;
    throw Error("report has no accuracy for " + defense + " under " + attack);
}

Real EvalReport::category_max(const std::string& attack, Category c) const {
    for (const auto& s : categories)
        if (s.attack == attack && s.category == c) return s.max;
    throw Error("report has no " + category_name(c) + " defenses under " + attack);
}

InjectionPerturbation m2_attack(const AttackTarget& target, const EdgeFlipPerturbation& flips, const FeatureBox& box,
                                const AttackSpec& spec, std::uint64_t seed) {
    const HaoConfig hao = hao_config(spec);
    InjectionPerturbation pert = map_m2(target, flips);
    pert.features = project_features(pert.features, box);
    pgd_feature_update(target, pert, target.victims, hao, spec.pgd);
    pert.strategy = "m2";
    pert.seed = seed;
    pert.hao = spec.hao;
    pert.lambda = hao.lambda;
    return pert;
}

AttackOutcome run_attack(const GraphBundle& g, const GnnModel& surrogate, const IndexList& victims,
                         const AttackBudget& budget, const AttackSpec& spec, std::uint64_t seed) {
    // The attacker never holds a label outside the training split.
    const GraphBundle seen = strip_non_train_labels(g);
    for (Index u : g.splits().test) require(seen.labels()[u] == kUnknownLabel, "sentinel: test label leaked");
    const AttackTarget target = make_attack_target(seen, surrogate, victims);

    const HaoConfig hao = hao_config(spec);

    AttackOutcome out;
    if (spec.method == "none") {
        out.injection = InjectionPerturbation::empty(g.feature_dim());
    } else if (spec.method == "gma" || spec.method == "m2") {
        const Index flips = budget.max_flips > 0 ? budget.max_flips : budget.max_nodes;
        out.flips = gma_attack(target, flips, spec.hinge_tau, spec.method == "m2" || spec.additions_only);
        if (spec.method == "gma") {
            out.is_injection = false;
            const auto report = budget_check(out.flips, AttackBudget::modification(flips), g);
            require(report.ok(), "gma budget: " + (report.ok() ? "" : report.violations.front()));
            out.graph = {apply_flips(g, out.flips), g.features()};
            return out;
        }
        out.injection = m2_attack(target, out.flips, budget.box, spec, seed);
    } else {
        InjectionConfig cfg;
        cfg.strategy = parse_strategy(spec.method);
        cfg.hao = hao;
        cfg.pgd = spec.pgd;
        cfg.agia = spec.agia;
        cfg.seq.enabled = spec.seq;
        cfg.seed = seed;
        out.injection = run_injection_attack(target, budget, cfg);
    }
    const auto report = budget_check(out.injection, budget, g);
    require(report.ok(), "injection budget: " + (report.ok() ? "" : report.violations.front()));
    out.graph = apply_injection(g, out.injection);
    return out;
}

Real homophily_shift(const GraphBundle& g, const PerturbedGraph& perturbed) {
    IndexList clean(static_cast<std::size_t>(g.num_nodes()));
    std::iota(clean.begin(), clean.end(), Index{0});
    IndexList all(static_cast<std::size_t>(perturbed.view.num_nodes));
    std::iota(all.begin(), all.end(), Index{0});
    const auto before = homophily_profile(g, clean);
    const auto after = homophily_profile(weighted_adjacency(perturbed.view), perturbed.features, all);
    return profile_distance(before, after, ProfileMetric::Wasserstein1);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

TrainedRoster train_roster(const GraphBundle& train_graph, const std::vector<DefenseSpec>& roster,
                           const TrainConfig& config, std::uint64_t seed) {
    require(train_graph.splits().test.empty(), "inductive audit: training graph holds test nodes");
    TrainedRoster out;
    out.defenses.resize(roster.size());
    out.errors.resize(roster.size());
    parallel_for(roster.size(), [&](std::size_t i) {
        const DefenseSpec& ds = roster[i];
        try {
            ModelDims dims{train_graph.feature_dim(), ds.hidden, train_graph.num_classes(), ds.layers};
            TrainConfig tcfg = config;
            tcfg.flag.enabled = ds.flag;
            tcfg.seed = mix_seed(seed, 100 + i);
            const GnnModel model =
                train(init_model(ds.arch, dims, ds.options, mix_seed(seed, 200 + i)), train_graph, tcfg).model;
            out.defenses[i] = with_threshold(Defense{model, ds.prune, ds.tau}, ds.tau);
        } catch (const std::exception& e) {
            out.errors[i] = std::string("training: ") + e.what();
        }
    });
    return out;
}

std::vector<CellResult> score_roster(const GraphBundle& g, const std::vector<DefenseSpec>& roster,
                                     const TrainedRoster& trained, const IndexList& victims,
                                     const ScoredAttack& attack, std::uint64_t seed) {
    std::vector<CellResult> cells(roster.size());
    parallel_for(roster.size(), [&](std::size_t i) {
        CellResult& c = cells[i];
        c.attack = attack.attack;
        c.hao = attack.hao;
        c.lambda = attack.lambda;
        c.defense = defense_label(roster[i]);
        c.category = roster[i].category;
        c.seed = seed;
        if (!trained.errors[i].empty()) {
            c.error = trained.errors[i];
            return;
        }
        if (!attack.error.empty()) {
            c.error = attack.error;
            return;
        }
        try {
            c.accuracy = attack.graph
                             ? defended_evaluate(*trained.defenses[i], attack.graph->view, attack.graph->features,
                                                 victims, g.labels())
                             : defended_evaluate(*trained.defenses[i], GraphView::of(g), g.features(), victims,
                                                 g.labels());
        } catch (const std::exception& e) {
            c.error = std::string("evaluation: ") + e.what();
        }
    });
    return cells;
}

void summarize(EvalReport& report) {
    report.defenses.clear();
    report.categories.clear();
    // Deterministic reduction in first-seen order.
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::pair<Real, Index>> sums;
    std::map<std::string, Category> cat_of;
    for (const auto& c : report.cells) {
        const auto key = std::make_pair(c.attack, c.defense);
        if (!sums.count(key)) keys.push_back(key), sums[key] = {0.0, 0};
        cat_of[c.defense] = c.category;
        if (c.accuracy) sums[key].first += *c.accuracy, sums[key].second += 1;
    }
    std::vector<std::string> attacks;
    for (const auto& [attack, defense] : keys) {
        const auto [sum, runs] = sums[{attack, defense}];
        if (runs > 0) report.defenses.push_back({attack, defense, cat_of[defense], sum / runs, runs});
        if (std::find(attacks.begin(), attacks.end(), attack) == attacks.end()) attacks.push_back(attack);
    }
    for (const auto& attack : attacks)
        for (Category cat : {Category::Vanilla, Category::Robust, Category::Combo, Category::Homo}) {
            Real total = 0.0, best = -1.0;
            Index count = 0;
            for (const auto& d : report.defenses)
                if (d.attack == attack && d.category == cat) total += d.mean, best = std::max(best, d.mean), ++count;
            if (count > 0) report.categories.push_back({attack, cat, total / count, best});
        }
}

EvalReport run_blackbox_eval(const ExperimentSpec& spec) {
    const auto t0 = Clock::now();
    require(spec.graph != nullptr, "experiment: no graph");
    require(!spec.roster.empty(), "experiment: empty defense roster");
    require(spec.repeats >= 1, "experiment: repeats must be at least 1");
    std::vector<std::uint64_t> seeds = spec.seeds;
    if (seeds.empty())
        for (int r = 0; r < spec.repeats; ++r) seeds.push_back(static_cast<std::uint64_t>(r));
    require(static_cast<int>(seeds.size()) == spec.repeats, "experiment: seed list length differs from repeats");

    const GraphBundle& g = *spec.graph;
    const GraphBundle train_graph = training_subgraph(g);

    EvalReport report;
    report.dataset = spec.dataset;
    for (const std::uint64_t seed : seeds) {
        ModelDims sdims = spec.surrogate_dims;
        sdims.input = g.feature_dim();
        sdims.output = g.num_classes();
        TrainConfig scfg = spec.surrogate_train;
        scfg.seed = mix_seed(seed, 0);
        const GnnModel surrogate =
            train(init_model(Arch::GCN, sdims, {}, mix_seed(seed, 1)), train_graph, scfg).model;
        const IndexList victims = select_targets(surrogate, g, spec.targets, mix_seed(seed, 2));
        const TrainedRoster trained = train_roster(train_graph, spec.roster, spec.defense_train, seed);

        auto add = [&](const ScoredAttack& a) {
            const auto cells = score_roster(g, spec.roster, trained, victims, a, seed);
            report.cells.insert(report.cells.end(), cells.begin(), cells.end());
        };
        add({"clean", false, 0.0, std::nullopt, ""});
        for (std::size_t a = 0; a < spec.attacks.size(); ++a) {
            const AttackSpec& as = spec.attacks[a];
            AttackRun run;
            run.attack = as.label();
            run.seed = seed;
            const auto ta = Clock::now();
            ScoredAttack scored{run.attack, as.hao, as.hao ? as.lambda : 0.0, std::nullopt, ""};
            try {
                AttackBudget budget = spec.budget;
                budget.box = g.feature_box();
                const AttackOutcome outcome = run_attack(g, surrogate, victims, budget, as, mix_seed(seed, 300 + a));
                run.homophily_shift = homophily_shift(g, outcome.graph);
                if (outcome.is_injection) {
                    run.nodes_used = outcome.injection.size();
                    for (Index k = 0; k < run.nodes_used; ++k) run.edges_used += outcome.injection.degree(k);
                } else {
                    run.flips_used = static_cast<Index>(outcome.flips.flips.size());
                }
                scored.graph = outcome.graph;
            } catch (const std::exception& e) {
                run.error = scored.error = std::string("attack: ") + e.what();
            }
            run.seconds = seconds_since(ta);
            add(scored);
            report.attack_runs.push_back(run);
        }
    }
    summarize(report);
    report.seconds = seconds_since(t0);
    return report;
}

nlohmann::json report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["dataset"] = r.dataset;
    j["seconds"] = r.seconds;
    auto& cells = j["cells"] = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json e = {{"attack", c.attack},   {"hao", c.hao},   {"lambda", c.lambda},
                            {"defense", c.defense}, {"category", category_name(c.category)},
                            {"seed", c.seed}};
        e["accuracy"] = c.accuracy ? nlohmann::json(*c.accuracy) : nlohmann::json(nullptr);
        if (!c.error.empty()) e["error"] = c.error;
        cells.push_back(e);
    }
    auto& runs = j["attack_runs"] = nlohmann::json::array();
    for (const auto& a : r.attack_runs) {
        nlohmann::json e = {{"attack", a.attack},         {"seed", a.seed},
                            {"homophily_shift", a.homophily_shift}, {"nodes_used", a.nodes_used},
                            {"edges_used", a.edges_used}, {"flips_used", a.flips_used},
                            {"seconds", a.seconds}};
        if (!a.error.empty()) e["error"] = a.error;
        runs.push_back(e);
    }
    auto& defs = j["defenses"] = nlohmann::json::array();
    for (const auto& d : r.defenses)
        defs.push_back({{"attack", d.attack},
                        {"defense", d.defense},
                        {"category", category_name(d.category)},
                        {"mean_accuracy", d.mean},
                        {"runs", d.runs}});
    auto& cats = j["categories"] = nlohmann::json::array();
    for (const auto& c : r.categories)
        cats.push_back({{"attack", c.attack}, {"category", category_name(c.category)}, {"mean", c.mean}, {"max", c.max}});
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.dataset = j.value("dataset", "");
    r.seconds = j.value("seconds", 0.0);
    for (const auto& e : j.at("cells")) {
        CellResult c;
        c.attack = e.at("attack");
        c.hao = e.at("hao");
        c.lambda = e.at("lambda");
        c.defense = e.at("defense");
        c.category = parse_category(e.at("category"));
        c.seed = e.at("seed");
        if (!e.at("accuracy").is_null()) c.accuracy = e.at("accuracy").get<Real>();
        c.error = e.value("error", "");
        r.cells.push_back(c);
    }
    for (const auto& e : j.value("attack_runs", nlohmann::json::array())) {
        AttackRun a;
        a.attack = e.at("attack");
        a.seed = e.at("seed");
        a.homophily_shift = e.at("homophily_shift");
        a.nodes_used = e.at("nodes_used");
        a.edges_used = e.at("edges_used");
        a.flips_used = e.at("flips_used");
        a.seconds = e.at("seconds");
        a.error = e.value("error", "");
        r.attack_runs.push_back(a);
    }
    for (const auto& e : j.at("defenses"))
        r.defenses.push_back({e.at("attack"), e.at("defense"), parse_category(e.at("category")), e.at("mean_accuracy"),
                              e.at("runs")});
    for (const auto& e : j.at("categories"))
        r.categories.push_back({e.at("attack"), parse_category(e.at("category")), e.at("mean"), e.at("max")});
    return r;
}

std::string report_csv(const EvalReport& r) {
    std::ostringstream out;
    out.precision(17);
    out << "attack,hao,lambda,defense,category,seed,accuracy\n";
    for (const auto& c : r.cells) {
        out << c.attack << ',' << (c.hao ? 1 : 0) << ',' << c.lambda << ',' << c.defense << ','
            << category_name(c.category) << ',' << c.seed << ',';
        if (c.accuracy) out << *c.accuracy;
        out << '\n';
    }
    return out.str();
}

}  // namespace gia
