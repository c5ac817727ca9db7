#include "gia/bundle_io.hpp"
#include "gia/checkpoint.hpp"
#include "gia/gma.hpp"
#include "gia/harness.hpp"
#include "gia/report.hpp"
#include "gia/sbm.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gia;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

Real parse_real(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const Real x = std::stod(s, &used);
        if (used == s.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError("bad number '" + s + "' in " + what);
}

GraphBundle load_graph(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw UsageError("graph directory not found: " + dir.string());
    try {
        return read_bundle(dir);
    } catch (const Error& e) {
        throw UsageError(std::string("cannot read graph: ") + e.what());
    }
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::is_regular_file(p)) throw UsageError(what + " not found: " + p.string());
}

TargetMode parse_targets(const std::string& s) {
    if (s == "all") return TargetMode::all_test();
    if (s.rfind("margin:", 0) == 0) {
        const auto parts = split(s.substr(7), ',');
        if (parts.size() != 3) throw UsageError("--targets margin needs three counts, e.g. margin:200,200,400");
        Index k[3];
        for (int i = 0; i < 3; ++i) k[i] = static_cast<Index>(parse_real(parts[i], "--targets"));
        return TargetMode::margin_mix(k[0], k[1], k[2]);
    }
    throw UsageError("--targets must be 'all' or 'margin:hi,lo,rand'");
}

IndexList read_index_list(const fs::path& p) { return json::parse(read_file(p)).get<IndexList>(); }

/// Every output directory gets one of these.
class Manifest {
public:
    Manifest(std::string command, int argc, char** argv) : command_(std::move(command)) {
        for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
    }
    json config = json::object();
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> inputs, outputs;

    void write(const fs::path& dir) const {
        json j = {{"command", command_},
                  {"argv", argv_},
                  {"config", config},
                  {"seeds", seeds},
                  {"inputs", inputs},
                  {"outputs", outputs},
                  {"version", kVersion},
                  {"wall_clock_seconds", std::chrono::duration<double>(Clock::now() - start_).count()}};
        write_file(dir / "manifest.json", j.dump(2) + "\n");
    }

private:
    using Clock = std::chrono::steady_clock;
    std::string command_;
    std::vector<std::string> argv_;
    Clock::time_point start_ = Clock::now();
};

// gen ------------------------------------------------------------------------

struct GenArgs {
    std::string sbm, features = "indicator", out;
    Index dim = 0;
    bool connect_isolated = false;
    std::uint64_t seed = 0;
};

void cmd_gen(const GenArgs& a, Manifest& m) {
    const auto parts = split(a.sbm, ',');
    if (parts.size() != 4) throw UsageError("--sbm expects n,C,p_in,p_out");
    SbmSpec spec;
    spec.n = static_cast<Index>(parse_real(parts[0], "--sbm"));
    spec.classes = static_cast<Index>(parse_real(parts[1], "--sbm"));
    spec.p_in = parse_real(parts[2], "--sbm");
    spec.p_out = parse_real(parts[3], "--sbm");
    spec.feature_dim = a.dim;
    spec.connect_isolated = a.connect_isolated;
    spec.seed = a.seed;
    if (a.features.rfind("noisy:", 0) == 0)
        spec.sigma = parse_real(a.features.substr(6), "--features");
    else if (a.features != "indicator")
        throw UsageError("--features must be 'indicator' or 'noisy:<sigma>'");
    if (!(spec.p_out >= 0 && spec.p_out < spec.p_in && spec.p_in <= 1))
        throw UsageError("--sbm needs 0 <= p_out < p_in <= 1");
    if (spec.n < 1 || spec.classes < 2) throw UsageError("--sbm needs n >= 1 and C >= 2");

    const GraphBundle g = generate_sbm(spec);
    write_bundle(g, a.out);
    m.config = {{"n", spec.n},           {"classes", spec.classes},   {"p_in", spec.p_in},
                {"p_out", spec.p_out},   {"features", a.features},    {"sigma", spec.sigma},
                {"feature_dim", g.feature_dim()}, {"connect_isolated", spec.connect_isolated}};
    m.seeds = {a.seed};
    m.outputs = {a.out};
    m.write(a.out);
    std::cout << "nodes " << g.num_nodes() << " edges " << g.num_edges() << " classes " << g.num_classes() << "\n";
}

// train ----------------------------------------------------------------------

struct TrainArgs {
    std::string graph, out, arch = "gcn";
    Index layers = 3, hidden = 64;
    Real lr = 0.01, dropout = 0.5, weight_decay = 0.0, guard = 0.1;
    int epochs = 400, patience = 100;
    bool ln = false, lni = false, flag = false;
    std::uint64_t seed = 0;
};

void cmd_train(const TrainArgs& a, Manifest& m) {
    const GraphBundle g = load_graph(a.graph);
    Arch arch;
    try {
        arch = parse_arch(a.arch);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    ModelOptions opts;
    opts.layer_norm_pre = a.ln;
    opts.layer_norm_inter = a.lni;
    opts.dropout = a.dropout;
    opts.guard_threshold = a.guard;
    TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.patience = a.patience;
    cfg.lr = a.lr;
    cfg.weight_decay = a.weight_decay;
    cfg.flag.enabled = a.flag;
    cfg.seed = a.seed;

    const GraphBundle inductive = training_subgraph(g);
    const auto result =
        train(init_model(arch, {g.feature_dim(), a.hidden, g.num_classes(), a.layers}, opts, a.seed), inductive, cfg);
    const Real test_acc = predict_accuracy(result.model, NormAdjView(GraphView::of(g)), g.features(),
                                           g.splits().test, g.labels());

    fs::create_directories(a.out);
    save_checkpoint(result.model, fs::path(a.out) / "model.ckpt");
    std::ostringstream hist;
    hist.precision(17);
    hist << "epoch,loss,train_accuracy,val_accuracy,val_loss\n";
    for (const auto& r : result.history)
        hist << r.epoch << ',' << r.loss << ',' << r.train_accuracy << ',' << r.val_accuracy << ',' << r.val_loss << '\n';
    write_file(fs::path(a.out) / "history.csv", hist.str());

    m.config = {{"arch", a.arch},       {"layers", a.layers},   {"hidden", a.hidden},   {"lr", a.lr},
                {"epochs", a.epochs},   {"patience", a.patience}, {"dropout", a.dropout}, {"ln", a.ln},
                {"lni", a.lni},         {"flag", a.flag},       {"weight_decay", a.weight_decay},
                {"guard_threshold", a.guard}, {"best_epoch", result.best_epoch},
                {"best_val_accuracy", result.best_val_accuracy}, {"test_accuracy", test_acc}};
    m.seeds = {a.seed};
    m.inputs = {a.graph};
    m.outputs = {(fs::path(a.out) / "model.ckpt").string(), (fs::path(a.out) / "history.csv").string()};
    m.write(a.out);
    std::cout << "best_epoch " << result.best_epoch << " val_accuracy " << result.best_val_accuracy
              << " test_accuracy " << test_acc << "\n";
}

// attack ---------------------------------------------------------------------

struct AttackArgs {
    std::string graph, surrogate, out, from, method = "pgd", targets = "all", budget_tag;
    bool seq = false, hao = false, add_only = false;
    Real lambda = 1.0, step_size = 0.01, gamma = 0.2, hinge_tau = 1e-8;
    Index nodes = -1, degree = -1;
    int steps = 500, patience = 100, agia_outer = 2;
    std::uint64_t seed = 0;
};

json profile_file(const std::string& label, const HomophilyProfile& p) { return profile_to_json({label, p}); }

void cmd_attack(const AttackArgs& a, Manifest& m) {
    const GraphBundle g = load_graph(a.graph);
    require_file(a.surrogate, "surrogate checkpoint");
    const GnnModel surrogate = load_checkpoint(a.surrogate);
    static const std::vector<std::string> methods = {"pgd", "atdgia", "agia", "metagia", "gma", "m2"};
    if (std::find(methods.begin(), methods.end(), a.method) == methods.end())
        throw UsageError("--method must be one of pgd|atdgia|agia|metagia|gma|m2");
    if (a.method == "m2" && a.from.empty()) throw UsageError("--method m2 needs --from <gma attack directory>");
    if (surrogate.dims.input != g.feature_dim() || surrogate.dims.output != g.num_classes())
        throw UsageError("surrogate does not match the graph's feature or class count");

    AttackBudget budget;
    if (!a.budget_tag.empty()) {
        try {
            budget = budget_table(a.budget_tag, &g);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }
    budget.box = g.feature_box();
    if (a.nodes >= 0) budget.max_nodes = budget.max_flips = a.nodes;
    if (a.degree >= 0) budget.max_degree = a.degree;
    if (a.budget_tag.empty() && (a.nodes < 0 || (a.degree < 0 && a.method != "gma")))
        throw UsageError("give --nodes and --degree, or --budget <dataset tag>");

    AttackSpec spec;
    spec.method = a.method;
    spec.seq = a.seq;
    spec.hao = a.hao;
    spec.lambda = a.lambda;
    spec.pgd = {a.steps, a.step_size, a.patience};
    spec.agia.outer = a.agia_outer;
    spec.hinge_tau = a.hinge_tau;
    spec.additions_only = a.add_only;

    const IndexList victims = select_targets(surrogate, g, parse_targets(a.targets), a.seed);
    const fs::path out(a.out);
    fs::create_directories(out);
    m.inputs = {a.graph, a.surrogate};

    PerturbedGraph perturbed;
    Index injected = 0;
    if (a.method == "m2") {
        const fs::path flips_path = fs::path(a.from) / "flips.json";
        require_file(flips_path, "GMA flips (from --method gma)");
        const auto file = read_perturbation(flips_path, g.feature_dim());
        if (file.mode != "GMA") throw UsageError("--from does not hold a GMA perturbation");
        for (const auto& f : file.flips.flips)
            if (!f.add) throw UsageError("--from holds edge removals; rerun gma with --add-only");
        const GraphBundle seen = strip_non_train_labels(g);
        const auto target = make_attack_target(seen, surrogate, victims);
        auto pert = m2_attack(target, file.flips, budget.box, spec, a.seed);
        if (budget.max_degree < 2) budget.max_degree = 2;
        budget.max_nodes = std::max(budget.max_nodes, pert.size());
        const auto check = budget_check(pert, budget, g);
        require(check.ok(), check.ok() ? "" : check.violations.front());
        write_perturbation(out / "perturbation.json", pert, budget);
        perturbed = apply_injection(g, pert);
        injected = pert.size();
        m.inputs.push_back(flips_path.string());
        m.outputs.push_back((out / "perturbation.json").string());
    } else {
        const AttackOutcome outcome = run_attack(g, surrogate, victims, budget, spec, a.seed);
        if (outcome.is_injection) {
            write_perturbation(out / "perturbation.json", outcome.injection, budget);
            injected = outcome.injection.size();
            m.outputs.push_back((out / "perturbation.json").string());
        } else {
            write_flips(out / "flips.json", outcome.flips, AttackBudget::modification(budget.max_flips), a.seed,
                        "gma");
            m.outputs.push_back((out / "flips.json").string());
        }
        perturbed = outcome.graph;
    }

    IndexList clean_nodes(static_cast<std::size_t>(g.num_nodes()));
    std::iota(clean_nodes.begin(), clean_nodes.end(), Index{0});
    IndexList all_nodes(static_cast<std::size_t>(perturbed.view.num_nodes));
    std::iota(all_nodes.begin(), all_nodes.end(), Index{0});
    const auto before = homophily_profile(g, clean_nodes);
    const auto after = homophily_profile(weighted_adjacency(perturbed.view), perturbed.features, all_nodes);
    const Real shift = profile_distance(before, after);
    write_file(out / "victims.json", json(victims).dump() + "\n");
    write_file(out / "profile_clean.json", profile_file("clean", before).dump() + "\n");
    write_file(out / "profile_perturbed.json", profile_file(spec.label(), after).dump() + "\n");
    write_file(out / "homophily_shift.json",
               json{{"metric", "wasserstein1"}, {"shift", shift}, {"injected_nodes", injected}}.dump(2) + "\n");
    for (const char* f : {"victims.json", "profile_clean.json", "profile_perturbed.json", "homophily_shift.json"})
        m.outputs.push_back((out / f).string());

    m.config = {{"method", a.method},     {"seq", a.seq},         {"hao", a.hao},
                {"lambda", a.lambda},     {"nodes", budget.max_nodes}, {"degree", budget.max_degree},
                {"flips", budget.max_flips}, {"box", {budget.box.lo, budget.box.hi}},
                {"targets", a.targets},   {"victims", victims.size()}, {"steps", a.steps},
                {"step_size", a.step_size}, {"patience", a.patience}, {"gamma", a.gamma},
                {"agia_outer", a.agia_outer}, {"hinge_tau", a.hinge_tau}, {"budget", a.budget_tag},
                {"from", a.from}, {"add_only", a.add_only}};
    m.seeds = {a.seed};
    m.write(out);
    std::cout << "method " << spec.label() << " injected " << injected << " homophily_shift " << shift << "\n";
}

// eval -----------------------------------------------------------------------

struct EvalArgs {
    std::string graph, roster, out, victims;
    std::vector<std::string> perturbations;
    bool clean = false;
    int epochs = 400, patience = 100;
    Real lr = 0.01;
    std::uint64_t seed = 0;
};

void cmd_eval(const EvalArgs& a, Manifest& m) {
    const GraphBundle g = load_graph(a.graph);
    std::vector<DefenseSpec> roster = default_roster();
    if (!a.roster.empty()) {
        require_file(a.roster, "roster file");
        try {
            roster = parse_roster(json::parse(read_file(a.roster)));
        } catch (const std::exception& e) {
            throw UsageError(std::string("bad roster: ") + e.what());
        }
    }
    for (const auto& p : a.perturbations) require_file(p, "perturbation file");

    IndexList victims = g.splits().test;
    std::sort(victims.begin(), victims.end());
    fs::path victims_path = a.victims;
    if (victims_path.empty() && !a.perturbations.empty()) {
        const fs::path sibling = fs::path(a.perturbations.front()).parent_path() / "victims.json";
        if (fs::is_regular_file(sibling)) victims_path = sibling;
    }
    if (!victims_path.empty()) {
        require_file(victims_path, "victims file");
        victims = read_index_list(victims_path);
    }

    TrainConfig cfg;
    cfg.epochs = a.epochs;
    cfg.patience = a.patience;
    cfg.lr = a.lr;
    const TrainedRoster trained = train_roster(training_subgraph(g), roster, cfg, a.seed);

    EvalReport report;
    report.dataset = fs::path(a.graph).filename().string();
    auto add = [&](const ScoredAttack& s) {
        const auto cells = score_roster(g, roster, trained, victims, s, a.seed);
        report.cells.insert(report.cells.end(), cells.begin(), cells.end());
    };
    if (a.clean || a.perturbations.empty()) add({"clean", false, 0.0, std::nullopt, ""});
    std::map<std::string, int> seen_labels;
    for (const auto& path : a.perturbations) {
        const auto file = read_perturbation(path, g.feature_dim());
        ScoredAttack s;
        AttackRun run;
        if (file.mode == "GMA") {
            s.attack = "gma";
            s.graph = PerturbedGraph{apply_flips(g, file.flips), g.features()};
            run.flips_used = static_cast<Index>(file.flips.flips.size());
        } else {
            const auto& inj = file.injection;
            s.attack = inj.strategy.empty() ? "injection" : inj.strategy;
            if (inj.hao) {
                std::ostringstream l;
                l << s.attack << "+hao@" << inj.lambda;
                s.attack = l.str();
            }
            s.hao = inj.hao;
            s.lambda = inj.lambda;
            const auto check = budget_check(inj, file.budget, g);
            if (!check.ok()) s.error = "budget: " + check.violations.front();
            s.graph = apply_injection(g, inj);
            run.nodes_used = inj.size();
            for (Index k = 0; k < inj.size(); ++k) run.edges_used += inj.degree(k);
        }
        if (int k = seen_labels[s.attack]++; k > 0) s.attack += "#" + std::to_string(k);
        run.attack = s.attack;
        run.seed = a.seed;
        run.homophily_shift = homophily_shift(g, *s.graph);
        report.attack_runs.push_back(run);
        add(s);
        m.inputs.push_back(path);
    }
    summarize(report);

    const fs::path out(a.out);
    fs::create_directories(out);
    write_file(out / "report.json", report_to_json(report).dump(2) + "\n");
    write_file(out / "report.csv", report_csv(report));
    m.config = {{"epochs", a.epochs}, {"patience", a.patience}, {"lr", a.lr}, {"clean", a.clean},
                {"roster", roster_to_json(roster)}, {"victims", victims.size()}};
    m.seeds = {a.seed};
    m.inputs.insert(m.inputs.begin(), a.graph);
    if (!a.roster.empty()) m.inputs.insert(m.inputs.begin() + 1, a.roster);
    if (!victims_path.empty()) m.inputs.push_back(victims_path.string());
    m.outputs = {(out / "report.json").string(), (out / "report.csv").string()};
    m.write(out);
    std::cout << summary_table(report);
    for (const auto& c : report.cells)
        if (!c.error.empty()) std::cerr << "cell " << c.attack << "/" << c.defense << ": " << c.error << "\n";
}

// report ---------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> inputs, profiles;
    std::string out;
};

void cmd_report(const ReportArgs& a, Manifest& m) {
    if (a.inputs.empty() && a.profiles.empty()) throw UsageError("report needs --inputs and/or --profiles");
    for (const auto& p : a.inputs) require_file(p, "eval report");
    for (const auto& p : a.profiles) require_file(p, "profile");
    const fs::path out(a.out);
    fs::create_directories(out);

    std::string summary;
    for (const auto& p : a.inputs) summary += summary_table(report_from_json(json::parse(read_file(p)))) + "\n";
    if (!a.inputs.empty()) {
        write_file(out / "summary.md", summary);
        m.outputs.push_back((out / "summary.md").string());
        std::cout << summary;
    }
    if (!a.profiles.empty()) {
        std::vector<NamedProfile> profiles;
        for (const auto& p : a.profiles) profiles.push_back(profile_from_json(json::parse(read_file(p))));
        write_file(out / "homophily.svg", histogram_svg(profiles));
        m.outputs.push_back((out / "homophily.svg").string());
    }
    m.inputs = a.inputs;
    m.inputs.insert(m.inputs.end(), a.profiles.begin(), a.profiles.end());
    m.write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph injection attack toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic SBM graph bundle");
    g->add_option("--sbm", gen.sbm, "n,C,p_in,p_out")->required();
    g->add_option("--features", gen.features, "indicator | noisy:<sigma>")->capture_default_str();
    g->add_option("--dim", gen.dim, "feature dimension (0: number of classes)")->capture_default_str();
    g->add_flag("--connect-isolated", gen.connect_isolated, "link isolated nodes to a same-class node");
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--out", gen.out, "output directory")->required();

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a model inductively on the train and val nodes");
    t->add_option("--graph", tr.graph)->required();
    t->add_option("--out", tr.out)->required();
    t->add_option("--arch", tr.arch, "gcn | eguard | rgat | mlp | linearized")->capture_default_str();
    t->add_option("--layers", tr.layers)->capture_default_str();
    t->add_option("--hidden", tr.hidden)->capture_default_str();
    t->add_option("--lr", tr.lr)->capture_default_str();
    t->add_option("--epochs", tr.epochs)->capture_default_str();
    t->add_option("--patience", tr.patience)->capture_default_str();
    t->add_option("--dropout", tr.dropout)->capture_default_str();
    t->add_option("--weight-decay", tr.weight_decay)->capture_default_str();
    t->add_option("--guard-threshold", tr.guard)->capture_default_str();
    t->add_flag("--ln", tr.ln, "layer norm before the first layer");
    t->add_flag("--lni", tr.lni, "layer norm between layers");
    t->add_flag("--flag", tr.flag, "FLAG adversarial feature augmentation");
    t->add_option("--seed", tr.seed)->capture_default_str();

    AttackArgs at;
    auto* a = app.add_subcommand("attack", "Attack a graph through a surrogate checkpoint");
    a->add_option("--graph", at.graph)->required();
    a->add_option("--surrogate", at.surrogate)->required();
    a->add_option("--out", at.out)->required();
    a->add_option("--method", at.method, "pgd | atdgia | agia | metagia | gma | m2")->capture_default_str();
    a->add_option("--from", at.from, "directory of a gma attack (for m2)");
    a->add_flag("--seq", at.seq, "sequential injection rounds");
    a->add_flag("--add-only", at.add_only, "gma: edge additions only");
    a->add_flag("--hao", at.hao, "homophily-regularized objective");
    a->add_option("--lambda", at.lambda, "HAO weight")->capture_default_str();
    a->add_option("--nodes", at.nodes, "injected nodes (flips for gma)");
    a->add_option("--degree", at.degree, "max degree per injected node");
    a->add_option("--budget", at.budget_tag, "dataset tag for the default budget, e.g. cora");
    a->add_option("--targets", at.targets, "all | margin:hi,lo,rand")->capture_default_str();
    a->add_option("--steps", at.steps, "PGD steps")->capture_default_str();
    a->add_option("--step-size", at.step_size, "PGD step size")->capture_default_str();
    a->add_option("--patience", at.patience, "PGD early stop")->capture_default_str();
    a->add_option("--gamma", at.gamma, "sequential round fraction")->capture_default_str();
    a->add_option("--agia-outer", at.agia_outer)->capture_default_str();
    a->add_option("--hinge-tau", at.hinge_tau)->capture_default_str();
    a->add_option("--seed", at.seed)->capture_default_str();

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Train a defense roster and score it on perturbed graphs");
    e->add_option("--graph", ev.graph)->required();
    e->add_option("--roster", ev.roster, "JSON [{arch, options, category}]; built-in roster when absent");
    e->add_option("--perturbation", ev.perturbations, "perturbation or flips JSON (repeatable)");
    e->add_option("--victims", ev.victims, "JSON node list (default: victims.json next to the perturbation)");
    e->add_flag("--clean", ev.clean, "also score the clean graph");
    e->add_option("--out", ev.out)->required();
    e->add_option("--epochs", ev.epochs)->capture_default_str();
    e->add_option("--patience", ev.patience)->capture_default_str();
    e->add_option("--lr", ev.lr)->capture_default_str();
    e->add_option("--seed", ev.seed)->capture_default_str();

    ReportArgs rp;
    auto* r = app.add_subcommand("report", "Summary tables and homophily histograms");
    r->add_option("--inputs", rp.inputs, "eval report JSON files");
    r->add_option("--profiles", rp.profiles, "homophily profile JSON files");
    r->add_option("--out", rp.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Manifest manifest(command, argc, argv);
    try {
        if (command == "gen") cmd_gen(gen, manifest);
        if (command == "train") cmd_train(tr, manifest);
        if (command == "attack") cmd_attack(at, manifest);
        if (command == "eval") cmd_eval(ev, manifest);
        if (command == "report") cmd_report(rp, manifest);
    } catch (const UsageError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "internal error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
