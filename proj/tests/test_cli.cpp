#include "gia/bundle_io.hpp"
#include "gia/checkpoint.hpp"
#include "gia/homophily.hpp"
#include "gia/perturbation.hpp"
#include "gia/report.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gia;

namespace {

const fs::path kWork = fs::temp_directory_path() / "gia_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(GIA_CLI_PATH) + " " + args + " > " + (kWork / "last.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string w(const std::string& name) { return (kWork / name).string(); }

json read_json(const std::string& path) { return json::parse(read_file(path)); }

struct Workspace {
    Workspace() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
    }
};

}  // namespace

TEST_CASE("gen is deterministic and validates its flags") {
    Workspace ws;
    REQUIRE(run("gen --sbm 100,2,0.1,0.01 --seed 1 --out " + w("g1")) == 0);
    REQUIRE(run("gen --sbm 100,2,0.1,0.01 --seed 1 --out " + w("g2")) == 0);
    const auto g = read_bundle(w("g1"));
    CHECK(g.num_nodes() == 100);
    for (const char* f : {"meta.json", "edges.txt", "features.bin", "labels.txt", "splits.json"})
        CHECK(read_file(kWork / "g1" / f) == read_file(kWork / "g2" / f));
    CHECK(fs::exists(kWork / "g1" / "manifest.json"));
    CHECK(read_json(w("g1/manifest.json"))["command"] == "gen");

    CHECK(run("gen --sbm 100,2,0.01,0.1 --out " + w("bad")) == 2);
    CHECK(read_file(kWork / "last.log").find("p_out < p_in") != std::string::npos);
    CHECK(run("gen --sbm 100,2,0.1 --out " + w("bad")) == 2);
    CHECK(run("gen --out " + w("bad")) == 2);
}

TEST_CASE("train, attack, eval and report") {
    Workspace ws;
    REQUIRE(run("gen --sbm 200,2,0.06,0.006 --features noisy:0.4 --dim 4 --connect-isolated --seed 3 --out " +
                w("g")) == 0);
    CHECK(run("train --graph " + w("missing") + " --out " + w("m")) == 2);
    CHECK(run("train --graph " + w("g") + " --arch nosuch --out " + w("m")) == 2);

    REQUIRE(run("train --graph " + w("g") + " --epochs 0 --seed 5 --out " + w("m0")) == 0);
    const auto initial = load_checkpoint(w("m0/model.ckpt"));
    const auto fresh = init_model(Arch::GCN, {4, 64, 2, 3}, {}, 5);
    REQUIRE(initial.weights.size() == fresh.weights.size());
    for (std::size_t i = 0; i < fresh.weights.size(); ++i)
        CHECK(initial.weights[i] == fresh.weights[i].cast<float>().cast<Real>());

    REQUIRE(run("train --graph " + w("g") + " --layers 2 --hidden 16 --epochs 80 --out " + w("m")) == 0);
    CHECK(fs::exists(kWork / "m" / "history.csv"));
    CHECK(read_json(w("m/manifest.json"))["config"]["hidden"] == 16);

    const std::string base = "attack --graph " + w("g") + " --surrogate " + w("m/model.ckpt");
    REQUIRE(run(base + " --nodes 0 --degree 5 --out " + w("a0")) == 0);
    CHECK(read_json(w("a0/homophily_shift.json"))["shift"] == 0.0);
    const auto empty = read_perturbation(w("a0/perturbation.json"), 4);
    CHECK(empty.injection.size() == 0);

    CHECK(run(base + " --method m2 --nodes 4 --degree 2 --out " + w("bad")) == 2);
    CHECK(run(base + " --method nosuch --nodes 4 --degree 2 --out " + w("bad")) == 2);
    CHECK(run(base + " --out " + w("bad")) == 2);

    REQUIRE(run(base + " --nodes 8 --degree 5 --steps 60 --seed 2 --out " + w("plain")) == 0);
    REQUIRE(run(base + " --nodes 8 --degree 5 --steps 60 --seed 2 --hao --lambda 1 --out " + w("hao")) == 0);
    const Real plain = read_json(w("plain/homophily_shift.json"))["shift"];
    const Real hao = read_json(w("hao/homophily_shift.json"))["shift"];
    CHECK(hao <= plain);

    REQUIRE(run(base + " --method gma --add-only --nodes 4 --out " + w("gma")) == 0);
    REQUIRE(run(base + " --method m2 --from " + w("gma") + " --nodes 4 --degree 2 --steps 10 --out " + w("m2")) ==
            0);
    CHECK(read_perturbation(w("m2/perturbation.json"), 4).injection.size() <= 4);

    write_file(kWork / "one.json", R"([{"arch": "gcn", "options": {"hidden": 16, "layers": 2}, "category": "Vanilla"}])");
    write_file(kWork / "two.json", R"([{"arch": "gcn", "options": {"hidden": 16, "layers": 2}, "category": "Vanilla"},
        {"arch": "gcn", "options": {"hidden": 16, "layers": 2, "prune": true}, "category": "Homo"}])");
    REQUIRE(run("eval --graph " + w("g") + " --roster " + w("one.json") + " --epochs 40 --out " + w("e1")) == 0);
    const std::string csv = read_file(kWork / "e1" / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);

    REQUIRE(run("eval --graph " + w("g") + " --roster " + w("two.json") + " --epochs 40 --clean --perturbation " +
                w("a0/perturbation.json") + " --out " + w("e2")) == 0);
    const auto report = report_from_json(read_json(w("e2/report.json")));
    for (const char* d : {"gcn", "gcn+prune"})
        CHECK(report.mean_accuracy("pgd", d) == report.mean_accuracy("clean", d));
    CHECK(fs::exists(kWork / "e2" / "manifest.json"));
    CHECK(run("eval --graph " + w("g") + " --roster " + w("missing.json") + " --out " + w("bad")) == 2);

    REQUIRE(run("report --inputs " + w("e2/report.json") + " --profiles " + w("plain/profile_clean.json") + " " +
                w("plain/profile_perturbed.json") + " --out " + w("r")) == 0);
    const auto bins = svg_bin_counts(read_file(kWork / "r" / "homophily.svg"));
    REQUIRE(bins.size() == 2);
    const auto g = read_bundle(w("g"));
    IndexList nodes(static_cast<std::size_t>(g.num_nodes()));
    std::iota(nodes.begin(), nodes.end(), Index{0});
    const auto clean = homophily_profile(g, nodes);
    CHECK(std::equal(bins[0].second.begin(), bins[0].second.end(), clean.histogram.begin(), clean.histogram.end()));
    const auto pert = read_perturbation(w("plain/perturbation.json"), 4);
    const auto pg = apply_injection(g, pert.injection);
    IndexList all(static_cast<std::size_t>(pg.view.num_nodes));
    std::iota(all.begin(), all.end(), Index{0});
    const auto after = homophily_profile(weighted_adjacency(pg.view), pg.features, all);
    CHECK(std::equal(bins[1].second.begin(), bins[1].second.end(), after.histogram.begin(), after.histogram.end()));
    CHECK(read_file(kWork / "r" / "summary.md").find("| pgd |") != std::string::npos);

    CHECK(run("report --out " + w("r2")) == 2);
    CHECK(run("report --inputs " + w("missing.json") + " --out " + w("r2")) == 2);
    for (const char* dir : {"g", "m", "a0", "plain", "gma", "m2", "e1", "e2", "r"})
        CHECK(fs::exists(kWork / dir / "manifest.json"));
}
