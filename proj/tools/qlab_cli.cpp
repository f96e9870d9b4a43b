#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "qlab/acceptance.hpp"
#include "qlab/clebsch.hpp"
#include "qlab/error.hpp"
#include "qlab/run.hpp"
#include "qlab/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitError = 2;

int cmd_run(const std::string& file, const std::string& out_dir) {
    const qlab::Scenario s = qlab::load_scenario(file);
    const qlab::RunReport rep = qlab::run_scenario(s);
    const fs::path dir = out_dir.empty() ? fs::path("out") / s.name : fs::path(out_dir);
    qlab::write_report(rep, dir);
    for (const qlab::CheckResult& c : rep.checks) {
        std::string detail;
        for (const qlab::CheckQuantity& q : c.quantities)
            detail += fmt::format("{}{} = {:.3e} (< {:.1e})", detail.empty() ? "" : ", ", q.name, q.value, q.tolerance);
        fmt::print("[{}] {} | {}\n", c.pass ? "PASS" : "FAIL", c.name, detail);
        if (!c.note.empty()) fmt::print("       {}\n", c.note);
    }
    fmt::print("{}: {} checks, verdict {}, written to {}\n", s.name, rep.checks.size(), rep.pass ? "pass" : "fail",
               dir.string());
    return rep.pass ? kExitPass : kExitCheckFailure;
}

int cmd_list(const std::string& dir) {
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw qlab::Error("scenario directory not found: " + dir);
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
        const qlab::Scenario s = qlab::load_scenario(f);
        std::string tiers;
        for (qlab::Tier t : s.tiers) tiers += (tiers.empty() ? "" : "+") + qlab::tier_name(t);
        fmt::print("{:<28} {:<14} dim {}  {}\n", s.name, tiers.empty() ? "-" : tiers, s.dim, s.description);
    }
    return kExitPass;
}

int cmd_clebsch(int n_max) {
    if (n_max < 1) throw qlab::ConfigError("--n-max must be at least 1");
    fmt::print("N,n,k,m,variables,regular,maximal_redundancy,parity_representation\n");
    for (int N = 1; N <= n_max; ++N) {
        const qlab::ParityVerdict parity = qlab::parity_check(N);
        for (const qlab::ClassSolution& c : qlab::enumerate_class_solutions(N, true))
            fmt::print("{},{},{},{},{},{},{},{}\n", c.N, c.n, c.k, c.m, qlab::variable_count(c), c.regular ? 1 : 0,
                       c.maximal_redundancy ? 1 : 0, parity.representation);
    }
    return kExitPass;
}

int cmd_verify(bool list, double threshold, const std::vector<int>& only) {
    if (list) {
        for (const qlab::CriterionInfo& c : qlab::acceptance_criteria())
            fmt::print("{:>2}  {} | tolerance: {}\n", c.id, c.title, c.tolerance);
        return kExitPass;
    }
    for (int id : only)
        if (id < 1 || id > static_cast<int>(qlab::acceptance_criteria().size()))
            throw qlab::ConfigError(fmt::format("unknown criterion id {}", id));
    int failed = 0;
    qlab::run_acceptance({threshold, only}, [&](const qlab::CriterionResult& r) {
        fmt::print("{}\n", qlab::format_result_line(r));
        std::fflush(stdout);
        if (!r.pass) ++failed;
    });
    fmt::print("{} criteria failed\n", failed);
    return failed == 0 ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-space, projected and quantum dynamics lab"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir;
    auto* run = app.add_subcommand("run", "Run a scenario and write report.json plus CSV series");
    run->add_option("scenario", scenario_file, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory (default out/<name>)");

    std::string scenario_dir = QLAB_SCENARIO_DIR;
    auto* list = app.add_subcommand("list-scenarios", "List the bundled scenarios");
    list->add_option("--dir", scenario_dir, "Scenario directory");

    int n_max = 0;
    auto* table = app.add_subcommand("clebsch-table", "Print admissible Clebsch classes as CSV");
    table->add_option("--n-max", n_max, "Largest particle count")->required();

    bool list_only = false;
    double threshold = 1e-3;
    std::vector<int> only;
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_flag("--list", list_only, "List criteria and tolerances without running");
    verify->add_option("--caustic-threshold", threshold, "Caustic threshold on |det dq/dq0|");
    verify->add_option("--only", only, "Criterion ids to run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitError;
    }

    try {
        if (*run) return cmd_run(scenario_file, out_dir);
        if (*list) return cmd_list(scenario_dir);
        if (*table) return cmd_clebsch(n_max);
        if (*verify) return cmd_verify(list_only, threshold, only);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
