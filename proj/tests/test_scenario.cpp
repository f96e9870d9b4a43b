#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlab/error.hpp"
#include "qlab/run.hpp"
#include "qlab/scenario.hpp"

using namespace qlab;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

const CheckResult& check_named(const RunReport& r, const std::string& name) {
    for (const CheckResult& c : r.checks)
        if (c.name == name) return c;
    FAIL("missing check " << name);
    return r.checks.front();
}

}  // namespace

TEST_CASE("scenario defaults") {
    const Scenario s = parse_scenario({{"name", "minimal"}});
    CHECK(s.numerics.dt == 1e-3);
    CHECK(s.numerics.hbar == 1.0);
    CHECK(s.dim == 1);
    CHECK(s.tiers.empty());
    CHECK(s.checks.empty());
    CHECK(s.potential.kind == "free");
    const json echo = s.echo();
    CHECK(echo["schema_version"] == kScenarioSchemaVersion);
    CHECK(parse_scenario(echo).echo() == echo);
}

TEST_CASE("scenario validation names the offending key") {
    CHECK(contains(error_of({{"name", "x"}, {"hamiltonian", {{"potential", {{"kind", "harmonic"}, {"omega", -1.0}}}}}}),
                   "'hamiltonian.potential.omega' must be positive"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QA"}}, {"hamiltonian", {{"dim", 3}}}}),
                   "unsupported dimension 3 for tier QA (supported: 1, 2)"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"PM"}}, {"hamiltonian", {{"dim", 2}}}}), "supported: 1)"));
    CHECK(contains(error_of({{"name", "x"}, {"grid", {{"extent", 10.0}, {"pionts", 64}}}}), "unknown key 'grid.pionts'"));
    CHECK(contains(error_of({{"name", "x"}, {"grid", {{"points", 100}}}}), "power of two"));
    CHECK(contains(error_of(json::object()), "'name' is required"));
    CHECK(contains(error_of({{"name", "x"}, {"schema_version", 7}}), "schema_version"));
}

TEST_CASE("unknown catalog entries list the valid ones") {
    const std::string initial = error_of({{"name", "x"}, {"initial", {{"kind", "squeezed"}}}});
    CHECK(contains(initial, "unknown initial state 'squeezed'"));
    for (const std::string& k : initial_catalog()) CHECK(contains(initial, k));

    const std::string pot = error_of({{"name", "x"}, {"hamiltonian", {{"potential", "morse"}}}});
    for (const std::string& k : potential_catalog()) CHECK(contains(pot, k));

    const std::string check = error_of({{"name", "x"}, {"tiers", {"QT"}}, {"checks", {"virial"}}});
    for (const std::string& k : check_catalog()) CHECK(contains(check, k));

    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QM"}}}), "valid: PM, QA, QT, CWE"));
}

TEST_CASE("check and initial-state compatibility") {
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QT"}}, {"checks", {"caustic_time"}}}), "needs tier QA"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QA"}}, {"checks", {{{"name", "caustic_time"}}}}}),
                   "needs 'expected'"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QT"}}, {"checks", {"ehrenfest", "ehrenfest"}}}), "twice"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QA"}}, {"initial", {{"kind", "vortex"}}}}),
                   "no momentum field"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QT"}}, {"initial", {{"kind", "coherent"}}}}),
                   "needs the harmonic potential"));
    CHECK(contains(error_of({{"name", "x"}, {"tiers", {"QT"}}, {"initial", {{"kind", "linear_momentum"}}}}),
                   "no wave function"));
}

TEST_CASE("bundled scenarios parse") {
    int count = 0;
    for (const auto& e : std::filesystem::directory_iterator(QLAB_SCENARIO_DIR)) {
        if (e.path().extension() != ".json") continue;
        CAPTURE(e.path().string());
        CHECK_NOTHROW(load_scenario(e.path()));
        ++count;
    }
    CHECK(count >= 8);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("empty tier set is a no-op") {
    const RunReport r = run_scenario(parse_scenario({{"name", "empty"}}));
    CHECK(r.checks.empty());
    CHECK(r.series.empty());
    CHECK(r.pass);
    CHECK(r.doc["schema_version"] == kReportSchemaVersion);
    CHECK(r.doc["verdict"] == "pass");
    CHECK(r.doc["tiers"].empty());
}

TEST_CASE("coherent state passes Ehrenfest and writes deterministic series") {
    const json doc = {{"name", "coherent"},
                      {"tiers", {"QT"}},
                      {"hamiltonian", {{"potential", {{"kind", "harmonic"}, {"omega", 1.0}}}}},
                      {"grid", {{"extent", 20.0}, {"points", 128}}},
                      {"numerics", {{"dt", 1e-3}, {"t_end", 0.5}}},
                      {"initial", {{"kind", "coherent"}, {"center", {1.0}}, {"momentum", {0.3}}}},
                      {"checks", {"ehrenfest", "cwe_qt_toggle"}}};
    const Scenario s = parse_scenario(doc);
    const RunReport a = run_scenario(s);
    const RunReport b = run_scenario(s);
    CHECK(check_named(a, "ehrenfest").pass);
    CHECK(check_named(a, "cwe_qt_toggle").pass);
    CHECK(a.pass);
    REQUIRE(a.series.size() == b.series.size());
    for (std::size_t i = 0; i < a.series.size(); ++i) CHECK(to_csv(a.series[i]) == to_csv(b.series[i]));
    CHECK(a.doc.dump() == b.doc.dump());

    const auto dir = std::filesystem::temp_directory_path() / "qlab_test_report";
    std::filesystem::remove_all(dir);
    write_report(a, dir);
    std::ifstream in(dir / "report.json");
    const json back = json::parse(in);
    CHECK(back["schema_version"] == kReportSchemaVersion);
    CHECK(back["checks"].size() == 2);
    std::ifstream csv(dir / "qt_expectations.csv");
    std::stringstream text;
    text << csv.rdbuf();
    CHECK(text.str() == to_csv(a.series.front()));
    std::filesystem::remove_all(dir);
}

TEST_CASE("free focusing field reports the caustic at t = 1") {
    const Scenario s = load_scenario(std::filesystem::path(QLAB_SCENARIO_DIR) / "burgers_focusing_qa.json");
    const RunReport r = run_scenario(s);
    REQUIRE(!r.doc["caustic"]["t_star"].is_null());
    CHECK(std::abs(r.doc["caustic"]["t_star"].get<double>() - 1.0) < 0.01);
    CHECK(r.doc["caustic"]["multivalued"] == true);
    CHECK(r.doc["tiers"]["QA"]["status"] == "caustic");
    CHECK(r.doc["tiers"]["QA"]["valid_until"].get<double>() < 1.0);
    CHECK(check_named(r, "caustic_time").pass);
}

TEST_CASE("a wrong expectation fails the check without throwing") {
    json doc = {{"name", "focus"},
                {"tiers", {"QA"}},
                {"grid", {{"extent", 8.0}, {"points", 128}}},
                {"numerics", {{"t_end", 1.5}}},
                {"initial", {{"kind", "linear_momentum"}, {"slope", -1.0}}},
                {"checks", {{{"name", "caustic_time"}, {"expected", 1.2}}}}};
    const RunReport r = run_scenario(parse_scenario(doc));
    CHECK_FALSE(r.pass);
    CHECK(r.doc["verdict"] == "fail");
}
