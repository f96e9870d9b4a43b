#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlab/scenario.hpp"

namespace qlab {

struct CheckQuantity {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CheckResult {
    std::string name;
    // Module operations whose outputs are compared.
    std::string source;
    std::vector<CheckQuantity> quantities;
    bool pass = false;
    std::string note;
};

// A CSV table; cells are pre-formatted so the files are byte-stable.
struct SeriesTable {
    std::string file;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct RunReport {
    nlohmann::json doc;
    std::vector<CheckResult> checks;
    std::vector<SeriesTable> series;
    bool pass = true;
};

// Runs the requested tiers in the order PM, QA, QT, CWE, then the checks. Tier failures such
// as a caustic or a blowup are recorded in the report; checks that depend on a failed tier
// fail. Invalid input throws ConfigError.
RunReport run_scenario(const Scenario& s);

std::string format_number(double v);
std::string to_csv(const SeriesTable& t);
// Writes report.json and one CSV per series into dir (created when missing).
void write_report(const RunReport& r, const std::filesystem::path& dir);

}  // namespace qlab
