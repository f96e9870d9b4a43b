#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlab/grid.hpp"
#include "qlab/hamiltonian.hpp"
#include "qlab/vec.hpp"

namespace qlab {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

enum class Tier { PM, QA, QT, CWE };

std::string tier_name(Tier t);

struct PotentialSpec {
    std::string kind = "free";  // free | harmonic | quartic | double_well
    double omega = 1.0;
    double lambda = 0.0;
    double a = 0.0;
    double b = 1.0;
};

// Initial-state catalog entry. Which fields matter depends on kind:
//   gaussian         center, sigma, momentum, curvature, sigma_p (PM only)
//   coherent         center, momentum; width from the harmonic frequency
//   eigenstate       n (harmonic potential)
//   vortex           center, sigma, charge (dim 2)
//   plane_wave       momentum
//   linear_momentum  offset (momentum), slope
struct InitialSpec {
    std::string kind = "gaussian";
    Vec center{};
    Vec momentum{};
    double sigma = 1.0;
    double sigma_p = 0.0;  // 0 selects hbar / (2 sigma)
    double curvature = 0.0;
    std::array<int, 2> n{0, 0};
    int charge = 1;
    Mat slope{};
};

struct PhaseGridSpec {
    double q_extent = 0.0;  // 0 selects the configuration extent
    std::size_t q_points = 256;
    double p_extent = 16.0;
    std::size_t p_points = 128;
};

struct ContourSpec {
    Vec center{};
    double radius = 1.0;
    std::size_t points = 256;
};

struct CheckRequest {
    std::string name;
    std::optional<double> expected;
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<Tier> tiers;
    int dim = 1;
    double mass = 1.0;
    PotentialSpec potential;
    double extent = 20.0;
    std::size_t points = 256;
    PhaseGridSpec phase_grid;
    NumericsConfig numerics;
    InitialSpec initial;
    int output_every = 0;  // steps between series rows; 0 gives about 100 rows
    ContourSpec contour;
    std::vector<CheckRequest> checks;

    bool has(Tier t) const;
    Grid grid() const;
    Hamiltonian hamiltonian() const;
    // The full scenario with defaults filled in.
    nlohmann::json echo() const;
};

const std::vector<std::string>& initial_catalog();
const std::vector<std::string>& potential_catalog();
const std::vector<std::string>& check_catalog();

// Throws ConfigError naming the offending key.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace qlab
