#pragma once

#include <complex>
#include <cstdint>
#include <functional>

#include "qlab/characteristics.hpp"
#include "qlab/grid.hpp"
#include "qlab/hamiltonian.hpp"
#include "qlab/parallel.hpp"

namespace qlab {

// Phase space of a one-dimensional system, stored as a 2D lattice with axis 0 = q and axis 1 = p.
class PhaseGrid {
public:
    PhaseGrid(double q_extent, std::size_t q_points, double p_extent, std::size_t p_points)
        : plane_(2, {q_extent, p_extent}, {q_points, p_points}) {}

    const Grid& plane() const { return plane_; }
    Grid q_grid() const { return Grid::line(plane_.extent(0), plane_.points(0)); }
    Grid p_grid() const { return Grid::line(plane_.extent(1), plane_.points(1)); }
    double q(std::size_t flat) const { return plane_.point(flat)[0]; }
    double p(std::size_t flat) const { return plane_.point(flat)[1]; }
    std::size_t size() const { return plane_.size(); }

    template <typename F>
    RealField sample(F&& f) const {
        RealField out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(q(i), p(i));
        return out;
    }

private:
    Grid plane_;
};

struct PhaseState {
    Vec q{};
    Vec p{};
    double t = 0.0;
};

struct PhaseDensity {
    PhaseGrid grid;
    RealField values;
    double time = 0.0;
};

struct PhaseAction {
    PhaseGrid grid;
    RealField values;
    double time = 0.0;
};

// Closed-form initial phase-space field, e.g. a polynomial action S0(q, p).
using PhaseFunction = std::function<double(double q, double p)>;

struct CharacteristicOptions {
    double dt = 1e-3;
    Integrator method = Integrator::rk4;
    Exec exec = Exec::parallel;
};

// Canonical trajectory from state0 over a time span t (negative t runs backward).
PhaseState integrate_characteristic(const Hamiltonian& h, const PhaseState& state0, double t, double dt,
                                    Integrator method = Integrator::rk4);

// rho(x, t) = rho0(flow_{-t}(x)) with bicubic Hermite interpolation of rho0; points whose
// backward characteristic leaves the phase grid receive 0.
PhaseDensity evolve_liouville(const Hamiltonian& h, const PhaseDensity& rho0, double t,
                              const CharacteristicOptions& opts = {});

double expectation(const PhaseDensity& rho, const RealField& observable);

// S(x, t) = S0(flow_{-t}(x)) + integral of the Lagrangian along the characteristic through x.
double phase_action_at(const Hamiltonian& h, const PhaseFunction& s0, double q, double p, double t,
                       const CharacteristicOptions& opts = {});
PhaseAction evolve_phase_action(const Hamiltonian& h, const PhaseGrid& grid, const PhaseFunction& s0, double t,
                                const CharacteristicOptions& opts = {});
// Tabulated S0: interpolated with bicubic Hermite (periodic data assumed).
PhaseAction evolve_phase_action(const Hamiltonian& h, const PhaseAction& s0, double t,
                                const CharacteristicOptions& opts = {});

// sqrt(rho(t)) exp(i S(t) / hbar) on the phase grid.
struct PhaseWaveFunction {
    PhaseGrid grid;
    ComplexField values;
    double time = 0.0;
};
PhaseWaveFunction evolve_phase_wavefunction(const Hamiltonian& h, const PhaseDensity& rho0, const PhaseFunction& s0,
                                            double t, double hbar, const CharacteristicOptions& opts = {});

// Normalized Gaussian on the phase grid with means (q0, p0) and standard deviations.
PhaseDensity phase_gaussian(const PhaseGrid& grid, double q0, double p0, double sigma_q, double sigma_p);

// Forward Monte Carlo over characteristics sampled from an uncorrelated Gaussian
// ensemble: means and standard errors of q, p and H at time t.
struct MonteCarloMoments {
    double mean_q = 0.0, mean_p = 0.0, mean_h = 0.0;
    double se_q = 0.0, se_p = 0.0, se_h = 0.0;
    std::size_t samples = 0;
};
MonteCarloMoments monte_carlo_moments(const Hamiltonian& h, double q0, double p0, double sigma_q, double sigma_p,
                                      double t, std::size_t samples, std::uint64_t seed,
                                      const CharacteristicOptions& opts = {});

}  // namespace qlab
