#pragma once

#include <array>
#include <functional>
#include <optional>

#include "qlab/grid.hpp"
#include "qlab/hamiltonian.hpp"
#include "qlab/projection_qa.hpp"

namespace qlab {

struct WaveFunction {
    Grid grid;
    ComplexField psi;
    double time = 0.0;
    double hbar = 1.0;
};

double norm(const WaveFunction& wf);
void normalize(WaveFunction& wf);
RealField density_of(const WaveFunction& wf);

// rho = |psi|^2 and S = hbar * unwrapped phase. S is uncovered where rho < floor * max(rho).
struct MadelungPair {
    ConfigDensity rho;
    ConfigAction S;
};

// Nodes with rho >= floor * max(rho).
Mask density_mask(const RealField& rho, double floor);

// Phase unwrapping runs along axis 0 in 1D; in 2D along each row (axis 1), then rows are
// stitched through their first covered node. The winding across the periodic seam is
// recorded per axis along the central line.
MadelungPair madelung_decompose(const WaveFunction& wf, double floor = 1e-12);
// Uncovered nodes take the phase 0.
WaveFunction madelung_compose(const MadelungPair& pair, double hbar);

// T_Q = (hbar^2 / 2m) lap(sqrt rho) / sqrt rho, spectral, zero on the mask.
RealField quantum_potential(const ConfigDensity& rho, double hbar, double mass, double floor = 1e-12);

// dS/dt centred from psi(t - dt) and psi(t + dt) through the wrapped phase increment.
RealField phase_rate(const WaveFunction& before, const WaveFunction& after);
// grad S = hbar Im(conj(psi) grad psi) / rho, spectral; zero on the mask.
std::array<RealField, 2> phase_gradient(const WaveFunction& wf, double floor = 1e-12);

// max |dS/dt + H(q, grad S) - tq_weight * T_Q| over the mask of the central state.
// tq_weight = 1 gives the modified Hamilton-Jacobi equation, 0 the classical one.
double modified_hj_residual(const Hamiltonian& h, const WaveFunction& before, const WaveFunction& now,
                            const WaveFunction& after, double tq_weight = 1.0, double floor = 1e-12);

struct QtExpectations {
    Vec q{};
    Vec p{};          // spectral momentum
    Vec p_current{};  // quadrature of rho grad S, via the probability current
    Vec force{};
    Vec width{};      // standard deviation of q per axis
    double energy = 0.0;
};
QtExpectations qt_expectations(const Hamiltonian& h, const WaveFunction& wf);

// Strang split step: half kick in V (plus the optional T_Q term), exact kinetic drift in
// Fourier space, half kick. The T_Q kick uses rho of the state it acts on. With the T_Q term
// on, the drift also drops wavenumbers above two thirds of the grid cutoff.
class SplitStep {
public:
    SplitStep(const Hamiltonian& h, const Grid& grid, double hbar, double dt, double nonlinear = 0.0,
              double density_floor = 1e-12);

    void step(ComplexField& psi) const;
    double dt() const { return dt_; }
    // max |T_Q| seen in the last nonlinear kick.
    double last_quantum_potential() const { return last_tq_; }
    // Throws SingularAmplitude when the amplitude vanishes inside the support.
    RealField quantum_kick_potential(const ComplexField& psi) const;

private:
    void kick(ComplexField& psi) const;

    const Hamiltonian* h_;
    Grid grid_;
    double hbar_, dt_, nonlinear_, floor_;
    ComplexField half_kick_;
    ComplexField drift_;
    RealField filter_;
    mutable double last_tq_ = 0.0;
};

// Called with the initial state and after every step.
using StepObserver = std::function<void(const WaveFunction&)>;

struct QtOptions {
    double dt = 1e-3;
};

WaveFunction evolve_schrodinger(const Hamiltonian& h, const WaveFunction& psi0, double t, const QtOptions& opts = {},
                                const StepObserver& observe = {});

struct ClassicalWaveOptions {
    double dt = 1e-3;
    double coefficient = 1.0;
    double density_floor = 1e-12;
    // Abort when max |T_Q| exceeds this factor times the initial scale.
    double blowup_factor = 1e6;
};

struct ClassicalWaveRun {
    WaveFunction psi;  // last state before any blowup
    bool blowup = false;
    std::optional<double> blowup_time;
    double initial_scale = 0.0;
    double max_quantum_potential = 0.0;
    // Split steps per requested step, fixed for the run by the cutoff wavenumber.
    int inner_steps = 1;
};

// i hbar dpsi/dt = (H + c T_Q) psi. With c = 0 this is the Schroedinger path, step for step.
ClassicalWaveRun evolve_classical_wave(const Hamiltonian& h, const WaveFunction& psi0, double t,
                                       const ClassicalWaveOptions& opts = {}, const StepObserver& observe = {});

// Initial-state catalog. All states are normalized on the grid.
WaveFunction gaussian_packet(const Grid& grid, const Vec& center, double sigma, const Vec& momentum, double hbar = 1.0);
WaveFunction coherent_state(const Grid& grid, const Vec& q0, const Vec& p0, double mass, double omega,
                            double hbar = 1.0);
WaveFunction eigenstate_n(const Grid& grid, std::array<int, 2> n, double mass, double omega, double hbar = 1.0);
// exp(i p.q / hbar); p must fit the periodic box.
WaveFunction plane_wave(const Grid& grid, const Vec& momentum, double hbar = 1.0);
// (q1 + i q2)^charge exp(-|q - c|^2 / 2 sigma^2), conjugated for negative charge.
WaveFunction vortex_2d(const Grid& grid, int charge, const Vec& center, double sigma, double hbar = 1.0);

}  // namespace qlab
