#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qlab/characteristics.hpp"
#include "qlab/covered_field.hpp"
#include "qlab/grid.hpp"
#include "qlab/hamiltonian.hpp"
#include "qlab/parallel.hpp"

namespace qlab {

// M_k(q, t) on a configuration grid. Nodes not reached by any characteristic are uncovered.
struct MomentumField {
    Grid grid;
    std::array<RealField, 2> components;
    Mask covered;
    double time = 0.0;
};

// S(q, t); single-valued up to integer multiples of 2 pi hbar across the periodic seam per axis.
struct ConfigAction {
    Grid grid;
    RealField values;
    Mask covered;
    double time = 0.0;
    std::array<long, 2> winding{0, 0};
};

struct ConfigDensity {
    Grid grid;
    RealField values;
    double time = 0.0;
};

struct CausticReport {
    std::optional<double> t_star;
    Vec location{};
    double min_jacobian = 1.0;  // minimum of det dq/dq0 over seeds and sampled times
    std::vector<std::pair<double, double>> jacobian_history;  // (t, min det) per step
};

// Closed-form or tabulated initial data. Gradients / Jacobians are needed to seed the
// tangent map d(q, p)/dq0 of the characteristics.
struct InitialMomentum {
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;
};

struct InitialAction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;

    InitialMomentum momentum() const { return {gradient, hessian}; }
};

using InitialDensity = std::function<double(const Vec&)>;

// M0 = b + A q
InitialMomentum linear_momentum(const Vec& offset, const Mat& slope);
// S0 = c + b.q + q.A q / 2 (A symmetric)
InitialAction quadratic_action(double constant, const Vec& linear, const Mat& quadratic);
// Periodic samples interpolated with cubic Hermite.
InitialAction tabulated_action(const Grid& grid, const RealField& values);
// Normalized isotropic Gaussian density.
InitialDensity gaussian_density(int dim, const Vec& center, double sigma);
InitialDensity tabulated_density(const ConfigDensity& rho);

struct QaOptions {
    double dt = 1e-3;
    // Seeds per grid spacing and axis; 0 selects 4 in 1D and 2 in 2D (4x seeds per cell).
    int oversampling = 0;
    double caustic_threshold = 1e-3;
    // Eulerian rebuild every this many steps (the final state is always rebuilt).
    int snapshot_every = 1;
    Integrator method = Integrator::rk4;
    Exec exec = Exec::parallel;
};

struct QaSnapshot {
    double time = 0.0;
    MomentumField momentum;
    std::optional<ConfigAction> action;
    std::optional<ConfigDensity> density;
};

// Output of a characteristics-based QA run: Eulerian snapshots up to the last valid time.
struct QaSolution {
    Grid grid;
    std::vector<QaSnapshot> snapshots;
    CausticReport caustic;
    bool multivalued = false;  // requested end time was at or beyond the caustic
    double requested_time = 0.0;

    const QaSnapshot& final() const { return snapshots.back(); }
    double valid_until() const { return snapshots.back().time; }
    double snapshot_interval() const;
};

// h(q, t) = H(q, M(q, t)) on covered nodes.
RealField restrict_h(const Hamiltonian& h, const MomentumField& m);

QaSolution evolve_canonical_condition(const Hamiltonian& h, const Grid& grid, const InitialMomentum& m0, double t,
                                      const QaOptions& opts = {});

QaSolution evolve_hj_continuity(const Hamiltonian& h, const Grid& grid, const InitialAction& s0,
                                const InitialDensity& rho0, double t, const QaOptions& opts = {});

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> q;
    std::vector<Vec> p;
    std::vector<double> projected_action;  // s(t) along the path
};

// Integrates dq/dt = M(q, t) / m with RK4 on the interpolated snapshots and attaches
// p = M(q(t), t). Throws TrajectoryUndefined when t reaches the caustic or leaves the
// evolved time span, AdvectionError when the path leaves the covered region.
Trajectory extract_trajectory(const Hamiltonian& h, const QaSolution& sol, const Vec& q0, double t, double s0 = 0.0);

// s(t) = s0 + integral of (M.v - h) along the extracted path.
std::vector<double> projected_action(const Hamiltonian& h, const QaSolution& sol, const Vec& q0, double t,
                                     double s0 = 0.0);

// Interpolated snapshot fields at (q, t); nullopt when uncovered.
std::optional<Vec> momentum_at(const QaSolution& sol, const Vec& q, double t);
std::optional<double> action_at(const QaSolution& sol, const Vec& q, double t);

enum class Differencing { spectral, finite_difference };

// Omega_12 = dM_2/dq_1 - dM_1/dq_2; empty for dim 1. Spectral differencing assumes periodic
// components; finite differencing marks nodes without a full stencil as NaN.
RealField vorticity(const MomentumField& m, Differencing method = Differencing::spectral);

// max over trajectory samples of |(s - S)(t) - (s - S)(0)| with S read from the
// action snapshots of sol.
double consistency_s_minus_S(const QaSolution& sol, const Trajectory& traj, const std::vector<double>& s);

// Gradient of a rebuilt action by fourth-order finite differences on covered nodes.
MomentumField action_gradient(const ConfigAction& s);

// Max-norm residual of (d_t + v.grad + div(v)/2) sqrt(rho) at snapshot index k (needs
// neighbours k - 1 and k + 1), over nodes with rho above floor * max(rho).
double half_density_residual(const Hamiltonian& h, const QaSolution& sol, std::size_t k, double floor = 1e-8);

}  // namespace qlab
