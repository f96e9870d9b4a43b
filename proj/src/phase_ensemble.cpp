#include "qlab/phase_ensemble.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "qlab/error.hpp"
#include "qlab/interp.hpp"

namespace qlab {

namespace {

void require_1d(const Hamiltonian& h) {
    if (h.dim() != 1) throw ConfigError("phase-space ensembles are implemented for one-dimensional systems");
}

// Backward characteristic from (q, p): the initial point and the Lagrangian integral
// accumulated forward in time along the trajectory ending there.
CharacteristicState trace_back(const Hamiltonian& h, double q, double p, double t, const CharacteristicOptions& opts) {
    CharacteristicState s;
    s.q = {q, 0.0};
    s.p = {p, 0.0};
    advance_characteristic(h, s, -t, opts.dt, opts.method);
    return s;
}

}  // namespace

PhaseState integrate_characteristic(const Hamiltonian& h, const PhaseState& state0, double t, double dt,
                                    Integrator method) {
    if (!(dt > 0.0)) throw ConfigError("integration step must be positive");
    if (!finite(state0.q) || !finite(state0.p)) throw NumericalBlowup("initial phase state is not finite");
    CharacteristicState s;
    s.q = state0.q;
    s.p = state0.p;
    advance_characteristic(h, s, t, dt, method);
    return {s.q, s.p, state0.t + t};
}

PhaseDensity evolve_liouville(const Hamiltonian& h, const PhaseDensity& rho0, double t,
                              const CharacteristicOptions& opts) {
    require_1d(h);
    if (t == 0.0) return {rho0.grid, rho0.values, rho0.time};
    const HermiteTable<double> table(rho0.grid.plane(), rho0.values, Outside::zero);
    const PhaseGrid& grid = rho0.grid;
    RealField out(grid.size());
    for_each_index(opts.exec, grid.size(), [&](std::size_t i) {
        const CharacteristicState s = trace_back(h, grid.q(i), grid.p(i), t, opts);
        out[i] = table.value({s.q[0], s.p[0]});
    });
    return {grid, std::move(out), rho0.time + t};
}

double expectation(const PhaseDensity& rho, const RealField& observable) {
    if (observable.size() != rho.values.size()) throw ConfigError("observable shape does not match density");
    RealField prod(observable.size());
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = rho.values[i] * observable[i];
    return quadrature(rho.grid.plane(), prod);
}

double phase_action_at(const Hamiltonian& h, const PhaseFunction& s0, double q, double p, double t,
                       const CharacteristicOptions& opts) {
    require_1d(h);
    if (t == 0.0) return s0(q, p);
    const CharacteristicState s = trace_back(h, q, p, t, opts);
    // Backward integration accumulates -(integral of L from 0 to t).
    return s0(s.q[0], s.p[0]) - s.action;
}

PhaseAction evolve_phase_action(const Hamiltonian& h, const PhaseGrid& grid, const PhaseFunction& s0, double t,
                                const CharacteristicOptions& opts) {
    require_1d(h);
    RealField out(grid.size());
    for_each_index(opts.exec, grid.size(),
                   [&](std::size_t i) { out[i] = phase_action_at(h, s0, grid.q(i), grid.p(i), t, opts); });
    return {grid, std::move(out), t};
}

PhaseAction evolve_phase_action(const Hamiltonian& h, const PhaseAction& s0, double t,
                                const CharacteristicOptions& opts) {
    if (t == 0.0) return s0;
    const HermiteTable<double> table(s0.grid.plane(), s0.values, Outside::periodic);
    auto fn = [&table](double q, double p) { return table.value({q, p}); };
    PhaseAction out = evolve_phase_action(h, s0.grid, fn, t, opts);
    out.time = s0.time + t;
    return out;
}

PhaseWaveFunction evolve_phase_wavefunction(const Hamiltonian& h, const PhaseDensity& rho0, const PhaseFunction& s0,
                                            double t, double hbar, const CharacteristicOptions& opts) {
    if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
    const PhaseDensity rho = evolve_liouville(h, rho0, t, opts);
    const PhaseAction action = evolve_phase_action(h, rho0.grid, s0, t, opts);
    ComplexField psi(rho.values.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
        psi[i] = std::polar(std::sqrt(std::max(rho.values[i], 0.0)), action.values[i] / hbar);
    return {rho0.grid, std::move(psi), rho0.time + t};
}

PhaseDensity phase_gaussian(const PhaseGrid& grid, double q0, double p0, double sigma_q, double sigma_p) {
    if (!(sigma_q > 0.0 && sigma_p > 0.0)) throw ConfigError("Gaussian widths must be positive");
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma_q * sigma_p);
    RealField values = grid.sample([&](double q, double p) {
        const double a = (q - q0) / sigma_q, b = (p - p0) / sigma_p;
        return norm * std::exp(-0.5 * (a * a + b * b));
    });
    return {grid, std::move(values), 0.0};
}

MonteCarloMoments monte_carlo_moments(const Hamiltonian& h, double q0, double p0, double sigma_q, double sigma_p,
                                      double t, std::size_t samples, std::uint64_t seed,
                                      const CharacteristicOptions& opts) {
    require_1d(h);
    if (samples < 2) throw ConfigError("Monte Carlo needs at least two samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> qs(samples), ps(samples), hs(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        qs[i] = q0 + sigma_q * normal(rng);
        ps[i] = p0 + sigma_p * normal(rng);
    }
    for_each_index(opts.exec, samples, [&](std::size_t i) {
        const PhaseState s = integrate_characteristic(h, {{qs[i], 0.0}, {ps[i], 0.0}, 0.0}, t, opts.dt, opts.method);
        qs[i] = s.q[0];
        ps[i] = s.p[0];
        hs[i] = h.energy(s.q, s.p);
    });
    auto stats = [samples](const std::vector<double>& v, double& mean, double& se) {
        double sum = 0.0;
        for (double x : v) sum += x;
        mean = sum / static_cast<double>(samples);
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<double>(samples - 1);
        se = std::sqrt(var / static_cast<double>(samples));
    };
    MonteCarloMoments m;
    m.samples = samples;
    stats(qs, m.mean_q, m.se_q);
    stats(ps, m.mean_p, m.se_p);
    stats(hs, m.mean_h, m.se_h);
    return m;
}

}  // namespace qlab
