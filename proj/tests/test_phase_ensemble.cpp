#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qlab/phase_ensemble.hpp"

using namespace qlab;
using std::numbers::pi;

namespace {

const Hamiltonian kFree(1, 1.0, potential::Free{});
const Hamiltonian kOsc(1, 1.0, potential::Harmonic{1.0});

double max_abs_diff(const RealField& a, const RealField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Composite Simpson rule on [a, b] with n (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("integrate_characteristic examples") {
    const PhaseState free = integrate_characteristic(kFree, {{0.0, 0.0}, {1.0, 0.0}, 0.0}, 2.0, 1e-3);
    CHECK(std::abs(free.q[0] - 2.0) < 1e-12);
    CHECK(std::abs(free.p[0] - 1.0) < 1e-12);
    CHECK(free.t == doctest::Approx(2.0));

    for (auto method : {Integrator::rk4, Integrator::stormer_verlet}) {
        const double dt = method == Integrator::rk4 ? 1e-3 : 1e-5;
        const PhaseState quarter = integrate_characteristic(kOsc, {{1.0, 0.0}, {0.0, 0.0}, 0.0}, pi / 2, dt, method);
        CHECK(std::abs(quarter.q[0]) < 1e-8);
        CHECK(std::abs(quarter.p[0] + 1.0) < 1e-8);
        const PhaseState period = integrate_characteristic(kOsc, {{1.0, 0.0}, {0.0, 0.0}, 0.0}, 2 * pi, dt, method);
        CHECK(std::abs(period.q[0] - 1.0) < 1e-8);
        CHECK(std::abs(period.p[0]) < 1e-8);
    }
}

TEST_CASE("backward integration inverts forward integration") {
    const Hamiltonian quartic(1, 1.0, potential::Quartic{1.0});
    const PhaseState a = integrate_characteristic(quartic, {{0.3, 0.0}, {0.7, 0.0}, 0.0}, 1.7, 1e-3);
    const PhaseState b = integrate_characteristic(quartic, a, -1.7, 1e-3);
    CHECK(std::abs(b.q[0] - 0.3) < 1e-11);
    CHECK(std::abs(b.p[0] - 0.7) < 1e-11);
}

TEST_CASE("Liouville evolution of a free Gaussian shears its centre") {
    const PhaseGrid grid(16.0, 128, 16.0, 128);
    const PhaseDensity rho0 = phase_gaussian(grid, 0.0, 1.0, 0.5, 0.5);
    const PhaseDensity rho = evolve_liouville(kFree, rho0, 2.0, {0.05});
    CHECK(std::abs(expectation(rho, grid.sample([](double q, double) { return q; })) - 2.0) < 1e-6);
    CHECK(std::abs(expectation(rho, grid.sample([](double, double p) { return p; })) - 1.0) < 1e-6);
    CHECK(std::abs(expectation(rho, RealField(grid.size(), 1.0)) - 1.0) < 1e-6);
}

TEST_CASE("rotation-invariant Gaussian is stationary under the harmonic flow") {
    const PhaseGrid grid(16.0, 256, 16.0, 256);
    const PhaseDensity rho0 = phase_gaussian(grid, 0.0, 0.0, 1.0, 1.0);
    for (double t : {0.7, 2.0}) {
        const PhaseDensity rho = evolve_liouville(kOsc, rho0, t, {1e-2});
        CHECK(max_abs_diff(rho.values, rho0.values) < 1e-6);
    }
    const PhaseDensity same = evolve_liouville(kOsc, rho0, 0.0);
    CHECK(same.values == rho0.values);
}

TEST_CASE("Liouville normalization and positivity for an off-centre packet") {
    const PhaseGrid grid(16.0, 128, 16.0, 128);
    const PhaseDensity rho0 = phase_gaussian(grid, 1.5, -0.5, 0.6, 0.4);
    for (double t : {0.5, 1.3, 3.0}) {
        const PhaseDensity rho = evolve_liouville(kOsc, rho0, t, {1e-2});
        CHECK(std::abs(expectation(rho, RealField(grid.size(), 1.0)) - 1.0) < 1e-6);
        double lo = 0.0;
        for (double v : rho.values) lo = std::min(lo, v);
        CHECK(lo >= -1e-10);
    }
}

TEST_CASE("expectation examples") {
    const PhaseGrid grid(16.0, 256, 16.0, 256);
    const double sigma = 0.1;
    const PhaseDensity narrow = phase_gaussian(grid, 1.0, 2.0, sigma, sigma);
    CHECK(std::abs(expectation(narrow, grid.sample([](double q, double) { return q; })) - 1.0) < sigma * sigma);
    CHECK(std::abs(expectation(narrow, RealField(grid.size(), 1.0)) - 1.0) < 1e-10);
}

TEST_CASE("grid expectations agree with Monte Carlo over characteristics") {
    const PhaseGrid grid(24.0, 256, 16.0, 128);
    struct Case {
        const Hamiltonian* h;
        double t;
    };
    for (const Case c : {Case{&kFree, 2.0}, Case{&kOsc, 1.0}}) {
        const PhaseDensity rho = evolve_liouville(*c.h, phase_gaussian(grid, 0.0, 1.0, 0.5, 0.5), c.t, {1e-2});
        const auto mc = monte_carlo_moments(*c.h, 0.0, 1.0, 0.5, 0.5, c.t, 1'000'000, 2024, {0.05});
        const double q = expectation(rho, grid.sample([](double x, double) { return x; }));
        const double p = expectation(rho, grid.sample([](double, double y) { return y; }));
        const double e = expectation(rho, grid.sample([&](double x, double y) { return c.h->energy({x, 0}, {y, 0}); }));
        CHECK(std::abs(q - mc.mean_q) < 3 * mc.se_q);
        CHECK(std::abs(p - mc.mean_p) < 3 * mc.se_p);
        CHECK(std::abs(e - mc.mean_h) < 3 * mc.se_h);
    }
}

TEST_CASE("phase action examples") {
    const PhaseFunction zero = [](double, double) { return 0.0; };
    CHECK(std::abs(phase_action_at(kFree, zero, 2.0, 1.0, 2.0) - 1.0) < 1e-8);

    const PhaseFunction poly = [](double q, double p) { return q * p + 0.5 * q * q; };
    CHECK(phase_action_at(kOsc, poly, 0.4, -0.2, 0.0) == poly(0.4, -0.2));

    // Oracle: Simpson quadrature of the closed-form Lagrangian along (cos t, -sin t).
    const double oracle =
        simpson([](double t) { return 0.5 * std::sin(t) * std::sin(t) - 0.5 * std::cos(t) * std::cos(t); }, 0.0, 2 * pi, 20000);
    const PhaseState end = integrate_characteristic(kOsc, {{1.0, 0.0}, {0.0, 0.0}, 0.0}, 2 * pi, 1e-3);
    const double s = phase_action_at(kOsc, zero, end.q[0], end.p[0], 2 * pi);
    CHECK(std::abs(s - oracle) < 1e-6);
    CHECK(std::abs(s) < 1e-6);

    // Quarter period of the oscillator: integral of -cos(2t)/2 over [0, pi/2] is 0, over [0, pi/4] is -1/4.
    const PhaseState eighth = integrate_characteristic(kOsc, {{1.0, 0.0}, {0.0, 0.0}, 0.0}, pi / 4, 1e-3);
    CHECK(std::abs(phase_action_at(kOsc, zero, eighth.q[0], eighth.p[0], pi / 4) + 0.25) < 1e-8);
}

TEST_CASE("phase action is independent of the density and transports S0") {
    const PhaseGrid grid(16.0, 64, 16.0, 64);
    const PhaseFunction s0 = [](double q, double p) { return 0.3 * q - 0.1 * p * q; };
    const PhaseAction a = evolve_phase_action(kOsc, grid, s0, 0.8, {1e-2, Integrator::rk4, Exec::serial});
    const PhaseAction b = evolve_phase_action(kOsc, grid, s0, 0.8, {1e-2, Integrator::rk4, Exec::parallel});
    CHECK(a.values == b.values);
    const PhaseAction identity = evolve_phase_action(kOsc, grid, s0, 0.0);
    CHECK(identity.values == grid.sample(s0));

    // Different densities, identical phases wherever both are resolved.
    const PhaseDensity r1 = phase_gaussian(grid, 0.0, 0.0, 1.0, 1.0);
    const PhaseDensity r2 = phase_gaussian(grid, 1.0, 0.5, 0.7, 1.2);
    const auto w1 = evolve_phase_wavefunction(kOsc, r1, s0, 0.8, 1.0, {1e-2});
    const auto w2 = evolve_phase_wavefunction(kOsc, r2, s0, 0.8, 1.0, {1e-2});
    double worst = 0.0;
    for (std::size_t i = 0; i < w1.values.size(); ++i)
        if (std::abs(w1.values[i]) > 1e-3 && std::abs(w2.values[i]) > 1e-3)
            worst = std::max(worst, std::abs(std::arg(w1.values[i] * std::conj(w2.values[i]))));
    CHECK(worst < 1e-12);
}

TEST_CASE("phase-space wave function") {
    const PhaseGrid grid(16.0, 128, 16.0, 128);
    const PhaseDensity rho0 = phase_gaussian(grid, 0.0, 1.0, 1.0, 1.0);
    const PhaseFunction zero = [](double, double) { return 0.0; };
    const auto psi = evolve_phase_wavefunction(kFree, rho0, zero, 2.0, 1.0, {1e-2});
    const PhaseDensity rho = evolve_liouville(kFree, rho0, 2.0, {1e-2});
    for (std::size_t i = 0; i < psi.values.size(); ++i) CHECK(std::norm(psi.values[i]) == doctest::Approx(rho.values[i]));

    const std::size_t node = grid.plane().index(80, 72);  // (q, p) = (2, 1)
    CHECK(grid.q(node) == doctest::Approx(2.0));
    CHECK(grid.p(node) == doctest::Approx(1.0));
    CHECK(std::abs(std::arg(psi.values[node]) - 1.0) < 1e-6);

    const auto psi0 = evolve_phase_wavefunction(kFree, rho0, zero, 0.0, 1.0);
    for (std::size_t i = 0; i < psi0.values.size(); ++i) CHECK(psi0.values[i] == std::complex<double>(std::sqrt(rho0.values[i]), 0.0));
}

TEST_CASE("serial and parallel Liouville kernels are bit-identical") {
    const PhaseGrid grid(16.0, 64, 16.0, 64);
    const PhaseDensity rho0 = phase_gaussian(grid, 0.5, 0.0, 0.7, 0.7);
    const auto a = evolve_liouville(kOsc, rho0, 1.1, {1e-2, Integrator::rk4, Exec::serial});
    const auto b = evolve_liouville(kOsc, rho0, 1.1, {1e-2, Integrator::rk4, Exec::parallel});
    CHECK(a.values == b.values);
}
