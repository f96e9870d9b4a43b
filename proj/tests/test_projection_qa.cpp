#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qlab/error.hpp"
#include "qlab/phase_ensemble.hpp"
#include "qlab/projection_qa.hpp"

using namespace qlab;
using std::numbers::pi;

namespace {

const Hamiltonian kFree(1, 1.0, potential::Free{});
const Hamiltonian kOsc(1, 1.0, potential::Harmonic{1.0});

template <typename F>
double max_err_covered(const Grid& g, const RealField& v, const Mask& covered, F&& exact) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (covered[i]) m = std::max(m, std::abs(v[i] - exact(g.point(i))));
    return m;
}

std::size_t count(const Mask& m) {
    std::size_t c = 0;
    for (auto v : m) c += v;
    return c;
}

}  // namespace

TEST_CASE("restrict_h examples") {
    const Grid g = Grid::line(8.0, 32);
    MomentumField m{g, {RealField(g.size(), 1.0), {}}, Mask(g.size(), 1), 0.0};
    for (double v : restrict_h(kFree, m)) CHECK(v == doctest::Approx(0.5));
    m.components[0].assign(g.size(), 0.0);
    const auto h = restrict_h(kOsc, m);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(h[i] == doctest::Approx(0.5 * g.point(i)[0] * g.point(i)[0]));
    for (std::size_t i = 0; i < g.size(); ++i) m.components[0][i] = -g.point(i)[0];
    const auto hf = restrict_h(kFree, m);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(hf[i] == doctest::Approx(0.5 * g.point(i)[0] * g.point(i)[0]));
}

TEST_CASE("canonical condition: focusing free flow") {
    const Grid g = Grid::line(8.0, 256);
    const QaSolution half = evolve_canonical_condition(kFree, g, linear_momentum({0, 0}, {-1, 0, 0, 0}), 0.5);
    CHECK_FALSE(half.multivalued);
    CHECK_FALSE(half.caustic.t_star.has_value());
    const auto& m = half.final().momentum;
    CHECK(count(m.covered) > g.size() / 3);
    CHECK(max_err_covered(g, m.components[0], m.covered, [](const Vec& q) { return -2.0 * q[0]; }) < 1e-6);

    const QaSolution full = evolve_canonical_condition(kFree, g, linear_momentum({0, 0}, {-1, 0, 0, 0}), 1.5);
    REQUIRE(full.caustic.t_star.has_value());
    CHECK(std::abs(*full.caustic.t_star - 1.0) < 0.01);
    CHECK(full.multivalued);
    CHECK(full.valid_until() < *full.caustic.t_star);
    CHECK(std::abs(full.caustic.location[0]) < 1e-2);
}

TEST_CASE("canonical condition: uniform field is invariant") {
    const Grid g = Grid::line(8.0, 128);
    const QaSolution sol = evolve_canonical_condition(kFree, g, linear_momentum({0.7, 0}, {0, 0, 0, 0}), 2.0, {1e-2});
    CHECK_FALSE(sol.caustic.t_star.has_value());
    const auto& m = sol.final().momentum;
    CHECK(max_err_covered(g, m.components[0], m.covered, [](const Vec&) { return 0.7; }) < 1e-12);
}

TEST_CASE("canonical condition: harmonic M0 = 0 gives -q tan t") {
    const Grid g = Grid::line(8.0, 256);
    const QaSolution sol = evolve_canonical_condition(kOsc, g, linear_momentum({0, 0}, {0, 0, 0, 0}), 1.2);
    CHECK_FALSE(sol.multivalued);
    for (std::size_t k : {std::size_t{300}, sol.snapshots.size() - 1}) {
        const auto& snap = sol.snapshots[k];
        const double t = snap.time;
        CHECK(max_err_covered(g, snap.momentum.components[0], snap.momentum.covered,
                              [t](const Vec& q) { return -q[0] * std::tan(t); }) < 1e-5);
    }
    const QaSolution past = evolve_canonical_condition(kOsc, g, linear_momentum({0, 0}, {0, 0, 0, 0}), 2.0);
    REQUIRE(past.caustic.t_star.has_value());
    CHECK(std::abs(*past.caustic.t_star - pi / 2) < 0.01);
}

TEST_CASE("Hamilton-Jacobi + continuity examples") {
    const Grid g = Grid::line(16.0, 256);
    SUBCASE("plane wave") {
        const auto s0 = quadratic_action(0.0, {1.0, 0.0}, {0, 0, 0, 0});
        const auto rho0 = gaussian_density(1, {-2.0, 0.0}, 0.8);
        const QaSolution sol = evolve_hj_continuity(kFree, g, s0, rho0, 2.0, {1e-2});
        const auto& snap = sol.final();
        CHECK(max_err_covered(g, snap.action->values, snap.action->covered, [](const Vec& q) { return q[0] - 1.0; }) < 1e-8);
        CHECK(max_err_covered(g, snap.density->values, snap.momentum.covered,
                              [&](const Vec& q) { return rho0({q[0] - 2.0, 0.0}); }) < 1e-6);
    }
    SUBCASE("focusing Gaussian") {
        const auto s0 = quadratic_action(0.0, {0.0, 0.0}, {-1, 0, 0, 0});
        const auto rho0 = gaussian_density(1, {0.0, 0.0}, 1.0);
        const QaSolution sol = evolve_hj_continuity(kFree, g, s0, rho0, 0.5);
        const auto& snap = sol.final();
        const double t = 0.5;
        CHECK(max_err_covered(g, snap.density->values, snap.momentum.covered,
                              [&](const Vec& q) { return rho0({q[0] / (1 - t), 0.0}) / (1 - t); }) < 1e-5);
        CHECK(max_err_covered(g, snap.action->values, snap.action->covered,
                              [&](const Vec& q) { return -q[0] * q[0] / (2 * (1 - t)); }) < 1e-8);
        // Continuity conservation along the run.
        for (std::size_t k = 0; k < sol.snapshots.size(); k += 100)
            CHECK(std::abs(quadrature(g, sol.snapshots[k].density->values) - 1.0) < 1e-6);
    }
}

TEST_CASE("Hamilton-Jacobi residual vanishes on the plane-wave ansatz") {
    // Substitution oracle: S = q - t/2 satisfies dS/dt + (dS/dq)^2 / 2 = 0 identically.
    auto S = [](double q, double t) { return q - t / 2; };
    const double h = 1e-4;
    for (double q : {-1.0, 0.3, 2.0}) {
        const double dSdt = (S(q, 1 + h) - S(q, 1 - h)) / (2 * h);
        const double dSdq = (S(q + h, 1) - S(q - h, 1)) / (2 * h);
        CHECK(std::abs(dSdt + 0.5 * dSdq * dSdq) < 1e-10);
    }
}

TEST_CASE("trajectory extraction examples") {
    const Grid g = Grid::line(8.0, 256);
    SUBCASE("uniform field") {
        const QaSolution sol = evolve_canonical_condition(kFree, g, linear_momentum({1.0, 0}, {0, 0, 0, 0}), 2.0);
        const Trajectory tr = extract_trajectory(kFree, sol, {0.0, 0.0}, 2.0);
        CHECK(std::abs(tr.q.back()[0] - 2.0) < 1e-12);
        CHECK(std::abs(tr.p.back()[0] - 1.0) < 1e-12);
        const auto s = projected_action(kFree, sol, {0.0, 0.0}, 2.0);
        CHECK(std::abs(s.back() - 1.0) < 1e-8);
        CHECK(projected_action(kFree, sol, {0.0, 0.0}, 0.0, 0.25).back() == 0.25);
    }
    SUBCASE("focusing field") {
        const QaSolution sol = evolve_canonical_condition(kFree, g, linear_momentum({0, 0}, {-1, 0, 0, 0}), 0.5);
        const Trajectory tr = extract_trajectory(kFree, sol, {1.0, 0.0}, 0.5);
        CHECK(std::abs(tr.q.back()[0] - 0.5) < 1e-6);
        CHECK(std::abs(tr.p.back()[0] + 1.0) < 1e-6);
    }
    SUBCASE("harmonic") {
        const QaSolution sol = evolve_canonical_condition(kOsc, g, linear_momentum({0, 0}, {0, 0, 0, 0}), pi / 4);
        const Trajectory tr = extract_trajectory(kOsc, sol, {1.0, 0.0}, pi / 4);
        const PhaseState ch = integrate_characteristic(kOsc, {{1.0, 0.0}, {0.0, 0.0}, 0.0}, pi / 4, 1e-3);
        CHECK(std::abs(tr.q.back()[0] - std::cos(pi / 4)) < 1e-5);
        CHECK(std::abs(tr.q.back()[0] - ch.q[0]) < 1e-5);
        // Taylor oracle: M v - h = -V(q0) at t = 0, so s = -t/2 + O(t^3).
        const double t = 0.05;
        const auto s = projected_action(kOsc, sol, {1.0, 0.0}, t);
        CHECK(std::abs(s.back() + t / 2) < t * t * t);
    }
}

TEST_CASE("trajectories are undefined at the caustic") {
    const Grid g = Grid::line(8.0, 128);
    const QaSolution sol = evolve_canonical_condition(kFree, g, linear_momentum({0, 0}, {-1, 0, 0, 0}), 1.2, {1e-2});
    REQUIRE(sol.caustic.t_star.has_value());
    CHECK_THROWS_AS(extract_trajectory(kFree, sol, {0.5, 0.0}, 1.1), TrajectoryUndefined);
    CHECK_NOTHROW(extract_trajectory(kFree, sol, {0.5, 0.0}, 0.9));
}

TEST_CASE("PM contains QA: extracted paths follow phase-space characteristics") {
    const Grid g = Grid::line(8.0, 256);
    struct Case {
        const Hamiltonian* h;
        double t_star;
    };
    for (const Case c : {Case{&kFree, 1.0}, Case{&kOsc, pi / 2}}) {
        const double t = 0.9 * c.t_star * 0.999;
        // The harmonic field steepens like sec^2 t near 0.9 t*, so it gets a finer step.
        const QaSolution sol = evolve_canonical_condition(*c.h, g, linear_momentum({0, 0}, {c.h == &kFree ? -1.0 : 0.0, 0, 0, 0}), t,
                                                          {c.h == &kFree ? 1e-3 : 2.5e-4});
        for (double q0 : {-1.5, -0.3, 0.8, 2.0}) {
            const Trajectory tr = extract_trajectory(*c.h, sol, {q0, 0.0}, t);
            for (std::size_t i = 0; i < tr.times.size(); i += 50) {
                const double p0 = c.h == &kFree ? -q0 : 0.0;
                const PhaseState ch = integrate_characteristic(*c.h, {{q0, 0.0}, {p0, 0.0}, 0.0}, tr.times[i], 1e-3);
                CHECK(std::abs(tr.q[i][0] - ch.q[0]) < 1e-6);
                CHECK(std::abs(tr.p[i][0] - ch.p[0]) < 1e-6);
            }
        }
    }
}

TEST_CASE("s - S is constant along trajectories") {
    const Grid g = Grid::line(8.0, 256);
    SUBCASE("plane wave") {
        const auto s0 = quadratic_action(0.0, {1.0, 0.0}, {0, 0, 0, 0});
        const QaSolution sol = evolve_hj_continuity(kFree, g, s0, gaussian_density(1, {0, 0}, 1.0), 2.0);
        const Trajectory tr = extract_trajectory(kFree, sol, {-1.0, 0.0}, 2.0, s0.value({-1.0, 0.0}));
        CHECK(consistency_s_minus_S(sol, tr, tr.projected_action) < 1e-8);
    }
    SUBCASE("harmonic, both routes for s") {
        const auto s0 = quadratic_action(0.0, {0.0, 0.0}, {0, 0, 0, 0});
        const double t = pi / 4 * 0.99;
        const QaSolution sol = evolve_hj_continuity(kOsc, g, s0, gaussian_density(1, {0, 0}, 1.0), t);
        const Trajectory tr = extract_trajectory(kOsc, sol, {1.0, 0.0}, t);
        CHECK(consistency_s_minus_S(sol, tr, tr.projected_action) < 1e-5);
        // Route through the phase-space action with S0(q, p) = S0(q): s = S (trivial solution).
        const PhaseFunction phase_s0 = [&](double q, double) { return s0.value({q, 0.0}); };
        std::vector<double> s_phase;
        for (std::size_t i = 0; i < tr.times.size(); ++i)
            s_phase.push_back(phase_action_at(kOsc, phase_s0, tr.q[i][0], tr.p[i][0], tr.times[i], {1e-3}));
        CHECK(consistency_s_minus_S(sol, tr, s_phase) < 1e-6);
    }
}

TEST_CASE("vorticity examples") {
    const Grid g = Grid::square(2 * pi, 64);
    // Gradient of a periodic potential: spectral route.
    MomentumField grad{g, {RealField(g.size()), RealField(g.size())}, Mask(g.size(), 1), 0.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec q = g.point(i);
        grad.components[0][i] = std::cos(q[0]) * std::cos(2 * q[1]);
        grad.components[1][i] = -2 * std::sin(q[0]) * std::sin(2 * q[1]);
    }
    for (double w : vorticity(grad)) CHECK(std::abs(w) < 1e-10);

    // Linear fields are not periodic: finite-difference route.
    const Grid box = Grid::square(4.0, 32);
    MomentumField rot{box, {RealField(box.size()), RealField(box.size())}, Mask(box.size(), 1), 0.0};
    MomentumField radial = rot;
    for (std::size_t i = 0; i < box.size(); ++i) {
        const Vec q = box.point(i);
        rot.components[0][i] = -q[1];
        rot.components[1][i] = q[0];
        radial.components[0][i] = q[0];
        radial.components[1][i] = q[1];
    }
    std::size_t valid = 0;
    for (double w : vorticity(rot, Differencing::finite_difference))
        if (!std::isnan(w)) {
            ++valid;
            CHECK(std::abs(w - 2.0) < 1e-10);
        }
    CHECK(valid == 28 * 28);
    for (double w : vorticity(radial, Differencing::finite_difference))
        if (!std::isnan(w)) CHECK(std::abs(w) < 1e-10);

    const Grid line = Grid::line(4.0, 16);
    CHECK(vorticity(MomentumField{line, {RealField(16), {}}, Mask(16, 1), 0.0}).empty());
}

TEST_CASE("half-density transport and Lamb/HJ consistency") {
    const Grid g = Grid::line(12.0, 512);
    const auto s0 = quadratic_action(0.0, {0.3, 0.0}, {-0.5, 0, 0, 0});
    const auto rho0 = gaussian_density(1, {0.5, 0.0}, 1.0);
    const Hamiltonian quartic(1, 1.0, potential::Quartic{0.05});
    const QaSolution hj = evolve_hj_continuity(quartic, g, s0, rho0, 0.4);
    REQUIRE_FALSE(hj.multivalued);
    for (std::size_t k : {std::size_t{100}, std::size_t{300}}) CHECK(half_density_residual(quartic, hj, k) < 1e-5);

    const QaSolution lamb = evolve_canonical_condition(quartic, g, s0.momentum(), 0.4);
    const MomentumField grad = action_gradient(*hj.final().action);
    const MomentumField& m = lamb.final().momentum;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (grad.covered[i] && m.covered[i]) worst = std::max(worst, std::abs(grad.components[0][i] - m.components[0][i]));
    CHECK(worst < 1e-5);
    CHECK(std::abs(quadrature(g, hj.final().density->values) - 1.0) < 1e-6);
}

TEST_CASE("2D: irrotational fields stay irrotational and Jacobian tracks focusing") {
    const Grid g = Grid::square(12.0, 128);
    const Hamiltonian osc2(2, 1.0, potential::Harmonic{1.0});
    const auto s0 = quadratic_action(0.0, {0.2, -0.1}, {-0.4, 0.3, 0.3, 0.2});
    const QaSolution sol = evolve_hj_continuity(osc2, g, s0, gaussian_density(2, {0, 0}, 1.0), 0.5, {1e-2, 0, 1e-3, 10});
    REQUIRE_FALSE(sol.multivalued);
    std::size_t valid = 0;
    for (double w : vorticity(sol.final().momentum, Differencing::finite_difference))
        if (!std::isnan(w)) {
            ++valid;
            CHECK(std::abs(w) < 1e-8);
        }
    CHECK(valid > 100);
    CHECK(std::abs(quadrature(g, sol.final().density->values) - 1.0) < 1e-6);

    const Hamiltonian free2(2, 1.0, potential::Free{});
    const QaSolution focus = evolve_canonical_condition(free2, g, linear_momentum({0, 0}, {-1, 0, 0, -1}), 1.5, {1e-2, 0, 1e-3, 10});
    REQUIRE(focus.caustic.t_star.has_value());
    // det = (1 - t)^2 falls below 1e-3 at t = 1 - sqrt(1e-3).
    CHECK(std::abs(*focus.caustic.t_star - (1 - std::sqrt(1e-3))) < 0.01);
}

TEST_CASE("serial and parallel seed kernels agree bit for bit") {
    const Grid g = Grid::square(8.0, 32);
    const Hamiltonian quartic(2, 1.0, potential::Quartic{0.5});
    const auto s0 = quadratic_action(0.0, {0.1, 0.0}, {-0.3, 0.0, 0.0, 0.1});
    const auto rho0 = gaussian_density(2, {0, 0}, 1.0);
    QaOptions serial{1e-2, 0, 1e-3, 5, Integrator::rk4, Exec::serial};
    QaOptions parallel = serial;
    parallel.exec = Exec::parallel;
    const QaSolution a = evolve_hj_continuity(quartic, g, s0, rho0, 0.4, serial);
    const QaSolution b = evolve_hj_continuity(quartic, g, s0, rho0, 0.4, parallel);
    CHECK(a.final().momentum.components[0] == b.final().momentum.components[0]);
    CHECK(a.final().action->values == b.final().action->values);
    CHECK(a.final().density->values == b.final().density->values);
}
