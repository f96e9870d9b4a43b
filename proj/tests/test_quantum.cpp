#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qlab/error.hpp"
#include "qlab/phase_ensemble.hpp"
#include "qlab/projection_qa.hpp"
#include "qlab/quantum.hpp"

using namespace qlab;
using std::numbers::pi;

namespace {

const Hamiltonian kFree(1, 1.0, potential::Free{});
const Hamiltonian kOsc(1, 1.0, potential::Harmonic{1.0});
const Hamiltonian kQuartic(1, 1.0, potential::Quartic{0.5});

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Smooth random periodic wave function from a few low Fourier modes.
WaveFunction random_smooth(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    WaveFunction wf{g, ComplexField(g.size()), 0.0, 1.0};
    std::vector<std::array<double, 4>> modes;
    for (int k = -3; k <= 3; ++k) modes.push_back({static_cast<double>(k), n(rng), n(rng), 0.0});
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = 2 * pi * g.point(i)[0] / g.extent(0);
        std::complex<double> z = 3.0;
        for (const auto& m : modes) z += std::complex<double>(m[1], m[2]) * std::polar(1.0, m[0] * x) * 0.3;
        wf.psi[i] = z;
    }
    normalize(wf);
    return wf;
}

}  // namespace

TEST_CASE("Schroedinger examples") {
    SUBCASE("free spreading") {
        const Grid g = Grid::line(40.0, 512);
        const WaveFunction out = evolve_schrodinger(kFree, gaussian_packet(g, {0, 0}, 1.0, {0, 0}), 2.0);
        CHECK(std::abs(qt_expectations(kFree, out).width[0] - std::sqrt(2.0)) < 1e-6);
        // Refinement oracle.
        const Grid fine = Grid::line(40.0, 2048);
        const WaveFunction ref = evolve_schrodinger(kFree, gaussian_packet(fine, {0, 0}, 1.0, {0, 0}), 2.0, {2.5e-4});
        CHECK(std::abs(qt_expectations(kFree, ref).width[0] - qt_expectations(kFree, out).width[0]) < 1e-6);
    }
    SUBCASE("coherent state follows the classical path") {
        const Grid g = Grid::line(20.0, 256);
        const WaveFunction out = evolve_schrodinger(kOsc, coherent_state(g, {1, 0}, {0, 0}, 1, 1), pi);
        const PhaseState cl = integrate_characteristic(kOsc, {{1, 0}, {0, 0}, 0}, pi, 1e-3);
        CHECK(std::abs(qt_expectations(kOsc, out).q[0] + 1.0) < 1e-6);
        CHECK(std::abs(qt_expectations(kOsc, out).q[0] - cl.q[0]) < 1e-6);
    }
    SUBCASE("ground state is stationary") {
        const Grid g = Grid::line(20.0, 256);
        const WaveFunction gs = eigenstate_n(g, {0, 0}, 1, 1);
        const WaveFunction out = evolve_schrodinger(kOsc, gs, 1.0, {1e-4});
        const RealField a = density_of(gs), b = density_of(out);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
    }
}

TEST_CASE("norm and energy conservation") {
    const Grid g = Grid::line(20.0, 256);
    for (const Hamiltonian* h : {&kOsc, &kQuartic}) {
        const WaveFunction psi = coherent_state(g, {1, 0}, {0.5, 0}, 1, 1);
        const double e0 = qt_expectations(*h, psi).energy;
        double norm_drift = 0.0, energy_drift = 0.0;
        int steps = 0;
        evolve_schrodinger(*h, psi, 1.0, {1e-4}, [&](const WaveFunction& w) {
            ++steps;
            norm_drift = std::max(norm_drift, std::abs(norm(w) - 1.0));
            if (steps % 100 == 1) energy_drift = std::max(energy_drift, std::abs(qt_expectations(*h, w).energy - e0) / e0);
        });
        CHECK(steps == 10001);
        CHECK(norm_drift < 1e-10);
        CHECK(energy_drift < 1e-8);
    }
}

TEST_CASE("Ehrenfest relations") {
    const Grid g = Grid::line(20.0, 256);
    for (const Hamiltonian* h : {&kOsc, &kQuartic}) {
        std::vector<QtExpectations> e;
        std::vector<double> t;
        evolve_schrodinger(*h, coherent_state(g, {1, 0}, {0.3, 0}, 1, 1), 1.0, {1e-3}, [&](const WaveFunction& w) {
            e.push_back(qt_expectations(*h, w));
            t.push_back(w.time);
        });
        double rq = 0.0, rp = 0.0;
        for (std::size_t k = 1; k + 1 < e.size(); ++k) {
            const double dq = (e[k + 1].q[0] - e[k - 1].q[0]) / (t[k + 1] - t[k - 1]);
            const double dp = (e[k + 1].p[0] - e[k - 1].p[0]) / (t[k + 1] - t[k - 1]);
            rq = std::max(rq, std::abs(dq - e[k].p[0] / h->mass()));
            rp = std::max(rp, std::abs(dp - e[k].force[0]));
        }
        CHECK(rq < 1e-5);
        CHECK(rp < 1e-5);
    }
}

TEST_CASE("classical wave equation") {
    SUBCASE("plane wave: T_Q vanishes, both paths agree") {
        const Grid g = Grid::line(2 * pi, 64);
        const WaveFunction pw = plane_wave(g, {1.0, 0.0});
        const WaveFunction s = evolve_schrodinger(kFree, pw, 1.0);
        const ClassicalWaveRun c = evolve_classical_wave(kFree, pw, 1.0);
        CHECK_FALSE(c.blowup);
        CHECK(max_abs_diff(s.psi, c.psi.psi) < 1e-10);
    }
    SUBCASE("coefficient 0 is the Schroedinger path bit for bit") {
        const Grid g = Grid::line(20.0, 256);
        const WaveFunction psi = coherent_state(g, {1, 0}, {0.2, 0}, 1, 1);
        const WaveFunction s = evolve_schrodinger(kQuartic, psi, 0.5);
        ClassicalWaveOptions off;
        off.coefficient = 0.0;
        const ClassicalWaveRun c = evolve_classical_wave(kQuartic, psi, 0.5, off);
        CHECK(s.psi == c.psi.psi);
    }
    SUBCASE("a node inside the support is a singular amplitude") {
        const Grid g = Grid::square(12.0, 64);
        const Hamiltonian free2(2, 1.0, potential::Free{});
        CHECK_THROWS_AS(evolve_classical_wave(free2, vortex_2d(g, 1, {0, 0}, 1.5), 0.1), SingularAmplitude);
    }
    SUBCASE("growth of T_Q is reported as blowup") {
        const Grid g = Grid::line(16.0, 256);
        WaveFunction psi = gaussian_packet(g, {0, 0}, 1.0, {0, 0});
        ClassicalWaveOptions opts;
        opts.blowup_factor = 1.5;
        // Focusing phase drives the amplitude towards the caustic at t = 1.
        for (std::size_t i = 0; i < g.size(); ++i) psi.psi[i] *= std::polar(1.0, -0.5 * g.point(i)[0] * g.point(i)[0]);
        const ClassicalWaveRun run = evolve_classical_wave(kFree, psi, 0.9, opts);
        CHECK(run.blowup);
        REQUIRE(run.blowup_time.has_value());
        CHECK(*run.blowup_time < 0.9);
        CHECK(run.psi.time < *run.blowup_time);
    }
    SUBCASE("fine grids split each step to keep the cutoff rotation bounded") {
        const Grid g = Grid::line(16.0, 512);
        ClassicalWaveOptions opts;
        const ClassicalWaveRun run = evolve_classical_wave(kFree, gaussian_packet(g, {0, 0}, 1.0, {0, 0}), 0.01, opts);
        CHECK(run.inner_steps > 1);
        opts.coefficient = 0.0;
        CHECK(evolve_classical_wave(kFree, gaussian_packet(g, {0, 0}, 1.0, {0, 0}), 0.01, opts).inner_steps == 1);
    }
    SUBCASE("static Gaussian: T_Q balances dispersion") {
        const Grid g = Grid::line(16.0, 256);
        const WaveFunction psi = gaussian_packet(g, {0, 0}, 1.0, {0, 0});
        const ClassicalWaveRun run = evolve_classical_wave(kFree, psi, 1.0);
        const RealField a = density_of(psi), b = density_of(run.psi);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        CHECK(worst < 1e-6);
        CHECK(std::abs(qt_expectations(kFree, run.psi).width[0] - 1.0) < 1e-6);
    }
}

TEST_CASE("classical wave matches the characteristics solution before the caustic") {
    const Grid g = Grid::line(16.0, 256);
    const auto rho0 = gaussian_density(1, {0, 0}, 1.0);
    struct Case {
        double curvature, t;
    };
    for (const Case c : {Case{0.0, 1.0}, Case{-1.0, 0.5}}) {
        WaveFunction psi{g, ComplexField(g.size()), 0.0, 1.0};
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double q = g.point(i)[0];
            psi.psi[i] = std::polar(std::sqrt(rho0({q, 0})), 0.5 * c.curvature * q * q);
        }
        const ClassicalWaveRun cw = evolve_classical_wave(kFree, psi, c.t);
        REQUIRE_FALSE(cw.blowup);
        const MadelungPair mp = madelung_decompose(cw.psi);
        const QaSolution qa = evolve_hj_continuity(kFree, g, quadratic_action(0, {0, 0}, {c.curvature, 0, 0, 0}), rho0, c.t);
        const auto& snap = qa.final();
        const std::size_t mid = g.size() / 2;
        const double gauge = mp.S.values[mid] - snap.action->values[mid];
        const Mask phase_known = density_mask(snap.density->values, 1e-6);
        double drho = 0.0, ds = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!snap.momentum.covered[i]) continue;
            drho = std::max(drho, std::abs(mp.rho.values[i] - snap.density->values[i]));
            if (phase_known[i] && mp.S.covered[i]) ds = std::max(ds, std::abs(mp.S.values[i] - gauge - snap.action->values[i]));
        }
        CHECK(drho < 5e-3);
        CHECK(ds < 5e-3);
    }
}

TEST_CASE("Madelung decomposition") {
    SUBCASE("plane wave") {
        const Grid g = Grid::line(2 * pi, 64);
        const MadelungPair mp = madelung_decompose(plane_wave(g, {1.0, 0.0}));
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(mp.rho.values[i] == doctest::Approx(1.0 / (2 * pi)));
            CHECK(std::abs(mp.S.values[i] - mp.S.values[0] - (g.point(i)[0] - g.point(0)[0])) < 1e-12);
        }
        CHECK(mp.S.winding[0] == 1);
    }
    SUBCASE("real positive wave function has zero phase") {
        const Grid g = Grid::line(20.0, 128);
        const MadelungPair mp = madelung_decompose(eigenstate_n(g, {0, 0}, 1, 1));
        for (std::size_t i = 0; i < g.size(); ++i)
            if (mp.S.covered[i]) CHECK(mp.S.values[i] == 0.0);
        CHECK(mp.S.winding[0] == 0);
    }
    SUBCASE("round trip") {
        const Grid g = Grid::line(2 * pi, 128);
        const WaveFunction wf = random_smooth(g, 7);
        const WaveFunction back = madelung_compose(madelung_decompose(wf), wf.hbar);
        CHECK(max_abs_diff(wf.psi, back.psi) < 1e-12);
        const Grid g2 = Grid::square(10.0, 64);
        const WaveFunction v = vortex_2d(g2, 2, {0.3, -0.2}, 2.0);
        const MadelungPair mp = madelung_decompose(v);
        const WaveFunction vb = madelung_compose(mp, 1.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < g2.size(); ++i)
            if (mp.S.covered[i]) worst = std::max(worst, std::abs(v.psi[i] - vb.psi[i]));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("quantum potential examples") {
    const Grid g = Grid::line(24.0, 512);
    const WaveFunction gauss = gaussian_packet(g, {0, 0}, 1.0, {0, 0});
    const ConfigDensity rho{g, density_of(gauss), 0.0};
    const RealField tq = quantum_potential(rho, 1.0, 1.0);
    // Oracle: central second difference of the closed-form sqrt(rho).
    const double h = 1e-3;
    auto amp = [](double q) { return std::exp(-q * q / 4); };
    const double fd = 0.5 * (amp(h) - 2 * amp(0) + amp(-h)) / (h * h) / amp(0);
    CHECK(std::abs(tq[g.size() / 2] - (-0.25)) < 1e-8);
    CHECK(std::abs(tq[g.size() / 2] - fd) < 1e-6);
    RealField w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = rho.values[i] * tq[i];
    CHECK(std::abs(quadrature(g, w) + 0.125) < 1e-8);

    const ConfigDensity flat{g, RealField(g.size(), 1.0 / 24.0), 0.0};
    for (double v : quantum_potential(flat, 1.0, 1.0)) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("modified Hamilton-Jacobi residual") {
    const Grid g = Grid::line(20.0, 256);
    SUBCASE("coherent state") {
        std::vector<WaveFunction> hist;
        evolve_schrodinger(kOsc, coherent_state(g, {1, 0}, {0, 0}, 1, 1), 1.0, {1e-3},
                           [&](const WaveFunction& w) { hist.push_back(w); });
        for (std::size_t k : {100, 500, 999}) CHECK(modified_hj_residual(kOsc, hist[k - 1], hist[k], hist[k + 1]) < 1e-4);
    }
    SUBCASE("ground state") {
        std::vector<WaveFunction> hist;
        evolve_schrodinger(kOsc, eigenstate_n(g, {0, 0}, 1, 1), 2e-3, {1e-4},
                           [&](const WaveFunction& w) { hist.push_back(w); });
        CHECK(modified_hj_residual(kOsc, hist[9], hist[10], hist[11]) < 1e-6);
        const RealField rate = phase_rate(hist[9], hist[11]);
        CHECK(std::abs(rate[g.size() / 2] + 0.5) < 1e-6);
    }
    SUBCASE("small hbar: classical Hamilton-Jacobi residual") {
        const double hbar = 1e-3;
        const Grid fine = Grid::line(12.0, 1024);
        WaveFunction psi{fine, ComplexField(fine.size()), 0.0, hbar};
        for (std::size_t i = 0; i < fine.size(); ++i) {
            const double q = fine.point(i)[0];
            psi.psi[i] = std::polar(std::exp(-q * q / 2), 0.0);
        }
        normalize(psi);
        std::vector<WaveFunction> hist;
        evolve_schrodinger(kOsc, psi, 2e-3, {1e-4}, [&](const WaveFunction& w) { hist.push_back(w); });
        CHECK(modified_hj_residual(kOsc, hist[9], hist[10], hist[11], 0.0) < 1e-3);
        CHECK(modified_hj_residual(kOsc, hist[9], hist[10], hist[11], 1.0) < 1e-6);
    }
}

TEST_CASE("QT expectation examples") {
    const Grid g = Grid::line(20.0, 256);
    const QtExpectations c = qt_expectations(kOsc, coherent_state(g, {1, 0}, {0, 0}, 1, 1));
    CHECK(std::abs(c.q[0] - 1.0) < 1e-8);
    CHECK(std::abs(c.p[0]) < 1e-8);
    const QtExpectations m = qt_expectations(kFree, gaussian_packet(g, {0, 0}, 1.0, {2.0, 0}));
    CHECK(std::abs(m.p[0] - 2.0) < 1e-8);
    CHECK(std::abs(m.p_current[0] - 2.0) < 1e-8);

    const WaveFunction start = gaussian_packet(g, {-1, 0}, 0.8, {0.7, 0});
    const double p0 = qt_expectations(kFree, start).p[0];
    double drift = 0.0;
    evolve_schrodinger(kFree, start, 1.0, {1e-2}, [&](const WaveFunction& w) {
        const QtExpectations e = qt_expectations(kFree, w);
        drift = std::max({drift, std::abs(e.p[0] - p0), std::abs(e.p_current[0] - p0)});
    });
    CHECK(drift < 1e-8);
}

TEST_CASE("gradient-phase identity") {
    const Grid g = Grid::line(2 * pi, 128);
    for (unsigned seed : {1u, 2u, 3u}) {
        const WaveFunction wf = random_smooth(g, seed);
        const auto grad_s = phase_gradient(wf);
        const RealField rho = density_of(wf);
        const RealField drho = spectral_derivative(g, rho, 0, 1);
        const ComplexField dpsi = spectral_derivative(g, wf.psi, 0, 1);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::complex<double> rhs = std::complex<double>(0, -wf.hbar) * (dpsi[i] - drho[i] / (2 * rho[i]) * wf.psi[i]);
            worst = std::max(worst, std::abs(grad_s[0][i] * wf.psi[i] - rhs));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("catalog states are normalized and validated") {
    const Grid g = Grid::line(20.0, 256);
    const Grid g2 = Grid::square(10.0, 32);
    CHECK(std::abs(norm(eigenstate_n(g, {3, 0}, 1, 1)) - 1) < 1e-12);
    CHECK(std::abs(norm(vortex_2d(g2, -1, {0, 0}, 1.0)) - 1) < 1e-12);
    CHECK_THROWS_AS(plane_wave(g, {1.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(vortex_2d(g, 1, {0, 0}, 1.0), ConfigError);
    CHECK_THROWS_AS(coherent_state(g, {0, 0}, {0, 0}, 1, -1), ConfigError);
    // Hermite functions are orthogonal on the grid.
    const WaveFunction a = eigenstate_n(g, {1, 0}, 1, 1), b = eigenstate_n(g, {2, 0}, 1, 1);
    ComplexField prod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) prod[i] = std::conj(a.psi[i]) * b.psi[i];
    CHECK(std::abs(quadrature(g, prod)) < 1e-12);
}
