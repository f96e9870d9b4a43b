#include "qlab/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qlab/characteristics.hpp"
#include "qlab/error.hpp"
#include "qlab/fft.hpp"

namespace qlab {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Largest kinetic phase per step at the retained cutoff for which the T_Q kick and the drift
// still cancel stably.
constexpr double kMaxCutoffRotation = 0.25;
constexpr double kTaperDecades = 4.0;

double wrap_phase(double x) { return std::remainder(x, kTwoPi); }

// Unwraps arg(psi) along one line of the grid, skipping uncovered nodes.
void unwrap_line(const ComplexField& psi, const Mask& covered, std::size_t start, std::size_t stride, std::size_t count,
                 RealField& out) {
    bool first = true;
    double last = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = start + j * stride;
        if (!covered[i]) continue;
        const double phase = std::arg(psi[i]);
        last = first ? phase : last + wrap_phase(phase - last);
        first = false;
        out[i] = last;
    }
}

// Net phase advance of psi around a periodic grid line in units of 2 pi, over covered nodes.
long seam_winding(const ComplexField& psi, const Mask& covered, std::size_t start, std::size_t stride,
                  std::size_t count) {
    double total = 0.0;
    std::optional<double> first, prev;
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t i = start + j * stride;
        if (!covered[i]) continue;
        const double phase = std::arg(psi[i]);
        if (prev) total += wrap_phase(phase - *prev);
        else first = phase;
        prev = phase;
    }
    if (!prev) return 0;
    total += wrap_phase(*first - *prev);
    return std::lround(total / kTwoPi);
}

double max_of(const RealField& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

void check_grid(const Hamiltonian& h, const WaveFunction& wf) {
    if (wf.grid.dim() != h.dim()) throw ConfigError("wave function and Hamiltonian dimensions differ");
    if (wf.psi.size() != wf.grid.size()) throw ConfigError("wave function size does not match grid");
    if (!(wf.hbar > 0.0)) throw ConfigError("hbar must be positive");
}

}  // namespace

double norm(const WaveFunction& wf) { return quadrature(wf.grid, density_of(wf)); }

void normalize(WaveFunction& wf) {
    const double n = norm(wf);
    if (!(n > 0.0)) throw ConfigError("cannot normalize a zero wave function");
    const double s = 1.0 / std::sqrt(n);
    for (auto& z : wf.psi) z *= s;
}

RealField density_of(const WaveFunction& wf) {
    RealField rho(wf.psi.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(wf.psi[i]);
    return rho;
}

Mask density_mask(const RealField& rho, double floor) {
    const double cut = floor * max_of(rho);
    Mask m(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) m[i] = rho[i] >= cut && rho[i] > 0.0;
    return m;
}

MadelungPair madelung_decompose(const WaveFunction& wf, double floor) {
    const Grid& g = wf.grid;
    const RealField rho = density_of(wf);
    const Mask covered = density_mask(rho, floor);
    RealField phase(g.size(), 0.0);
    std::array<long, 2> winding{0, 0};
    if (g.dim() == 1) {
        unwrap_line(wf.psi, covered, 0, 1, g.points(0), phase);
        winding[0] = seam_winding(wf.psi, covered, 0, 1, g.points(0));
    } else {
        const std::size_t n0 = g.points(0), n1 = g.points(1);
        std::optional<std::size_t> prev_row;
        for (std::size_t r = 0; r < n0; ++r) {
            unwrap_line(wf.psi, covered, r * n1, 1, n1, phase);
            std::optional<std::size_t> anchor;
            for (std::size_t c = 0; c < n1 && !anchor; ++c)
                if (covered[r * n1 + c]) anchor = c;
            if (!anchor) continue;
            if (prev_row) {
                std::size_t ref = *prev_row * n1 + *anchor;
                if (!covered[ref]) {
                    for (std::size_t c = 0; c < n1; ++c)
                        if (covered[*prev_row * n1 + c]) {
                            ref = *prev_row * n1 + c;
                            break;
                        }
                }
                const double here = phase[r * n1 + *anchor];
                const double target = phase[ref] + wrap_phase(here - phase[ref]);
                const double shift = kTwoPi * std::round((target - here) / kTwoPi);
                for (std::size_t c = 0; c < n1; ++c)
                    if (covered[r * n1 + c]) phase[r * n1 + c] += shift;
            }
            prev_row = r;
        }
        winding[0] = seam_winding(wf.psi, covered, n1 / 2, n1, n0);
        winding[1] = seam_winding(wf.psi, covered, (n0 / 2) * n1, 1, n1);
    }
    MadelungPair out;
    out.rho = ConfigDensity{g, rho, wf.time};
    RealField s(g.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (covered[i]) s[i] = wf.hbar * phase[i];
    out.S = ConfigAction{g, std::move(s), covered, wf.time, winding};
    return out;
}

WaveFunction madelung_compose(const MadelungPair& pair, double hbar) {
    const Grid& g = pair.rho.grid;
    WaveFunction wf{g, ComplexField(g.size()), pair.rho.time, hbar};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double amp = std::sqrt(std::max(pair.rho.values[i], 0.0));
        wf.psi[i] = pair.S.covered[i] ? std::polar(amp, pair.S.values[i] / hbar) : cplx(amp, 0.0);
    }
    return wf;
}

RealField quantum_potential(const ConfigDensity& rho, double hbar, double mass, double floor) {
    const Grid& g = rho.grid;
    const Mask covered = density_mask(rho.values, floor);
    RealField amp(g.size());
    for (std::size_t i = 0; i < amp.size(); ++i) amp[i] = std::sqrt(std::max(rho.values[i], 0.0));
    const RealField lap = spectral_laplacian(g, amp);
    const double c = hbar * hbar / (2.0 * mass);
    RealField tq(g.size(), 0.0);
    for (std::size_t i = 0; i < tq.size(); ++i)
        if (covered[i]) tq[i] = c * lap[i] / amp[i];
    return tq;
}

RealField phase_rate(const WaveFunction& before, const WaveFunction& after) {
    if (!(before.grid == after.grid)) throw ConfigError("phase rate needs states on one grid");
    const double span = after.time - before.time;
    if (!(span > 0.0)) throw ConfigError("phase rate needs increasing times");
    RealField out(before.psi.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = after.hbar * std::arg(after.psi[i] * std::conj(before.psi[i])) / span;
    return out;
}

std::array<RealField, 2> phase_gradient(const WaveFunction& wf, double floor) {
    const Grid& g = wf.grid;
    const Mask covered = density_mask(density_of(wf), floor);
    std::array<RealField, 2> out;
    for (int a = 0; a < g.dim(); ++a) {
        const ComplexField d = spectral_derivative(g, wf.psi, a, 1);
        out[a].assign(g.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (covered[i]) out[a][i] = wf.hbar * std::imag(std::conj(wf.psi[i]) * d[i]) / std::norm(wf.psi[i]);
    }
    return out;
}

double modified_hj_residual(const Hamiltonian& h, const WaveFunction& before, const WaveFunction& now,
                            const WaveFunction& after, double tq_weight, double floor) {
    check_grid(h, now);
    const Grid& g = now.grid;
    const RealField rate = phase_rate(before, after);
    const auto grad = phase_gradient(now, floor);
    const RealField rho = density_of(now);
    const Mask covered = density_mask(rho, floor);
    const RealField tq = quantum_potential(ConfigDensity{g, rho, now.time}, now.hbar, h.mass(), floor);
    const RealField v = h.sample_potential(g);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!covered[i]) continue;
        double kinetic = 0.0;
        for (int a = 0; a < g.dim(); ++a) kinetic += grad[a][i] * grad[a][i];
        kinetic /= 2.0 * h.mass();
        worst = std::max(worst, std::abs(rate[i] + kinetic + v[i] - tq_weight * tq[i]));
    }
    return worst;
}

QtExpectations qt_expectations(const Hamiltonian& h, const WaveFunction& wf) {
    check_grid(h, wf);
    const Grid& g = wf.grid;
    const int dim = g.dim();
    const RealField rho = density_of(wf);
    const double mass_total = quadrature(g, rho);
    if (!(mass_total > 0.0)) throw ConfigError("expectations of a zero wave function");
    QtExpectations e;

    const auto f = h.sample_force(g);
    const RealField v = h.sample_potential(g);
    Vec q2{};
    RealField weighted(g.size());
    for (int a = 0; a < dim; ++a) {
        for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = rho[i] * g.point(i)[a];
        e.q[a] = quadrature(g, weighted) / mass_total;
        for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = rho[i] * g.point(i)[a] * g.point(i)[a];
        q2[a] = quadrature(g, weighted) / mass_total;
        e.width[a] = std::sqrt(std::max(q2[a] - e.q[a] * e.q[a], 0.0));
        for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = rho[i] * f[a][i];
        e.force[a] = quadrature(g, weighted) / mass_total;
        const ComplexField d = spectral_derivative(g, wf.psi, a, 1);
        for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = wf.hbar * std::imag(std::conj(wf.psi[i]) * d[i]);
        e.p_current[a] = quadrature(g, weighted) / mass_total;
    }
    for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = rho[i] * v[i];
    const double potential_part = quadrature(g, weighted) / mass_total;

    ComplexField spec = wf.psi;
    fft_forward(g, spec);
    const auto k0 = g.wavenumbers(0);
    const auto k1 = dim == 2 ? g.wavenumbers(1) : std::vector<double>{0.0};
    const std::size_t n1 = dim == 2 ? g.points(1) : 1;
    double total = 0.0, kin = 0.0;
    Vec pk{};
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double w = std::norm(spec[i]);
        const double ka = k0[i / n1], kb = k1[i % n1];
        total += w;
        pk[0] += w * ka;
        pk[1] += w * kb;
        kin += w * (ka * ka + kb * kb);
    }
    e.p = (wf.hbar / total) * pk;
    if (dim == 1) e.p[1] = 0.0;
    e.energy = wf.hbar * wf.hbar * kin / (2.0 * h.mass() * total) + potential_part;
    return e;
}

SplitStep::SplitStep(const Hamiltonian& h, const Grid& grid, double hbar, double dt, double nonlinear,
                     double density_floor)
    : h_(&h), grid_(grid), hbar_(hbar), dt_(dt), nonlinear_(nonlinear), floor_(density_floor) {
    if (grid.dim() != h.dim()) throw ConfigError("grid and Hamiltonian dimensions differ");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const RealField v = h.sample_potential(grid);
    half_kick_.resize(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) half_kick_[i] = std::polar(1.0, -v[i] * dt / (2.0 * hbar));
    const auto k0 = grid.wavenumbers(0);
    const auto k1 = grid.dim() == 2 ? grid.wavenumbers(1) : std::vector<double>{0.0};
    const std::size_t n1 = grid.dim() == 2 ? grid.points(1) : 1;
    const double scale = 1.0 / static_cast<double>(grid.size());
    drift_.resize(grid.size());
    for (std::size_t i = 0; i < drift_.size(); ++i) {
        const double k2 = k0[i / n1] * k0[i / n1] + k1[i % n1] * k1[i % n1];
        drift_[i] = scale * std::polar(1.0, -hbar * k2 * dt / (2.0 * h.mass()));
    }
    filter_.assign(grid.size(), 1.0);
    for (std::size_t i = 0; i < filter_.size(); ++i) {
        const double c0 = std::abs(k0[i / n1]) / (std::numbers::pi / grid.spacing(0));
        const double c1 = grid.dim() == 2 ? std::abs(k1[i % n1]) / (std::numbers::pi / grid.spacing(1)) : 0.0;
        if (c0 > 2.0 / 3.0 || c1 > 2.0 / 3.0) filter_[i] = 0.0;
    }
}

RealField SplitStep::quantum_kick_potential(const ComplexField& psi) const {
    RealField rho(psi.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi[i]);
    const Mask covered = density_mask(rho, floor_);
    const double peak = max_of(rho);
    const double support = std::sqrt(floor_) * peak;
    const int dim = grid_.dim();
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (covered[i]) continue;
        const auto idx = grid_.unflatten(i);
        for (int a = 0; a < dim; ++a) {
            for (int s : {-1, 1}) {
                auto j = idx;
                j[a] = grid_.wrap(a, static_cast<long long>(idx[a]) + s);
                if (rho[grid_.index(j[0], j[1])] > support)
                    throw SingularAmplitude("amplitude vanishes inside the support of the classical wave");
            }
        }
    }
    RealField tq = quantum_potential(ConfigDensity{grid_, rho, 0.0}, hbar_, h_->mass(), floor_);
    // Fade the term in over the decades just above the floor.
    const double lo = std::log10(floor_);
    for (std::size_t i = 0; i < tq.size(); ++i) {
        if (!covered[i]) continue;
        const double x = std::clamp((std::log10(rho[i] / peak) - lo) / kTaperDecades, 0.0, 1.0);
        tq[i] *= x * x * (3.0 - 2.0 * x);
    }
    return tq;
}

void SplitStep::kick(ComplexField& psi) const {
    if (nonlinear_ == 0.0) {
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= half_kick_[i];
        return;
    }
    const RealField tq = quantum_kick_potential(psi);
    double peak = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        peak = std::max(peak, std::abs(tq[i]));
        psi[i] *= half_kick_[i] * std::polar(1.0, -nonlinear_ * tq[i] * dt_ / (2.0 * hbar_));
    }
    last_tq_ = std::max(last_tq_, peak);
}

void SplitStep::step(ComplexField& psi) const {
    last_tq_ = 0.0;
    kick(psi);
    fft_forward(grid_, psi);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= drift_[i];
    if (nonlinear_ != 0.0)
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= filter_[i];
    fft_backward(grid_, psi);
    kick(psi);
}

WaveFunction evolve_schrodinger(const Hamiltonian& h, const WaveFunction& psi0, double t, const QtOptions& opts,
                                const StepObserver& observe) {
    ClassicalWaveOptions cw;
    cw.dt = opts.dt;
    cw.coefficient = 0.0;
    return evolve_classical_wave(h, psi0, t, cw, observe).psi;
}

ClassicalWaveRun evolve_classical_wave(const Hamiltonian& h, const WaveFunction& psi0, double t,
                                       const ClassicalWaveOptions& opts, const StepObserver& observe) {
    check_grid(h, psi0);
    if (!(t >= 0.0)) throw ConfigError("evolution time must be non-negative");
    if (!(opts.dt > 0.0)) throw ConfigError("time step must be positive");
    const int n = t > 0.0 ? substeps(t, opts.dt) : 0;
    const double step = n > 0 ? t / n : opts.dt;
    int inner = 1;
    if (opts.coefficient != 0.0) {
        double h_min = psi0.grid.spacing(0);
        if (psi0.grid.dim() == 2) h_min = std::min(h_min, psi0.grid.spacing(1));
        const double k_cut = (2.0 / 3.0) * std::numbers::pi / h_min;
        const double rotation = psi0.hbar * k_cut * k_cut * step / (2.0 * h.mass());
        inner = std::max(1, static_cast<int>(std::ceil(rotation / kMaxCutoffRotation)));
    }
    const SplitStep stepper(h, psi0.grid, psi0.hbar, step / inner, opts.coefficient, opts.density_floor);

    ClassicalWaveRun run;
    run.inner_steps = inner;
    run.psi = psi0;
    if (opts.coefficient != 0.0) {
        double min_extent = psi0.grid.extent(0);
        if (psi0.grid.dim() == 2) min_extent = std::min(min_extent, psi0.grid.extent(1));
        const double mode = kTwoPi / min_extent;
        double initial = 0.0;
        for (double v : stepper.quantum_kick_potential(psi0.psi)) initial = std::max(initial, std::abs(v));
        run.initial_scale = std::max(initial, psi0.hbar * psi0.hbar * mode * mode / (2.0 * h.mass()));
    }
    if (observe) observe(run.psi);
    WaveFunction next = psi0;
    for (int k = 1; k <= n; ++k) {
        next.psi = run.psi.psi;
        double tq = 0.0;
        for (int j = 0; j < inner; ++j) {
            stepper.step(next.psi);
            tq = std::max(tq, stepper.last_quantum_potential());
        }
        next.time = psi0.time + k * step;
        bool finite_state = true;
        for (const auto& z : next.psi) finite_state = finite_state && std::isfinite(z.real()) && std::isfinite(z.imag());
        run.max_quantum_potential = std::max(run.max_quantum_potential, tq);
        if (!finite_state || (opts.coefficient != 0.0 && tq > opts.blowup_factor * run.initial_scale)) {
            run.blowup = true;
            run.blowup_time = next.time;
            return run;
        }
        std::swap(run.psi, next);
        if (observe) observe(run.psi);
    }
    return run;
}

WaveFunction gaussian_packet(const Grid& grid, const Vec& center, double sigma, const Vec& momentum, double hbar) {
    if (!(sigma > 0.0)) throw ConfigError("packet width must be positive");
    WaveFunction wf{grid, ComplexField(grid.size()), 0.0, hbar};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Vec d = grid.point(i) - center;
        Vec q = grid.point(i);
        if (grid.dim() == 1) d[1] = q[1] = 0.0;
        wf.psi[i] = std::polar(std::exp(-dot(d, d) / (4.0 * sigma * sigma)), dot(momentum, q) / hbar);
    }
    normalize(wf);
    return wf;
}

WaveFunction coherent_state(const Grid& grid, const Vec& q0, const Vec& p0, double mass, double omega, double hbar) {
    if (!(mass > 0.0) || !(omega > 0.0)) throw ConfigError("coherent state needs positive mass and frequency");
    return gaussian_packet(grid, q0, std::sqrt(hbar / (2.0 * mass * omega)), p0, hbar);
}

WaveFunction eigenstate_n(const Grid& grid, std::array<int, 2> n, double mass, double omega, double hbar) {
    if (!(mass > 0.0) || !(omega > 0.0)) throw ConfigError("eigenstate needs positive mass and frequency");
    if (n[0] < 0 || n[1] < 0) throw ConfigError("eigenstate quantum numbers must be non-negative");
    const double scale = std::sqrt(mass * omega / hbar);
    auto hermite_fn = [](int order, double x) {
        double h0 = 1.0, h1 = 2.0 * x;
        if (order == 0) return h0;
        for (int k = 1; k < order; ++k) {
            const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
            h0 = h1;
            h1 = h2;
        }
        return h1;
    };
    WaveFunction wf{grid, ComplexField(grid.size()), 0.0, hbar};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec q = grid.point(i);
        double v = 1.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double x = scale * q[a];
            v *= hermite_fn(n[a], x) * std::exp(-0.5 * x * x);
        }
        wf.psi[i] = v;
    }
    normalize(wf);
    return wf;
}

WaveFunction plane_wave(const Grid& grid, const Vec& momentum, double hbar) {
    for (int a = 0; a < grid.dim(); ++a) {
        const double cycles = momentum[a] * grid.extent(a) / (kTwoPi * hbar);
        if (std::abs(cycles - std::round(cycles)) > 1e-9) throw ConfigError("plane-wave momentum does not fit the periodic box");
    }
    WaveFunction wf{grid, ComplexField(grid.size()), 0.0, hbar};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Vec q = grid.point(i);
        if (grid.dim() == 1) q[1] = 0.0;
        wf.psi[i] = std::polar(1.0, dot(momentum, q) / hbar);
    }
    normalize(wf);
    return wf;
}

WaveFunction vortex_2d(const Grid& grid, int charge, const Vec& center, double sigma, double hbar) {
    if (grid.dim() != 2) throw ConfigError("vortex state needs a 2D grid");
    if (!(sigma > 0.0)) throw ConfigError("vortex width must be positive");
    WaveFunction wf{grid, ComplexField(grid.size()), 0.0, hbar};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec d = grid.point(i) - center;
        cplx z(d[0], charge >= 0 ? d[1] : -d[1]);
        cplx v = 1.0;
        for (int k = 0; k < std::abs(charge); ++k) v *= z;
        wf.psi[i] = v * std::exp(-dot(d, d) / (2.0 * sigma * sigma));
    }
    normalize(wf);
    return wf;
}

}  // namespace qlab
