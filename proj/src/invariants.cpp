#include "qlab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <random>

#include "qlab/error.hpp"
#include "qlab/fft.hpp"

namespace qlab {
namespace {

using cplx = std::complex<double>;
constexpr double two_pi = 2.0 * std::numbers::pi;

double signed_wavenumber(std::size_t k, std::size_t n) {
    return k <= n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
}

// d/ds of periodic samples on [0, 2 pi); the Nyquist mode is dropped.
ComplexField periodic_derivative(ComplexField f) {
    const std::size_t n = f.size();
    fft_forward(f);
    for (std::size_t k = 0; k < n; ++k) {
        const bool nyquist = n % 2 == 0 && k == n / 2;
        f[k] *= nyquist ? cplx{0.0, 0.0} : cplx{0.0, signed_wavenumber(k, n) / static_cast<double>(n)};
    }
    fft_backward(f);
    return f;
}

ComplexField as_complex(const Contour& c) {
    ComplexField z(c.points.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = {c.points[j][0], c.points[j][1]};
    return z;
}

using Field = std::function<std::optional<Vec>(const Vec&)>;

// One classical RK4 step with the velocity sampled at the start, midpoint and end.
void rk4_step(std::vector<Vec>& points, const Field& start, const Field& mid, const Field& end, double h,
              Exec exec) {
    auto need = [](const std::optional<Vec>& v) {
        if (!v || !finite(*v)) throw AdvectionError("contour vertex left the region where the velocity is known");
        return *v;
    };
    for_each_index(exec, points.size(), [&](std::size_t j) {
        const Vec q = points[j];
        const Vec k1 = need(start(q));
        const Vec k2 = need(mid(q + 0.5 * h * k1));
        const Vec k3 = need(mid(q + 0.5 * h * k2));
        const Vec k4 = need(end(q + h * k3));
        points[j] = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    });
}

void resample(Contour& c, const AdvectOptions& opts) {
    if (c.reference_segment <= 0.0) return;
    while (max_segment(c) > opts.max_stretch * c.reference_segment) {
        if (2 * c.points.size() > opts.max_points)
            throw AdvectionError("contour resampling exceeded the vertex limit");
        c = refine_contour(c);
    }
}

void check_times(const std::vector<double>& times, double start) {
    if (times.empty()) throw ConfigError("trace needs at least one sample time");
    double last = start;
    for (double t : times) {
        if (!std::isfinite(t) || t < last) throw ConfigError("trace times must be finite, non-decreasing and >= start");
        last = t;
    }
}

void finish_drift(CirculationTrace& trace) {
    std::optional<double> first;
    double drift = 0.0;
    for (double value : trace.circulation) {
        if (std::isnan(value)) continue;
        if (!first) {
            first = value;
            continue;
        }
        drift = std::max(drift, std::abs(value - *first));
    }
    if (first && std::abs(*first) >= kDriftAbsoluteBelow) drift /= std::abs(*first);
    trace.relative_drift = drift;
}

void record(CirculationTrace& trace, const Contour& c, double value, std::string flag = {},
            std::optional<long> winding = std::nullopt, double residue = 0.0) {
    trace.times.push_back(c.time);
    trace.circulation.push_back(value);
    trace.winding.push_back(winding);
    trace.winding_residue.push_back(residue);
    trace.flags.push_back(std::move(flag));
    trace.vertex_count.push_back(c.points.size());
}

WindingResult winding_from_samples(const ComplexField& psi, double amplitude_floor) {
    const std::size_t n = psi.size();
    for (const cplx& z : psi)
        if (!(std::abs(z) > amplitude_floor)) throw UnreliableWinding("amplitude vanishes on the contour");
    const ComplexField dpsi = periodic_derivative(psi);
    double accumulated = 0.0;
    double stepped = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        accumulated += std::imag(std::conj(psi[j]) * dpsi[j]) / std::norm(psi[j]);
        stepped += std::arg(psi[(j + 1) % n] / psi[j]);
    }
    WindingResult out;
    out.value = accumulated / static_cast<double>(n);
    out.winding = std::lround(out.value);
    out.residue = std::abs(out.value - static_cast<double>(out.winding));
    const long discrete = std::lround(stepped / two_pi);
    if (out.residue >= kWindingResidueLimit)
        throw UnreliableWinding("winding residue " + std::to_string(out.residue) + " is not below the limit");
    if (discrete != out.winding) throw UnreliableWinding("contour too coarse for the phase variation of psi");
    return out;
}

}  // namespace

Contour circle_contour(const Vec& center, double radius, std::size_t points, double time, bool clockwise) {
    Contour c;
    c.time = time;
    c.points.resize(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double s = two_pi * static_cast<double>(j) / static_cast<double>(points);
        c.points[j] = center + Vec{radius * std::cos(s), (clockwise ? -radius : radius) * std::sin(s)};
    }
    validate_contour(c);
    c.reference_segment = max_segment(c);
    return c;
}

void validate_contour(const Contour& c) {
    if (c.points.size() < kMinContourPoints)
        throw ConfigError("contour needs at least " + std::to_string(kMinContourPoints) + " vertices");
    for (const Vec& p : c.points)
        if (!finite(p)) throw ConfigError("contour vertex is not finite");
}

std::vector<Vec> contour_tangent(const Contour& c) {
    const ComplexField dz = periodic_derivative(as_complex(c));
    std::vector<Vec> out(dz.size());
    for (std::size_t j = 0; j < dz.size(); ++j) out[j] = {dz[j].real(), dz[j].imag()};
    return out;
}

Contour refine_contour(const Contour& c) {
    const std::size_t n = c.points.size();
    ComplexField z = as_complex(c);
    fft_forward(z);
    ComplexField wide(2 * n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        const double kk = signed_wavenumber(k, n);
        if (n % 2 == 0 && k == n / 2) {
            wide[n / 2] += 0.5 * z[k];
            wide[2 * n - n / 2] += 0.5 * z[k];
            continue;
        }
        wide[kk >= 0 ? k : 2 * n - (n - k)] = z[k];
    }
    fft_backward(wide);
    Contour out;
    out.time = c.time;
    out.reference_segment = c.reference_segment;
    out.points.resize(2 * n);
    for (std::size_t j = 0; j < 2 * n; ++j) {
        const cplx v = wide[j] / static_cast<double>(n);
        out.points[j] = {v.real(), v.imag()};
    }
    // Keep the original vertices bit-exact.
    for (std::size_t j = 0; j < n; ++j) out.points[2 * j] = c.points[j];
    return out;
}

double max_segment(const Contour& c) {
    double out = 0.0;
    const std::size_t n = c.points.size();
    for (std::size_t j = 0; j < n; ++j) out = std::max(out, norm(c.points[(j + 1) % n] - c.points[j]));
    return out;
}

Contour advect_contour(const FlowField& v, const Contour& c0, double t, const AdvectOptions& opts) {
    validate_contour(c0);
    if (!(opts.dt > 0.0)) throw ConfigError("advection step must be positive");
    if (t < c0.time) throw ConfigError("advection runs forward in time");
    Contour c = c0;
    if (c.reference_segment <= 0.0) c.reference_segment = max_segment(c);
    const double span = t - c0.time;
    const auto steps = static_cast<long>(std::ceil(span / opts.dt - 1e-9));
    if (steps <= 0) return c;
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
        const double t0 = c0.time + h * static_cast<double>(k);
        rk4_step(
            c.points, [&](const Vec& q) { return v(q, t0); }, [&](const Vec& q) { return v(q, t0 + 0.5 * h); },
            [&](const Vec& q) { return v(q, t0 + h); }, h, opts.exec);
        c.time = k + 1 == steps ? t : t0 + h;
        resample(c, opts);
    }
    return c;
}

double circulation(const CovectorField& m, const Contour& c) {
    validate_contour(c);
    const std::vector<Vec> tangent = contour_tangent(c);
    double sum = 0.0;
    for (std::size_t j = 0; j < c.points.size(); ++j) {
        const auto value = m(c.points[j]);
        if (!value || !finite(*value)) throw CirculationUndefined("field is not known on the contour");
        sum += dot(*value, tangent[j]);
    }
    return sum * two_pi / static_cast<double>(c.points.size());
}

CirculationTrace poincare_invariant(const Hamiltonian& h, const Contour& c0, const std::vector<double>& times,
                                    const AdvectOptions& opts) {
    if (h.dim() != 1) throw ConfigError("phase-space contours need a one-dimensional Hamiltonian");
    validate_contour(c0);
    check_times(times, c0.time);
    const FlowField flow = [&h](const Vec& x, double) -> std::optional<Vec> {
        return Vec{h.velocity({x[1], 0.0})[0], h.force({x[0], 0.0})[0]};
    };
    const CovectorField p_dq = [](const Vec& x) -> std::optional<Vec> { return Vec{x[1], 0.0}; };
    CirculationTrace trace;
    Contour c = c0;
    if (c.reference_segment <= 0.0) c.reference_segment = max_segment(c);
    for (double t : times) {
        c = advect_contour(flow, c, t, opts);
        record(trace, c, circulation(p_dq, c));
    }
    finish_drift(trace);
    return trace;
}

CirculationTrace kelvin_trace(const MomentumProvider& m, double mass, const Contour& c0,
                              const std::vector<double>& times, const AdvectOptions& opts) {
    if (!(mass > 0.0)) throw ConfigError("mass must be positive");
    validate_contour(c0);
    check_times(times, c0.time);
    const FlowField flow = [&](const Vec& q, double t) -> std::optional<Vec> {
        const auto p = m(q, t);
        if (!p) return std::nullopt;
        return (1.0 / mass) * *p;
    };
    CirculationTrace trace;
    Contour c = c0;
    if (c.reference_segment <= 0.0) c.reference_segment = max_segment(c);
    for (double t : times) {
        try {
            c = advect_contour(flow, c, t, opts);
        } catch (const AdvectionError&) {
            trace.truncated = true;
            trace.truncated_at = t;
            break;
        }
        try {
            record(trace, c, circulation([&](const Vec& q) { return m(q, c.time); }, c));
        } catch (const CirculationUndefined&) {
            record(trace, c, std::numeric_limits<double>::quiet_NaN(), "mask");
        }
    }
    finish_drift(trace);
    return trace;
}

CirculationTrace kelvin_trace_qa(const Hamiltonian& h, const QaSolution& sol, const Contour& c0,
                                 const std::vector<double>& times, const AdvectOptions& opts) {
    if (h.dim() != 2 || sol.grid.dim() != 2) throw ConfigError("Kelvin traces need a two-dimensional QA run");
    check_times(times, c0.time);
    const double limit = sol.valid_until();
    const bool capped = sol.multivalued || sol.caustic.t_star.has_value();
    std::vector<double> kept;
    for (double t : times)
        if (t <= limit && !(capped && t >= limit)) kept.push_back(t);
    CirculationTrace trace;
    if (!kept.empty()) {
        const MomentumProvider m = [&sol](const Vec& q, double t) { return momentum_at(sol, q, t); };
        trace = kelvin_trace(m, h.mass(), c0, kept, opts);
    }
    if (kept.size() < times.size() && !trace.truncated) {
        trace.truncated = true;
        trace.truncated_at = limit;
    }
    return trace;
}

MadelungField::MadelungField(const WaveFunction& wf, double density_floor)
    : table_(wf.grid, wf.psi, Outside::periodic), hbar_(wf.hbar) {
    if (wf.grid.dim() != 2) throw ConfigError("Madelung velocity fields are two-dimensional here");
    double peak = 0.0;
    for (const cplx& z : wf.psi) peak = std::max(peak, std::norm(z));
    rho_floor_ = density_floor * peak;
}

std::optional<Vec> MadelungField::momentum(const Vec& q, bool masked) const {
    const HermiteSample<cplx> s = table_.evaluate(q);
    const double rho = std::norm(s.value);
    if (masked ? rho < rho_floor_ : !(rho > 0.0)) return std::nullopt;
    return Vec{hbar_ * std::imag(std::conj(s.value) * s.gradient[0]) / rho,
               hbar_ * std::imag(std::conj(s.value) * s.gradient[1]) / rho};
}

CirculationTrace kelvin_trace_qt(const Hamiltonian& h, const WaveFunction& psi0, const Contour& c0,
                                 const std::vector<double>& times, const KelvinQtOptions& opts) {
    if (h.dim() != 2 || psi0.grid.dim() != 2) throw ConfigError("Kelvin traces need a two-dimensional state");
    if (!(opts.dt > 0.0)) throw ConfigError("time step must be positive");
    validate_contour(c0);
    check_times(times, c0.time);
    if (c0.time != psi0.time) throw ConfigError("contour and state must start at the same time");

    const SplitStep stepper(h, psi0.grid, psi0.hbar, opts.dt);
    const double macro = 2.0 * opts.dt;
    const double inv_mass = 1.0 / h.mass();
    Contour c = c0;
    if (c.reference_segment <= 0.0) c.reference_segment = max_segment(c);
    WaveFunction wf = psi0;
    auto field = std::make_unique<MadelungField>(wf, opts.density_floor);
    long macro_done = 0;

    CirculationTrace trace;
    std::optional<long> last_winding;
    for (double t : times) {
        const auto target = static_cast<long>(std::llround((t - psi0.time) / macro));
        try {
            while (macro_done < target) {
                WaveFunction mid = wf;
                stepper.step(mid.psi);
                WaveFunction end = mid;
                stepper.step(end.psi);
                const MadelungField mid_field(mid, opts.density_floor);
                const MadelungField end_field(end, opts.density_floor);
                auto velocity = [inv_mass](const MadelungField& f) {
                    return [&f, inv_mass](const Vec& q) -> std::optional<Vec> {
                        const auto p = f.momentum(q, false);
                        if (!p) return std::nullopt;
                        return inv_mass * *p;
                    };
                };
                rk4_step(c.points, velocity(*field), velocity(mid_field), velocity(end_field), macro,
                         opts.advect.exec);
                ++macro_done;
                end.time = psi0.time + macro * static_cast<double>(macro_done);
                c.time = end.time;
                wf = std::move(end);
                field = std::make_unique<MadelungField>(wf, opts.density_floor);
                resample(c, opts.advect);
            }
        } catch (const AdvectionError&) {
            trace.truncated = true;
            trace.truncated_at = c.time;
            break;
        }

        double value = std::numeric_limits<double>::quiet_NaN();
        std::string flag;
        try {
            value = circulation([&](const Vec& q) { return field->momentum(q); }, c);
        } catch (const CirculationUndefined&) {
            flag = "mask";
        }
        std::optional<long> winding;
        double residue = std::numeric_limits<double>::quiet_NaN();
        try {
            const WindingResult w = winding_number([&](const Vec& q) { return field->psi(q); }, c);
            winding = w.winding;
            residue = w.residue;
        } catch (const UnreliableWinding&) {
            flag += flag.empty() ? "unreliable-winding" : ";unreliable-winding";
        }
        record(trace, c, value, flag, winding, residue);
        if (winding && last_winding && *winding != *last_winding) {
            std::size_t weakest = 0;
            double smallest = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < c.points.size(); ++j) {
                const double a = std::abs(field->psi(c.points[j]));
                if (a < smallest) {
                    smallest = a;
                    weakest = j;
                }
            }
            trace.jumps.push_back({c.time, *last_winding, *winding, c.points[weakest]});
        }
        if (winding) last_winding = winding;
    }
    finish_drift(trace);
    return trace;
}

WindingResult winding_number(const std::function<cplx(const Vec&)>& psi, const Contour& c, double amplitude_floor) {
    validate_contour(c);
    ComplexField samples(c.points.size());
    for (std::size_t j = 0; j < samples.size(); ++j) samples[j] = psi(c.points[j]);
    return winding_from_samples(samples, amplitude_floor);
}

WindingResult winding_number(const WaveFunction& wf, const Contour& c, double amplitude_floor) {
    if (wf.grid.dim() != 2) throw ConfigError("winding numbers need a two-dimensional state");
    const HermiteTable<cplx> table(wf.grid, wf.psi, Outside::periodic);
    return winding_number([&table](const Vec& q) { return table.value(q); }, c, amplitude_floor);
}

double symplectic_vorticity_deviation(std::size_t samples, std::uint64_t seed) {
    const auto g = [](double, double p) { return Vec{p, 0.0}; };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    const double step = 1e-3;
    double worst = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double q = coord(rng), p = coord(rng);
        const double dgq_dp = (g(q, p + step)[0] - g(q, p - step)[0]) / (2.0 * step);
        const double dgp_dq = (g(q + step, p)[1] - g(q - step, p)[1]) / (2.0 * step);
        worst = std::max(worst, std::abs(dgq_dp - dgp_dq - 1.0));
    }
    return worst;
}

}  // namespace qlab
