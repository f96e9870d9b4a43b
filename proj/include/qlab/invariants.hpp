#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qlab/hamiltonian.hpp"
#include "qlab/interp.hpp"
#include "qlab/parallel.hpp"
#include "qlab/projection_qa.hpp"
#include "qlab/quantum.hpp"
#include "qlab/vec.hpp"

namespace qlab {

// Closed polyline of material points; the last vertex connects to the first. Vertices are
// treated as samples of a smooth periodic curve in a uniform parameter, so tangents and
// resampling are spectral.
struct Contour {
    std::vector<Vec> points;
    double time = 0.0;
    // Longest segment at creation; resampling bounds segments by a multiple of it.
    double reference_segment = 0.0;
};

inline constexpr std::size_t kMinContourPoints = 64;

// Counter-clockwise unless clockwise is set. A phase-space circle traversed with the
// harmonic flow is clockwise in the (q, p) plane and then carries +area for p dq.
Contour circle_contour(const Vec& center, double radius, std::size_t points = 256, double time = 0.0,
                       bool clockwise = false);
// Throws ConfigError for fewer than kMinContourPoints vertices or non-finite points.
void validate_contour(const Contour& c);
// dq/ds at every vertex for the parameter s in [0, 2 pi).
std::vector<Vec> contour_tangent(const Contour& c);
// Band-limited interpolation onto twice as many vertices; existing vertices are kept.
Contour refine_contour(const Contour& c);
double max_segment(const Contour& c);

// Vertex velocity at (q, t); nullopt where the field is not known.
using FlowField = std::function<std::optional<Vec>(const Vec& q, double t)>;
// Covector field on the plane (a momentum or a gradient); nullopt on the mask.
using CovectorField = std::function<std::optional<Vec>(const Vec& q)>;

struct AdvectOptions {
    double dt = 1e-3;
    // Resample when the longest segment exceeds this multiple of the initial longest one.
    double max_stretch = 2.0;
    std::size_t max_points = 1 << 16;
    Exec exec = Exec::parallel;
};

// RK4 for every vertex from c0.time to t. Throws AdvectionError when a vertex leaves the
// region where the velocity is known or resampling would exceed max_points.
Contour advect_contour(const FlowField& v, const Contour& c0, double t, const AdvectOptions& opts = {});

// Periodic trapezoid rule for the line integral of m . dq. Throws CirculationUndefined when
// the field is unknown at a vertex.
double circulation(const CovectorField& m, const Contour& c);

struct WindingJump {
    double time = 0.0;
    long from = 0;
    long to = 0;
    Vec location{};  // vertex with the smallest amplitude at the later sample
};

inline constexpr double kDriftAbsoluteBelow = 1e-6;

struct CirculationTrace {
    std::vector<double> times;
    std::vector<double> circulation;  // NaN where undefined
    std::vector<std::optional<long>> winding;
    std::vector<double> winding_residue;
    std::vector<std::string> flags;  // empty when the sample is clean
    std::vector<std::size_t> vertex_count;
    std::vector<WindingJump> jumps;
    // max |I(t) - I(0)| / |I(0)|; absolute when |I(0)| < kDriftAbsoluteBelow
    double relative_drift = 0.0;
    bool truncated = false;
    std::optional<double> truncated_at;
};

// Phase-space circulation of p dq for a one-dimensional Hamiltonian. Contour points are
// (q, p) pairs; times must be non-decreasing and start at or after c0.time.
CirculationTrace poincare_invariant(const Hamiltonian& h, const Contour& c0, const std::vector<double>& times,
                                    const AdvectOptions& opts = {});

// Time-dependent momentum field and the circulation of M along the contour moved by M / m.
using MomentumProvider = std::function<std::optional<Vec>(const Vec& q, double t)>;
CirculationTrace kelvin_trace(const MomentumProvider& m, double mass, const Contour& c0,
                              const std::vector<double>& times, const AdvectOptions& opts = {});

// Kelvin trace on a two-dimensional QA run. Samples at or beyond the last valid time are
// dropped and the trace is marked truncated.
CirculationTrace kelvin_trace_qa(const Hamiltonian& h, const QaSolution& sol, const Contour& c0,
                                 const std::vector<double>& times, const AdvectOptions& opts = {});

struct KelvinQtOptions {
    double dt = 1e-3;  // Schroedinger step; the contour moves with twice this step
    double density_floor = 1e-8;
    AdvectOptions advect{};
};

// Evolves psi0 with the split-step solver, moves the contour with the Madelung velocity and
// records circulation of grad S and the winding of psi. Samples where the contour meets the
// density mask are flagged; the trace continues.
CirculationTrace kelvin_trace_qt(const Hamiltonian& h, const WaveFunction& psi0, const Contour& c0,
                                 const std::vector<double>& times, const KelvinQtOptions& opts = {});

struct WindingResult {
    long winding = 0;
    double value = 0.0;    // (1/2 pi) x accumulated phase before rounding
    double residue = 0.0;  // |value - winding|
};

inline constexpr double kWindingResidueLimit = 0.05;

// Accumulated phase from the spectral derivative of psi along the contour parameter.
// Throws UnreliableWinding when the residue reaches the limit or |psi| <= amplitude_floor
// at a vertex.
WindingResult winding_number(const std::function<std::complex<double>(const Vec&)>& psi, const Contour& c,
                             double amplitude_floor = 1e-12);
WindingResult winding_number(const WaveFunction& wf, const Contour& c, double amplitude_floor = 1e-12);

// Madelung velocity field of a two-dimensional state via Hermite interpolation of psi.
class MadelungField {
public:
    MadelungField(const WaveFunction& wf, double density_floor = 1e-8);
    // grad S; nullopt below the density floor, or only where psi = 0 when unmasked.
    std::optional<Vec> momentum(const Vec& q, bool masked = true) const;
    std::complex<double> psi(const Vec& q) const { return table_.value(q); }

private:
    HermiteTable<std::complex<double>> table_;
    double hbar_;
    double rho_floor_;
};

// Vorticity of G = (p, 0) in the (q, p) plane by centred differences, d G_q / d p -
// d G_p / d q, at `samples` random points; returns max |value - 1|.
double symplectic_vorticity_deviation(std::size_t samples, std::uint64_t seed = 1);

}  // namespace qlab
