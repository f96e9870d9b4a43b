#include "qlab/grid.hpp"

#include <cmath>
#include <numbers>

#include "qlab/error.hpp"
#include "qlab/fft.hpp"

namespace qlab {

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

Grid::Grid(int dim, std::array<double, 2> extent, std::array<std::size_t, 2> points)
    : dim_(dim), extent_(extent), points_(points) {
    if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
    if (dim == 1) {
        extent_[1] = 0.0;
        points_[1] = 1;
    }
    for (int a = 0; a < dim; ++a) {
        if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
            throw ConfigError("grid extent must be positive and finite");
        if (!is_power_of_two(points_[a]))
            throw ConfigError("grid points per axis must be a power of two, got " + std::to_string(points_[a]));
    }
}

Grid Grid::line(double extent, std::size_t points) { return Grid(1, {extent, 0.0}, {points, 1}); }
Grid Grid::square(double extent, std::size_t points) { return Grid(2, {extent, extent}, {points, points}); }

double Grid::cell_measure() const { return dim_ == 1 ? spacing(0) : spacing(0) * spacing(1); }
double Grid::volume() const { return dim_ == 1 ? extent_[0] : extent_[0] * extent_[1]; }

Vec Grid::point(std::size_t flat) const {
    if (dim_ == 1) return {coord(0, flat), 0.0};
    return {coord(0, flat / points_[1]), coord(1, flat % points_[1])};
}

std::array<std::size_t, 2> Grid::unflatten(std::size_t flat) const {
    if (dim_ == 1) return {flat, 0};
    return {flat / points_[1], flat % points_[1]};
}

std::size_t Grid::wrap(int axis, long long i) const {
    const auto n = static_cast<long long>(points_[axis]);
    return static_cast<std::size_t>(((i % n) + n) % n);
}

std::vector<double> Grid::wavenumbers(int axis) const {
    const std::size_t n = points_[axis];
    const double base = 2.0 * std::numbers::pi / extent_[axis];
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto m = static_cast<long long>(j);
        k[j] = base * static_cast<double>(j < n / 2 ? m : m - static_cast<long long>(n));
    }
    return k;
}

void NumericsConfig::validate() const {
    if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
    if (!(density_floor > 0.0 && density_floor < 1e-2)) throw ConfigError("density floor must lie in (0, 1e-2)");
    if (!(caustic_threshold > 0.0)) throw ConfigError("caustic threshold must be positive");
}

namespace {

// Multiplies the spectrum by (i k_axis)^order. Odd orders drop the Nyquist mode so that
// the derivative of a real field stays real.
void apply_derivative_symbol(const Grid& grid, ComplexField& spec, int axis, int order) {
    const auto k = grid.wavenumbers(axis);
    const std::size_t n_axis = grid.points(axis);
    const std::size_t n1 = grid.dim() == 2 ? grid.points(1) : 1;
    for (std::size_t flat = 0; flat < spec.size(); ++flat) {
        const std::size_t j = axis == 0 ? flat / n1 : flat % n1;
        std::complex<double> symbol;
        if (order == 1)
            symbol = (j == n_axis / 2) ? 0.0 : std::complex<double>(0.0, k[j]);
        else
            symbol = -k[j] * k[j];
        spec[flat] *= symbol;
    }
}

void check_derivative_args(const Grid& grid, std::size_t size, int axis, int order) {
    if (axis < 0 || axis >= grid.dim()) throw ConfigError("derivative axis out of range");
    if (order != 1 && order != 2) throw ConfigError("derivative order must be 1 or 2");
    if (size != grid.size()) throw ConfigError("field size does not match grid");
}

}  // namespace

ComplexField spectral_derivative(const Grid& grid, const ComplexField& field, int axis, int order) {
    check_derivative_args(grid, field.size(), axis, order);
    ComplexField spec = field;
    fft_forward(grid, spec);
    apply_derivative_symbol(grid, spec, axis, order);
    fft_backward(grid, spec);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto& v : spec) v *= scale;
    return spec;
}

RealField spectral_derivative(const Grid& grid, const RealField& field, int axis, int order) {
    check_derivative_args(grid, field.size(), axis, order);
    ComplexField tmp(field.begin(), field.end());
    tmp = spectral_derivative(grid, tmp, axis, order);
    RealField out(field.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = tmp[i].real();
    return out;
}

ComplexField spectral_laplacian(const Grid& grid, const ComplexField& field) {
    if (field.size() != grid.size()) throw ConfigError("field size does not match grid");
    ComplexField spec = field;
    fft_forward(grid, spec);
    const auto k0 = grid.wavenumbers(0);
    const auto k1 = grid.dim() == 2 ? grid.wavenumbers(1) : std::vector<double>{0.0};
    const std::size_t n1 = grid.dim() == 2 ? grid.points(1) : 1;
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t flat = 0; flat < spec.size(); ++flat) {
        const double a = k0[flat / n1];
        const double b = k1[flat % n1];
        spec[flat] *= -(a * a + b * b) * scale;
    }
    fft_backward(grid, spec);
    return spec;
}

RealField spectral_laplacian(const Grid& grid, const RealField& field) {
    ComplexField tmp(field.begin(), field.end());
    tmp = spectral_laplacian(grid, tmp);
    RealField out(field.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = tmp[i].real();
    return out;
}

RealField spectral_shift(const Grid& grid, const RealField& field, int axis, double shift) {
    if (axis < 0 || axis >= grid.dim()) throw ConfigError("shift axis out of range");
    if (field.size() != grid.size()) throw ConfigError("field size does not match grid");
    ComplexField spec(field.begin(), field.end());
    fft_forward(grid, spec);
    const auto k = grid.wavenumbers(axis);
    const std::size_t n_axis = grid.points(axis);
    const std::size_t n1 = grid.dim() == 2 ? grid.points(1) : 1;
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t flat = 0; flat < spec.size(); ++flat) {
        const std::size_t j = axis == 0 ? flat / n1 : flat % n1;
        // The Nyquist mode is shifted by its real part only, keeping the result real.
        const std::complex<double> phase =
            j == n_axis / 2 ? std::complex<double>(std::cos(k[j] * shift), 0.0) : std::polar(1.0, -k[j] * shift);
        spec[flat] *= phase * scale;
    }
    fft_backward(grid, spec);
    RealField out(field.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
    return out;
}

double quadrature(const Grid& grid, const RealField& field) {
    double sum = 0.0;
    for (double v : field) sum += v;
    return grid.cell_measure() * sum;
}

std::complex<double> quadrature(const Grid& grid, const ComplexField& field) {
    std::complex<double> sum = 0.0;
    for (const auto& v : field) sum += v;
    return grid.cell_measure() * sum;
}

double spectral_energy(const Grid& grid, const ComplexField& field) {
    ComplexField spec = field;
    fft_forward(grid, spec);
    double sum = 0.0;
    for (const auto& v : spec) sum += std::norm(v);
    return grid.cell_measure() * sum / static_cast<double>(grid.size());
}

}  // namespace qlab
