#include "qlab/covered_field.hpp"

#include <array>
#include <cmath>

#include "qlab/error.hpp"

namespace qlab {

namespace {

// Keys cubic convolution weights for offsets -1, 0, 1, 2 at fractional position s.
std::array<double, 4> keys_weights(double s) {
    const double s2 = s * s, s3 = s2 * s;
    return {-0.5 * s3 + s2 - 0.5 * s, 1.5 * s3 - 2.5 * s2 + 1.0, -1.5 * s3 + 2.0 * s2 + 0.5 * s, 0.5 * s3 - 0.5 * s2};
}

}  // namespace

std::optional<double> sample_covered(const Grid& grid, const RealField& values, const Mask& covered, const Vec& q) {
    const int dim = grid.dim();
    std::array<long long, 2> base{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
    std::array<long long, 2> n{static_cast<long long>(grid.points(0)), static_cast<long long>(grid.points(1))};
    for (int a = 0; a < dim; ++a) {
        const double x = (q[a] + 0.5 * grid.extent(a)) / grid.spacing(a);
        if (!(x >= 0.0 && x <= static_cast<double>(n[a] - 1))) return std::nullopt;
        double cell = std::floor(x);
        if (cell >= static_cast<double>(n[a] - 1)) cell = static_cast<double>(n[a] - 2);
        base[a] = static_cast<long long>(cell);
        frac[a] = x - cell;
    }
    auto known = [&](long long i0, long long i1) {
        if (i0 < 0 || i0 >= n[0]) return false;
        if (dim == 2 && (i1 < 0 || i1 >= n[1])) return false;
        return covered[grid.index(static_cast<std::size_t>(i0), static_cast<std::size_t>(dim == 2 ? i1 : 0))] != 0;
    };
    auto at = [&](long long i0, long long i1) {
        return values[grid.index(static_cast<std::size_t>(i0), static_cast<std::size_t>(dim == 2 ? i1 : 0))];
    };

    const int span1 = dim == 2 ? 4 : 1;
    bool cubic = true;
    for (int a = -1; a <= 2 && cubic; ++a)
        for (int b = 0; b < span1 && cubic; ++b) cubic = known(base[0] + a, dim == 2 ? base[1] + b - 1 : 0);
    if (cubic) {
        const auto w0 = keys_weights(frac[0]);
        const auto w1 = dim == 2 ? keys_weights(frac[1]) : std::array<double, 4>{0.0, 1.0, 0.0, 0.0};
        double sum = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < span1; ++b) {
                const double w = w0[a] * (dim == 2 ? w1[b] : 1.0);
                sum += w * at(base[0] + a - 1, dim == 2 ? base[1] + b - 1 : 0);
            }
        return sum;
    }

    const int span_lin = dim == 2 ? 2 : 1;
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b < span_lin; ++b)
            if (!known(base[0] + a, dim == 2 ? base[1] + b : 0)) return std::nullopt;
    if (dim == 1) return (1.0 - frac[0]) * at(base[0], 0) + frac[0] * at(base[0] + 1, 0);
    return (1.0 - frac[0]) * ((1.0 - frac[1]) * at(base[0], base[1]) + frac[1] * at(base[0], base[1] + 1)) +
           frac[0] * ((1.0 - frac[1]) * at(base[0] + 1, base[1]) + frac[1] * at(base[0] + 1, base[1] + 1));
}

CoveredDerivative fd_derivative(const Grid& grid, const RealField& values, const Mask& covered, int axis, int order) {
    if (axis < 0 || axis >= grid.dim()) throw ConfigError("derivative axis out of range");
    if (order != 1 && order != 2) throw ConfigError("derivative order must be 1 or 2");
    const double h = grid.spacing(axis);
    static constexpr double c1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
    static constexpr double c2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    const double* c = order == 1 ? c1 : c2;
    const double scale = order == 1 ? 1.0 / h : 1.0 / (h * h);
    CoveredDerivative out{RealField(values.size(), 0.0), Mask(values.size(), 0)};
    const auto n_axis = static_cast<long long>(grid.points(axis));
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        const auto idx = grid.unflatten(flat);
        const auto i = static_cast<long long>(idx[axis]);
        if (i < 2 || i > n_axis - 3) continue;
        double sum = 0.0;
        bool ok = true;
        for (int k = -2; k <= 2 && ok; ++k) {
            auto nb = idx;
            nb[axis] = static_cast<std::size_t>(i + k);
            const std::size_t j = grid.index(nb[0], nb[1]);
            ok = covered[j] != 0;
            sum += c[k + 2] * values[j];
        }
        if (!ok) continue;
        out.values[flat] = sum * scale;
        out.valid[flat] = 1;
    }
    return out;
}

}  // namespace qlab
