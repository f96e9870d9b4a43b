#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qlab/error.hpp"
#include "qlab/grid.hpp"

namespace qlab {

enum class Outside { zero, periodic };

template <typename T>
struct HermiteSample {
    T value{};
    std::array<T, 2> gradient{};
};

// Piecewise cubic (1D) / bicubic (2D) Hermite interpolant of periodic samples. Node
// derivatives come from spectral differentiation, so the interpolant is C1 and fourth-order
// accurate for smooth data.
template <typename T>
class HermiteTable {
public:
    HermiteTable(const Grid& grid, std::vector<T> values, Outside outside = Outside::zero)
        : grid_(grid), f_(std::move(values)), outside_(outside) {
        if (f_.size() != grid.size()) throw ConfigError("interpolation table size does not match grid");
        fx_ = spectral_derivative(grid_, f_, 0, 1);
        if (grid_.dim() == 2) {
            fy_ = spectral_derivative(grid_, f_, 1, 1);
            fxy_ = spectral_derivative(grid_, fx_, 1, 1);
        }
    }

    const Grid& grid() const { return grid_; }
    const std::vector<T>& values() const { return f_; }

    T value(const Vec& q) const { return evaluate(q).value; }

    HermiteSample<T> evaluate(const Vec& q) const {
        std::array<std::size_t, 2> lo{}, hi{};
        std::array<double, 2> s{};
        for (int a = 0; a < grid_.dim(); ++a) {
            const double h = grid_.spacing(a);
            double x = (q[a] + 0.5 * grid_.extent(a)) / h;
            const auto n = static_cast<double>(grid_.points(a));
            if (outside_ == Outside::zero) {
                if (!(x >= 0.0 && x < n)) return {};
            } else {
                x -= n * std::floor(x / n);
            }
            double cell = std::floor(x);
            if (cell >= n) cell = n - 1.0;
            s[a] = x - cell;
            lo[a] = static_cast<std::size_t>(cell);
            hi[a] = grid_.wrap(a, static_cast<long long>(lo[a]) + 1);
        }
        return grid_.dim() == 1 ? eval1(lo[0], hi[0], s[0]) : eval2(lo, hi, s);
    }

private:
    struct Basis {
        double h0, h1, g0, g1;      // value basis: H0, H1 (values), G0, G1 (slopes)
        double dh0, dh1, dg0, dg1;  // derivatives with respect to the cell coordinate
    };

    static Basis basis(double s) {
        const double s2 = s * s, s3 = s2 * s;
        return {2 * s3 - 3 * s2 + 1, -2 * s3 + 3 * s2, s3 - 2 * s2 + s, s3 - s2,
                6 * s2 - 6 * s,      -6 * s2 + 6 * s,  3 * s2 - 4 * s + 1, 3 * s2 - 2 * s};
    }

    HermiteSample<T> eval1(std::size_t i0, std::size_t i1, double s) const {
        const double h = grid_.spacing(0);
        const Basis b = basis(s);
        HermiteSample<T> out;
        out.value = b.h0 * f_[i0] + b.h1 * f_[i1] + h * (b.g0 * fx_[i0] + b.g1 * fx_[i1]);
        out.gradient[0] = (b.dh0 * f_[i0] + b.dh1 * f_[i1]) / h + (b.dg0 * fx_[i0] + b.dg1 * fx_[i1]);
        return out;
    }

    HermiteSample<T> eval2(const std::array<std::size_t, 2>& lo, const std::array<std::size_t, 2>& hi,
                           const std::array<double, 2>& s) const {
        const double hx = grid_.spacing(0), hy = grid_.spacing(1);
        const Basis bx = basis(s[0]);
        const Basis by = basis(s[1]);
        const double Hx[2] = {bx.h0, bx.h1}, Gx[2] = {bx.g0, bx.g1};
        const double dHx[2] = {bx.dh0, bx.dh1}, dGx[2] = {bx.dg0, bx.dg1};
        const double Hy[2] = {by.h0, by.h1}, Gy[2] = {by.g0, by.g1};
        const double dHy[2] = {by.dh0, by.dh1}, dGy[2] = {by.dg0, by.dg1};
        const std::size_t ix[2] = {lo[0], hi[0]}, iy[2] = {lo[1], hi[1]};
        HermiteSample<T> out;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const std::size_t k = grid_.index(ix[a], iy[b]);
                const T f = f_[k], fx = hx * fx_[k], fy = hy * fy_[k], fxy = hx * hy * fxy_[k];
                out.value += Hx[a] * Hy[b] * f + Gx[a] * Hy[b] * fx + Hx[a] * Gy[b] * fy + Gx[a] * Gy[b] * fxy;
                out.gradient[0] += (dHx[a] * Hy[b] * f + dGx[a] * Hy[b] * fx + dHx[a] * Gy[b] * fy +
                                    dGx[a] * Gy[b] * fxy) / hx;
                out.gradient[1] += (Hx[a] * dHy[b] * f + Gx[a] * dHy[b] * fx + Hx[a] * dGy[b] * fy +
                                    Gx[a] * dGy[b] * fxy) / hy;
            }
        }
        return out;
    }

    Grid grid_;
    std::vector<T> f_, fx_, fy_, fxy_;
    Outside outside_;
};

}  // namespace qlab
