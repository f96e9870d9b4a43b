#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qlab/grid.hpp"

namespace qlab {

// Coverage mask for fields that are only known on part of a grid (1 = known).
using Mask = std::vector<std::uint8_t>;

// Tensor-product cubic convolution (Keys, a = -1/2) through the covered nodes around q,
// falling back to (bi)linear when the 4-point stencil is incomplete. Returns nullopt when
// even the linear stencil is not covered or q is outside the lattice. Exact for quadratics.
std::optional<double> sample_covered(const Grid& grid, const RealField& values, const Mask& covered, const Vec& q);

// Fourth-order centred finite difference along an axis, valid where the 5-point stencil is
// covered and does not cross the domain edge (non-periodic data). order in {1, 2}.
struct CoveredDerivative {
    RealField values;
    Mask valid;
};
CoveredDerivative fd_derivative(const Grid& grid, const RealField& values, const Mask& covered, int axis, int order);

}  // namespace qlab
