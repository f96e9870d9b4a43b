#pragma once

#include <complex>
#include <vector>

#include "qlab/grid.hpp"

namespace qlab {

// Unnormalized forward / backward DFT over all axes of a grid, executed in place.
// Plans are created once per shape and shared; execution is thread-safe.
void fft_forward(const Grid& grid, ComplexField& data);
void fft_backward(const Grid& grid, ComplexField& data);

// One-dimensional transforms of any length.
void fft_forward(ComplexField& data);
void fft_backward(ComplexField& data);

}  // namespace qlab
