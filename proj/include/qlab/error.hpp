#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid grid, numerics or scenario parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Non-finite state or unbounded growth during integration.
class NumericalBlowup : public Error {
public:
    using Error::Error;
};

// Requested time lies at or beyond the first caustic of a QA evolution.
class TrajectoryUndefined : public Error {
public:
    using Error::Error;
};

// A contour vertex or trajectory left the region where the field is known.
class AdvectionError : public Error {
public:
    using Error::Error;
};

// Zero of the amplitude inside the support of a classical-wave evolution.
class SingularAmplitude : public Error {
public:
    using Error::Error;
};

// Kullback-Leibler divergence with a prior that vanishes on the support of rho.
class DivergenceUndefined : public Error {
public:
    using Error::Error;
};

class UnreliableWinding : public Error {
public:
    using Error::Error;
};

class CirculationUndefined : public Error {
public:
    using Error::Error;
};

}  // namespace qlab
