#pragma once

#include <array>

#include "qlab/covered_field.hpp"
#include "qlab/projection_qa.hpp"

namespace qlab {

// Density functionals integrate over nodes with rho >= floor * max(rho) and renormalize by
// the retained mass. unreliable is set when less than half of the mass is retained.
struct FunctionalValue {
    double value = 0.0;
    double retained_fraction = 1.0;
    bool unreliable = false;
};

// I[rho] = integral of rho |grad rho / rho|^2
FunctionalValue fisher_info(const ConfigDensity& rho, double floor = 1e-12);
// -integral of rho ln rho
FunctionalValue entropy(const ConfigDensity& rho, double floor = 1e-12);

// G[rho, chi] = -integral of rho ln(rho / chi); never positive. Throws DivergenceUndefined
// when chi vanishes where rho does not.
double kl_divergence(const ConfigDensity& rho, const ConfigDensity& chi, double floor = 1e-12);
// G[rho, rho shifted by dq along axis], the shift done spectrally.
double kl_shift(const ConfigDensity& rho, int axis, double dq, double floor = 1e-12);

// L0 = B0 sum_k [-(d_k rho)^2 / 2 rho^2 + d_k d_k rho / rho] and the equivalent
// 2 B0 lap(sqrt rho) / sqrt rho, both zero off the mask.
struct L0Term {
    RealField rho_form;
    RealField sqrt_form;
    Mask mask;
    double max_disagreement = 0.0;
};
L0Term l0_term(const ConfigDensity& rho, double b0, double floor = 1e-12);

struct DensityFunctionalReport {
    double fisher = 0.0;
    double entropy = 0.0;
    // |integral rho L0 + (B0 / 2) I|
    double l0_identity_residual = 0.0;
    // |integral d_k rho L0| per axis
    std::array<double, 2> constraint_residual{0.0, 0.0};
    // |integral B0 lap rho|, the part of rho L0 that integrates to zero
    double null_lagrangian_residual = 0.0;
    double form_disagreement = 0.0;
    double retained_fraction = 1.0;
    bool unreliable = false;
};
DensityFunctionalReport verify_l0_conditions(const ConfigDensity& rho, double b0, double floor = 1e-12);

}  // namespace qlab
