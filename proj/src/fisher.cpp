#include "qlab/fisher.hpp"

#include <algorithm>
#include <cmath>

#include "qlab/error.hpp"

namespace qlab {

namespace {

struct Masked {
    Mask mask;
    double total = 0.0;
    double retained = 0.0;
};

Masked mask_of(const ConfigDensity& rho, double floor) {
    if (rho.values.size() != rho.grid.size()) throw ConfigError("density size does not match grid");
    double peak = 0.0;
    for (double v : rho.values) {
        if (v < 0.0 || !std::isfinite(v)) throw ConfigError("density must be finite and non-negative");
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) throw ConfigError("density is identically zero");
    Masked m;
    m.mask.assign(rho.values.size(), 0);
    RealField kept(rho.values.size(), 0.0);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        m.mask[i] = rho.values[i] >= floor * peak && rho.values[i] > 0.0;
        if (m.mask[i]) kept[i] = rho.values[i];
    }
    m.total = quadrature(rho.grid, rho.values);
    m.retained = quadrature(rho.grid, kept);
    return m;
}

bool is_constant(const RealField& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

FunctionalValue finish(const Grid& grid, const RealField& integrand, const Masked& m) {
    FunctionalValue out;
    out.retained_fraction = m.retained / m.total;
    out.unreliable = out.retained_fraction < 0.5;
    out.value = quadrature(grid, integrand) / m.retained;
    return out;
}

}  // namespace

FunctionalValue fisher_info(const ConfigDensity& rho, double floor) {
    const Masked m = mask_of(rho, floor);
    const Grid& g = rho.grid;
    RealField integrand(g.size(), 0.0);
    if (!is_constant(rho.values)) {
        for (int a = 0; a < g.dim(); ++a) {
            const RealField d = spectral_derivative(g, rho.values, a, 1);
            for (std::size_t i = 0; i < g.size(); ++i)
                if (m.mask[i]) integrand[i] += d[i] * d[i] / rho.values[i];
        }
    }
    return finish(g, integrand, m);
}

FunctionalValue entropy(const ConfigDensity& rho, double floor) {
    const Masked m = mask_of(rho, floor);
    const Grid& g = rho.grid;
    RealField integrand(g.size(), 0.0);
    // Entropy of the renormalized density: -int (rho/R) ln(rho/R) = -(1/R) int rho ln rho + ln R.
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m.mask[i]) integrand[i] = -rho.values[i] * std::log(rho.values[i]);
    FunctionalValue out = finish(g, integrand, m);
    out.value += std::log(m.retained);
    return out;
}

double kl_divergence(const ConfigDensity& rho, const ConfigDensity& chi, double floor) {
    if (!(rho.grid == chi.grid)) throw ConfigError("densities live on different grids");
    const Masked m = mask_of(rho, floor);
    const Grid& g = rho.grid;
    RealField integrand(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m.mask[i]) continue;
        if (!(chi.values[i] > 0.0)) throw DivergenceUndefined("prior vanishes on the support of the density");
        integrand[i] = -rho.values[i] * std::log(rho.values[i] / chi.values[i]);
    }
    return quadrature(g, integrand);
}

double kl_shift(const ConfigDensity& rho, int axis, double dq, double floor) {
    if (axis < 0 || axis >= rho.grid.dim()) throw ConfigError("shift axis out of range");
    if (dq == 0.0) return 0.0;
    ConfigDensity shifted{rho.grid, spectral_shift(rho.grid, rho.values, axis, dq), rho.time};
    return kl_divergence(rho, shifted, floor);
}

L0Term l0_term(const ConfigDensity& rho, double b0, double floor) {
    const Masked m = mask_of(rho, floor);
    const Grid& g = rho.grid;
    L0Term out;
    out.mask = m.mask;
    out.rho_form.assign(g.size(), 0.0);
    out.sqrt_form.assign(g.size(), 0.0);
    if (is_constant(rho.values)) return out;

    RealField amp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) amp[i] = std::sqrt(rho.values[i]);
    const RealField lap_amp = spectral_laplacian(g, amp);
    for (int a = 0; a < g.dim(); ++a) {
        const RealField d1 = spectral_derivative(g, rho.values, a, 1);
        const RealField d2 = spectral_derivative(g, rho.values, a, 2);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!m.mask[i]) continue;
            const double r = rho.values[i];
            out.rho_form[i] += b0 * (-d1[i] * d1[i] / (2.0 * r * r) + d2[i] / r);
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!m.mask[i]) continue;
        out.sqrt_form[i] = 2.0 * b0 * lap_amp[i] / amp[i];
        out.max_disagreement = std::max(out.max_disagreement, std::abs(out.rho_form[i] - out.sqrt_form[i]));
    }
    return out;
}

DensityFunctionalReport verify_l0_conditions(const ConfigDensity& rho, double b0, double floor) {
    const Grid& g = rho.grid;
    DensityFunctionalReport rep;
    const FunctionalValue fi = fisher_info(rho, floor);
    rep.fisher = fi.value;
    rep.retained_fraction = fi.retained_fraction;
    rep.unreliable = fi.unreliable;
    rep.entropy = entropy(rho, floor).value;
    const L0Term l0 = l0_term(rho, b0, floor);
    rep.form_disagreement = l0.max_disagreement;
    if (is_constant(rho.values)) return rep;

    const double norm = quadrature(g, rho.values);
    RealField w(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = rho.values[i] * l0.rho_form[i];
    rep.l0_identity_residual = std::abs(quadrature(g, w) / norm + 0.5 * b0 * rep.fisher);
    for (int a = 0; a < g.dim(); ++a) {
        const RealField d1 = spectral_derivative(g, rho.values, a, 1);
        for (std::size_t i = 0; i < g.size(); ++i) w[i] = d1[i] * l0.rho_form[i];
        rep.constraint_residual[a] = std::abs(quadrature(g, w));
    }
    const RealField lap = spectral_laplacian(g, rho.values);
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = b0 * lap[i];
    rep.null_lagrangian_residual = std::abs(quadrature(g, w));
    return rep;
}

}  // namespace qlab
