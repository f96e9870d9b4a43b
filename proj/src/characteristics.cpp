#include "qlab/characteristics.hpp"

#include <cmath>

#include "qlab/error.hpp"

namespace qlab {

int substeps(double t, double dt) {
    const double ratio = std::abs(t) / dt;
    const int n = static_cast<int>(std::ceil(ratio - 1e-9));
    return n < 1 ? 1 : n;
}

namespace {

struct Derivative {
    Vec dq, dp;
    double dS;
    Mat ddq, ddp;
};

Derivative rhs(const Hamiltonian& h, const CharacteristicState& s, bool with_tangent) {
    Derivative d;
    d.dq = h.velocity(s.p);
    d.dp = h.force(s.q);
    d.dS = h.lagrangian(s.q, s.p);
    if (with_tangent) {
        d.ddq = (1.0 / h.mass()) * s.dp;
        const Mat hess = h.hessian(s.q);
        d.ddp = -1.0 * matmul(hess, s.dq);
    } else {
        d.ddq = {};
        d.ddp = {};
    }
    return d;
}

CharacteristicState shifted(const CharacteristicState& s, const Derivative& d, double a) {
    CharacteristicState out;
    out.q = s.q + a * d.dq;
    out.p = s.p + a * d.dp;
    out.action = s.action + a * d.dS;
    out.dq = s.dq + a * d.ddq;
    out.dp = s.dp + a * d.ddp;
    return out;
}

void step_rk4(const Hamiltonian& h, CharacteristicState& s, double step, bool tangent) {
    const Derivative k1 = rhs(h, s, tangent);
    const Derivative k2 = rhs(h, shifted(s, k1, 0.5 * step), tangent);
    const Derivative k3 = rhs(h, shifted(s, k2, 0.5 * step), tangent);
    const Derivative k4 = rhs(h, shifted(s, k3, step), tangent);
    const double w = step / 6.0;
    s.q += w * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    s.p += w * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    s.action += w * (k1.dS + 2.0 * k2.dS + 2.0 * k3.dS + k4.dS);
    if (tangent) {
        s.dq = s.dq + w * (k1.ddq + 2.0 * k2.ddq + 2.0 * k3.ddq + k4.ddq);
        s.dp = s.dp + w * (k1.ddp + 2.0 * k2.ddp + 2.0 * k3.ddp + k4.ddp);
    }
}

// Kick-drift-kick. The action increment is the discrete Lagrangian of the step.
void step_verlet(const Hamiltonian& h, CharacteristicState& s, double step, bool tangent) {
    const double half = 0.5 * step;
    const Vec p_half = s.p + half * h.force(s.q);
    const Vec q_new = s.q + step * h.velocity(p_half);
    const Vec p_new = p_half + half * h.force(q_new);
    s.action += step * h.kinetic(p_half) - half * (h.potential_energy(s.q) + h.potential_energy(q_new));
    if (tangent) {
        const Mat dp_half = s.dp + (-half) * matmul(h.hessian(s.q), s.dq);
        const Mat dq_new = s.dq + (step / h.mass()) * dp_half;
        s.dp = dp_half + (-half) * matmul(h.hessian(q_new), dq_new);
        s.dq = dq_new;
    }
    s.q = q_new;
    s.p = p_new;
}

}  // namespace

void step_characteristic(const Hamiltonian& h, CharacteristicState& s, double step, Integrator method,
                         bool with_tangent) {
    if (method == Integrator::rk4)
        step_rk4(h, s, step, with_tangent);
    else
        step_verlet(h, s, step, with_tangent);
}

void advance_characteristic(const Hamiltonian& h, CharacteristicState& s, double t, double dt, Integrator method,
                            bool with_tangent) {
    if (t == 0.0) return;
    if (!(dt > 0.0)) throw ConfigError("characteristic step must be positive");
    const int n = substeps(t, dt);
    const double step = t / n;
    for (int i = 0; i < n; ++i) step_characteristic(h, s, step, method, with_tangent);
    if (!finite(s.q) || !finite(s.p) || !std::isfinite(s.action))
        throw NumericalBlowup("characteristic state became non-finite");
}

}  // namespace qlab
