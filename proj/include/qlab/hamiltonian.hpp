#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "qlab/grid.hpp"
#include "qlab/interp.hpp"
#include "qlab/vec.hpp"

namespace qlab {

namespace potential {

struct Free {};
// V = m omega^2 |q|^2 / 2
struct Harmonic {
    double omega;
};
// V = lambda * sum_k q_k^4 / 4
struct Quartic {
    double lambda;
};
// V = a * sum_k (q_k^2 - b^2)^2
struct DoubleWell {
    double a;
    double b;
};
// Periodic samples on a grid, differentiated spectrally and interpolated by cubic Hermite.
struct Tabulated {
    Grid grid;
    RealField values;
};

}  // namespace potential

using Potential = std::variant<potential::Free, potential::Harmonic, potential::Quartic, potential::DoubleWell,
                               potential::Tabulated>;

std::string potential_name(const Potential& v);

// Separable time-independent H(q, p) = |p|^2 / 2m + V(q) in dim 1 or 2.
class Hamiltonian {
public:
    Hamiltonian(int dim, double mass, Potential potential);

    int dim() const { return dim_; }
    double mass() const { return mass_; }
    const Potential& potential() const { return potential_; }

    double kinetic(const Vec& p) const { return 0.5 * dot(p, p) / mass_; }
    double potential_energy(const Vec& q) const;
    double energy(const Vec& q, const Vec& p) const { return kinetic(p) + potential_energy(q); }

    // dH/dp
    Vec velocity(const Vec& p) const { return (1.0 / mass_) * p; }
    // -dV/dq
    Vec force(const Vec& q) const;
    // d^2 V / dq_i dq_j, row-major
    Mat hessian(const Vec& q) const;
    // p . dH/dp - H
    double lagrangian(const Vec& q, const Vec& p) const { return dot(p, velocity(p)) - energy(q, p); }

    RealField sample_potential(const Grid& grid) const;
    std::array<RealField, 2> sample_force(const Grid& grid) const;

private:
    struct TabulatedTables;

    int dim_;
    double mass_;
    Potential potential_;
    std::shared_ptr<const TabulatedTables> tables_;
};

Vec velocity_map(const Hamiltonian& h, const Vec& p);
Vec force(const Hamiltonian& h, const Vec& q);
double lagrangian(const Hamiltonian& h, const Vec& q, const Vec& p);

}  // namespace qlab
