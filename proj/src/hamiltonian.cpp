#include "qlab/hamiltonian.hpp"

#include <cmath>

#include "qlab/error.hpp"

namespace qlab {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

struct Hamiltonian::TabulatedTables {
    HermiteTable<double> v;
    std::vector<HermiteTable<double>> dv;  // one table per axis, for force and Hessian
};

std::string potential_name(const Potential& v) {
    return std::visit(overloaded{[](const potential::Free&) { return std::string("free"); },
                                 [](const potential::Harmonic&) { return std::string("harmonic"); },
                                 [](const potential::Quartic&) { return std::string("quartic"); },
                                 [](const potential::DoubleWell&) { return std::string("double_well"); },
                                 [](const potential::Tabulated&) { return std::string("tabulated"); }},
                      v);
}

Hamiltonian::Hamiltonian(int dim, double mass, Potential potential)
    : dim_(dim), mass_(mass), potential_(std::move(potential)) {
    if (dim != 1 && dim != 2) throw ConfigError("Hamiltonian dimension must be 1 or 2");
    if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("mass must be positive");
    std::visit(overloaded{[](const potential::Free&) {},
                          [](const potential::Harmonic& h) {
                              if (!(h.omega > 0.0)) throw ConfigError("harmonic omega must be positive");
                          },
                          [](const potential::Quartic& v) {
                              if (!std::isfinite(v.lambda)) throw ConfigError("quartic lambda must be finite");
                          },
                          [](const potential::DoubleWell& v) {
                              if (!std::isfinite(v.a) || !std::isfinite(v.b))
                                  throw ConfigError("double well parameters must be finite");
                          },
                          [&](const potential::Tabulated& t) {
                              if (t.grid.dim() != dim) throw ConfigError("tabulated potential grid dimension mismatch");
                              auto tables = std::make_shared<TabulatedTables>(
                                  TabulatedTables{HermiteTable<double>(t.grid, t.values, Outside::periodic), {}});
                              for (int a = 0; a < dim; ++a)
                                  tables->dv.emplace_back(t.grid, spectral_derivative(t.grid, t.values, a, 1),
                                                          Outside::periodic);
                              tables_ = std::move(tables);
                          }},
               potential_);
}

double Hamiltonian::potential_energy(const Vec& q) const {
    const int d = dim_;
    return std::visit(overloaded{[](const potential::Free&) { return 0.0; },
                                 [&](const potential::Harmonic& h) {
                                     return 0.5 * mass_ * h.omega * h.omega * dot(q, q);
                                 },
                                 [&](const potential::Quartic& v) {
                                     double s = 0.0;
                                     for (int k = 0; k < d; ++k) s += q[k] * q[k] * q[k] * q[k];
                                     return 0.25 * v.lambda * s;
                                 },
                                 [&](const potential::DoubleWell& v) {
                                     double s = 0.0;
                                     for (int k = 0; k < d; ++k) {
                                         const double u = q[k] * q[k] - v.b * v.b;
                                         s += u * u;
                                     }
                                     return v.a * s;
                                 },
                                 [&](const potential::Tabulated&) { return tables_->v.value(q); }},
                      potential_);
}

Vec Hamiltonian::force(const Vec& q) const {
    const int d = dim_;
    Vec f{0.0, 0.0};
    std::visit(overloaded{[](const potential::Free&) {},
                          [&](const potential::Harmonic& h) {
                              const double k = mass_ * h.omega * h.omega;
                              for (int a = 0; a < d; ++a) f[a] = -k * q[a];
                          },
                          [&](const potential::Quartic& v) {
                              for (int a = 0; a < d; ++a) f[a] = -v.lambda * q[a] * q[a] * q[a];
                          },
                          [&](const potential::DoubleWell& v) {
                              for (int a = 0; a < d; ++a) f[a] = -4.0 * v.a * q[a] * (q[a] * q[a] - v.b * v.b);
                          },
                          [&](const potential::Tabulated&) {
                              for (int a = 0; a < d; ++a) f[a] = -tables_->dv[a].value(q);
                          }},
               potential_);
    return f;
}

Mat Hamiltonian::hessian(const Vec& q) const {
    const int d = dim_;
    Mat m{0.0, 0.0, 0.0, 0.0};
    std::visit(overloaded{[](const potential::Free&) {},
                          [&](const potential::Harmonic& h) {
                              const double k = mass_ * h.omega * h.omega;
                              m[0] = k;
                              if (d == 2) m[3] = k;
                          },
                          [&](const potential::Quartic& v) {
                              m[0] = 3.0 * v.lambda * q[0] * q[0];
                              if (d == 2) m[3] = 3.0 * v.lambda * q[1] * q[1];
                          },
                          [&](const potential::DoubleWell& v) {
                              m[0] = v.a * (12.0 * q[0] * q[0] - 4.0 * v.b * v.b);
                              if (d == 2) m[3] = v.a * (12.0 * q[1] * q[1] - 4.0 * v.b * v.b);
                          },
                          [&](const potential::Tabulated&) {
                              for (int a = 0; a < d; ++a) {
                                  const auto g = tables_->dv[a].evaluate(q).gradient;
                                  for (int b = 0; b < d; ++b) m[2 * a + b] = g[b];
                              }
                              if (d == 2) m[1] = m[2] = 0.5 * (m[1] + m[2]);
                          }},
               potential_);
    return m;
}

RealField Hamiltonian::sample_potential(const Grid& grid) const {
    if (const auto* t = std::get_if<potential::Tabulated>(&potential_); t && t->grid == grid) return t->values;
    return grid.sample([&](const Vec& q) { return potential_energy(q); });
}

std::array<RealField, 2> Hamiltonian::sample_force(const Grid& grid) const {
    std::array<RealField, 2> out;
    for (int a = 0; a < grid.dim(); ++a) out[a] = grid.sample([&](const Vec& q) { return force(q)[a]; });
    return out;
}

Vec velocity_map(const Hamiltonian& h, const Vec& p) { return h.velocity(p); }
Vec force(const Hamiltonian& h, const Vec& q) { return h.force(q); }
double lagrangian(const Hamiltonian& h, const Vec& q, const Vec& p) { return h.lagrangian(q, p); }

}  // namespace qlab
