#include "qlab/projection_qa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "qlab/error.hpp"
#include "qlab/interp.hpp"

namespace qlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Seed {
    Vec q0{};
    double rho0 = 0.0;
    CharacteristicState state;
};

struct SeedLattice {
    std::array<std::size_t, 2> counts{1, 1};
    std::vector<Seed> seeds;
};

SeedLattice make_seeds(const Hamiltonian& h, const Grid& grid, const InitialMomentum& m0, const InitialAction* s0,
                       const InitialDensity* rho0, int oversampling) {
    const int dim = grid.dim();
    const int f = oversampling > 0 ? oversampling : (dim == 1 ? 4 : 2);
    SeedLattice lat;
    for (int a = 0; a < dim; ++a) lat.counts[a] = static_cast<std::size_t>(f) * grid.points(a) + 1;
    lat.seeds.resize(lat.counts[0] * lat.counts[1]);
    for (std::size_t j0 = 0; j0 < lat.counts[0]; ++j0) {
        for (std::size_t j1 = 0; j1 < lat.counts[1]; ++j1) {
            Seed& seed = lat.seeds[j0 * lat.counts[1] + j1];
            seed.q0[0] = -0.5 * grid.extent(0) + static_cast<double>(j0) * grid.spacing(0) / f;
            if (dim == 2) seed.q0[1] = -0.5 * grid.extent(1) + static_cast<double>(j1) * grid.spacing(1) / f;
            seed.state.q = seed.q0;
            seed.state.p = m0.value(seed.q0);
            seed.state.dq = identity_mat();
            seed.state.dp = m0.jacobian(seed.q0);
            if (dim == 1) {
                seed.state.p[1] = 0.0;
                seed.state.dp = {seed.state.dp[0], 0.0, 0.0, 0.0};
                seed.state.dq = {1.0, 0.0, 0.0, 0.0};
            }
            seed.state.action = s0 ? s0->value(seed.q0) : 0.0;
            seed.rho0 = rho0 ? (*rho0)(seed.q0) : 0.0;
        }
    }
    (void)h;
    return lat;
}

double seed_density(const Seed& s, int dim) {
    const double j = std::abs(det(s.state.dq, dim));
    return j > 0.0 ? s.rho0 / j : 0.0;
}

struct Rebuilt {
    std::array<RealField, 2> m;
    RealField action, density;
    Mask covered;
};

// Tensor cubic Lagrange interpolation on the uniform seed lattice, in seed-index coordinates.
class SeedInterpolant {
public:
    SeedInterpolant(const SeedLattice& lat, int dim) : lat_(lat), dim_(dim) {
        const std::size_t n = lat.seeds.size();
        for (auto& f : fields_) f.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Seed& s = lat.seeds[i];
            fields_[0][i] = s.state.q[0];
            fields_[1][i] = s.state.q[1];
            fields_[2][i] = s.state.p[0];
            fields_[3][i] = s.state.p[1];
            fields_[4][i] = s.state.action;
            fields_[5][i] = seed_density(s, dim);
        }
    }

    // Solves X(u) = x by Newton iteration from the guess u; false when it does not settle.
    bool invert(const Vec& x, Vec& u) const {
        for (int it = 0; it < 30; ++it) {
            Stencil st = stencil(u);
            const Vec r = Vec{eval(st, 0), eval(st, 1)} - x;
            Mat j{deriv(st, 0, 0), dim_ == 2 ? deriv(st, 0, 1) : 0.0, dim_ == 2 ? deriv(st, 1, 0) : 0.0,
                  dim_ == 2 ? deriv(st, 1, 1) : 1.0};
            const double d = j[0] * j[3] - j[1] * j[2];
            if (!(std::abs(d) > 0.0)) return false;
            const Vec du{(j[3] * r[0] - j[1] * r[1]) / d, dim_ == 2 ? (j[0] * r[1] - j[2] * r[0]) / d : 0.0};
            u = u - du;
            for (int a = 0; a < dim_; ++a) {
                const double top = static_cast<double>(lat_.counts[a] - 1);
                if (u[a] < -1e-9 * top || u[a] > top * (1 + 1e-9)) return false;
                u[a] = std::clamp(u[a], 0.0, top);
            }
            if (std::abs(du[0]) + std::abs(du[1]) < 1e-11) return true;
        }
        return false;
    }

    void assign(Rebuilt& out, std::size_t node, const Vec& u) const {
        Stencil st = stencil(u);
        out.m[0][node] = eval(st, 2);
        if (dim_ == 2) out.m[1][node] = eval(st, 3);
        out.action[node] = eval(st, 4);
        out.density[node] = std::max(eval(st, 5), 0.0);
        out.covered[node] = 1;
    }

private:
    struct Stencil {
        std::array<std::size_t, 2> base{0, 0};
        std::array<std::array<double, 4>, 2> w{}, dw{};
        std::array<int, 2> width{1, 1};
    };

    Stencil stencil(const Vec& u) const {
        Stencil st;
        st.w[1] = {1.0, 0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a) {
            const std::size_t count = lat_.counts[a];
            const int width = static_cast<int>(std::min<std::size_t>(count, 4));
            const auto cell = static_cast<std::size_t>(std::clamp(std::floor(u[a]), 0.0, static_cast<double>(count - 2)));
            const std::size_t base = std::min(cell > 0 ? cell - 1 : 0, count - width);
            st.base[a] = base;
            st.width[a] = width;
            const double s = u[a] - static_cast<double>(base);
            for (int k = 0; k < width; ++k) {
                double w = 1.0, dw = 0.0;
                for (int m = 0; m < width; ++m) {
                    if (m == k) continue;
                    const double denom = k - m;
                    double prod = 1.0 / denom;
                    for (int l = 0; l < width; ++l)
                        if (l != k && l != m) prod *= (s - l) / (k - l);
                    dw += prod;
                    w *= (s - m) / denom;
                }
                st.w[a][k] = w;
                st.dw[a][k] = dw;
            }
        }
        return st;
    }

    double combine(const Stencil& st, int field, const std::array<double, 4>& w0, const std::array<double, 4>& w1) const {
        const auto& f = fields_[field];
        const std::size_t c1 = lat_.counts[1];
        double acc = 0.0;
        for (int k0 = 0; k0 < st.width[0]; ++k0) {
            double row = 0.0;
            for (int k1 = 0; k1 < st.width[1]; ++k1) row += w1[k1] * f[(st.base[0] + k0) * c1 + st.base[1] + k1];
            acc += w0[k0] * row;
        }
        return acc;
    }

    double eval(const Stencil& st, int field) const { return combine(st, field, st.w[0], st.w[1]); }
    double deriv(const Stencil& st, int field, int axis) const {
        return axis == 0 ? combine(st, field, st.dw[0], st.w[1]) : combine(st, field, st.w[0], st.dw[1]);
    }

    const SeedLattice& lat_;
    int dim_;
    std::array<RealField, 6> fields_;
};

// Locates each node inside the piecewise-linear image of the seed lattice, then refines on the cubic map.
Rebuilt rebuild(const Grid& grid, const SeedLattice& lat) {
    const int dim = grid.dim();
    const std::size_t n = grid.size();
    Rebuilt out{{RealField(n, 0.0), dim == 2 ? RealField(n, 0.0) : RealField()}, RealField(n, 0.0), RealField(n, 0.0),
                Mask(n, 0)};
    std::vector<Vec> guess(n);
    Mask located(n, 0);
    const SeedInterpolant interp(lat, dim);

    if (dim == 1) {
        const double h = grid.spacing(0), half = 0.5 * grid.extent(0);
        const std::size_t count = lat.seeds.size();
        for (std::size_t j = 0; j + 1 < count; ++j) {
            const double qa = lat.seeds[j].state.q[0], qb = lat.seeds[j + 1].state.q[0];
            if (!(qb > qa)) continue;
            const auto lo = static_cast<long long>(std::ceil((qa + half) / h - 1e-9));
            const auto hi = static_cast<long long>(std::floor((qb + half) / h + 1e-9));
            for (long long i = std::max(lo, 0LL); i <= std::min(hi, static_cast<long long>(n) - 1); ++i) {
                const auto node = static_cast<std::size_t>(i);
                if (located[node]) continue;
                const double lam = std::clamp((grid.point(node)[0] - qa) / (qb - qa), 0.0, 1.0);
                guess[node] = {static_cast<double>(j) + lam, 0.0};
                located[node] = 1;
            }
        }
    } else {
        const double h0 = grid.spacing(0), h1 = grid.spacing(1);
        const double half0 = 0.5 * grid.extent(0), half1 = 0.5 * grid.extent(1);
        const auto n0 = static_cast<long long>(grid.points(0)), n1 = static_cast<long long>(grid.points(1));
        const std::size_t c1 = lat.counts[1];
        // Triangle corners are given in seed-index coordinates.
        auto raster = [&](const std::array<Vec, 3>& idx) {
            std::array<Vec, 3> q;
            for (int c = 0; c < 3; ++c)
                q[c] = lat.seeds[static_cast<std::size_t>(idx[c][0]) * c1 + static_cast<std::size_t>(idx[c][1])].state.q;
            const double ux = q[1][0] - q[0][0], uy = q[1][1] - q[0][1];
            const double vx = q[2][0] - q[0][0], vy = q[2][1] - q[0][1];
            const double area = ux * vy - uy * vx;
            if (std::abs(area) < 1e-300) return;
            const double xmin = std::min({q[0][0], q[1][0], q[2][0]}), xmax = std::max({q[0][0], q[1][0], q[2][0]});
            const double ymin = std::min({q[0][1], q[1][1], q[2][1]}), ymax = std::max({q[0][1], q[1][1], q[2][1]});
            const long long i0 = std::max(0LL, static_cast<long long>(std::ceil((xmin + half0) / h0 - 1e-9)));
            const long long i1 = std::min(n0 - 1, static_cast<long long>(std::floor((xmax + half0) / h0 + 1e-9)));
            const long long k0 = std::max(0LL, static_cast<long long>(std::ceil((ymin + half1) / h1 - 1e-9)));
            const long long k1 = std::min(n1 - 1, static_cast<long long>(std::floor((ymax + half1) / h1 + 1e-9)));
            for (long long i = i0; i <= i1; ++i) {
                for (long long k = k0; k <= k1; ++k) {
                    const std::size_t node = grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
                    if (located[node]) continue;
                    const Vec x = grid.point(node);
                    const double dx = x[0] - q[0][0], dy = x[1] - q[0][1];
                    const double lb = (dx * vy - dy * vx) / area;
                    const double lc = (ux * dy - uy * dx) / area;
                    const double la = 1.0 - lb - lc;
                    constexpr double tol = -1e-10;
                    if (la < tol || lb < tol || lc < tol) continue;
                    guess[node] = la * idx[0] + lb * idx[1] + lc * idx[2];
                    located[node] = 1;
                }
            }
        };
        for (std::size_t j0 = 0; j0 + 1 < lat.counts[0]; ++j0) {
            for (std::size_t j1 = 0; j1 + 1 < c1; ++j1) {
                const double a = static_cast<double>(j0), b = static_cast<double>(j1);
                raster({Vec{a, b}, Vec{a + 1, b}, Vec{a + 1, b + 1}});
                raster({Vec{a, b}, Vec{a + 1, b + 1}, Vec{a, b + 1}});
            }
        }
    }

    for (std::size_t node = 0; node < n; ++node) {
        if (!located[node]) continue;
        Vec u = guess[node];
        if (interp.invert(grid.point(node), u)) interp.assign(out, node, u);
    }
    return out;
}

QaSnapshot make_snapshot(const Grid& grid, const SeedLattice& lat, double time, bool with_action) {
    Rebuilt r = rebuild(grid, lat);
    QaSnapshot snap;
    snap.time = time;
    snap.momentum = {grid, {std::move(r.m[0]), grid.dim() == 2 ? std::move(r.m[1]) : RealField()}, r.covered, time};
    if (with_action) {
        snap.action = ConfigAction{grid, std::move(r.action), r.covered, time, {0, 0}};
        snap.density = ConfigDensity{grid, std::move(r.density), time};
    }
    return snap;
}

QaSolution run_characteristics(const Hamiltonian& h, const Grid& grid, const InitialMomentum& m0,
                               const InitialAction* s0, const InitialDensity* rho0, double t, const QaOptions& opts) {
    if (grid.dim() != h.dim()) throw ConfigError("grid and Hamiltonian dimensions differ");
    if (!(t >= 0.0)) throw ConfigError("evolution time must be non-negative");
    if (!(opts.dt > 0.0)) throw ConfigError("QA step must be positive");
    if (opts.snapshot_every < 1) throw ConfigError("snapshot interval must be at least one step");
    if (!(opts.caustic_threshold > 0.0)) throw ConfigError("caustic threshold must be positive");
    const int dim = grid.dim();
    const bool with_action = s0 != nullptr;

    SeedLattice lat = make_seeds(h, grid, m0, s0, rho0, opts.oversampling);
    QaSolution sol;
    sol.grid = grid;
    sol.requested_time = t;

    auto min_jacobian = [&](const SeedLattice& l, Vec& where) {
        double best = std::numeric_limits<double>::infinity();
        for (const Seed& s : l.seeds) {
            const double d = std::abs(det(s.state.dq, dim));
            if (d < best) {
                best = d;
                where = s.state.q;
            }
        }
        return best;
    };

    Vec where{};
    double prev_min = min_jacobian(lat, where);
    sol.caustic.min_jacobian = prev_min;
    sol.caustic.jacobian_history.emplace_back(0.0, prev_min);
    if (prev_min < opts.caustic_threshold) {
        sol.caustic.t_star = 0.0;
        sol.caustic.location = where;
        sol.multivalued = true;
        sol.snapshots.push_back(make_snapshot(grid, lat, 0.0, with_action));
        return sol;
    }
    sol.snapshots.push_back(make_snapshot(grid, lat, 0.0, with_action));
    if (t == 0.0) return sol;

    const int n_steps = substeps(t, opts.dt);
    const double step = t / n_steps;
    SeedLattice previous = lat;
    for (int k = 1; k <= n_steps; ++k) {
        previous.seeds = lat.seeds;
        for_each_index(opts.exec, lat.seeds.size(),
                       [&](std::size_t i) { step_characteristic(h, lat.seeds[i].state, step, opts.method, true); });
        for (const Seed& s : lat.seeds)
            if (!finite(s.state.q) || !finite(s.state.p)) throw NumericalBlowup("QA characteristic became non-finite");
        const double time = k * step;
        const double cur_min = min_jacobian(lat, where);
        sol.caustic.jacobian_history.emplace_back(time, cur_min);
        sol.caustic.min_jacobian = std::min(sol.caustic.min_jacobian, cur_min);
        if (cur_min < opts.caustic_threshold) {
            const double frac = (prev_min - opts.caustic_threshold) / (prev_min - cur_min);
            sol.caustic.t_star = (k - 1) * step + std::clamp(frac, 0.0, 1.0) * step;
            sol.caustic.location = where;
            sol.multivalued = true;
            const double last_valid = (k - 1) * step;
            if (sol.snapshots.back().time < last_valid) sol.snapshots.push_back(make_snapshot(grid, previous, last_valid, with_action));
            return sol;
        }
        prev_min = cur_min;
        if (k % opts.snapshot_every == 0 || k == n_steps) sol.snapshots.push_back(make_snapshot(grid, lat, time, with_action));
    }
    return sol;
}

// Locates the snapshots bracketing time t: indices and blend weight of the upper one.
struct Bracket {
    std::size_t lo, hi;
    double w;
};

Bracket bracket(const QaSolution& sol, double t) {
    const auto& snaps = sol.snapshots;
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    if (t < snaps.front().time - tol || t > snaps.back().time + tol)
        throw TrajectoryUndefined("time " + std::to_string(t) + " lies outside the evolved span");
    auto it = std::lower_bound(snaps.begin(), snaps.end(), t - tol,
                               [](const QaSnapshot& s, double v) { return s.time < v; });
    const auto hi = static_cast<std::size_t>(it - snaps.begin());
    if (std::abs(snaps[hi].time - t) <= tol || hi == 0) return {hi, hi, 0.0};
    const std::size_t lo = hi - 1;
    return {lo, hi, (t - snaps[lo].time) / (snaps[hi].time - snaps[lo].time)};
}

}  // namespace

double QaSolution::snapshot_interval() const {
    if (snapshots.size() < 2) return 0.0;
    return snapshots[1].time - snapshots[0].time;
}

InitialMomentum linear_momentum(const Vec& offset, const Mat& slope) {
    return {[=](const Vec& q) { return offset + matvec(slope, q); }, [=](const Vec&) { return slope; }};
}

InitialAction quadratic_action(double constant, const Vec& linear, const Mat& quadratic) {
    const Mat a{quadratic[0], 0.5 * (quadratic[1] + quadratic[2]), 0.5 * (quadratic[1] + quadratic[2]), quadratic[3]};
    return {[=](const Vec& q) { return constant + dot(linear, q) + 0.5 * dot(q, matvec(a, q)); },
            [=](const Vec& q) { return linear + matvec(a, q); }, [=](const Vec&) { return a; }};
}

InitialAction tabulated_action(const Grid& grid, const RealField& values) {
    auto table = std::make_shared<const HermiteTable<double>>(grid, values, Outside::periodic);
    auto grads = std::make_shared<std::vector<HermiteTable<double>>>();
    for (int a = 0; a < grid.dim(); ++a)
        grads->emplace_back(grid, spectral_derivative(grid, values, a, 1), Outside::periodic);
    const int dim = grid.dim();
    return {[table](const Vec& q) { return table->value(q); },
            [grads, dim](const Vec& q) {
                Vec g{0.0, 0.0};
                for (int a = 0; a < dim; ++a) g[a] = (*grads)[a].value(q);
                return g;
            },
            [grads, dim](const Vec& q) {
                Mat m{0.0, 0.0, 0.0, 0.0};
                for (int a = 0; a < dim && a < 2; ++a) {
                    const auto g = (*grads)[a].evaluate(q).gradient;
                    for (int b = 0; b < dim && b < 2; ++b) m[2 * a + b] = g[b];
                }
                if (dim == 2) m[1] = m[2] = 0.5 * (m[1] + m[2]);
                return m;
            }};
}

InitialDensity gaussian_density(int dim, const Vec& center, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("Gaussian width must be positive");
    const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * dim);
    return [=](const Vec& q) {
        const Vec d = q - center;
        const double r2 = dim == 1 ? d[0] * d[0] : dot(d, d);
        return norm * std::exp(-0.5 * r2 / (sigma * sigma));
    };
}

InitialDensity tabulated_density(const ConfigDensity& rho) {
    auto table = std::make_shared<const HermiteTable<double>>(rho.grid, rho.values, Outside::zero);
    return [table](const Vec& q) { return std::max(table->value(q), 0.0); };
}

RealField restrict_h(const Hamiltonian& h, const MomentumField& m) {
    RealField out(m.grid.size(), kNaN);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!m.covered[i]) continue;
        const Vec p{m.components[0][i], m.grid.dim() == 2 ? m.components[1][i] : 0.0};
        out[i] = h.energy(m.grid.point(i), p);
    }
    return out;
}

QaSolution evolve_canonical_condition(const Hamiltonian& h, const Grid& grid, const InitialMomentum& m0, double t,
                                      const QaOptions& opts) {
    return run_characteristics(h, grid, m0, nullptr, nullptr, t, opts);
}

QaSolution evolve_hj_continuity(const Hamiltonian& h, const Grid& grid, const InitialAction& s0,
                                const InitialDensity& rho0, double t, const QaOptions& opts) {
    return run_characteristics(h, grid, s0.momentum(), &s0, &rho0, t, opts);
}

std::optional<Vec> momentum_at(const QaSolution& sol, const Vec& q, double t) {
    const Bracket b = bracket(sol, t);
    auto eval = [&](std::size_t k) -> std::optional<Vec> {
        const MomentumField& m = sol.snapshots[k].momentum;
        Vec out{0.0, 0.0};
        for (int a = 0; a < m.grid.dim(); ++a) {
            const auto v = sample_covered(m.grid, m.components[a], m.covered, q);
            if (!v) return std::nullopt;
            out[a] = *v;
        }
        return out;
    };
    const auto lo = eval(b.lo);
    if (!lo || b.lo == b.hi) return lo;
    const auto hi = eval(b.hi);
    if (!hi) return std::nullopt;
    return (1.0 - b.w) * *lo + b.w * *hi;
}

std::optional<double> action_at(const QaSolution& sol, const Vec& q, double t) {
    const Bracket b = bracket(sol, t);
    auto eval = [&](std::size_t k) -> std::optional<double> {
        const auto& s = sol.snapshots[k].action;
        if (!s) throw ConfigError("QA solution carries no action field");
        return sample_covered(s->grid, s->values, s->covered, q);
    };
    const auto lo = eval(b.lo);
    if (!lo || b.lo == b.hi) return lo;
    const auto hi = eval(b.hi);
    if (!hi) return std::nullopt;
    return (1.0 - b.w) * *lo + b.w * *hi;
}

Trajectory extract_trajectory(const Hamiltonian& h, const QaSolution& sol, const Vec& q0, double t, double s0) {
    if (sol.caustic.t_star && t >= *sol.caustic.t_star)
        throw TrajectoryUndefined("trajectory requested at or beyond the caustic time");
    if (t > sol.valid_until() + 1e-12 * std::max(1.0, t))
        throw TrajectoryUndefined("trajectory requested beyond the evolved time span");

    auto field = [&](const Vec& q, double time) {
        const auto m = momentum_at(sol, q, time);
        if (!m) throw AdvectionError("trajectory left the region covered by characteristics");
        return *m;
    };
    Trajectory traj;
    Vec q = q0;
    double s = s0;
    double time = 0.0;
    auto record = [&](const Vec& p) {
        traj.times.push_back(time);
        traj.q.push_back(q);
        traj.p.push_back(p);
        traj.projected_action.push_back(s);
    };
    Vec p = field(q, 0.0);
    record(p);
    if (t == 0.0) return traj;

    const double interval = sol.snapshot_interval();
    const double macro = interval > 0.0 ? 2.0 * interval : t;
    const int n = substeps(t, macro);
    const double step = t / n;
    // ds/dt = M.v - h(q, t)
    auto rates = [&](const Vec& x, double tt, Vec& v, double& ds) {
        const Vec m = field(x, tt);
        v = h.velocity(m);
        ds = dot(m, v) - h.energy(x, m);
    };
    for (int i = 0; i < n; ++i) {
        const double t0 = i * step;
        Vec v1, v2, v3, v4;
        double d1, d2, d3, d4;
        rates(q, t0, v1, d1);
        rates(q + 0.5 * step * v1, t0 + 0.5 * step, v2, d2);
        rates(q + 0.5 * step * v2, t0 + 0.5 * step, v3, d3);
        rates(q + step * v3, t0 + step, v4, d4);
        q += (step / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
        s += (step / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
        time = (i + 1) * step;
        record(field(q, time));
    }
    return traj;
}

std::vector<double> projected_action(const Hamiltonian& h, const QaSolution& sol, const Vec& q0, double t, double s0) {
    return extract_trajectory(h, sol, q0, t, s0).projected_action;
}

RealField vorticity(const MomentumField& m, Differencing method) {
    if (m.grid.dim() != 2) return {};
    const std::size_t n = m.grid.size();
    RealField out(n, kNaN);
    if (method == Differencing::spectral) {
        const auto d1m2 = spectral_derivative(m.grid, m.components[1], 0, 1);
        const auto d2m1 = spectral_derivative(m.grid, m.components[0], 1, 1);
        for (std::size_t i = 0; i < n; ++i) out[i] = d1m2[i] - d2m1[i];
        return out;
    }
    const auto d1m2 = fd_derivative(m.grid, m.components[1], m.covered, 0, 1);
    const auto d2m1 = fd_derivative(m.grid, m.components[0], m.covered, 1, 1);
    for (std::size_t i = 0; i < n; ++i)
        if (d1m2.valid[i] && d2m1.valid[i]) out[i] = d1m2.values[i] - d2m1.values[i];
    return out;
}

double consistency_s_minus_S(const QaSolution& sol, const Trajectory& traj, const std::vector<double>& s) {
    if (s.size() != traj.times.size()) throw ConfigError("projected action and trajectory lengths differ");
    double base = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto S = action_at(sol, traj.q[i], traj.times[i]);
        if (!S) throw AdvectionError("trajectory left the region where S is known");
        const double diff = s[i] - *S;
        if (i == 0) base = diff;
        drift = std::max(drift, std::abs(diff - base));
    }
    return drift;
}

MomentumField action_gradient(const ConfigAction& s) {
    MomentumField out{s.grid, {RealField(s.grid.size(), 0.0), RealField()}, Mask(s.grid.size(), 1), s.time};
    if (s.grid.dim() == 2) out.components[1] = RealField(s.grid.size(), 0.0);
    for (int a = 0; a < s.grid.dim(); ++a) {
        auto d = fd_derivative(s.grid, s.values, s.covered, a, 1);
        out.components[a] = std::move(d.values);
        for (std::size_t i = 0; i < out.covered.size(); ++i) out.covered[i] &= d.valid[i];
    }
    return out;
}

double half_density_residual(const Hamiltonian& h, const QaSolution& sol, std::size_t k, double floor) {
    if (k == 0 || k + 1 >= sol.snapshots.size()) throw ConfigError("half-density residual needs neighbouring snapshots");
    const auto& prev = sol.snapshots[k - 1];
    const auto& cur = sol.snapshots[k];
    const auto& next = sol.snapshots[k + 1];
    if (!cur.density || !prev.density || !next.density) throw ConfigError("QA solution carries no density field");
    const double dt_back = cur.time - prev.time, dt_fwd = next.time - cur.time;
    if (std::abs(dt_back - dt_fwd) > 1e-12 * std::max(1.0, dt_back))
        throw ConfigError("half-density residual needs equally spaced snapshots");
    const Grid& grid = sol.grid;
    const int dim = grid.dim();
    const std::size_t n = grid.size();

    RealField amp(n);
    double rho_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        amp[i] = std::sqrt(cur.density->values[i]);
        rho_max = std::max(rho_max, cur.density->values[i]);
    }
    const Mask& cov = cur.momentum.covered;
    double worst = 0.0;
    std::array<CoveredDerivative, 2> grad_amp, grad_v;
    for (int a = 0; a < dim; ++a) {
        grad_amp[a] = fd_derivative(grid, amp, cov, a, 1);
        RealField v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = cur.momentum.components[a][i] / h.mass();
        grad_v[a] = fd_derivative(grid, v, cov, a, 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!prev.momentum.covered[i] || !next.momentum.covered[i]) continue;
        if (cur.density->values[i] < floor * rho_max) continue;
        bool ok = true;
        double transport = 0.0, divergence = 0.0;
        for (int a = 0; a < dim; ++a) {
            ok = ok && grad_amp[a].valid[i] && grad_v[a].valid[i];
            transport += cur.momentum.components[a][i] / h.mass() * grad_amp[a].values[i];
            divergence += grad_v[a].values[i];
        }
        if (!ok) continue;
        const double dadt = (std::sqrt(next.density->values[i]) - std::sqrt(prev.density->values[i])) / (2.0 * dt_fwd);
        worst = std::max(worst, std::abs(dadt + transport + 0.5 * divergence * amp[i]));
    }
    return worst;
}

}  // namespace qlab
