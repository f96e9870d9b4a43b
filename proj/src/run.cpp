#include "qlab/run.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>

#include "qlab/error.hpp"
#include "qlab/fisher.hpp"
#include "qlab/invariants.hpp"
#include "qlab/phase_ensemble.hpp"
#include "qlab/projection_qa.hpp"
#include "qlab/quantum.hpp"

namespace qlab {
namespace {

using nlohmann::json;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Pinned cross-check tolerances.
constexpr double kTolTrajectory = 1e-6;
constexpr double kTolFields = 5e-3;
constexpr double kTolToggle = 1e-12;
constexpr double kTolEhrenfest = 1e-5;
constexpr double kTolNorm = 1e-10;
constexpr double kTolEnergy = 1e-8;
constexpr double kTolModifiedHj = 1e-4;
constexpr double kTolFisher = 1e-8;
constexpr double kTolCausticTime = 1e-2;
constexpr double kTolCirculation = 1e-6;
constexpr double kPhaseMaskLevel = 1e-6;

struct Initial {
    std::optional<InitialAction> action;
    std::optional<InitialMomentum> momentum;
    std::optional<InitialDensity> density;
    double sigma = 1.0;
};

Initial classical_initial(const Scenario& s) {
    const InitialSpec& in = s.initial;
    Initial out;
    if (in.kind == "linear_momentum") {
        out.momentum = linear_momentum(in.momentum, in.slope);
        return out;
    }
    double curvature = in.curvature;
    out.sigma = in.sigma;
    if (in.kind == "coherent") {
        out.sigma = std::sqrt(s.numerics.hbar / (2.0 * s.mass * s.potential.omega));
        curvature = 0.0;
    }
    // S0 = p0.q + c |q - x0|^2 / 2
    const Vec x0 = in.center;
    const Vec linear = in.momentum - curvature * x0;
    const Mat quad = s.dim == 1 ? Mat{curvature, 0, 0, 0} : Mat{curvature, 0, 0, curvature};
    out.action = quadratic_action(0.5 * curvature * dot(x0, x0), linear, quad);
    out.momentum = out.action->momentum();
    out.density = gaussian_density(s.dim, in.center, out.sigma);
    return out;
}

WaveFunction wave_initial(const Scenario& s, const Grid& g) {
    const InitialSpec& in = s.initial;
    const double hbar = s.numerics.hbar;
    if (in.kind == "coherent") return coherent_state(g, in.center, in.momentum, s.mass, s.potential.omega, hbar);
    if (in.kind == "eigenstate") return eigenstate_n(g, in.n, s.mass, s.potential.omega, hbar);
    if (in.kind == "vortex") return vortex_2d(g, in.charge, in.center, in.sigma, hbar);
    if (in.kind == "plane_wave") return plane_wave(g, in.momentum, hbar);
    if (in.kind != "gaussian") throw ConfigError("initial state '" + in.kind + "' has no wave function");
    const Initial cl = classical_initial(s);
    WaveFunction wf{g, ComplexField(g.size()), 0.0, hbar};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec q = g.point(i);
        wf.psi[i] = std::polar(std::sqrt((*cl.density)(q)), cl.action->value(q) / hbar);
    }
    normalize(wf);
    return wf;
}

long total_steps(const Scenario& s) { return std::lround(s.numerics.t_end / s.numerics.dt); }

long sample_every(const Scenario& s) {
    if (s.output_every > 0) return s.output_every;
    return std::max(1L, total_steps(s) / 100);
}

std::vector<double> sample_times(const Scenario& s, int count, double limit) {
    std::vector<double> out;
    const double end = std::min(s.numerics.t_end, limit);
    for (int k = 0; k <= count; ++k) out.push_back(end * k / count);
    return out;
}

std::vector<std::string> row(std::initializer_list<double> values) {
    std::vector<std::string> out;
    for (double v : values) out.push_back(format_number(v));
    return out;
}

// Seeds for trajectory comparisons, spread across the initial packet.
std::vector<double> trajectory_seeds(const Scenario& s, double sigma) {
    std::vector<double> out;
    for (double f : {-1.5, -0.3, 0.8, 2.0}) out.push_back(s.initial.center[0] + sigma * f);
    return out;
}

json quantity_json(const CheckQuantity& q) {
    return {{"name", q.name}, {"value", std::isfinite(q.value) ? json(q.value) : json(nullptr)},
            {"tolerance", q.tolerance}, {"pass", q.pass}};
}

class CheckBuilder {
public:
    CheckBuilder(std::string name, std::string source) {
        r_.name = std::move(name);
        r_.source = std::move(source);
        r_.pass = true;
    }
    void below(const std::string& name, double value, double tol) {
        const bool ok = std::isfinite(value) && value < tol;
        r_.quantities.push_back({name, value, tol, ok});
        r_.pass = r_.pass && ok;
    }
    void fail(const std::string& note) {
        r_.pass = false;
        note_(note);
    }
    void note_(const std::string& note) { r_.note += (r_.note.empty() ? "" : "; ") + note; }
    CheckResult done() { return std::move(r_); }

private:
    CheckResult r_;
};

struct PmOutput {
    std::optional<PhaseDensity> final_density;
};

struct QaOutput {
    std::optional<QaSolution> sol;
    std::string status = "ok";
};

struct QtOutput {
    WaveFunction final;
    std::vector<QtExpectations> expectations;
    std::vector<double> times, norms;
    std::vector<std::array<WaveFunction, 3>> triplets;
};

struct CweOutput {
    std::optional<ClassicalWaveRun> run;
    std::string status = "ok";
    std::string message;
};

void trace_table(RunReport& rep, const std::string& file, const CirculationTrace& trace) {
    SeriesTable t{file, {"t", "circulation", "winding", "winding_residue", "vertices", "flags"}, {}};
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
        t.rows.push_back({format_number(trace.times[k]),
                          std::isnan(trace.circulation[k]) ? "" : format_number(trace.circulation[k]),
                          trace.winding[k] ? std::to_string(*trace.winding[k]) : "",
                          trace.winding[k] ? format_number(trace.winding_residue[k]) : "",
                          std::to_string(trace.vertex_count[k]), trace.flags[k]});
    }
    rep.series.push_back(std::move(t));
}

json trace_json(const std::string& kind, const std::string& file, const CirculationTrace& trace) {
    json jumps = json::array();
    for (const WindingJump& j : trace.jumps)
        jumps.push_back({{"time", j.time}, {"from", j.from}, {"to", j.to}, {"location", {j.location[0], j.location[1]}}});
    return {{"kind", kind},
            {"series", file},
            {"samples", trace.times.size()},
            {"relative_drift", trace.relative_drift},
            {"truncated", trace.truncated},
            {"truncated_at", trace.truncated_at ? json(*trace.truncated_at) : json(nullptr)},
            {"jumps", jumps}};
}

}  // namespace

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

std::string to_csv(const SeriesTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
        out += "\n";
    }
    return out;
}

void write_report(const RunReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw Error("cannot write " + (dir / "report.json").string());
        out << r.doc.dump(2) << "\n";
    }
    for (const SeriesTable& t : r.series) {
        std::ofstream out(dir / t.file);
        if (!out) throw Error("cannot write " + (dir / t.file).string());
        out << to_csv(t);
    }
}

RunReport run_scenario(const Scenario& s) {
    RunReport rep;
    const Hamiltonian h = s.hamiltonian();
    const Grid g = s.grid();
    const double dt = s.numerics.dt;
    const double t_end = s.numerics.t_end;
    const long every = sample_every(s);
    json tiers = json::object();

    std::optional<Initial> classical;
    if (s.has(Tier::PM) || s.has(Tier::QA)) classical = classical_initial(s);

    // PM: Liouville transport of an uncorrelated Gaussian ensemble plus characteristics on p = M0(q).
    PmOutput pm;
    if (s.has(Tier::PM)) {
        json info = {{"status", "ok"}};
        SeriesTable chars{"pm_characteristics.csv", {"t"}, {}};
        const auto seeds = trajectory_seeds(s, classical->sigma);
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            chars.columns.push_back(fmt::format("q{}", i));
            chars.columns.push_back(fmt::format("p{}", i));
        }
        std::vector<PhaseState> states;
        for (double q0 : seeds) states.push_back({{q0, 0.0}, classical->momentum->value(Vec{q0, 0.0}), 0.0});
        const long steps = total_steps(s);
        for (long k = 0; k <= steps; k += every) {
            std::vector<std::string> r{format_number(k * dt)};
            for (const PhaseState& st : states) {
                const PhaseState now = integrate_characteristic(h, st, k * dt, dt);
                r.push_back(format_number(now.q[0]));
                r.push_back(format_number(now.p[0]));
            }
            chars.rows.push_back(std::move(r));
        }
        rep.series.push_back(std::move(chars));
        info["characteristics"] = "pm_characteristics.csv";

        if (classical->density) {
            const PhaseGridSpec& pg = s.phase_grid;
            const PhaseGrid grid(pg.q_extent > 0.0 ? pg.q_extent : s.extent, pg.q_points, pg.p_extent, pg.p_points);
            const double sigma_p = s.initial.sigma_p > 0.0 ? s.initial.sigma_p : s.numerics.hbar / (2.0 * classical->sigma);
            PhaseDensity rho = phase_gaussian(grid, s.initial.center[0], s.initial.momentum[0], classical->sigma, sigma_p);
            const RealField qf = grid.sample([](double q, double) { return q; });
            const RealField pf = grid.sample([](double, double p) { return p; });
            const RealField hf = grid.sample([&](double q, double p) { return h.energy({q, 0}, {p, 0}); });
            SeriesTable moments{"pm_moments.csv", {"t", "mean_q", "mean_p", "mean_H", "mass"}, {}};
            const RealField ones(grid.size(), 1.0);
            const long block = std::max(every, std::max(1L, total_steps(s) / 20));
            for (long k = 0;; k += block) {
                const double t = std::min(k * dt, t_end);
                if (t > rho.time) rho = evolve_liouville(h, rho, t - rho.time, {dt});
                rho.time = t;
                moments.rows.push_back(row({t, expectation(rho, qf), expectation(rho, pf), expectation(rho, hf),
                                            expectation(rho, ones)}));
                if (t >= t_end) break;
            }
            rep.series.push_back(std::move(moments));
            info["moments"] = "pm_moments.csv";
            info["sigma_p"] = sigma_p;
            pm.final_density = rho;
        }
        tiers["PM"] = info;
    }

    QaOutput qa;
    if (s.has(Tier::QA)) {
        QaOptions opts;
        opts.dt = dt;
        opts.caustic_threshold = s.numerics.caustic_threshold;
        opts.snapshot_every = s.dim == 1 ? 1 : static_cast<int>(std::max(1L, std::lround(1e-2 / dt)));
        qa.sol = classical->action ? evolve_hj_continuity(h, g, *classical->action, *classical->density, t_end, opts)
                                   : evolve_canonical_condition(h, g, *classical->momentum, t_end, opts);
        const QaSolution& sol = *qa.sol;
        if (sol.multivalued) qa.status = "caustic";
        SeriesTable jac{"qa_jacobian.csv", {"t", "min_det"}, {}};
        for (const auto& [t, d] : sol.caustic.jacobian_history) jac.rows.push_back(row({t, d}));
        rep.series.push_back(std::move(jac));
        if (sol.final().density) {
            SeriesTable mass{"qa_mass.csv", {"t", "mass"}, {}};
            for (const QaSnapshot& snap : sol.snapshots) mass.rows.push_back(row({snap.time, quadrature(g, snap.density->values)}));
            rep.series.push_back(std::move(mass));
        }
        tiers["QA"] = {{"status", qa.status},
                       {"valid_until", sol.valid_until()},
                       {"snapshots", sol.snapshots.size()},
                       {"jacobian", "qa_jacobian.csv"}};
        rep.doc["caustic"] = {
            {"t_star", sol.caustic.t_star ? json(*sol.caustic.t_star) : json(nullptr)},
            {"location", {sol.caustic.location[0], sol.caustic.location[1]}},
            {"min_jacobian", sol.caustic.min_jacobian},
            {"threshold", s.numerics.caustic_threshold},
            {"multivalued", sol.multivalued},
        };
    }

    const auto expectation_table = [&](const std::string& file) {
        return SeriesTable{file, {"t", "q0", "q1", "p0", "p1", "force0", "force1", "width0", "width1", "energy", "norm"}, {}};
    };
    const auto expectation_row = [&](const WaveFunction& w, const QtExpectations& e) {
        return row({w.time, e.q[0], e.q[1], e.p[0], e.p[1], e.force[0], e.force[1], e.width[0], e.width[1], e.energy,
                    norm(w)});
    };

    std::optional<WaveFunction> psi0;
    if (s.has(Tier::QT) || s.has(Tier::CWE)) psi0 = wave_initial(s, g);

    std::optional<QtOutput> qt;
    if (s.has(Tier::QT)) {
        qt.emplace();
        const long steps = total_steps(s);
        std::vector<long> centres;
        if (steps >= 2)
            for (long c : {steps / 4, steps / 2, (3 * steps) / 4}) centres.push_back(std::clamp(c, 1L, steps - 1));
        std::vector<WaveFunction> window;
        SeriesTable table = expectation_table("qt_expectations.csv");
        long k = 0;
        qt->final = evolve_schrodinger(h, *psi0, t_end, {dt}, [&](const WaveFunction& w) {
            const QtExpectations e = qt_expectations(h, w);
            qt->expectations.push_back(e);
            qt->times.push_back(w.time);
            qt->norms.push_back(norm(w));
            if (k % every == 0 || k == steps) table.rows.push_back(expectation_row(w, e));
            for (long c : centres)
                if (k >= c - 1 && k <= c + 1) window.push_back(w);
            if (window.size() == 3) {
                qt->triplets.push_back({window[0], window[1], window[2]});
                window.clear();
            }
            ++k;
        });
        rep.series.push_back(std::move(table));
        tiers["QT"] = {{"status", "ok"}, {"final_time", qt->final.time}, {"steps", k - 1}, {"series", "qt_expectations.csv"}};
    }

    CweOutput cwe;
    if (s.has(Tier::CWE)) {
        ClassicalWaveOptions opts;
        opts.dt = dt;
        opts.density_floor = s.numerics.density_floor;
        SeriesTable table = expectation_table("cwe_expectations.csv");
        long k = 0;
        try {
            cwe.run = evolve_classical_wave(h, *psi0, t_end, opts, [&](const WaveFunction& w) {
                if (k++ % every == 0) table.rows.push_back(expectation_row(w, qt_expectations(h, w)));
            });
            if (cwe.run->blowup) cwe.status = "blowup";
        } catch (const SingularAmplitude& e) {
            cwe.status = "singular_amplitude";
            cwe.message = e.what();
        } catch (const NumericalBlowup& e) {
            cwe.status = "blowup";
            cwe.message = e.what();
        }
        rep.series.push_back(std::move(table));
        json info = {{"status", cwe.status}, {"series", "cwe_expectations.csv"}};
        if (cwe.run) {
            info["final_time"] = cwe.run->psi.time;
            info["inner_steps"] = cwe.run->inner_steps;
            info["max_quantum_potential"] = cwe.run->max_quantum_potential;
            info["blowup_time"] = cwe.run->blowup_time ? json(*cwe.run->blowup_time) : json(nullptr);
        }
        if (!cwe.message.empty()) info["message"] = cwe.message;
        tiers["CWE"] = info;
    }

    json circulation = json::array();
    for (const CheckRequest& req : s.checks) {
        const std::string& name = req.name;
        if (name == "pm_qa_trajectories") {
            CheckBuilder c(name, "projection_qa.extract_trajectory vs phase_ensemble.integrate_characteristic");
            const QaSolution& sol = *qa.sol;
            double limit = t_end;
            if (sol.caustic.t_star) limit = std::min(limit, 0.9 * *sol.caustic.t_star);
            limit = std::min(limit, sol.valid_until());
            double err = 0.0;
            try {
                for (double q0 : trajectory_seeds(s, classical->sigma)) {
                    const Trajectory tr = extract_trajectory(h, sol, {q0, 0.0}, limit);
                    const PhaseState start{{q0, 0.0}, classical->momentum->value(Vec{q0, 0.0}), 0.0};
                    for (std::size_t i = 0; i < tr.times.size(); i += 10) {
                        const PhaseState ch = integrate_characteristic(h, start, tr.times[i], dt);
                        err = std::max({err, std::abs(tr.q[i][0] - ch.q[0]), std::abs(tr.p[i][0] - ch.p[0])});
                    }
                }
            } catch (const Error& e) {
                err = kInf;
                c.fail(e.what());
            }
            c.below("max |dq|, |dp|", err, kTolTrajectory);
            c.note_(fmt::format("compared up to t = {}", format_number(limit)));
            rep.checks.push_back(c.done());
        } else if (name == "qa_cwe_fields") {
            CheckBuilder c(name, "projection_qa.evolve_hj_continuity vs quantum.evolve_classical_wave + madelung_decompose");
            const QaSolution& sol = *qa.sol;
            if (sol.multivalued) c.fail("QA run ended at the caustic");
            if (!cwe.run || cwe.run->blowup) c.fail("classical-wave run did not reach t_end (" + cwe.status + ")");
            double drho = kInf, ds = kInf;
            if (!sol.multivalued && cwe.run && !cwe.run->blowup) {
                const MadelungPair mp = madelung_decompose(cwe.run->psi, s.numerics.density_floor);
                const QaSnapshot& snap = sol.final();
                const std::size_t mid = g.size() / 2;
                const double gauge = mp.S.values[mid] - snap.action->values[mid];
                const Mask phase_known = density_mask(snap.density->values, kPhaseMaskLevel);
                drho = ds = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (!snap.momentum.covered[i]) continue;
                    drho = std::max(drho, std::abs(mp.rho.values[i] - snap.density->values[i]));
                    if (phase_known[i] && mp.S.covered[i])
                        ds = std::max(ds, std::abs(mp.S.values[i] - gauge - snap.action->values[i]));
                }
            }
            c.below("max |rho_CWE - rho_QA|", drho, kTolFields);
            c.below("max |S_CWE - S_QA| (gauge fixed)", ds, kTolFields);
            rep.checks.push_back(c.done());
        } else if (name == "cwe_qt_toggle") {
            CheckBuilder c(name, "quantum.evolve_classical_wave(coefficient = 0) vs quantum.evolve_schrodinger");
            ClassicalWaveOptions off;
            off.dt = dt;
            off.coefficient = 0.0;
            const ClassicalWaveRun run = evolve_classical_wave(h, *psi0, t_end, off);
            double diff = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(run.psi.psi[i] - qt->final.psi[i]));
            c.below("max |psi_CWE - psi_QT|", diff, kTolToggle);
            rep.checks.push_back(c.done());
        } else if (name == "ehrenfest") {
            CheckBuilder c(name, "quantum.qt_expectations along quantum.evolve_schrodinger");
            double rq = 0.0, rp = 0.0;
            const auto& e = qt->expectations;
            const auto& t = qt->times;
            for (std::size_t k = 1; k + 1 < e.size(); ++k) {
                const double span = t[k + 1] - t[k - 1];
                for (int a = 0; a < s.dim; ++a) {
                    rq = std::max(rq, std::abs((e[k + 1].q[a] - e[k - 1].q[a]) / span - e[k].p[a] / h.mass()));
                    rp = std::max(rp, std::abs((e[k + 1].p[a] - e[k - 1].p[a]) / span - e[k].force[a]));
                }
            }
            if (e.size() < 3) c.fail("fewer than three samples");
            c.below("max |d<q>/dt - <p>/m|", rq, kTolEhrenfest);
            c.below("max |d<p>/dt - <F>|", rp, kTolEhrenfest);
            rep.checks.push_back(c.done());
        } else if (name == "norm_energy") {
            CheckBuilder c(name, "quantum.evolve_schrodinger, quantum.norm, quantum.qt_expectations");
            double dn = 0.0, de = 0.0;
            const double e0 = qt->expectations.front().energy;
            for (std::size_t k = 0; k < qt->norms.size(); ++k) {
                dn = std::max(dn, std::abs(qt->norms[k] - qt->norms.front()));
                de = std::max(de, std::abs(qt->expectations[k].energy - e0));
            }
            if (std::abs(e0) > 0.0) de /= std::abs(e0);
            c.below("norm drift", dn, kTolNorm);
            c.below("relative energy drift", de, kTolEnergy);
            rep.checks.push_back(c.done());
        } else if (name == "modified_hj") {
            CheckBuilder c(name, "quantum.modified_hj_residual on quantum.evolve_schrodinger states");
            double r = qt->triplets.empty() ? kInf : 0.0;
            if (qt->triplets.empty()) c.fail("run too short for centred differences");
            for (const auto& tri : qt->triplets)
                r = std::max(r, modified_hj_residual(h, tri[0], tri[1], tri[2], 1.0, s.numerics.density_floor));
            c.below("max |dS/dt + H(q, grad S) - T_Q|", r, kTolModifiedHj);
            rep.checks.push_back(c.done());
        } else if (name == "fisher") {
            std::optional<ConfigDensity> rho;
            std::string origin;
            if (qt) {
                rho = ConfigDensity{g, density_of(qt->final), qt->final.time};
                origin = "quantum.evolve_schrodinger";
            } else {
                rho = *qa.sol->final().density;
                origin = "projection_qa.evolve_hj_continuity";
            }
            CheckBuilder c(name, "fisher.verify_l0_conditions on " + origin);
            const double b0 = s.numerics.hbar * s.numerics.hbar / (4.0 * s.mass);
            const DensityFunctionalReport f = verify_l0_conditions(*rho, b0, s.numerics.density_floor);
            c.below("|int rho L0 + (B0/2) I|", f.l0_identity_residual, kTolFisher);
            for (int a = 0; a < s.dim; ++a)
                c.below(fmt::format("|int d{} rho L0|", a), f.constraint_residual[a], kTolFisher);
            if (f.unreliable) c.fail("less than half of the mass lies above the density floor");
            rep.doc["fisher"] = {{"time", rho->time},
                                 {"b0", b0},
                                 {"fisher", f.fisher},
                                 {"entropy", f.entropy},
                                 {"l0_identity_residual", f.l0_identity_residual},
                                 {"constraint_residual", {f.constraint_residual[0], f.constraint_residual[1]}},
                                 {"null_lagrangian_residual", f.null_lagrangian_residual},
                                 {"form_disagreement", f.form_disagreement},
                                 {"retained_fraction", f.retained_fraction},
                                 {"unreliable", f.unreliable}};
            rep.checks.push_back(c.done());
        } else if (name == "caustic_time") {
            CheckBuilder c(name, "projection_qa caustic report");
            const auto& ts = qa.sol->caustic.t_star;
            if (!ts) c.fail("no caustic detected before t_end");
            c.below("|t* - expected|", ts ? std::abs(*ts - *req.expected) : kInf, kTolCausticTime);
            rep.checks.push_back(c.done());
        } else if (name == "poincare") {
            CheckBuilder c(name, "invariants.poincare_invariant");
            AdvectOptions adv;
            adv.dt = dt;
            const Contour c0 = circle_contour(s.contour.center, s.contour.radius, s.contour.points, 0.0, true);
            const CirculationTrace trace = poincare_invariant(h, c0, sample_times(s, 32, kInf), adv);
            trace_table(rep, "circulation_poincare.csv", trace);
            circulation.push_back(trace_json("poincare", "circulation_poincare.csv", trace));
            c.below("relative drift", trace.relative_drift, kTolCirculation);
            rep.checks.push_back(c.done());
        } else if (name == "kelvin_qa") {
            CheckBuilder c(name, "invariants.kelvin_trace_qa");
            const Contour c0 = circle_contour(s.contour.center, s.contour.radius, s.contour.points);
            AdvectOptions adv;
            adv.dt = dt;
            const CirculationTrace trace = kelvin_trace_qa(h, *qa.sol, c0, sample_times(s, 16, kInf), adv);
            trace_table(rep, "circulation_kelvin_qa.csv", trace);
            circulation.push_back(trace_json("kelvin_qa", "circulation_kelvin_qa.csv", trace));
            if (trace.truncated) c.note_("trace truncated at the caustic");
            c.below("drift", trace.relative_drift, kTolCirculation);
            rep.checks.push_back(c.done());
        } else if (name == "qt_winding") {
            CheckBuilder c(name, "invariants.kelvin_trace_qt, invariants.winding_number");
            KelvinQtOptions opts;
            opts.dt = dt;
            opts.density_floor = std::max(s.numerics.density_floor, 1e-8);
            const Contour c0 = circle_contour(s.contour.center, s.contour.radius, s.contour.points);
            const CirculationTrace trace = kelvin_trace_qt(h, *psi0, c0, sample_times(s, 20, kInf), opts);
            trace_table(rep, "circulation_kelvin_qt.csv", trace);
            circulation.push_back(trace_json("kelvin_qt", "circulation_kelvin_qt.csv", trace));
            double worst = 0.0;
            std::size_t defined = 0;
            for (std::size_t k = 0; k < trace.times.size(); ++k)
                if (trace.winding[k]) {
                    ++defined;
                    worst = std::max(worst, trace.winding_residue[k]);
                }
            if (defined == 0) c.fail("no sample with a defined winding");
            c.below("max winding residue", worst, kWindingResidueLimit);
            c.note_(fmt::format("{} of {} samples defined, {} jumps", defined, trace.times.size(), trace.jumps.size()));
            rep.checks.push_back(c.done());
        }
    }

    json checks = json::array();
    for (const CheckResult& c : rep.checks) {
        json qs = json::array();
        for (const CheckQuantity& q : c.quantities) qs.push_back(quantity_json(q));
        checks.push_back({{"name", c.name}, {"source", c.source}, {"verdict", c.pass ? "pass" : "fail"},
                          {"quantities", qs}, {"note", c.note}});
        rep.pass = rep.pass && c.pass;
    }
    rep.doc["schema_version"] = kReportSchemaVersion;
    rep.doc["scenario"] = s.echo();
    rep.doc["tiers"] = tiers;
    rep.doc["circulation"] = circulation;
    rep.doc["checks"] = checks;
    json files = json::array();
    for (const SeriesTable& t : rep.series) files.push_back(t.file);
    rep.doc["series"] = files;
    rep.doc["verdict"] = rep.pass ? "pass" : "fail";
    return rep;
}

}  // namespace qlab
