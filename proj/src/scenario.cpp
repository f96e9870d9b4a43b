#include "qlab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "qlab/error.hpp"

namespace qlab {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
    return out;
}

// Typed access to one JSON object with unknown-key detection. Errors carry the dotted path.
class Reader {
public:
    Reader(const json& obj, std::string path, std::set<std::string> allowed) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(where() + " must be an object");
        for (const auto& [key, value] : obj_.items())
            if (!allowed.contains(key)) throw ConfigError("unknown key '" + key_path(key) + "'");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }
    const json& raw(const std::string& key) const { return obj_.at(key); }
    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number()) throw ConfigError("'" + key_path(key) + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError("'" + key_path(key) + "' must be finite");
        return d;
    }
    double positive(const std::string& key, double fallback) const {
        const double d = number(key, fallback);
        if (!(d > 0.0)) throw ConfigError("'" + key_path(key) + "' must be positive");
        return d;
    }
    long integer(const std::string& key, long fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) throw ConfigError("'" + key_path(key) + "' must be an integer");
        return v.get<long>();
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_string()) throw ConfigError("'" + key_path(key) + "' must be a string");
        return v.get<std::string>();
    }
    Vec vec(const std::string& key, const Vec& fallback) const {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (!v.is_array() || v.empty() || v.size() > 2)
            throw ConfigError("'" + key_path(key) + "' must be a number or an array of 1 or 2 numbers");
        Vec out{0.0, 0.0};
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError("'" + key_path(key) + "' must hold numbers");
            out[i] = v[i].get<double>();
        }
        return out;
    }

private:
    std::string where() const { return path_.empty() ? "scenario" : "'" + path_ + "'"; }
    const json& obj_;
    std::string path_;
};

std::size_t power_of_two(const Reader& r, const std::string& key, std::size_t fallback) {
    const long v = r.integer(key, static_cast<long>(fallback));
    if (v <= 0 || !is_power_of_two(static_cast<std::size_t>(v)))
        throw ConfigError("'" + r.key_path(key) + "' must be a positive power of two");
    return static_cast<std::size_t>(v);
}

Tier parse_tier(const json& v) {
    if (!v.is_string()) throw ConfigError("'tiers' entries must be strings");
    const std::string s = v.get<std::string>();
    if (s == "PM") return Tier::PM;
    if (s == "QA") return Tier::QA;
    if (s == "QT") return Tier::QT;
    if (s == "CWE") return Tier::CWE;
    throw ConfigError("unknown tier '" + s + "' (valid: PM, QA, QT, CWE)");
}

PotentialSpec parse_potential(const json& doc) {
    PotentialSpec p;
    if (doc.is_string()) {
        p.kind = doc.get<std::string>();
    } else {
        const Reader r(doc, "hamiltonian.potential", {"kind", "omega", "lambda", "a", "b"});
        p.kind = r.text("kind", p.kind);
        p.omega = r.number("omega", p.omega);
        p.lambda = r.number("lambda", p.lambda);
        p.a = r.number("a", p.a);
        p.b = r.number("b", p.b);
        if (!(p.omega > 0.0)) throw ConfigError("'hamiltonian.potential.omega' must be positive");
    }
    const auto& valid = potential_catalog();
    if (std::find(valid.begin(), valid.end(), p.kind) == valid.end())
        throw ConfigError("unknown potential '" + p.kind + "' (valid: " + join(valid) + ")");
    return p;
}

InitialSpec parse_initial(const json& doc) {
    const Reader r(doc, "initial",
                   {"kind", "center", "momentum", "sigma", "sigma_p", "curvature", "n", "charge", "offset", "slope"});
    InitialSpec s;
    s.kind = r.text("kind", s.kind);
    const auto& valid = initial_catalog();
    if (std::find(valid.begin(), valid.end(), s.kind) == valid.end())
        throw ConfigError("unknown initial state '" + s.kind + "' (valid: " + join(valid) + ")");
    s.center = r.vec("center", s.center);
    s.momentum = r.vec(r.has("offset") ? "offset" : "momentum", s.momentum);
    s.sigma = r.positive("sigma", s.sigma);
    s.sigma_p = r.number("sigma_p", s.sigma_p);
    if (s.sigma_p < 0.0) throw ConfigError("'initial.sigma_p' must be non-negative");
    s.curvature = r.number("curvature", s.curvature);
    s.charge = static_cast<int>(r.integer("charge", s.charge));
    if (r.has("n")) {
        const json& n = r.raw("n");
        if (n.is_number_integer()) {
            s.n = {n.get<int>(), 0};
        } else if (n.is_array() && !n.empty() && n.size() <= 2) {
            for (std::size_t i = 0; i < n.size(); ++i) {
                if (!n[i].is_number_integer()) throw ConfigError("'initial.n' must hold integers");
                s.n[i] = n[i].get<int>();
            }
        } else {
            throw ConfigError("'initial.n' must be an integer or an array of integers");
        }
        if (s.n[0] < 0 || s.n[1] < 0) throw ConfigError("'initial.n' must be non-negative");
    }
    if (r.has("slope")) {
        const json& m = r.raw("slope");
        if (m.is_number()) {
            s.slope = {m.get<double>(), 0.0, 0.0, m.get<double>()};
        } else if (m.is_array() && m.size() == 4 && std::all_of(m.begin(), m.end(), [](const json& x) { return x.is_number(); })) {
            for (int i = 0; i < 4; ++i) s.slope[i] = m[i].get<double>();
        } else {
            throw ConfigError("'initial.slope' must be a number or a row-major array of 4 numbers");
        }
    }
    return s;
}

struct CheckRule {
    std::vector<Tier> needs;
    int dim = 0;  // 0 means any
    bool needs_expected = false;
};

const std::map<std::string, CheckRule>& check_rules() {
    static const std::map<std::string, CheckRule> rules = {
        {"pm_qa_trajectories", {{Tier::PM, Tier::QA}, 1, false}},
        {"qa_cwe_fields", {{Tier::QA, Tier::CWE}, 1, false}},
        {"cwe_qt_toggle", {{Tier::QT}, 0, false}},
        {"ehrenfest", {{Tier::QT}, 0, false}},
        {"norm_energy", {{Tier::QT}, 0, false}},
        {"modified_hj", {{Tier::QT}, 0, false}},
        {"fisher", {{}, 0, false}},
        {"caustic_time", {{Tier::QA}, 0, true}},
        {"poincare", {{Tier::PM}, 1, false}},
        {"kelvin_qa", {{Tier::QA}, 2, false}},
        {"qt_winding", {{Tier::QT}, 2, false}},
    };
    return rules;
}

bool state_has_field(const std::string& kind) { return kind == "gaussian" || kind == "coherent" || kind == "linear_momentum"; }
bool state_has_wave(const std::string& kind) { return kind != "linear_momentum"; }
bool state_has_density(const std::string& kind) { return kind == "gaussian" || kind == "coherent"; }

void validate(const Scenario& s) {
    for (Tier t : s.tiers) {
        const int max_dim = t == Tier::PM ? 1 : 2;
        if (s.dim < 1 || s.dim > max_dim)
            throw ConfigError("unsupported dimension " + std::to_string(s.dim) + " for tier " + tier_name(t) +
                              " (supported: " + (max_dim == 1 ? "1" : "1, 2") + ")");
        const std::string& k = s.initial.kind;
        if ((t == Tier::PM || t == Tier::QA) && !state_has_field(k))
            throw ConfigError("initial state '" + k + "' has no momentum field for tier " + tier_name(t) +
                              " (valid: gaussian, coherent, linear_momentum)");
        if ((t == Tier::QT || t == Tier::CWE) && !state_has_wave(k))
            throw ConfigError("initial state '" + k + "' has no wave function for tier " + tier_name(t) +
                              " (valid: gaussian, coherent, eigenstate, vortex, plane_wave)");
    }
    if (s.dim != 1 && s.dim != 2) throw ConfigError("unsupported dimension " + std::to_string(s.dim) + " (supported: 1, 2)");
    if ((s.initial.kind == "coherent" || s.initial.kind == "eigenstate") && s.potential.kind != "harmonic")
        throw ConfigError("initial state '" + s.initial.kind + "' needs the harmonic potential");
    if (s.initial.kind == "vortex" && s.dim != 2) throw ConfigError("initial state 'vortex' needs dim = 2");
    std::set<std::string> seen;
    for (const CheckRequest& c : s.checks) {
        const auto it = check_rules().find(c.name);
        if (it == check_rules().end())
            throw ConfigError("unknown check '" + c.name + "' (valid: " + join(check_catalog()) + ")");
        if (!seen.insert(c.name).second) throw ConfigError("check '" + c.name + "' is requested twice");
        for (Tier t : it->second.needs)
            if (!s.has(t)) throw ConfigError("check '" + c.name + "' needs tier " + tier_name(t));
        if (it->second.dim != 0 && it->second.dim != s.dim)
            throw ConfigError("check '" + c.name + "' needs dim = " + std::to_string(it->second.dim));
        if (it->second.needs_expected && !c.expected) throw ConfigError("check '" + c.name + "' needs 'expected'");
        if (c.name == "fisher" && !s.has(Tier::QT) && !(s.has(Tier::QA) && state_has_density(s.initial.kind)))
            throw ConfigError("check 'fisher' needs a density from tier QT or QA");
        if (c.name == "qa_cwe_fields" && !state_has_density(s.initial.kind))
            throw ConfigError("check 'qa_cwe_fields' needs a gaussian or coherent initial state");
    }
}

}  // namespace

std::string tier_name(Tier t) {
    switch (t) {
        case Tier::PM: return "PM";
        case Tier::QA: return "QA";
        case Tier::QT: return "QT";
        case Tier::CWE: return "CWE";
    }
    return "?";
}

const std::vector<std::string>& initial_catalog() {
    static const std::vector<std::string> v = {"gaussian", "coherent", "eigenstate", "vortex", "plane_wave", "linear_momentum"};
    return v;
}

const std::vector<std::string>& potential_catalog() {
    static const std::vector<std::string> v = {"free", "harmonic", "quartic", "double_well"};
    return v;
}

const std::vector<std::string>& check_catalog() {
    static const std::vector<std::string> v = [] {
        std::vector<std::string> out;
        for (const auto& [name, rule] : check_rules()) out.push_back(name);
        return out;
    }();
    return v;
}

bool Scenario::has(Tier t) const { return std::find(tiers.begin(), tiers.end(), t) != tiers.end(); }

Grid Scenario::grid() const { return dim == 1 ? Grid::line(extent, points) : Grid::square(extent, points); }

Hamiltonian Scenario::hamiltonian() const {
    const PotentialSpec& p = potential;
    if (p.kind == "harmonic") return {dim, mass, potential::Harmonic{p.omega}};
    if (p.kind == "quartic") return {dim, mass, potential::Quartic{p.lambda}};
    if (p.kind == "double_well") return {dim, mass, potential::DoubleWell{p.a, p.b}};
    return {dim, mass, potential::Free{}};
}

json Scenario::echo() const {
    json tiers_json = json::array();
    for (Tier t : tiers) tiers_json.push_back(tier_name(t));
    json checks_json = json::array();
    for (const CheckRequest& c : checks) {
        json entry = {{"name", c.name}};
        if (c.expected) entry["expected"] = *c.expected;
        checks_json.push_back(entry);
    }
    const auto v2 = [](const Vec& v) { return json::array({v[0], v[1]}); };
    return {
        {"schema_version", kScenarioSchemaVersion},
        {"name", name},
        {"description", description},
        {"tiers", tiers_json},
        {"hamiltonian",
         {{"dim", dim},
          {"mass", mass},
          {"potential", {{"kind", potential.kind}, {"omega", potential.omega}, {"lambda", potential.lambda},
                         {"a", potential.a}, {"b", potential.b}}}}},
        {"grid", {{"extent", extent}, {"points", points}}},
        {"phase_grid", {{"q_extent", phase_grid.q_extent > 0.0 ? phase_grid.q_extent : extent},
                        {"q_points", phase_grid.q_points},
                        {"p_extent", phase_grid.p_extent},
                        {"p_points", phase_grid.p_points}}},
        {"numerics", {{"hbar", numerics.hbar}, {"dt", numerics.dt}, {"t_end", numerics.t_end},
                      {"density_floor", numerics.density_floor}, {"caustic_threshold", numerics.caustic_threshold},
                      {"quadrature", "periodic_rectangle"}}},
        {"initial", {{"kind", initial.kind}, {"center", v2(initial.center)}, {"momentum", v2(initial.momentum)},
                     {"sigma", initial.sigma}, {"sigma_p", initial.sigma_p}, {"curvature", initial.curvature},
                     {"n", json::array({initial.n[0], initial.n[1]})}, {"charge", initial.charge},
                     {"slope", json::array({initial.slope[0], initial.slope[1], initial.slope[2], initial.slope[3]})}}},
        {"output", {{"every", output_every}}},
        {"contour", {{"center", v2(contour.center)}, {"radius", contour.radius}, {"points", contour.points}}},
        {"checks", checks_json},
    };
}

Scenario parse_scenario(const json& doc) {
    const Reader top(doc, "", {"schema_version", "name", "description", "tiers", "hamiltonian", "grid", "phase_grid",
                               "numerics", "initial", "output", "contour", "checks"});
    const long version = top.integer("schema_version", kScenarioSchemaVersion);
    if (version != kScenarioSchemaVersion)
        throw ConfigError("'schema_version' " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kScenarioSchemaVersion) + ")");
    Scenario s;
    s.name = top.text("name", "");
    if (s.name.empty()) throw ConfigError("'name' is required");
    s.description = top.text("description", "");

    if (top.has("tiers")) {
        const json& t = top.raw("tiers");
        if (!t.is_array()) throw ConfigError("'tiers' must be an array");
        for (const json& v : t) {
            const Tier tier = parse_tier(v);
            if (!s.has(tier)) s.tiers.push_back(tier);
        }
    }

    if (top.has("hamiltonian")) {
        const Reader h(top.raw("hamiltonian"), "hamiltonian", {"dim", "mass", "potential"});
        s.dim = static_cast<int>(h.integer("dim", s.dim));
        s.mass = h.positive("mass", s.mass);
        if (h.has("potential")) s.potential = parse_potential(h.raw("potential"));
    }
    if (top.has("grid")) {
        const Reader g(top.raw("grid"), "grid", {"extent", "points"});
        s.extent = g.positive("extent", s.extent);
        s.points = power_of_two(g, "points", s.points);
    }
    if (top.has("phase_grid")) {
        const Reader g(top.raw("phase_grid"), "phase_grid", {"q_extent", "q_points", "p_extent", "p_points"});
        s.phase_grid.q_extent = g.positive("q_extent", s.extent);
        s.phase_grid.q_points = power_of_two(g, "q_points", s.phase_grid.q_points);
        s.phase_grid.p_extent = g.positive("p_extent", s.phase_grid.p_extent);
        s.phase_grid.p_points = power_of_two(g, "p_points", s.phase_grid.p_points);
    }
    if (top.has("numerics")) {
        const Reader n(top.raw("numerics"), "numerics",
                       {"hbar", "dt", "t_end", "density_floor", "caustic_threshold", "quadrature"});
        s.numerics.hbar = n.positive("hbar", s.numerics.hbar);
        s.numerics.dt = n.positive("dt", s.numerics.dt);
        s.numerics.t_end = n.number("t_end", s.numerics.t_end);
        if (s.numerics.t_end < 0.0) throw ConfigError("'numerics.t_end' must be non-negative");
        s.numerics.density_floor = n.positive("density_floor", s.numerics.density_floor);
        s.numerics.caustic_threshold = n.positive("caustic_threshold", s.numerics.caustic_threshold);
        if (n.text("quadrature", "periodic_rectangle") != "periodic_rectangle")
            throw ConfigError("unknown quadrature (valid: periodic_rectangle)");
    }
    s.numerics.validate();
    if (top.has("initial")) s.initial = parse_initial(top.raw("initial"));
    if (top.has("output")) {
        const Reader o(top.raw("output"), "output", {"every"});
        s.output_every = static_cast<int>(o.integer("every", 0));
        if (s.output_every < 0) throw ConfigError("'output.every' must be non-negative");
    }
    if (top.has("contour")) {
        const Reader c(top.raw("contour"), "contour", {"center", "radius", "points"});
        s.contour.center = c.vec("center", s.contour.center);
        s.contour.radius = c.positive("radius", s.contour.radius);
        const long pts = c.integer("points", static_cast<long>(s.contour.points));
        if (pts < 64) throw ConfigError("'contour.points' must be at least 64");
        s.contour.points = static_cast<std::size_t>(pts);
    }
    if (top.has("checks")) {
        const json& list = top.raw("checks");
        if (!list.is_array()) throw ConfigError("'checks' must be an array");
        for (const json& entry : list) {
            CheckRequest c;
            if (entry.is_string()) {
                c.name = entry.get<std::string>();
            } else {
                const Reader r(entry, "checks[]", {"name", "expected"});
                c.name = r.text("name", "");
                if (r.has("expected")) c.expected = r.number("expected", 0.0);
            }
            s.checks.push_back(c);
        }
    }
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("scenario file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(doc);
}

}  // namespace qlab
