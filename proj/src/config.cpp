#include "chemo/config.hpp"

#include "chemo/expression.hpp"
#include "chemo/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace chemo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

} // namespace

ConfigDocument ConfigDocument::parse(std::istream& is, const std::string& source) {
    ConfigDocument doc;
    doc.source_ = source;
    std::string section;
    std::string raw;
    int lineno = 0;
    auto error = [&](const std::string& msg) {
        throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(is, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') error("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) error("invalid section name '" + section + "'");
            doc.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) error("expected 'key = value'");
        if (section.empty()) error("key outside of any [section]");
        const std::string key = trim(line.substr(0, eq));
        if (!valid_name(key)) error("invalid key '" + key + "'");
        auto& entries = doc.sections_[section];
        if (entries.count(key))
            error("[" + section + "]." + key + ": duplicate key (first set on line " +
                  std::to_string(entries[key].line) + ")");
        entries[key] = ConfigEntry{trim(line.substr(eq + 1)), lineno};
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    return parse(is, path.string());
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const ConfigEntry* ConfigDocument::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void ConfigDocument::fail(const std::string& section, const std::string& key,
                          const std::string& message) const {
    const ConfigEntry* e = find(section, key);
    std::string where = source_;
    if (e) where += ":" + std::to_string(e->line);
    throw ConfigError(where + ": [" + section + "]." + key + ": " + message);
}

std::string ConfigDocument::get_string(const std::string& section, const std::string& key,
                                       std::optional<std::string> fallback) const {
    if (const ConfigEntry* e = find(section, key)) return e->value;
    if (fallback) return *fallback;
    fail(section, key, "missing required key");
}

double ConfigDocument::get_double(const std::string& section, const std::string& key,
                                  std::optional<double> fallback) const {
    const ConfigEntry* e = find(section, key);
    if (!e) {
        if (fallback) return *fallback;
        fail(section, key, "missing required key");
    }
    try {
        return parse_double(e->value);
    } catch (const IoError&) {
        fail(section, key, "expected a number, got '" + e->value + "'");
    }
}

int ConfigDocument::get_int(const std::string& section, const std::string& key,
                            std::optional<int> fallback) const {
    const ConfigEntry* e = find(section, key);
    if (!e) {
        if (fallback) return *fallback;
        fail(section, key, "missing required key");
    }
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(e->value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != e->value.size()) fail(section, key, "expected an integer, got '" + e->value + "'");
    return v;
}

bool ConfigDocument::get_bool(const std::string& section, const std::string& key,
                              std::optional<bool> fallback) const {
    const ConfigEntry* e = find(section, key);
    if (!e) {
        if (fallback) return *fallback;
        fail(section, key, "missing required key");
    }
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    fail(section, key, "expected true or false, got '" + e->value + "'");
}

std::vector<double> ConfigDocument::get_list(const std::string& section, const std::string& key) const {
    const ConfigEntry* e = find(section, key);
    if (!e) fail(section, key, "missing required key");
    std::vector<double> out;
    std::stringstream ss(e->value);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            out.push_back(parse_double(item));
        } catch (const IoError&) {
            fail(section, key, "malformed list entry '" + trim(item) + "'");
        }
    }
    if (out.empty()) fail(section, key, "list must not be empty");
    return out;
}

void ConfigDocument::require_known(const std::string& section,
                                   const std::vector<std::string>& allowed) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return;
    for (const auto& [key, entry] : s->second)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(section, key, "unknown key");
}

void ConfigDocument::require_sections(const std::vector<std::string>& allowed) const {
    for (const auto& [name, entries] : sections_)
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
            throw ConfigError(source_ + ": unknown section [" + name + "]");
}

InitialData RunConfig::initial_data() const {
    const Expression fu = Expression::parse(u0_expr);
    const Expression fv = Expression::parse(v0_expr);
    InitialData init{Field::sample(grid, fu), Field::sample(grid, fv)};
    init.validate();
    return init;
}

namespace {

GridSpec read_grid(const ConfigDocument& doc) {
    doc.require_known("grid", {"dim", "cells", "lengths"});
    const int dim = doc.get_int("grid", "dim");
    if (dim != 1 && dim != 2) doc.fail("grid", "dim", "must be 1 or 2");
    const std::vector<double> cells = doc.get_list("grid", "cells");
    const std::vector<double> lengths =
        doc.has("grid", "lengths") ? doc.get_list("grid", "lengths") : std::vector<double>(dim, 1.0);
    if (static_cast<int>(cells.size()) != dim) doc.fail("grid", "cells", "expected one entry per dimension");
    if (static_cast<int>(lengths.size()) != dim)
        doc.fail("grid", "lengths", "expected one entry per dimension");
    std::vector<int> n;
    for (double c : cells) {
        if (c != static_cast<int>(c) || c < 3) doc.fail("grid", "cells", "cell counts must be integers >= 3");
        n.push_back(static_cast<int>(c));
    }
    for (double l : lengths)
        if (!(l > 0.0) || !std::isfinite(l)) doc.fail("grid", "lengths", "lengths must be > 0");
    return dim == 1 ? GridSpec::interval(n[0], lengths[0])
                    : GridSpec::rectangle(n[0], n[1], lengths[0], lengths[1]);
}

ModelParams read_model(const ConfigDocument& doc) {
    if (doc.has("model", "a")) doc.fail("model", "a", "a is derived from kappa and mu, not configurable");
    doc.require_known("model", {"chi", "kappa", "mu", "eps", "relaxed"});
    const double chi = doc.get_double("model", "chi");
    const double kappa = doc.get_double("model", "kappa");
    const double mu = doc.get_double("model", "mu");
    const double eps = doc.get_double("model", "eps", 0.0);
    const bool relaxed = doc.get_bool("model", "relaxed", false);
    for (const char* key : {"chi", "kappa", "mu", "eps"})
        if (!std::isfinite(doc.get_double("model", key, 0.0))) doc.fail("model", key, "must be finite");
    if (relaxed) {
        if (chi < 0.0) doc.fail("model", "chi", "must be >= 0");
        if (mu < 0.0) doc.fail("model", "mu", "must be >= 0");
    } else {
        if (!(chi > 0.0)) doc.fail("model", "chi", "must be > 0");
        if (!(mu > 0.0)) doc.fail("model", "mu", "must be > 0");
    }
    if (!(eps >= 0.0 && eps < 1.0)) doc.fail("model", "eps", "must lie in [0, 1)");
    if (mu == 0.0 && eps != 0.0) doc.fail("model", "eps", "must be 0 when mu = 0");
    return relaxed ? ModelParams::relaxed(chi, kappa, mu, eps) : ModelParams(chi, kappa, mu, eps);
}

SolverConfig read_solver(const ConfigDocument& doc) {
    doc.require_known("solver", {"dt", "t_end", "adaptive", "safety", "positivity_policy", "positivity_floor",
                                 "taxis_scheme", "blowup_threshold", "steady_tol", "linsolve_tol",
                                 "linsolve_maxiter"});
    SolverConfig c;
    c.dt = doc.get_double("solver", "dt");
    if (!(c.dt > 0.0)) doc.fail("solver", "dt", "must be > 0");
    c.t_end = doc.get_double("solver", "t_end");
    if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) doc.fail("solver", "t_end", "must be >= 0");
    if (c.t_end > 0.0 && c.dt > c.t_end) doc.fail("solver", "dt", "must not exceed t_end");
    c.adaptive = doc.get_bool("solver", "adaptive", c.adaptive);
    c.safety = doc.get_double("solver", "safety", c.safety);
    if (!(c.safety > 0.0 && c.safety <= 1.0)) doc.fail("solver", "safety", "must lie in (0, 1]");

    const std::string pol = doc.get_string("solver", "positivity_policy", "clamp");
    if (pol == "clamp")
        c.positivity = PositivityPolicy::clamp;
    else if (pol == "reject")
        c.positivity = PositivityPolicy::reject;
    else
        doc.fail("solver", "positivity_policy", "expected clamp or reject, got '" + pol + "'");
    c.positivity_floor = doc.get_double("solver", "positivity_floor", c.positivity_floor);
    if (!(c.positivity_floor >= 0.0)) doc.fail("solver", "positivity_floor", "must be >= 0");

    const std::string tax = doc.get_string("solver", "taxis_scheme", "upwind");
    if (tax == "upwind")
        c.taxis = TaxisScheme::upwind;
    else if (tax == "central")
        c.taxis = TaxisScheme::central;
    else
        doc.fail("solver", "taxis_scheme", "expected upwind or central, got '" + tax + "'");

    c.blowup_threshold = doc.get_double("solver", "blowup_threshold", c.blowup_threshold);
    if (!(c.blowup_threshold > 0.0)) doc.fail("solver", "blowup_threshold", "must be > 0");
    c.steady_tol = doc.get_double("solver", "steady_tol", c.steady_tol);
    if (!(c.steady_tol >= 0.0)) doc.fail("solver", "steady_tol", "must be >= 0");
    c.linsolve_tol = doc.get_double("solver", "linsolve_tol", c.linsolve_tol);
    if (!(c.linsolve_tol > 0.0)) doc.fail("solver", "linsolve_tol", "must be > 0");
    c.linsolve_maxiter = doc.get_int("solver", "linsolve_maxiter", c.linsolve_maxiter);
    if (c.linsolve_maxiter <= 0) doc.fail("solver", "linsolve_maxiter", "must be > 0");
    c.validate();
    return c;
}

} // namespace

RunConfig read_run_config(const ConfigDocument& doc, const std::vector<std::string>& extra_sections) {
    std::vector<std::string> sections = {"grid", "model", "init", "solver", "output", "diagnostics"};
    sections.insert(sections.end(), extra_sections.begin(), extra_sections.end());
    doc.require_sections(sections);

    RunConfig rc;
    rc.grid = read_grid(doc);
    rc.params = read_model(doc);

    doc.require_known("init", {"u0_expr", "v0_expr"});
    rc.u0_expr = doc.get_string("init", "u0_expr");
    rc.v0_expr = doc.get_string("init", "v0_expr");
    for (const char* key : {"u0_expr", "v0_expr"}) {
        const std::string text = doc.get_string("init", key);
        Field f;
        try {
            f = Field::sample(rc.grid, Expression::parse(text));
        } catch (const ExpressionError& e) {
            doc.fail("init", key, e.what());
        }
        for (std::size_t k = 0; k < f.size(); ++k)
            if (!(f[k] > 0.0) || !std::isfinite(f[k]))
                doc.fail("init", key, "must be strictly positive and finite at every cell center (cell " +
                                          std::to_string(k) + ")");
    }

    rc.solver = read_solver(doc);

    doc.require_known("output", {"sample_every", "directory", "snapshots"});
    rc.sample_every = doc.get_double("output", "sample_every", rc.sample_every);
    if (!(rc.sample_every > 0.0)) doc.fail("output", "sample_every", "must be > 0");
    rc.directory = doc.get_string("output", "directory", rc.directory.string());
    rc.snapshots = doc.get_bool("output", "snapshots", false);

    doc.require_known("diagnostics", {"p", "q", "v_floor"});
    rc.diagnostics.p = doc.get_double("diagnostics", "p", rc.diagnostics.p);
    if (!(rc.diagnostics.p >= 1.0)) doc.fail("diagnostics", "p", "must be >= 1");
    rc.diagnostics.q = doc.get_double("diagnostics", "q", rc.diagnostics.q);
    if (!(rc.diagnostics.q >= 1.0)) doc.fail("diagnostics", "q", "must be >= 1");
    rc.diagnostics.v_floor = doc.get_double("diagnostics", "v_floor", rc.diagnostics.v_floor);
    if (!(rc.diagnostics.v_floor > 0.0)) doc.fail("diagnostics", "v_floor", "must be > 0");
    return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return read_run_config(ConfigDocument::load(path));
}

} // namespace chemo
