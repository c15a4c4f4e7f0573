/// @file config.hpp
/// @brief Sectioned key=value configuration files.
///
///   # comment
///   [model]
///   chi = 1
///   mu  = 1.5
///
/// Every value keeps its line number so that validation errors can point at
/// the offending line, e.g. "run.cfg:7: [model].mu: must be > 0".

#pragma once

#include "chemo/diagnostics.hpp"
#include "chemo/grid.hpp"
#include "chemo/model.hpp"
#include "chemo/stepper.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigEntry {
    std::string value;
    int line = 0;
};

class ConfigDocument {
public:
    static ConfigDocument parse(std::istream& is, const std::string& source = "<config>");
    static ConfigDocument load(const std::filesystem::path& path);

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
    bool has(const std::string& section, const std::string& key) const;
    const ConfigEntry* find(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           std::optional<std::string> fallback = std::nullopt) const;
    double get_double(const std::string& section, const std::string& key,
                      std::optional<double> fallback = std::nullopt) const;
    int get_int(const std::string& section, const std::string& key,
                std::optional<int> fallback = std::nullopt) const;
    bool get_bool(const std::string& section, const std::string& key,
                  std::optional<bool> fallback = std::nullopt) const;
    /// Comma-separated list of reals.
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    /// Rejects keys outside `allowed` for the section.
    void require_known(const std::string& section, const std::vector<std::string>& allowed) const;
    void require_sections(const std::vector<std::string>& allowed) const;

    /// Error message anchored at the key's line (or at the file when absent).
    [[noreturn]] void fail(const std::string& section, const std::string& key,
                           const std::string& message) const;

    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::map<std::string, std::map<std::string, ConfigEntry>> sections_;
};

struct RunConfig {
    GridSpec grid;
    ModelParams params;
    std::string u0_expr;
    std::string v0_expr;
    SolverConfig solver;
    double sample_every = 0.1;
    std::filesystem::path directory = "out";
    bool snapshots = false;
    DiagnosticsOptions diagnostics;

    /// Evaluates the initial-data expressions at cell centers.
    InitialData initial_data() const;
};

/// Reads [grid], [model], [init], [solver], [output], [diagnostics].
/// Unknown keys are errors; `extra_sections` lists further sections the
/// caller will consume.
RunConfig read_run_config(const ConfigDocument& doc,
                          const std::vector<std::string>& extra_sections = {});

RunConfig load_run_config(const std::filesystem::path& path);

} // namespace chemo
