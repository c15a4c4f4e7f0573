/// @file experiments.hpp
/// @brief Scenario drivers: parameter sweeps over the solver with persisted
/// results, plus the manufactured-solution convergence study.
///
/// Runs inside a sweep are independent and may execute on several threads;
/// results are always assembled in run-id order, so a sweep is reproducible
/// bit for bit.

#pragma once

#include "chemo/config.hpp"
#include "chemo/diagnostics.hpp"
#include "chemo/model.hpp"
#include "chemo/stepper.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace chemo {

enum class Scenario { boundedness, stabilization, eps_limit, blowup_probe, mms };

const char* to_string(Scenario s);
/// Throws std::invalid_argument for unknown names.
Scenario parse_scenario(const std::string& name);

/// Lists of parameter values; an empty axis means "use the base value".
struct SweepAxes {
    std::vector<double> chi;
    std::vector<double> kappa;
    std::vector<double> mu;
    std::vector<double> eps;
    std::vector<double> chi_v0;    ///< target χ‖v0‖∞; v0 is rescaled to hit it
    std::vector<double> mu_factor; ///< μ = factor × least threshold
};

struct ExperimentSpec {
    Scenario scenario = Scenario::boundedness;
    RunConfig base;
    SweepAxes axes;
    std::filesystem::path output; ///< empty: nothing is written
    int threads = 1;
    double tol = 1e-3;             ///< stabilization tolerance
    double dissipation_tol = 1e-4;
    double wall_time_limit = 0.0;  ///< per run, seconds; 0 = none
    int eps_levels = 4;            ///< K in ε_k = eps0·2^-k, k = 0..K
    double eps0 = 0.1;
    double window = 1.0;           ///< length of the final averaging window
    std::vector<int> mms_cells{32, 64, 128};
    double mms_dt_factor = 0.1;    ///< dt = factor·h²
    double mms_t_end = 0.25;
    std::string echo;              ///< source text, copied into the manifest

    void validate() const;
};

/// Reads the run sections plus [experiment] and [sweep].
ExperimentSpec read_experiment_spec(const ConfigDocument& doc);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

using Metrics = std::vector<std::pair<std::string, double>>;

struct SweepRow {
    int run_id = 0;
    double chi = 0.0, kappa = 0.0, mu = 0.0, eps = 0.0;
    double v0_sup = 0.0;
    MuCondition condition{};
    Termination termination = Termination::reached_t_end;
    std::string classification; ///< bounded, blow_up, timeout or solver_failure
    double max_u_sup = 0.0;
    DiagnosticsRecord final_record;
    Metrics metrics;
};

struct SweepResult {
    Scenario scenario = Scenario::boundedness;
    std::vector<SweepRow> rows;
    Metrics summary;
    std::vector<std::string> violations;
    std::vector<std::filesystem::path> artifacts;

    bool passed() const { return violations.empty(); }
};

SweepResult exp_boundedness(const ExperimentSpec& spec);
SweepResult exp_stabilization(const ExperimentSpec& spec);
SweepResult exp_eps_limit(const ExperimentSpec& spec);
SweepResult exp_blowup_probe(const ExperimentSpec& spec);

/// u* = e^{−t}(2 + cos(πx/Lx)[cos(πy/Ly)]), v* = e^{−t}(2 + cos(πx/Lx))/2 and
/// the source terms that make them exact solutions.
class ManufacturedSolution {
public:
    ManufacturedSolution(const ModelParams& params, const GridSpec& grid);

    double u(double x, double y, double t) const;
    double v(double x, double y, double t) const;
    double source_u(double x, double y, double t) const;
    double source_v(double x, double y, double t) const;

    InitialData initial_data() const;
    Forcing forcing() const;

private:
    ModelParams params_;
    GridSpec grid_;
    double kx_ = 0.0, ky_ = 0.0;
};

struct MmsReport {
    std::vector<int> cells;
    std::vector<double> dt;
    std::vector<double> err_u, err_v;     ///< discrete L² errors at t_end
    std::vector<double> order_u, order_v; ///< between consecutive levels
    bool passed = false;                  ///< every order ≥ 1.8
};

MmsReport manufactured_convergence(const ExperimentSpec& spec);

/// Dispatch by spec.scenario (not for mms).
SweepResult run_experiment(const ExperimentSpec& spec);

/// Tracks the worst relative one-step increase of ‖v‖∞ over accepted steps.
struct InvariantMonitor {
    double worst_v_increase = 0.0;
    long steps = 0;

    StepObserver observer();
};

/// max over records of mass / m_ε − 1.
double worst_mass_excess(const std::vector<DiagnosticsRecord>& records, const ModelParams& params,
                         double omega_measure, double u0_mass);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
void write_manifest(const std::filesystem::path& path, const ExperimentSpec& spec,
                    const SweepResult& result);

} // namespace chemo
