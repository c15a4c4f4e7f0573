/// @file stepper.hpp
/// @brief IMEX time integration of the regularized chemotaxis-consumption system.
///
/// One step of size dt:
///   (I − dtΔ + dt uⁿ) vⁿ⁺¹ = vⁿ
///   (I − dtΔ) uⁿ⁺¹ = uⁿ + dt (−∇·(χ uⁿ ∇vⁿ⁺¹) + f(uⁿ))
/// Diffusion and consumption are implicit, taxis and reaction explicit.  Both
/// systems are symmetric M-matrices and are solved by Jacobi-preconditioned CG.

#pragma once

#include "chemo/diagnostics.hpp"
#include "chemo/grid.hpp"
#include "chemo/model.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chemo {

enum class PositivityPolicy { clamp, reject };

struct SolverConfig {
    double dt = 1e-3;
    bool adaptive = false;
    double safety = 1.0; ///< scales the taxis CFL limit 0.5 in adaptive mode
    double t_end = 1.0;
    double blowup_threshold = 1e6;
    double steady_tol = 0.0; ///< 0 disables steady-state detection
    PositivityPolicy positivity = PositivityPolicy::clamp;
    double positivity_floor = 0.0;
    TaxisScheme taxis = TaxisScheme::upwind;
    double linsolve_tol = 1e-12;
    int linsolve_maxiter = 2000;

    void validate() const;
};

struct SolverFailure : std::runtime_error {
    SolverFailure(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

struct LinearSolveOptions {
    double tol = 1e-12;
    int max_iter = 2000;
};

struct LinearSolveResult {
    Field solution;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Solves (I − dtΔ + dt·diag(coeff)) w = rhs to ‖r‖₂ ≤ tol‖rhs‖₂.
/// For coeff ≡ 0 the constant mode of the residual is removed so that
/// ∫w = ∫rhs to rounding.  For rhs ≥ 0 the returned w is ≥ 0; entries that
/// come out negative at solver-tolerance level are set to 0.
LinearSolveResult solve_shifted_laplacian(const Field& rhs, const Field& coeff, double dt,
                                          const LinearSolveOptions& opts = {});

struct SimState {
    double t = 0.0;
    Field u;
    Field v;
    long step_index = 0;
};

enum class StepStatus { accepted, rejected_negative, rejected_cfl };

struct StepReport {
    StepStatus status = StepStatus::accepted;
    double dt = 0.0;
    int clamped_cells = 0;
    int v_iterations = 0;
    int u_iterations = 0;
    double cfl = 0.0; ///< χ max|∇v| dt / h
};

struct StepResult {
    SimState state;
    StepReport report;
};

/// Additive source terms (f_u, f_v) evaluated at the start of the step, used
/// for manufactured-solution studies.
using Forcing = std::function<void(double t, Field& fu, Field& fv)>;

/// Attempts one step of size dt.  A rejected step returns the input state
/// unchanged with the rejection reason in the report.
StepResult step(const SimState& state, const ModelParams& params, const SolverConfig& config,
                double dt, const Forcing& forcing = {});

StepResult step(const SimState& state, const ModelParams& params, const SolverConfig& config);

enum class Termination { reached_t_end, steady_state, blow_up, solver_failure, wall_time_exceeded };

const char* to_string(Termination t);

using StepObserver =
    std::function<void(const SimState& before, const SimState& after, const StepReport& report)>;

struct RunOptions {
    double sample_every = 0.1;
    DiagnosticsOptions diagnostics;
    StepObserver observer;
    Forcing forcing;
    /// Called with the state at every diagnostics sample (e.g. to write snapshots).
    std::function<void(const SimState&)> on_sample;
    double wall_time_limit = 0.0; ///< seconds, 0 = unlimited
};

struct RunResult {
    Termination termination = Termination::reached_t_end;
    SimState final_state;
    std::vector<DiagnosticsRecord> records;
    double wall_time = 0.0;
    std::string message;
    long accepted_steps = 0;
    long rejected_steps = 0;
    long clamped_cells = 0;
    double max_u_sup = 0.0;
};

RunResult run(const InitialData& init, const ModelParams& params, const SolverConfig& config,
              const RunOptions& options);

} // namespace chemo
