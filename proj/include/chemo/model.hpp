/// @file model.hpp
/// @brief Coefficients of the chemotaxis-consumption system with logistic
/// source and its logarithmically damped regularization
///
///   u_t = Δu − χ∇·(u∇v) + κu − μu² − εu² ln(a u)
///   v_t = Δv − uv
///
/// together with the explicit constants of the large-μ boundedness condition
/// and the a-priori mass bound.

#pragma once

#include "chemo/grid.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace chemo {

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// a = μ/κ for κ > 0, a = μ otherwise.
double compute_a(double kappa, double mu);

class ModelParams {
public:
    ModelParams() = default;
    /// Validates χ > 0, μ > 0, ε ∈ [0,1) and derives a.
    ModelParams(double chi, double kappa, double mu, double eps = 0.0);

    /// Allows χ = 0 and/or μ = 0 for operator tests (pure diffusion etc.).
    /// When μ = 0 the regularization must be off and a is fixed to 1.
    static ModelParams relaxed(double chi, double kappa, double mu, double eps = 0.0);

    double chi() const { return chi_; }
    double kappa() const { return kappa_; }
    double mu() const { return mu_; }
    double eps() const { return eps_; }
    double a() const { return a_; }
    bool is_relaxed() const { return relaxed_; }

    /// κ/μ, the positive constant equilibrium when κ > 0.
    double equilibrium() const { return kappa_ / mu_; }

    /// Throws unless the parameters are admissible for theorem scenarios.
    void require_strict() const;

private:
    double chi_ = 1.0;
    double kappa_ = 1.0;
    double mu_ = 1.0;
    double eps_ = 0.0;
    double a_ = 1.0;
    bool relaxed_ = false;
};

struct InitialData {
    Field u0;
    Field v0;

    /// Throws unless both fields share a grid and are strictly positive.
    void validate() const;
};

/// κu − μu² − εu² ln(a u), extended by continuity with value 0 at u = 0.
double reaction(double u, const ModelParams& params);

struct KConstants {
    double k1;
    double k2;
};

/// Constants of the sufficient condition μ ≥ k1 (χ‖v0‖∞)^{2/p} + k2 (χ‖v0‖∞)^{2p}.
KConstants k_constants(double p, int N);

struct MuCondition {
    bool satisfied;
    double threshold;
    double p;
};

MuCondition check_mu_condition(const ModelParams& params, double v0_sup, double p, int N);

/// Exponents scanned by the least-threshold search: N+0.25, N+0.5, ..., 3N.
std::vector<double> default_p_scan(int N);

/// Least threshold over `p_values` (default_p_scan when empty); the verdict
/// compares params.mu() against that least threshold.
MuCondition least_mu_threshold(const ModelParams& params, double v0_sup, int N,
                               const std::vector<double>& p_values = {});

/// Threshold in the variant form k1 x^{1/N} + k2 x^{2N} (x = χ‖v0‖∞) using the
/// constants at exponent p.  Reported alongside the 2/p, 2p form.
double mu_threshold_variant(double chi, double v0_sup, int N, double p);

/// Upper bound m_ε for ∫u along solutions.
double mass_bound(const ModelParams& params, double omega_measure, double u0_mass);

} // namespace chemo
