/// @file diagnostics.hpp
/// @brief Functionals evaluated along trajectories and discrete checks of the
/// inequalities they are expected to satisfy.

#pragma once

#include "chemo/grid.hpp"
#include "chemo/model.hpp"

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace chemo {

struct NotApplicable : std::logic_error {
    using std::logic_error::logic_error;
};

struct DiagnosticsOptions {
    double p = 2.0;       ///< exponent for y_p and v_lp
    double q = 1.0;       ///< exponent for the interpolation check
    double v_floor = 1e-12;
};

/// One sample of every tracked functional.  Optional entries are absent when
/// the functional is undefined (κ ≤ 0, or a zero density cell for F).
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double u_sup = 0.0;
    double v_sup = 0.0;
    double grad_v_l2sq = 0.0;
    double y_p = 0.0;
    std::optional<double> lyapunov_F;
    double entropy_E = 0.0;
    std::optional<double> u_dist_l2;
    double v_lp = 0.0;
    double cum_dissipation = 0.0;
};

/// F = ∫u − (κ/μ)∫ln u + (κ/(2μ))∫v².  Requires κ > 0 and u > 0.
double lyapunov_F(const Field& u, const Field& v, const ModelParams& params);

/// ∫u ln u + (χ/2)∫|∇v|²/max(v, v_floor), with 0 ln 0 = 0.
double entropy_energy(const Field& u, const Field& v, const ModelParams& params, double v_floor);

struct CoupledFunctional {
    double unweighted; ///< ∫u^p + ∫|∇v|^{2p}
    double weighted;   ///< ∫u^p + χ^{2p}∫|∇v|^{2p}
};

CoupledFunctional coupled_functional(const Field& u, const Field& v, double p, double chi);

/// μ∫(u − κ/μ)², the integrand of the accumulated dissipation.
double dissipation_rate(const Field& u, const ModelParams& params);

DiagnosticsRecord compute_record(double t, const Field& u, const Field& v, const ModelParams& params,
                                 const DiagnosticsOptions& opts, double cum_dissipation);

struct InterpolationCheck {
    double lhs;   ///< ∫|∇c|^{2q+2}
    double rhs;   ///< 2(4q²+N)‖c‖∞² ∫|∇c|^{2q−2}|D²c|²
    double ratio; ///< rhs / lhs, NaN when degenerate
    bool degenerate;
};

InterpolationCheck check_interpolation_inequality(const Field& c, double q, int N);

/// max over cells of ((Δc)² − N|D²c|²)₊.
double check_hessian_inequality(const Field& c, int N);

struct DissipationReport {
    bool passed = true;
    std::size_t worst_interval = 0; ///< index i of the pair (i, i+1)
    double worst_excess = 0.0;      ///< max of increment / (1 + |F(t_i)|)
    double cum_total = 0.0;         ///< cum_dissipation at the last record
    double f_drop = 0.0;            ///< F(first) − min F
    bool total_bounded = true;      ///< cum_total ≤ f_drop + tol
};

/// Checks F(t2) − F(t1) + [D(t2) − D(t1)] ≤ tol (1 + |F(t1)|) on consecutive
/// records, where D is the accumulated dissipation.  Records must carry F.
DissipationReport dissipation_check(const std::vector<DiagnosticsRecord>& records,
                                    const ModelParams& params, double tol);

/// Trapezoid value of ∫ u_dist_l2 dt over records with t ∈ [t_from, t_to].
double window_integral_u_dist(const std::vector<DiagnosticsRecord>& records, double t_from,
                              double t_to);

struct TrajectorySample {
    double t;
    Field u;
    Field v;
};

/// Smooth space-time test function with its first derivatives.
struct TestFunction {
    std::function<double(double x, double y, double t)> value;
    std::function<double(double x, double y, double t)> time_derivative;
    std::function<std::array<double, 2>(double x, double y, double t)> spatial_gradient;
};

struct WeakResidual {
    double res_u;
    double res_v;
};

/// Residuals of both integral identities of the weak formulation (ε = 0),
/// midpoint quadrature in space and trapezoid quadrature over the sample
/// times.  The first sample supplies (u0, v0); the test function must vanish
/// at the last sample time.
WeakResidual weak_residual(const std::vector<TrajectorySample>& samples, const TestFunction& phi,
                           const ModelParams& params);

/// exp(1 − 1/(1 − (t/T)²)) on [0, T), zero afterwards; equals 1 at t = 0.
double time_bump(double t, double T);
double time_bump_derivative(double t, double T);

enum class SpatialProfile { constant, cos_x, cos_xy };

/// φ(x, y, t) = s(x, y)·time_bump(t, T) with s ≡ 1, cos(πx/Lx) or
/// cos(πx/Lx)cos(πy/Ly) on the grid's box.
TestFunction separable_test_function(SpatialProfile profile, const GridSpec& grid, double T);

} // namespace chemo
