#include "chemo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace chemo {

namespace {

double grad_sq_at(const std::vector<Field>& g, std::size_t k) {
    double s = 0.0;
    for (const Field& c : g) s += c[k] * c[k];
    return s;
}

} // namespace

double lyapunov_F(const Field& u, const Field& v, const ModelParams& params) {
    require_same_grid(u, v);
    if (!(params.kappa() > 0.0)) throw NotApplicable("lyapunov_F requires kappa > 0");
    const double ratio = params.kappa() / params.mu();
    double su = 0.0, slog = 0.0, sv2 = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (!(u[k] > 0.0))
            throw std::domain_error("lyapunov_F: u is not positive in cell " + std::to_string(k));
        su += u[k];
        slog += std::log(u[k]);
        sv2 += v[k] * v[k];
    }
    const double w = u.grid().cell_volume();
    return (su - ratio * slog + 0.5 * ratio * sv2) * w;
}

double entropy_energy(const Field& u, const Field& v, const ModelParams& params, double v_floor) {
    require_same_grid(u, v);
    if (!(v_floor > 0.0)) throw std::invalid_argument("entropy_energy: v_floor must be > 0");
    const auto gv = gradient(v);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (u[k] > 0.0) s += u[k] * std::log(u[k]);
        s += 0.5 * params.chi() * grad_sq_at(gv, k) / std::max(v[k], v_floor);
    }
    return s * u.grid().cell_volume();
}

CoupledFunctional coupled_functional(const Field& u, const Field& v, double p, double chi) {
    require_same_grid(u, v);
    if (!(p >= 1.0)) throw std::invalid_argument("coupled_functional: p must be >= 1");
    const auto gv = gradient(v);
    double su = 0.0, sg = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        su += std::pow(std::abs(u[k]), p);
        sg += std::pow(grad_sq_at(gv, k), p);
    }
    const double w = u.grid().cell_volume();
    return {(su + sg) * w, (su + std::pow(chi, 2.0 * p) * sg) * w};
}

double dissipation_rate(const Field& u, const ModelParams& params) {
    const double eq = params.kappa() / params.mu();
    double s = 0.0;
    for (double x : u.values()) s += (x - eq) * (x - eq);
    return params.mu() * s * u.grid().cell_volume();
}

DiagnosticsRecord compute_record(double t, const Field& u, const Field& v, const ModelParams& params,
                                 const DiagnosticsOptions& opts, double cum_dissipation) {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = integrate(u);
    r.u_sup = norm_inf(u);
    r.v_sup = norm_inf(v);
    const auto gv = gradient(v);
    double g2 = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) g2 += grad_sq_at(gv, k);
    r.grad_v_l2sq = g2 * v.grid().cell_volume();
    r.y_p = coupled_functional(u, v, opts.p, params.chi()).unweighted;
    if (params.kappa() > 0.0) {
        if (u.min() > 0.0) r.lyapunov_F = lyapunov_F(u, v, params);
        Field diff = u;
        for (double& x : diff.values()) x -= params.equilibrium();
        r.u_dist_l2 = norm_lp(diff, 2.0);
    }
    r.entropy_E = entropy_energy(u, v, params, opts.v_floor);
    r.v_lp = norm_lp(v, opts.p);
    r.cum_dissipation = cum_dissipation;
    return r;
}

InterpolationCheck check_interpolation_inequality(const Field& c, double q, int N) {
    if (!(q >= 1.0)) throw std::invalid_argument("interpolation check: q must be >= 1");
    const auto g = gradient(c);
    const Field hess = hessian_frobenius_sq(c);
    double lhs = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double g2 = grad_sq_at(g, k);
        lhs += std::pow(g2, q + 1.0);
        weighted += (q == 1.0 ? 1.0 : std::pow(g2, q - 1.0)) * hess[k];
    }
    const double w = c.grid().cell_volume();
    lhs *= w;
    const double sup = norm_inf(c);
    const double rhs = 2.0 * (4.0 * q * q + N) * sup * sup * weighted * w;
    InterpolationCheck out{lhs, rhs, std::numeric_limits<double>::quiet_NaN(), lhs < 1e-14};
    if (!out.degenerate) out.ratio = rhs / lhs;
    return out;
}

double check_hessian_inequality(const Field& c, int N) {
    const Field lap = laplacian(c);
    const Field hess = hessian_frobenius_sq(c);
    double worst = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k)
        worst = std::max(worst, lap[k] * lap[k] - N * hess[k]);
    return worst;
}

DissipationReport dissipation_check(const std::vector<DiagnosticsRecord>& records,
                                    const ModelParams& params, double tol) {
    if (!(params.kappa() > 0.0)) throw NotApplicable("dissipation_check requires kappa > 0");
    DissipationReport rep;
    if (records.empty()) return rep;
    auto F = [](const DiagnosticsRecord& r) {
        if (!r.lyapunov_F) throw std::invalid_argument("dissipation_check: record without F");
        return *r.lyapunov_F;
    };
    double f_min = F(records.front());
    rep.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < records.size(); ++i) {
        const double f1 = F(records[i]), f2 = F(records[i + 1]);
        if (records[i + 1].t < records[i].t)
            throw std::invalid_argument("dissipation_check: records not time-ordered");
        const double incr =
            (f2 - f1 + (records[i + 1].cum_dissipation - records[i].cum_dissipation)) /
            (1.0 + std::abs(f1));
        if (incr > rep.worst_excess) {
            rep.worst_excess = incr;
            rep.worst_interval = i;
        }
        if (incr > tol) rep.passed = false;
        f_min = std::min(f_min, f2);
    }
    if (records.size() < 2) rep.worst_excess = 0.0;
    rep.cum_total = records.back().cum_dissipation - records.front().cum_dissipation;
    rep.f_drop = F(records.front()) - f_min;
    rep.total_bounded = rep.cum_total <= rep.f_drop + tol * (1.0 + std::abs(F(records.front())));
    return rep;
}

double window_integral_u_dist(const std::vector<DiagnosticsRecord>& records, double t_from,
                              double t_to) {
    double s = 0.0;
    const DiagnosticsRecord* prev = nullptr;
    for (const auto& r : records) {
        if (r.t < t_from - 1e-12 || r.t > t_to + 1e-12) continue;
        if (!r.u_dist_l2) throw NotApplicable("u_dist_l2 requires kappa > 0");
        if (prev) s += 0.5 * (r.t - prev->t) * (*r.u_dist_l2 + *prev->u_dist_l2);
        prev = &r;
    }
    return s;
}

double time_bump(double t, double T) {
    if (t >= T || t <= -T) return 0.0;
    const double s = t / T;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double time_bump_derivative(double t, double T) {
    if (t >= T || t <= -T) return 0.0;
    const double s = t / T;
    const double d = 1.0 - s * s;
    return time_bump(t, T) * (-2.0 * s / (d * d)) / T;
}

WeakResidual weak_residual(const std::vector<TrajectorySample>& samples, const TestFunction& phi,
                           const ModelParams& params) {
    if (samples.empty()) throw std::invalid_argument("weak_residual: no samples");
    const GridSpec& g = samples.front().u.grid();
    const double w = g.cell_volume();
    const int ny = g.dim() == 2 ? g.cells(1) : 1;
    const double t_last = samples.back().t;

    auto for_cells = [&](auto&& body) {
        for (int j = 0; j < ny; ++j) {
            const double y = g.dim() == 2 ? g.center(1, j) : 0.0;
            for (int i = 0; i < g.cells(0); ++i) body(g.index(i, j), g.center(0, i), y);
        }
    };

    bool vanishes = true;
    for_cells([&](std::size_t, double x, double y) {
        if (std::abs(phi.value(x, y, t_last)) > 1e-14) vanishes = false;
    });
    if (!vanishes)
        throw std::invalid_argument("weak_residual: test function does not vanish at the final time");

    // Space integrals of the u-identity and the v-identity at one sample.
    auto space_terms = [&](const TrajectorySample& s, double& ru, double& rv) {
        require_same_grid(s.u, s.v);
        const auto gu = gradient(s.u);
        const auto gv = gradient(s.v);
        double au = 0.0, av = 0.0;
        for_cells([&](std::size_t k, double x, double y) {
            const double f = phi.value(x, y, s.t);
            const double ft = phi.time_derivative(x, y, s.t);
            const auto gp = phi.spatial_gradient(x, y, s.t);
            double gu_gp = 0.0, gv_gp = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                gu_gp += gu[a][k] * gp[a];
                gv_gp += gv[a][k] * gp[a];
            }
            const double u = s.u[k], v = s.v[k];
            au += -u * ft + gu_gp - params.chi() * u * gv_gp - params.kappa() * u * f +
                  params.mu() * u * u * f;
            av += -v * ft + gv_gp + u * v * f;
        });
        ru = au * w;
        rv = av * w;
    };

    double ru = 0.0, rv = 0.0;
    double prev_u = 0.0, prev_v = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
        double cu, cv;
        space_terms(samples[n], cu, cv);
        if (n > 0) {
            const double dt = samples[n].t - samples[n - 1].t;
            ru += 0.5 * dt * (cu + prev_u);
            rv += 0.5 * dt * (cv + prev_v);
        }
        prev_u = cu;
        prev_v = cv;
    }
    const TrajectorySample& first = samples.front();
    double iu0 = 0.0, iv0 = 0.0;
    for_cells([&](std::size_t k, double x, double y) {
        const double f = phi.value(x, y, first.t);
        iu0 += first.u[k] * f;
        iv0 += first.v[k] * f;
    });
    ru -= iu0 * w;
    rv -= iv0 * w;
    return {std::abs(ru), std::abs(rv)};
}

TestFunction separable_test_function(SpatialProfile profile, const GridSpec& grid, double T) {
    const double kx = std::numbers::pi / grid.length(0);
    const double ky = grid.dim() == 2 ? std::numbers::pi / grid.length(1) : 0.0;
    auto space = [=](double x, double y) {
        switch (profile) {
        case SpatialProfile::cos_x: return std::cos(kx * x);
        case SpatialProfile::cos_xy: return std::cos(kx * x) * std::cos(ky * y);
        default: return 1.0;
        }
    };
    auto grad = [=](double x, double y) -> std::array<double, 2> {
        switch (profile) {
        case SpatialProfile::cos_x: return {-kx * std::sin(kx * x), 0.0};
        case SpatialProfile::cos_xy:
            return {-kx * std::sin(kx * x) * std::cos(ky * y), -ky * std::cos(kx * x) * std::sin(ky * y)};
        default: return {0.0, 0.0};
        }
    };
    TestFunction phi;
    phi.value = [=](double x, double y, double t) { return space(x, y) * time_bump(t, T); };
    phi.time_derivative = [=](double x, double y, double t) { return space(x, y) * time_bump_derivative(t, T); };
    phi.spatial_gradient = [=](double x, double y, double t) {
        const auto g = grad(x, y);
        const double b = time_bump(t, T);
        return std::array<double, 2>{g[0] * b, g[1] * b};
    };
    return phi;
}

} // namespace chemo
