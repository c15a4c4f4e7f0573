#include "chemo/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace chemo {

double compute_a(double kappa, double mu) {
    if (!(mu > 0.0)) throw InvalidParameter("mu must be > 0");
    return kappa > 0.0 ? mu / kappa : mu;
}

namespace {

void check_common(double chi, double kappa, double mu, double eps) {
    if (!std::isfinite(chi) || !std::isfinite(kappa) || !std::isfinite(mu) || !std::isfinite(eps))
        throw InvalidParameter("model parameters must be finite");
    if (!(eps >= 0.0 && eps < 1.0)) throw InvalidParameter("eps must lie in [0, 1)");
}

} // namespace

ModelParams::ModelParams(double chi, double kappa, double mu, double eps)
    : chi_(chi), kappa_(kappa), mu_(mu), eps_(eps) {
    check_common(chi, kappa, mu, eps);
    if (!(chi > 0.0)) throw InvalidParameter("chi must be > 0");
    a_ = compute_a(kappa, mu);
}

ModelParams ModelParams::relaxed(double chi, double kappa, double mu, double eps) {
    check_common(chi, kappa, mu, eps);
    if (chi < 0.0) throw InvalidParameter("chi must be >= 0");
    if (mu < 0.0) throw InvalidParameter("mu must be >= 0");
    ModelParams p;
    p.chi_ = chi;
    p.kappa_ = kappa;
    p.mu_ = mu;
    p.eps_ = eps;
    p.relaxed_ = true;
    if (mu > 0.0) {
        p.a_ = compute_a(kappa, mu);
    } else {
        if (eps != 0.0) throw InvalidParameter("eps must be 0 when mu = 0");
        p.a_ = 1.0;
    }
    return p;
}

void ModelParams::require_strict() const {
    if (!(chi_ > 0.0)) throw InvalidParameter("chi must be > 0");
    if (!(mu_ > 0.0)) throw InvalidParameter("mu must be > 0");
}

void InitialData::validate() const {
    require_same_grid(u0, v0);
    for (std::size_t k = 0; k < u0.size(); ++k) {
        if (!(u0[k] > 0.0) || !std::isfinite(u0[k]))
            throw InvalidParameter("u0 must be positive and finite (cell " + std::to_string(k) + ")");
        if (!(v0[k] > 0.0) || !std::isfinite(v0[k]))
            throw InvalidParameter("v0 must be positive and finite (cell " + std::to_string(k) + ")");
    }
}

double reaction(double u, const ModelParams& params) {
    if (u < 0.0) throw std::domain_error("reaction: negative density");
    if (u == 0.0) return 0.0;
    const double logistic = params.kappa() * u - params.mu() * u * u;
    if (params.eps() == 0.0) return logistic;
    return logistic - params.eps() * u * u * std::log(params.a() * u);
}

KConstants k_constants(double p, int N) {
    if (!(p > 1.0)) throw std::domain_error("k_constants: p must be > 1");
    if (N < 1) throw std::domain_error("k_constants: N must be >= 1");
    const double n = N;
    const double quad = 4.0 * p * p + n;
    const double k1 = p * (p - 1.0) / (p + 1.0) *
                      std::pow(4.0 * (p - 1.0) * quad / (p + 1.0), 1.0 / p);
    const double k2 = 4.0 * (p + n - 1.0) / (p + 1.0) *
                      std::pow(8.0 * (p - 1.0) * (p + n - 1.0) * quad / (p + 1.0), 0.5 * (p - 1.0));
    return {k1, k2};
}

MuCondition check_mu_condition(const ModelParams& params, double v0_sup, double p, int N) {
    if (v0_sup < 0.0) throw InvalidParameter("v0_sup must be >= 0");
    const auto [k1, k2] = k_constants(p, N);
    const double x = params.chi() * v0_sup;
    const double threshold = x == 0.0 ? 0.0 : k1 * std::pow(x, 2.0 / p) + k2 * std::pow(x, 2.0 * p);
    return {params.mu() >= threshold, threshold, p};
}

std::vector<double> default_p_scan(int N) {
    std::vector<double> ps;
    for (int k = 1; N + 0.25 * k <= 3.0 * N + 1e-12; ++k) ps.push_back(N + 0.25 * k);
    return ps;
}

MuCondition least_mu_threshold(const ModelParams& params, double v0_sup, int N,
                               const std::vector<double>& p_values) {
    const std::vector<double> ps = p_values.empty() ? default_p_scan(N) : p_values;
    MuCondition best{false, std::numeric_limits<double>::infinity(), ps.front()};
    for (double p : ps) {
        const MuCondition c = check_mu_condition(params, v0_sup, p, N);
        if (c.threshold < best.threshold) best = c;
    }
    return best;
}

double mu_threshold_variant(double chi, double v0_sup, int N, double p) {
    const auto [k1, k2] = k_constants(p, N);
    const double x = chi * v0_sup;
    if (x == 0.0) return 0.0;
    return k1 * std::pow(x, 1.0 / N) + k2 * std::pow(x, 2.0 * N);
}

double mass_bound(const ModelParams& params, double omega_measure, double u0_mass) {
    if (!(omega_measure > 0.0)) throw InvalidParameter("domain measure must be > 0");
    const double kappa = params.kappa(), mu = params.mu(), a = params.a();
    const double kappa_plus = std::max(kappa, 0.0);
    const double half = omega_measure / (2.0 * mu);
    const double root = std::sqrt((kappa_plus * half) * (kappa_plus * half) +
                                  params.eps() * omega_measure / (2.0 * a * a * std::numbers::e * mu));
    return std::max(kappa * half + root, u0_mass);
}

} // namespace chemo
