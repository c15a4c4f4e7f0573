#include "chemo/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

using namespace chemo;

namespace {

const GridSpec line64 = GridSpec::interval(64, 1.0);
const GridSpec square32 = GridSpec::rectangle(32, 32, 1.0, 1.0);

} // namespace

TEST_CASE("lyapunov functional at equilibria") {
    CHECK(lyapunov_F(Field(line64, 1.0), Field(line64, 0.0), ModelParams(1, 1, 1)) == doctest::Approx(1.0).epsilon(1e-14));
    for (auto [kappa, mu] : {std::pair{2.0, 0.5}, {0.3, 1.7}, {1.0, 4.0}}) {
        const ModelParams p(1.0, kappa, mu);
        const double r = kappa / mu;
        CHECK(lyapunov_F(Field(line64, r), Field(line64, 0.0), p) ==
              doctest::Approx(r - r * std::log(r)).epsilon(1e-13));
    }
}

TEST_CASE("lyapunov functional increases with v and rejects bad input") {
    const ModelParams p(1, 1, 1);
    const Field u = Field::sample(line64, [](double x, double) { return 1 + 0.5 * std::cos(std::numbers::pi * x); });
    const Field v = Field::sample(line64, [](double x, double) { return 0.2 + x; });
    const double f0 = lyapunov_F(u, v, p);
    CHECK(lyapunov_F(u, v + Field(line64, 0.1), p) > f0);

    CHECK_THROWS_AS(lyapunov_F(u, v, ModelParams(1, 0, 1)), NotApplicable);
    CHECK_THROWS_AS(lyapunov_F(u, v, ModelParams(1, -1, 1)), NotApplicable);
    Field bad = u;
    bad[17] = 0.0;
    try {
        lyapunov_F(bad, v, p);
        FAIL("expected domain_error");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
}

TEST_CASE("entropy energy examples") {
    const ModelParams p(1.5, 1, 1);
    CHECK(entropy_energy(Field(line64, 1.0), Field(line64, 3.0), p, 1e-12) == 0.0);
    CHECK(entropy_energy(Field(line64, std::numbers::e), Field(line64, 0.5), p, 1e-12) ==
          doctest::Approx(std::numbers::e).epsilon(1e-13));
    // 0 ln 0 = 0
    CHECK(entropy_energy(Field(line64, 0.0), Field(line64, 1.0), p, 1e-12) == 0.0);
    CHECK_THROWS_AS(entropy_energy(Field(line64, 1.0), Field(line64, 1.0), p, 0.0), std::invalid_argument);

    const Field u = Field::sample(square32, [](double x, double y) { return 1 + x * y; });
    const Field v = Field::sample(square32, [](double x, double y) { return 1e-4 + x * x * (1 - y); });
    double prev = entropy_energy(u, v, p, 1e-8);
    for (double floor : {1e-6, 1e-4, 1e-2, 1e-1, 1.0}) {
        const double e = entropy_energy(u, v, p, floor);
        CHECK(e <= prev);
        prev = e;
    }
}

TEST_CASE("coupled functional examples") {
    const auto zero = coupled_functional(Field(line64, 0.0), Field(line64, 4.0), 2.0, 1.0);
    CHECK(zero.unweighted == 0.0);
    CHECK(zero.weighted == 0.0);
    const auto two = coupled_functional(Field(line64, 2.0), Field(line64, 4.0), 2.0, 3.0);
    CHECK(two.unweighted == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(two.weighted == doctest::Approx(4.0).epsilon(1e-14));

    const Field u = Field::sample(line64, [](double x, double) { return 1 + x; });
    const Field v = Field::sample(line64, [](double x, double) { return x * x; });
    const double p = 3.0;
    const auto a = coupled_functional(u, Field(line64, 1.0), p, 1.0);
    const auto b = coupled_functional(2.0 * u, Field(line64, 1.0), p, 1.0);
    CHECK(b.unweighted == doctest::Approx(8.0 * a.unweighted).epsilon(1e-13));
    const auto g1 = coupled_functional(Field(line64, 0.0), v, 2.0, 1.0);
    const auto g2 = coupled_functional(Field(line64, 0.0), v, 2.0, 2.0);
    CHECK(g2.weighted == doctest::Approx(16.0 * g1.weighted).epsilon(1e-13));
    CHECK(g2.unweighted == doctest::Approx(g1.unweighted).epsilon(1e-15));
    CHECK_THROWS_AS(coupled_functional(u, v, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("compute_record omits kappa-dependent entries for kappa <= 0") {
    const Field u = Field::sample(line64, [](double x, double) { return 1 + x; });
    const Field v(line64, 0.5);
    const auto rec = compute_record(0.0, u, v, ModelParams(1, 0, 1), {}, 0.0);
    CHECK_FALSE(rec.lyapunov_F.has_value());
    CHECK_FALSE(rec.u_dist_l2.has_value());
    CHECK(rec.mass == doctest::Approx(1.5).epsilon(1e-14));
    const auto rec2 = compute_record(0.0, u, v, ModelParams(1, 1, 1), {}, 0.0);
    CHECK(rec2.lyapunov_F.has_value());
    CHECK(rec2.u_dist_l2.has_value());
    CHECK(rec2.v_sup == 0.5);
}

TEST_CASE("interpolation check: constants are degenerate") {
    const auto ic = check_interpolation_inequality(Field(line64, 3.0), 1.0, 1);
    CHECK(ic.degenerate);
    CHECK(std::isnan(ic.ratio));
    CHECK_THROWS_AS(check_interpolation_inequality(Field(line64, 3.0), 0.5, 1), std::invalid_argument);
}

TEST_CASE("interpolation check approaches the analytic ratio 120") {
    auto ratio_at = [](int n) {
        const GridSpec g = GridSpec::interval(n, 1.0);
        const Field c = Field::sample(g, [](double x, double) { return 2 + std::cos(std::numbers::pi * x); });
        return check_interpolation_inequality(c, 1.0, 1);
    };
    const auto r512 = ratio_at(512);
    CHECK(r512.lhs == doctest::Approx(0.375 * std::pow(std::numbers::pi, 4)).epsilon(1e-2));
    CHECK(r512.rhs == doctest::Approx(45 * std::pow(std::numbers::pi, 4)).epsilon(1e-2));
    CHECK(std::abs(r512.ratio - 120.0) < 0.02 * 120.0);
    CHECK(std::abs(r512.ratio - 120.0) < std::abs(ratio_at(64).ratio - 120.0));
}

TEST_CASE("hessian inequality holds exactly in 1D") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(0.1, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        Field c(line64);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = d(rng);
        CHECK(check_hessian_inequality(c, 1) == 0.0);
    }
}

TEST_CASE("hessian inequality on 2D fields") {
    const Field saddle = Field::sample(square32, [](double x, double y) { return x * x - y * y; });
    CHECK(check_hessian_inequality(saddle, 2) == 0.0);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = d(rng), b = d(rng), c0 = d(rng), w = 1 + 3 * std::abs(d(rng));
        const Field c = Field::sample(square32, [&](double x, double y) {
            return 3 + a * std::cos(w * x) * std::sin(2 * y) + b * x * x * y + c0 * std::exp(x - y);
        });
        const double hess_sup = norm_inf(hessian_frobenius_sq(c));
        CHECK(check_hessian_inequality(c, 2) <= 1e-10 * hess_sup);
    }
    // Fully random cell values act as arbitrary stencil tuples.
    for (int trial = 0; trial < 20; ++trial) {
        Field c(square32);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = d(rng);
        CHECK(check_hessian_inequality(c, 2) <= 1e-10 * norm_inf(hessian_frobenius_sq(c)));
    }
}

TEST_CASE("dissipation check on an equilibrium trajectory has zero increments") {
    const ModelParams p(1, 2, 1);
    std::vector<DiagnosticsRecord> recs;
    for (int i = 0; i <= 10; ++i)
        recs.push_back(compute_record(0.1 * i, Field(line64, 2.0), Field(line64, 0.0), p, {}, 0.0));
    const auto rep = dissipation_check(recs, p, 1e-4);
    CHECK(rep.passed);
    CHECK(rep.worst_excess == 0.0);
    CHECK(rep.total_bounded);
    CHECK_THROWS_AS(dissipation_check(recs, ModelParams(1, 0, 1), 1e-4), NotApplicable);
}

TEST_CASE("dissipation check flags an increasing functional") {
    const ModelParams p(1, 1, 1);
    std::vector<DiagnosticsRecord> recs(3);
    for (int i = 0; i < 3; ++i) {
        recs[i].t = i;
        recs[i].lyapunov_F = 1.0 + 0.1 * i;
    }
    const auto rep = dissipation_check(recs, p, 1e-4);
    CHECK_FALSE(rep.passed);
}

TEST_CASE("window integral of the distance to equilibrium") {
    std::vector<DiagnosticsRecord> recs;
    for (int i = 0; i <= 20; ++i) {
        DiagnosticsRecord r;
        r.t = 0.1 * i;
        r.u_dist_l2 = 2.0 * r.t;
        recs.push_back(r);
    }
    // ∫_1^2 2t dt = 3, exact for the trapezoid rule.
    CHECK(window_integral_u_dist(recs, 1.0, 2.0) == doctest::Approx(3.0).epsilon(1e-12));
}

namespace {

TestFunction space_constant_bump(double T) {
    return {[T](double, double, double t) { return time_bump(t, T); },
            [T](double, double, double t) { return time_bump_derivative(t, T); },
            [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; }};
}

} // namespace

TEST_CASE("time bump") {
    CHECK(time_bump(0.0, 2.0) == 1.0);
    CHECK(time_bump(2.0, 2.0) == 0.0);
    CHECK(time_bump(3.0, 2.0) == 0.0);
    const double h = 1e-6;
    for (double t : {0.3, 0.9, 1.5})
        CHECK(time_bump_derivative(t, 2.0) ==
              doctest::Approx((time_bump(t + h, 2.0) - time_bump(t - h, 2.0)) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("weak residual vanishes for the zero test function") {
    const ModelParams p(1, 1, 1);
    std::vector<TrajectorySample> s;
    for (int i = 0; i <= 4; ++i)
        s.push_back({0.25 * i, Field(square32, 1.0 + i), Field(square32, 0.5)});
    const TestFunction zero{[](double, double, double) { return 0.0; }, [](double, double, double) { return 0.0; },
                            [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; }};
    const auto w = weak_residual(s, zero, p);
    CHECK(w.res_u == 0.0);
    CHECK(w.res_v == 0.0);
}

TEST_CASE("weak residual of the exact equilibrium trajectory") {
    const ModelParams p(1.3, 1, 1);
    const double T = 2.0;
    // The identity holds exactly in the continuum; what remains is the
    // second-order error of the trapezoid rule in time.
    auto residual = [&](int n) {
        std::vector<TrajectorySample> s;
        for (int i = 0; i <= n; ++i) {
            const double t = T * i / n;
            s.push_back({t, Field(line64, 1.0), Field(line64, 0.7 * std::exp(-t))});
        }
        return weak_residual(s, space_constant_bump(T), p);
    };
    const auto coarse = residual(400);
    const auto fine = residual(800);
    CHECK(coarse.res_u < 1e-5);
    CHECK(coarse.res_v < 1e-5);
    CHECK(coarse.res_u / fine.res_u == doctest::Approx(4.0).epsilon(0.05));
    CHECK(coarse.res_v / fine.res_v == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("weak residual requires the test function to vanish at the end") {
    const ModelParams p(1, 1, 1);
    std::vector<TrajectorySample> s;
    for (int i = 0; i <= 4; ++i) s.push_back({0.25 * i, Field(line64, 1.0), Field(line64, 1.0)});
    CHECK_THROWS_AS(weak_residual(s, space_constant_bump(2.0), p), std::invalid_argument);
}
