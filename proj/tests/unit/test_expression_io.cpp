#include "chemo/expression.hpp"
#include "chemo/io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace chemo;

TEST_CASE("expression evaluation") {
    CHECK(Expression::parse("1")(0.3) == 1.0);
    CHECK(Expression::parse("1 + 2*3")(0) == 7.0);
    CHECK(Expression::parse("(1 + 2)*3")(0) == 9.0);
    CHECK(Expression::parse("2^3^2")(0) == 512.0);
    CHECK(Expression::parse("-2^2")(0) == -4.0);
    CHECK(Expression::parse("2^-1")(0) == 0.5);
    CHECK(Expression::parse("8/4/2")(0) == 1.0);
    CHECK(Expression::parse("1 - 2 - 3")(0) == -4.0);
    CHECK(Expression::parse("1e-3 * 2")(0) == 2e-3);
    CHECK(Expression::parse("x*y")(3, 4) == 12.0);
    CHECK(Expression::parse("pi")(0) == std::numbers::pi);
    CHECK(Expression::parse("exp(1) - e")(0) == 0.0);
    const double x = 0.3, y = 0.7;
    CHECK(Expression::parse("1 + 0.5*cos(pi*x)*cos(pi*y)")(x, y) ==
          1 + 0.5 * std::cos(std::numbers::pi * x) * std::cos(std::numbers::pi * y));
    CHECK(Expression::parse("sin(x)^2 + cos(x)^2")(1.234) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Expression::parse(" 2 * x ").text() == " 2 * x ");
}

TEST_CASE("expression errors name the column") {
    auto message = [](const std::string& s) {
        try {
            Expression::parse(s);
        } catch (const ExpressionError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("1 +").find("column 4") != std::string::npos);
    CHECK(message("foo(x)").find("unknown identifier 'foo'") != std::string::npos);
    CHECK(message("cos x").find("expected '('") != std::string::npos);
    CHECK(message("(1 + 2").find("expected ')'") != std::string::npos);
    CHECK(message("1 2").find("column 3") != std::string::npos);
    CHECK(message("z").find("column 1") != std::string::npos);
    CHECK_FALSE(message("").empty());
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t bits = rng();
        double x;
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isfinite(x)) continue;
        const double back = parse_double(format_double(x));
        CHECK(std::memcmp(&back, &x, sizeof x) == 0);
    }
    CHECK(parse_double(" +1.5 ") == 1.5);
    CHECK_THROWS_AS(parse_double("1.5x"), IoError);
    CHECK_THROWS_AS(parse_double(""), IoError);
}

TEST_CASE("diagnostics csv rows") {
    std::ostringstream os;
    DiagnosticsRecord r;
    r.t = 0.5;
    r.mass = 1;
    r.cum_dissipation = 0.25;
    write_diagnostics_csv(os, {r});
    CHECK(os.str() == "t,mass,u_sup,v_sup,grad_v_l2sq,y_p,lyapunov_F,entropy_E,u_dist_l2,v_lp,cum_dissipation\n"
                      "0.5,1,0,0,0,0,,0,,0,0.25\n");
    r.lyapunov_F = 1.5;
    r.u_dist_l2 = 1e-20;
    CHECK(diagnostics_row(r) == "0.5,1,0,0,0,0,1.5,0,1e-20,0,0.25");
}

TEST_CASE("snapshot round trip") {
    for (const GridSpec& g : {GridSpec::interval(7, 2.5), GridSpec::rectangle(5, 4, 1.0, 0.3)}) {
        const Field f = Field::sample(g, [](double x, double y) { return std::exp(x) / 3 + y * 1e-17; });
        std::stringstream ss;
        write_snapshot(ss, f);
        const Field back = read_snapshot(ss);
        CHECK(back.grid() == g);
        for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
    }
}

TEST_CASE("malformed snapshots are rejected") {
    std::istringstream a("1 3\n1\n2\n3\n");
    CHECK_THROWS_AS(read_snapshot(a), IoError);
    std::istringstream b("1 3 1\n1\n2\n");
    CHECK_THROWS_AS(read_snapshot(b), IoError);
    std::istringstream c("1 3 1\n1\nabc\n3\n");
    CHECK_THROWS_AS(read_snapshot(c), IoError);
    std::istringstream d("1 2 1\n1\n2\n");
    CHECK_THROWS_AS(read_snapshot(d), IoError);
    CHECK_THROWS_AS(read_snapshot(std::filesystem::path("/nonexistent/snap.txt")), IoError);
}
