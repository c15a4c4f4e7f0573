#include "chemo/cli.hpp"
#include "chemo/config.hpp"
#include "chemo/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace chemo;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"([grid]
dim = 1
cells = 32
lengths = 1

[model]
chi = 1
kappa = 1
mu = 1

[init]
u0_expr = 1
v0_expr = 1

[solver]
dt = 0.01
t_end = 0.5

[output]
sample_every = 0.1
directory = @DIR@
)";

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("chemo_unit_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }

    fs::path write(const std::string& file, std::string text) const {
        for (auto pos = text.find("@DIR@"); pos != std::string::npos; pos = text.find("@DIR@"))
            text.replace(pos, 5, (dir / "out").string());
        std::ofstream(dir / file) << text;
        return dir / file;
    }
};

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "chemo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::string> lines;
    for (std::string l; std::getline(is, l);) lines.push_back(l);
    return lines;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
}

} // namespace

TEST_CASE("config syntax errors carry line numbers") {
    auto err = [](const std::string& text) {
        std::istringstream is(text);
        try {
            ConfigDocument::parse(is, "t.cfg");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(err("x = 1\n") == "t.cfg:1: key outside of any [section]");
    CHECK(err("[grid]\n\n dim 1\n").find("t.cfg:3:") == 0);
    CHECK(err("[grid\n").find("t.cfg:1: unterminated") == 0);
    CHECK(err("[a]\nk = 1\nk = 2\n").find("t.cfg:3: [a].k: duplicate key") == 0);
    CHECK(err("# comment\n[a]  # trailing\nk = 1 # c\n").empty());
}

TEST_CASE("run config values and validation") {
    Scratch s("config_values");
    const RunConfig rc = load_run_config(s.write("ok.cfg", kBase));
    CHECK(rc.grid == GridSpec::interval(32, 1.0));
    CHECK(rc.params.mu() == 1.0);
    CHECK(rc.solver.dt == 0.01);
    CHECK(rc.solver.taxis == TaxisScheme::upwind);
    CHECK(rc.sample_every == 0.1);
    CHECK_FALSE(rc.snapshots);

    auto error_of = [&](const std::string& text) {
        try {
            load_run_config(s.write("bad.cfg", text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string mu_err = error_of(replace(kBase, "mu = 1", "mu = -1"));
    CHECK(mu_err.find("bad.cfg:9: [model].mu") != std::string::npos);
    CHECK(error_of(replace(kBase, "chi = 1", "chi = 1\na = 2")).find("[model].a") != std::string::npos);
    CHECK(error_of(replace(kBase, "chi = 1", "chii = 1")).find("[model].chii: unknown key") != std::string::npos);
    CHECK(error_of(replace(kBase, "cells = 32", "cells = 2")).find("[grid].cells") != std::string::npos);
    CHECK(error_of(replace(kBase, "dim = 1", "dim = 2")).find("[grid].cells") != std::string::npos);
    CHECK(error_of(replace(kBase, "u0_expr = 1", "u0_expr = cos(pi*x)")).find("[init].u0_expr") !=
          std::string::npos);
    CHECK(error_of(replace(kBase, "u0_expr = 1", "u0_expr = 1 +")).find("column") != std::string::npos);
    CHECK(error_of(replace(kBase, "dt = 0.01", "dt = 1")).find("[solver].dt") != std::string::npos);
    CHECK(error_of(replace(kBase, "t_end = 0.5", "t_end = 0.5\ntaxis_scheme = weno"))
              .find("[solver].taxis_scheme") != std::string::npos);
    CHECK(error_of(replace(kBase, "kappa = 1\n", "")).find("[model].kappa: missing") != std::string::npos);
    CHECK(error_of(std::string(kBase) + "[extra]\n").find("unknown section [extra]") != std::string::npos);
    CHECK(error_of(std::string(kBase) + "[diagnostics]\nv_floor = 0\n").find("[diagnostics].v_floor") !=
          std::string::npos);
}

TEST_CASE("cli run on equilibrium data") {
    Scratch s("cli_equilibrium");
    const auto r = cli({"run", s.write("eq.cfg", kBase).string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("termination reached_t_end") != std::string::npos);
    const auto lines = lines_of(s.dir / "out" / "diagnostics.csv");
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == kDiagnosticsHeader);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        REQUIRE(cells.size() == 11);
        CHECK(cells[1] == "1"); // mass
        CHECK(cells[2] == "1"); // u_sup
        CHECK(cells[8] == "0"); // u_dist_l2
    }
}

TEST_CASE("cli run with kappa <= 0 leaves kappa-dependent cells empty") {
    Scratch s("cli_kappa");
    const auto r = cli({"run", s.write("k.cfg", replace(kBase, "kappa = 1", "kappa = 0")).string()});
    CHECK(r.code == 0);
    const auto lines = lines_of(s.dir / "out" / "diagnostics.csv");
    REQUIRE(lines.size() > 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i]);
        REQUIRE(cells.size() == 11);
        CHECK(cells[6].empty());
        CHECK(cells[8].empty());
    }
}

TEST_CASE("cli exit codes for input errors, solver failure and blow-up") {
    Scratch s("cli_codes");
    const auto bad = cli({"run", s.write("mu.cfg", replace(kBase, "mu = 1", "mu = -1")).string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("[model].mu") != std::string::npos);

    CHECK(cli({"run", (s.dir / "missing.cfg").string()}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({}).code == 2);

    std::string failing = replace(kBase, "v0_expr = 1", "v0_expr = 1 + 0.5*cos(pi*x)");
    failing = replace(failing, "t_end = 0.5", "t_end = 0.5\nlinsolve_tol = 1e-15\nlinsolve_maxiter = 1");
    CHECK(cli({"run", s.write("fail.cfg", failing).string()}).code == 3);

    std::string blow = replace(kBase, "mu = 1", "mu = 0\nrelaxed = true");
    blow = replace(blow, "kappa = 1", "kappa = 5");
    blow = replace(blow, "t_end = 0.5", "t_end = 5\nblowup_threshold = 100");
    const auto b = cli({"run", s.write("blow.cfg", blow).string()});
    CHECK(b.code == 4);
    CHECK(b.out.find("termination blow_up") != std::string::npos);
}

TEST_CASE("cli run writes snapshots and the diagnose subcommand reads them") {
    Scratch s("cli_snapshots");
    std::string text = replace(kBase, "u0_expr = 1", "u0_expr = 1 + 0.5*cos(pi*x)");
    text = replace(text, "v0_expr = 1", "v0_expr = 1 + 0.25*cos(pi*x)");
    text += "snapshots = true\n";
    REQUIRE(cli({"run", s.write("snap.cfg", text).string()}).code == 0);
    const fs::path snaps = s.dir / "out" / "snapshots";
    const auto index = lines_of(snaps / "snapshots.csv");
    REQUIRE(index.size() == 7);
    CHECK(index[0] == "t,u_file,v_file");

    const auto h = cli({"diagnose", "--check", "hessian", (snaps / "u_00003.txt").string(),
                        (snaps / "v_00003.txt").string()});
    CHECK(h.code == 0);
    CHECK(h.out.find("max_violation 0\n") != std::string::npos);

    const auto i = cli({"diagnose", "--check", "interpolation", (snaps / "v_00002.txt").string()});
    CHECK(i.code == 0);
    CHECK(i.out.find("ratio") != std::string::npos);

    const auto w = cli({"diagnose", "--check", "weak", "--index", (snaps / "snapshots.csv").string()});
    CHECK(w.code == 0);
    CHECK(w.out.find("weak cosx res_u") != std::string::npos);

    CHECK(cli({"diagnose", "--check", "hessian", (s.dir / "nope.txt").string()}).code == 2);
    CHECK(cli({"diagnose", "--check", "weak", "--index", (s.dir / "nope.csv").string()}).code == 2);
    CHECK(cli({"diagnose", "--check", "bogus", (snaps / "u_00003.txt").string()}).code == 2);
}

TEST_CASE("cli check-condition") {
    const auto forced = cli({"check-condition", "--chi", "1", "--kappa", "1", "--mu", "1", "--v0-sup", "1",
                             "--dim", "1", "--p", "2"});
    CHECK(forced.code == 1);
    CHECK(forced.out.find("threshold 28.5657137141714") == 0);
    CHECK(forced.out.find("verdict unsatisfied") != std::string::npos);

    const auto zero = cli({"check-condition", "--chi", "1", "--kappa", "1", "--mu", "1", "--v0-sup", "0",
                           "--dim", "2"});
    CHECK(zero.code == 0);
    CHECK(zero.out.find("verdict satisfied") != std::string::npos);

    const auto big = cli({"check-condition", "--chi", "1", "--kappa", "1", "--mu", "30", "--v0-sup", "1",
                          "--dim", "1", "--p", "2"});
    CHECK(big.code == 0);
    // Same numbers regardless of the verdict.
    CHECK(big.out.substr(0, big.out.find("verdict")) == forced.out.substr(0, forced.out.find("verdict")));

    CHECK(cli({"check-condition", "--chi", "1", "--kappa", "1", "--mu", "-1", "--v0-sup", "1", "--dim", "1"})
              .code == 2);
    CHECK(cli({"check-condition", "--chi", "1"}).code == 2);
}

TEST_CASE("cli experiment rejects unknown scenarios") {
    Scratch s("cli_scenario");
    const auto r = cli({"experiment", s.write("x.cfg", std::string(kBase) + "[experiment]\nscenario = chaos\n").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("[experiment].scenario") != std::string::npos);
}

TEST_CASE("cli experiment reports assertion failures with exit 5") {
    Scratch s("cli_assert");
    // Far too short a horizon for stabilization to 1e-3.
    std::string text = replace(kBase, "u0_expr = 1", "u0_expr = 1 + 0.5*cos(pi*x)");
    text += "[experiment]\nscenario = stabilization\ntol = 1e-3\n";
    const auto r = cli({"experiment", s.write("st.cfg", text).string()});
    CHECK(r.code == 5);
    CHECK(r.err.find("violation: run_0000: final sup|u - kappa/mu|") != std::string::npos);
    CHECK(fs::exists(s.dir / "out" / "manifest.txt"));
    CHECK(fs::exists(s.dir / "out" / "sweep.csv"));
    CHECK(fs::exists(s.dir / "out" / "run_0000.csv"));
}

TEST_CASE("cli experiment mms") {
    Scratch s("cli_mms");
    std::string text = replace(kBase, "t_end = 0.5", "t_end = 0.5\ntaxis_scheme = central");
    text += "[experiment]\nscenario = mms\nmms_cells = 16, 32\nmms_t_end = 0.1\n";
    const auto r = cli({"experiment", s.write("mms.cfg", text).string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("cells,dt,err_u,err_v,order_u,order_v") != std::string::npos);
    CHECK(fs::exists(s.dir / "out" / "mms.csv"));
}
