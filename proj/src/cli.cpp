#include "chemo/cli.hpp"

#include "chemo/config.hpp"
#include "chemo/experiments.hpp"
#include "chemo/expression.hpp"
#include "chemo/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace chemo {

namespace {

std::string fmt(double x) { return format_double(x); }

int cmd_run(const std::string& config_path, std::ostream& out) {
    const RunConfig rc = load_run_config(config_path);
    const InitialData init = rc.initial_data();

    RunOptions opts;
    opts.sample_every = rc.sample_every;
    opts.diagnostics = rc.diagnostics;

    std::filesystem::create_directories(rc.directory);
    std::ofstream index;
    int sample_no = 0;
    if (rc.snapshots) {
        std::filesystem::create_directories(rc.directory / "snapshots");
        index.open(rc.directory / "snapshots" / "snapshots.csv", std::ios::binary);
        if (!index) throw IoError("cannot write snapshot index");
        index << "t,u_file,v_file\n";
        opts.on_sample = [&](const SimState& st) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%05d", sample_no++);
            const std::string uf = std::string("u_") + buf + ".txt";
            const std::string vf = std::string("v_") + buf + ".txt";
            write_snapshot(rc.directory / "snapshots" / uf, st.u);
            write_snapshot(rc.directory / "snapshots" / vf, st.v);
            index << fmt(st.t) << ',' << uf << ',' << vf << '\n';
        };
    }

    const RunResult r = run(init, rc.params, rc.solver, opts);
    write_diagnostics_csv(rc.directory / "diagnostics.csv", r.records);

    out << "termination " << to_string(r.termination) << '\n';
    if (!r.message.empty()) out << "message " << r.message << '\n';
    out << "t " << fmt(r.final_state.t) << '\n';
    out << "accepted_steps " << r.accepted_steps << '\n';
    out << "rejected_steps " << r.rejected_steps << '\n';
    out << "max_u_sup " << fmt(r.max_u_sup) << '\n';
    out << "diagnostics " << (rc.directory / "diagnostics.csv").string() << '\n';

    switch (r.termination) {
    case Termination::blow_up: return exit_blow_up;
    case Termination::solver_failure: return exit_solver_failure;
    default: return exit_ok;
    }
}

int cmd_check_condition(double chi, double kappa, double mu, double v0_sup, int N, std::optional<double> p,
                        std::ostream& out) {
    if (!(mu > 0.0)) throw InvalidParameter("mu must be > 0");
    if (!(chi >= 0.0)) throw InvalidParameter("chi must be >= 0");
    if (N < 1) throw InvalidParameter("dim must be >= 1");
    const ModelParams params = ModelParams::relaxed(chi, kappa, mu);
    const MuCondition c = p ? check_mu_condition(params, v0_sup, *p, N) : least_mu_threshold(params, v0_sup, N);
    out << "threshold " << fmt(c.threshold) << '\n';
    out << "p " << fmt(c.p) << '\n';
    out << "variant_threshold " << fmt(mu_threshold_variant(chi, v0_sup, N, c.p)) << '\n';
    out << "verdict " << (c.satisfied ? "satisfied" : "unsatisfied") << '\n';
    return c.satisfied ? exit_ok : exit_condition_unsatisfied;
}

int cmd_experiment(const std::string& spec_path, std::ostream& out, std::ostream& err) {
    const ExperimentSpec spec = load_experiment_spec(spec_path);
    out << "scenario " << to_string(spec.scenario) << '\n';

    if (spec.scenario == Scenario::mms) {
        const MmsReport rep = manufactured_convergence(spec);
        std::ostringstream table;
        table << "cells,dt,err_u,err_v,order_u,order_v\n";
        for (std::size_t i = 0; i < rep.cells.size(); ++i) {
            table << rep.cells[i] << ',' << fmt(rep.dt[i]) << ',' << fmt(rep.err_u[i]) << ',' << fmt(rep.err_v[i]);
            if (i > 0) table << ',' << fmt(rep.order_u[i - 1]) << ',' << fmt(rep.order_v[i - 1]);
            else table << ",,";
            table << '\n';
        }
        out << table.str();
        if (!spec.output.empty()) {
            std::filesystem::create_directories(spec.output);
            std::ofstream os(spec.output / "mms.csv", std::ios::binary);
            os << table.str();
            if (!os) throw IoError("cannot write mms.csv");
        }
        if (!rep.passed) {
            err << "violation: observed order below 1.8\n";
            return exit_assertion_failure;
        }
        return exit_ok;
    }

    const SweepResult res = run_experiment(spec);
    for (const auto& r : res.rows) {
        out << "run " << r.run_id << " mu=" << fmt(r.mu) << " chi_v0=" << fmt(r.chi * r.v0_sup)
            << " eps=" << fmt(r.eps) << " condition=" << (r.condition.satisfied ? "satisfied" : "unsatisfied")
            << " " << r.classification << " max_u_sup=" << fmt(r.max_u_sup) << '\n';
    }
    for (const auto& [k, v] : res.summary) out << k << ' ' << fmt(v) << '\n';
    if (!spec.output.empty()) out << "manifest " << (spec.output / "manifest.txt").string() << '\n';
    for (const auto& v : res.violations) err << "violation: " << v << '\n';
    return res.passed() ? exit_ok : exit_assertion_failure;
}

std::vector<TrajectorySample> read_trajectory(const std::filesystem::path& index_path) {
    std::ifstream is(index_path);
    if (!is) throw IoError("cannot open " + index_path.string());
    std::string line;
    std::getline(is, line);
    if (line != "t,u_file,v_file") throw IoError(index_path.string() + ": unexpected header");
    std::vector<TrajectorySample> samples;
    const auto dir = index_path.parent_path();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t, uf, vf;
        std::getline(ss, t, ',');
        std::getline(ss, uf, ',');
        std::getline(ss, vf, ',');
        samples.push_back({parse_double(t), read_snapshot(dir / uf), read_snapshot(dir / vf)});
    }
    if (samples.size() < 2) throw IoError(index_path.string() + ": need at least two samples");
    return samples;
}

int cmd_diagnose(const std::string& check, const std::vector<std::string>& files, double q, double min_ratio,
                 const std::string& index, const std::string& test, double chi, double kappa, double mu,
                 std::ostream& out) {
    for (const auto& f : files)
        if (!std::filesystem::exists(f)) throw IoError("no such file: " + f);

    if (check == "weak") {
        if (index.empty()) throw IoError("diagnose weak requires --index");
        if (!std::filesystem::exists(index)) throw IoError("no such file: " + index);
        const auto samples = read_trajectory(index);
        const ModelParams params(chi, kappa, mu);
        const double T = samples.back().t;
        std::vector<std::string> kinds = test == "all" ? std::vector<std::string>{"const", "cosx", "cosxy"}
                                                       : std::vector<std::string>{test};
        for (const auto& k : kinds) {
            SpatialProfile profile;
            if (k == "const")
                profile = SpatialProfile::constant;
            else if (k == "cosx")
                profile = SpatialProfile::cos_x;
            else if (k == "cosxy")
                profile = SpatialProfile::cos_xy;
            else
                throw IoError("unknown test function '" + k + "'");
            const WeakResidual w =
                weak_residual(samples, separable_test_function(profile, samples.front().u.grid(), T), params);
            out << "weak " << k << " res_u " << fmt(w.res_u) << " res_v " << fmt(w.res_v) << '\n';
        }
        return exit_ok;
    }

    if (files.empty()) throw IoError("diagnose " + check + " requires snapshot files");
    bool ok = true;
    for (const auto& f : files) {
        const Field c = read_snapshot(f);
        const int N = c.grid().dim();
        if (check == "hessian") {
            const double v = check_hessian_inequality(c, N);
            out << f << " max_violation " << fmt(v) << '\n';
            ok = ok && v == 0.0;
        } else {
            const InterpolationCheck ic = check_interpolation_inequality(c, q, N);
            out << f << " lhs " << fmt(ic.lhs) << " rhs " << fmt(ic.rhs) << " ratio "
                << (ic.degenerate ? std::string("degenerate") : fmt(ic.ratio)) << '\n';
            ok = ok && (ic.degenerate || ic.ratio >= min_ratio);
        }
    }
    return ok ? exit_ok : exit_assertion_failure;
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Finite-difference solver and verification harness for chemotaxis-consumption systems"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Integrate one configuration and write diagnostics");
    run_cmd->add_option("config", config_path, "Run configuration file")->required();

    double chi = 1.0, kappa = 0.0, mu = 1.0, v0_sup = 0.0;
    int dim = 1;
    std::optional<double> p;
    auto* cc = app.add_subcommand("check-condition", "Report the large-mu boundedness threshold");
    cc->add_option("--chi", chi, "Chemotactic sensitivity")->required();
    cc->add_option("--kappa", kappa, "Linear growth rate")->required();
    cc->add_option("--mu", mu, "Logistic damping")->required();
    cc->add_option("--v0-sup", v0_sup, "Sup norm of the initial signal")->required();
    cc->add_option("--dim", dim, "Spatial dimension N")->required();
    cc->add_option("--p", p, "Fix p instead of scanning N+0.25, N+0.5, ..., 3N");

    std::string spec_path;
    auto* ex = app.add_subcommand("experiment", "Run a scenario sweep");
    ex->add_option("spec", spec_path, "Experiment specification file")->required();

    std::string check = "hessian", index, test = "all";
    std::vector<std::string> files;
    double q = 1.0, min_ratio = 0.95;
    double dchi = 1.0, dkappa = 1.0, dmu = 1.0;
    auto* dg = app.add_subcommand("diagnose", "Evaluate inequality checks on stored snapshots");
    dg->add_option("--check", check, "hessian, interpolation or weak")
        ->check(CLI::IsMember({"hessian", "interpolation", "weak"}));
    dg->add_option("files", files, "Snapshot files");
    dg->add_option("--q", q, "Exponent for the interpolation check");
    dg->add_option("--min-ratio", min_ratio, "Smallest accepted rhs/lhs ratio");
    dg->add_option("--index", index, "snapshots.csv of a trajectory (weak check)");
    dg->add_option("--test", test, "const, cosx, cosxy or all");
    dg->add_option("--chi", dchi, "chi for the weak check");
    dg->add_option("--kappa", dkappa, "kappa for the weak check");
    dg->add_option("--mu", dmu, "mu for the weak check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input_error;
    }

    try {
        if (*run_cmd) return cmd_run(config_path, out);
        if (*cc) return cmd_check_condition(chi, kappa, mu, v0_sup, dim, p, out);
        if (*ex) return cmd_experiment(spec_path, out, err);
        if (*dg) return cmd_diagnose(check, files, q, min_ratio, index, test, dchi, dkappa, dmu, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const ExpressionError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const SolverFailure& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_solver_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_solver_failure;
    }
    return exit_input_error;
}

} // namespace chemo
