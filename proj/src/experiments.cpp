#include "chemo/experiments.hpp"

#include "chemo/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace chemo {

const char* to_string(Scenario s) {
    switch (s) {
    case Scenario::boundedness: return "boundedness";
    case Scenario::stabilization: return "stabilization";
    case Scenario::eps_limit: return "eps_limit";
    case Scenario::blowup_probe: return "blowup_probe";
    case Scenario::mms: return "mms";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::boundedness, Scenario::stabilization, Scenario::eps_limit,
                       Scenario::blowup_probe, Scenario::mms})
        if (name == to_string(s)) return s;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

void ExperimentSpec::validate() const {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (!(wall_time_limit >= 0.0)) throw std::invalid_argument("wall_time_limit must be >= 0");
    for (double x : axes.chi_v0)
        if (!(x > 0.0)) throw std::invalid_argument("chi_v0 entries must be > 0");
    for (double x : axes.mu_factor)
        if (!(x > 0.0)) throw std::invalid_argument("mu_factor entries must be > 0");
    if (scenario == Scenario::eps_limit && axes.eps.empty() && eps_levels < 1)
        throw std::invalid_argument("eps_levels must be >= 1");
    if (scenario == Scenario::mms) {
        if (mms_cells.size() < 2) throw std::invalid_argument("mms needs at least two resolutions");
        if (!(mms_dt_factor > 0.0) || !(mms_t_end > 0.0))
            throw std::invalid_argument("mms_dt_factor and mms_t_end must be > 0");
    }
}

ExperimentSpec read_experiment_spec(const ConfigDocument& doc) {
    ExperimentSpec spec;
    spec.base = read_run_config(doc, {"experiment", "sweep"});

    doc.require_known("experiment", {"scenario", "output", "threads", "tol", "dissipation_tol",
                                     "wall_time_limit", "eps_levels", "eps0", "window", "mms_cells",
                                     "mms_dt_factor", "mms_t_end"});
    const std::string name = doc.get_string("experiment", "scenario");
    try {
        spec.scenario = parse_scenario(name);
    } catch (const std::invalid_argument& e) {
        doc.fail("experiment", "scenario", e.what());
    }
    spec.output = doc.get_string("experiment", "output", spec.base.directory.string());
    spec.threads = doc.get_int("experiment", "threads", spec.threads);
    if (spec.threads < 1) doc.fail("experiment", "threads", "must be >= 1");
    spec.tol = doc.get_double("experiment", "tol", spec.tol);
    if (!(spec.tol > 0.0)) doc.fail("experiment", "tol", "must be > 0");
    spec.dissipation_tol = doc.get_double("experiment", "dissipation_tol", spec.dissipation_tol);
    if (!(spec.dissipation_tol > 0.0)) doc.fail("experiment", "dissipation_tol", "must be > 0");
    spec.wall_time_limit = doc.get_double("experiment", "wall_time_limit", spec.wall_time_limit);
    if (!(spec.wall_time_limit >= 0.0)) doc.fail("experiment", "wall_time_limit", "must be >= 0");
    spec.eps_levels = doc.get_int("experiment", "eps_levels", spec.eps_levels);
    if (spec.eps_levels < 1) doc.fail("experiment", "eps_levels", "must be >= 1");
    spec.eps0 = doc.get_double("experiment", "eps0", spec.eps0);
    if (!(spec.eps0 > 0.0 && spec.eps0 < 1.0)) doc.fail("experiment", "eps0", "must lie in (0, 1)");
    spec.window = doc.get_double("experiment", "window", spec.window);
    if (!(spec.window > 0.0)) doc.fail("experiment", "window", "must be > 0");
    if (doc.has("experiment", "mms_cells")) {
        spec.mms_cells.clear();
        for (double c : doc.get_list("experiment", "mms_cells")) {
            if (c != std::floor(c) || c < 3) doc.fail("experiment", "mms_cells", "entries must be integers >= 3");
            spec.mms_cells.push_back(static_cast<int>(c));
        }
        if (spec.mms_cells.size() < 2) doc.fail("experiment", "mms_cells", "need at least two resolutions");
    }
    spec.mms_dt_factor = doc.get_double("experiment", "mms_dt_factor", spec.mms_dt_factor);
    if (!(spec.mms_dt_factor > 0.0)) doc.fail("experiment", "mms_dt_factor", "must be > 0");
    spec.mms_t_end = doc.get_double("experiment", "mms_t_end", spec.mms_t_end);
    if (!(spec.mms_t_end > 0.0)) doc.fail("experiment", "mms_t_end", "must be > 0");

    doc.require_known("sweep", {"chi", "kappa", "mu", "eps", "chi_v0", "mu_factor"});
    auto axis = [&](const char* key, std::vector<double>& out, bool positive) {
        if (!doc.has("sweep", key)) return;
        out = doc.get_list("sweep", key);
        for (double x : out)
            if (!std::isfinite(x) || (positive && !(x > 0.0))) doc.fail("sweep", key, "entries must be > 0");
    };
    axis("chi", spec.axes.chi, true);
    axis("kappa", spec.axes.kappa, false);
    axis("mu", spec.axes.mu, true);
    axis("eps", spec.axes.eps, false);
    axis("chi_v0", spec.axes.chi_v0, true);
    axis("mu_factor", spec.axes.mu_factor, true);
    for (double e : spec.axes.eps)
        if (!(e >= 0.0 && e < 1.0)) doc.fail("sweep", "eps", "entries must lie in [0, 1)");
    if (!spec.axes.mu.empty() && !spec.axes.mu_factor.empty())
        doc.fail("sweep", "mu_factor", "give either mu or mu_factor, not both");
    return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open experiment spec " + path.string());
    std::stringstream text;
    text << is.rdbuf();
    std::istringstream in(text.str());
    ExperimentSpec spec = read_experiment_spec(ConfigDocument::parse(in, path.string()));
    spec.echo = text.str();
    return spec;
}

StepObserver InvariantMonitor::observer() {
    return [this](const SimState& before, const SimState& after, const StepReport&) {
        const double b = norm_inf(before.v);
        const double a = norm_inf(after.v);
        const double rel = (a - b) / std::max(b, std::numeric_limits<double>::min());
        worst_v_increase = std::max(worst_v_increase, rel);
        ++steps;
    };
}

double worst_mass_excess(const std::vector<DiagnosticsRecord>& records, const ModelParams& params,
                         double omega_measure, double u0_mass) {
    const double bound = mass_bound(params, omega_measure, u0_mass);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) worst = std::max(worst, r.mass / bound - 1.0);
    return worst;
}

namespace {

// Runs f(0..n-1) on up to `threads` workers; rethrows the exception of the
// lowest failing index.
template <class F>
void parallel_for(int n, int threads, F&& f) {
    threads = std::clamp(threads, 1, std::max(n, 1));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string run_name(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%04d", id);
    return buf;
}

std::string classify(Termination t) {
    switch (t) {
    case Termination::reached_t_end:
    case Termination::steady_state: return "bounded";
    case Termination::blow_up: return "blow_up";
    case Termination::wall_time_exceeded: return "timeout";
    case Termination::solver_failure: return "solver_failure";
    }
    return "?";
}

struct Job {
    ModelParams params;
    InitialData init;
    SolverConfig solver;
};

struct SupSample {
    double t, u_dev, v_sup;
};

struct JobOutput {
    RunResult result;
    InvariantMonitor monitor;
    std::vector<SupSample> trace;
    std::vector<TrajectorySample> samples;
    std::vector<std::filesystem::path> artifacts;
};

JobOutput execute(const ExperimentSpec& spec, const Job& job, int run_id, bool keep_samples) {
    JobOutput out;
    RunOptions opts;
    opts.sample_every = spec.base.sample_every;
    opts.diagnostics = spec.base.diagnostics;
    opts.wall_time_limit = spec.wall_time_limit;
    opts.observer = out.monitor.observer();

    const bool write = !spec.output.empty();
    const bool snapshots = write && spec.base.snapshots;
    const std::string name = run_name(run_id);
    std::ofstream index;
    if (snapshots) {
        std::filesystem::create_directories(spec.output / name);
        index.open(spec.output / name / "snapshots.csv", std::ios::binary);
        if (!index) throw IoError("cannot write snapshot index for " + name);
        index << "t,u_file,v_file\n";
        out.artifacts.push_back(std::filesystem::path(name) / "snapshots.csv");
    }
    int sample_no = 0;
    const double eq = job.params.kappa() > 0.0 ? job.params.equilibrium() : 0.0;
    opts.on_sample = [&](const SimState& st) {
        double dev = 0.0;
        for (std::size_t k = 0; k < st.u.size(); ++k) dev = std::max(dev, std::abs(st.u[k] - eq));
        out.trace.push_back({st.t, dev, norm_inf(st.v)});
        if (keep_samples) out.samples.push_back({st.t, st.u, st.v});
        if (snapshots) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%05d", sample_no++);
            const std::string uf = std::string("u_") + buf + ".txt";
            const std::string vf = std::string("v_") + buf + ".txt";
            write_snapshot(spec.output / name / uf, st.u);
            write_snapshot(spec.output / name / vf, st.v);
            index << format_double(st.t) << ',' << uf << ',' << vf << '\n';
            out.artifacts.push_back(std::filesystem::path(name) / uf);
            out.artifacts.push_back(std::filesystem::path(name) / vf);
        }
    };
    out.result = run(job.init, job.params, job.solver, opts);
    if (write) {
        write_diagnostics_csv(spec.output / (name + ".csv"), out.result.records);
        out.artifacts.insert(out.artifacts.begin(), name + ".csv");
    }
    return out;
}

SweepRow make_row(int id, const Job& job, const JobOutput& out, int N) {
    SweepRow row;
    row.run_id = id;
    row.chi = job.params.chi();
    row.kappa = job.params.kappa();
    row.mu = job.params.mu();
    row.eps = job.params.eps();
    row.v0_sup = norm_inf(job.init.v0);
    row.condition = least_mu_threshold(job.params, row.v0_sup, N);
    row.termination = out.result.termination;
    row.classification = classify(out.result.termination);
    row.max_u_sup = out.result.max_u_sup;
    row.final_record = out.result.records.back();
    row.metrics = {{"worst_v_increase", out.monitor.worst_v_increase},
                   {"worst_mass_excess", worst_mass_excess(out.result.records, job.params,
                                                           job.init.u0.grid().measure(), integrate(job.init.u0))}};
    return row;
}

std::vector<double> or_base(const std::vector<double>& axis, double base) {
    return axis.empty() ? std::vector<double>{base} : axis;
}

/// Base initial data, with v0 rescaled so that χ‖v0‖∞ equals `chi_v0` when given.
InitialData make_init(const RunConfig& base, double chi, std::optional<double> chi_v0) {
    InitialData init = base.initial_data();
    if (chi_v0) init.v0 *= *chi_v0 / (chi * norm_inf(init.v0));
    return init;
}

/// Step cap keeping the explicit logistic update monotone for the initial sup.
SolverConfig capped_solver(SolverConfig c, const ModelParams& p, const InitialData& init) {
    const double rate = p.mu() * norm_inf(init.u0) + std::abs(p.kappa());
    if (rate > 0.0) c.dt = std::min(c.dt, 0.25 / rate);
    return c;
}

void finish_sweep(const ExperimentSpec& spec, SweepResult& res, std::vector<JobOutput>& outs) {
    for (auto& o : outs) res.artifacts.insert(res.artifacts.end(), o.artifacts.begin(), o.artifacts.end());
    if (spec.output.empty()) return;
    std::filesystem::create_directories(spec.output);
    write_sweep_csv(spec.output / "sweep.csv", res);
    res.artifacts.insert(res.artifacts.begin(), "sweep.csv");
    write_manifest(spec.output / "manifest.txt", spec, res);
}

std::string fmt(double x) { return format_double(x); }

// Shared by boundedness and blow-up probe: tuples of (χ, κ, μ-or-factor, χv0).
struct ConditionTuple {
    double chi, kappa, mu, eps;
    std::optional<double> chi_v0;
};

std::vector<Job> condition_jobs(const ExperimentSpec& spec, std::vector<ConditionTuple>& tuples) {
    const RunConfig& b = spec.base;
    const int N = b.grid.dim();
    std::vector<std::optional<double>> targets;
    if (spec.axes.chi_v0.empty())
        targets.push_back(std::nullopt);
    else
        for (double x : spec.axes.chi_v0) targets.push_back(x);

    tuples.clear();
    for (double chi : or_base(spec.axes.chi, b.params.chi()))
        for (double kappa : or_base(spec.axes.kappa, b.params.kappa()))
            for (double eps : or_base(spec.axes.eps, 0.0))
                for (const auto& target : targets) {
                    if (!spec.axes.mu_factor.empty()) {
                        const InitialData init = make_init(b, chi, target);
                        const double thr =
                            least_mu_threshold(ModelParams(chi, kappa, 1.0), norm_inf(init.v0), N).threshold;
                        for (double f : spec.axes.mu_factor) tuples.push_back({chi, kappa, f * thr, eps, target});
                    } else {
                        for (double mu : or_base(spec.axes.mu, b.params.mu()))
                            tuples.push_back({chi, kappa, mu, eps, target});
                    }
                }

    std::vector<Job> jobs;
    for (const auto& t : tuples) {
        ModelParams p(t.chi, t.kappa, t.mu, t.eps);
        InitialData init = make_init(b, t.chi, t.chi_v0);
        SolverConfig c = capped_solver(b.solver, p, init);
        jobs.push_back({p, std::move(init), c});
    }
    return jobs;
}

} // namespace

SweepResult exp_boundedness(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<ConditionTuple> tuples;
    const std::vector<Job> jobs = condition_jobs(spec, tuples);
    const int N = spec.base.grid.dim();

    std::vector<JobOutput> outs(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.threads,
                 [&](int i) { outs[i] = execute(spec, jobs[i], i, false); });

    SweepResult res;
    res.scenario = Scenario::boundedness;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        SweepRow row = make_row(static_cast<int>(i), jobs[i], outs[i], N);
        row.metrics.insert(row.metrics.end(), {{"chi_v0", row.chi * row.v0_sup},
                                               {"threshold", row.condition.threshold},
                                               {"p_star", row.condition.p},
                                               {"dt", jobs[i].solver.dt}});
        // Unsatisfied tuples are recorded without any assertion.
        if (row.condition.satisfied && row.classification != "bounded" && row.classification != "timeout")
            res.violations.push_back(run_name(row.run_id) + ": condition satisfied but run ended with " +
                                     to_string(row.termination) + " (max u_sup " + fmt(row.max_u_sup) + ")");
        res.rows.push_back(std::move(row));
    }
    finish_sweep(spec, res, outs);
    return res;
}

SweepResult exp_blowup_probe(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<ConditionTuple> tuples;
    std::vector<Job> jobs = condition_jobs(spec, tuples);
    const int N = spec.base.grid.dim();

    // Rows sorted by (μ, χv0); the stable sort keeps duplicates adjacent in input order.
    std::vector<std::size_t> order(jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto key = [&](std::size_t i) {
        return std::pair{jobs[i].params.mu(), jobs[i].params.chi() * norm_inf(jobs[i].init.v0)};
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    std::vector<Job> sorted;
    for (std::size_t i : order) sorted.push_back(jobs[i]);
    jobs = std::move(sorted);

    std::vector<JobOutput> outs(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.threads,
                 [&](int i) { outs[i] = execute(spec, jobs[i], i, false); });

    SweepResult res;
    res.scenario = Scenario::blowup_probe;
    int n_blow = 0, n_timeout = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        SweepRow row = make_row(static_cast<int>(i), jobs[i], outs[i], N);
        row.metrics.insert(row.metrics.end(), {{"chi_v0", row.chi * row.v0_sup},
                                               {"threshold", row.condition.threshold},
                                               {"p_star", row.condition.p},
                                               {"wall_time", outs[i].result.wall_time}});
        n_blow += row.classification == "blow_up";
        n_timeout += row.classification == "timeout";
        if (row.condition.satisfied && row.classification == "blow_up")
            res.violations.push_back(run_name(row.run_id) + ": condition satisfied but blow-up detected");
        res.rows.push_back(std::move(row));
    }
    res.summary = {{"runs", static_cast<double>(jobs.size())},
                   {"blow_up", static_cast<double>(n_blow)},
                   {"timeout", static_cast<double>(n_timeout)}};
    if (!spec.output.empty()) {
        std::filesystem::create_directories(spec.output);
        std::ofstream os(spec.output / "boundary_map.csv", std::ios::binary);
        os << "mu,chi_v0,max_u_sup,classification\n";
        for (const auto& r : res.rows)
            os << fmt(r.mu) << ',' << fmt(r.chi * r.v0_sup) << ',' << fmt(r.max_u_sup) << ','
               << r.classification << '\n';
        if (!os) throw IoError("cannot write boundary map");
        res.artifacts.push_back("boundary_map.csv");
    }
    finish_sweep(spec, res, outs);
    return res;
}

SweepResult exp_stabilization(const ExperimentSpec& spec) {
    spec.validate();
    const RunConfig& b = spec.base;
    const int N = b.grid.dim();
    std::vector<Job> jobs;
    for (double chi : or_base(spec.axes.chi, b.params.chi()))
        for (double kappa : or_base(spec.axes.kappa, b.params.kappa()))
            for (double mu : or_base(spec.axes.mu, b.params.mu()))
                for (double eps : or_base(spec.axes.eps, b.params.eps())) {
                    if (!(kappa > 0.0)) throw std::invalid_argument("stabilization requires kappa > 0");
                    jobs.push_back({ModelParams(chi, kappa, mu, eps), b.initial_data(), b.solver});
                }

    std::vector<JobOutput> outs(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.threads,
                 [&](int i) { outs[i] = execute(spec, jobs[i], i, false); });

    SweepResult res;
    res.scenario = Scenario::stabilization;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& job = jobs[i];
        const JobOutput& out = outs[i];
        SweepRow row = make_row(static_cast<int>(i), job, out, N);
        const std::string tag = run_name(row.run_id) + ": ";

        double t_u = nan, t_both = nan;
        for (const auto& s : out.trace) {
            if (std::isnan(t_u) && s.u_dev < spec.tol) t_u = s.t;
            if (std::isnan(t_both) && s.u_dev < spec.tol && s.v_sup < spec.tol) t_both = s.t;
        }
        const SupSample& last = out.trace.back();
        const double mass_excess = row.metrics[1].second;
        const DissipationReport diss = dissipation_check(out.result.records, job.params, spec.dissipation_tol);
        const double F0 = *out.result.records.front().lyapunov_F;
        const auto& FT = out.result.records.back().lyapunov_F;
        const double total_bound = FT ? (F0 - *FT) / job.params.mu() + 1e-3 : nan;

        row.metrics.insert(row.metrics.end(), {{"final_u_dev", last.u_dev},
                                               {"final_v_sup", last.v_sup},
                                               {"time_to_tol_u", t_u},
                                               {"time_to_tol", t_both},
                                               {"dissipation_worst_excess", diss.worst_excess},
                                               {"cum_dissipation", diss.cum_total},
                                               {"cum_dissipation_bound", total_bound}});

        if (out.result.termination != Termination::reached_t_end &&
            out.result.termination != Termination::steady_state)
            res.violations.push_back(tag + "run ended with " + to_string(out.result.termination) + ": " +
                                     out.result.message);
        if (!(last.u_dev < spec.tol))
            res.violations.push_back(tag + "final sup|u - kappa/mu| = " + fmt(last.u_dev) + " >= tol");
        if (!(last.v_sup < spec.tol))
            res.violations.push_back(tag + "final sup v = " + fmt(last.v_sup) + " >= tol");
        if (out.monitor.worst_v_increase > 1e-12)
            res.violations.push_back(tag + "sup v increased on a step (relative " +
                                     fmt(out.monitor.worst_v_increase) + ")");
        if (mass_excess > 1e-8)
            res.violations.push_back(tag + "mass bound exceeded (relative " + fmt(mass_excess) + ")");
        if (!diss.passed)
            res.violations.push_back(tag + "Lyapunov dissipation violated on interval " +
                                     std::to_string(diss.worst_interval) + " (excess " +
                                     fmt(diss.worst_excess) + ")");
        if (!(diss.cum_total <= total_bound))
            res.violations.push_back(tag + "accumulated dissipation " + fmt(diss.cum_total) +
                                     " exceeds Lyapunov drop bound " + fmt(total_bound));
        res.rows.push_back(std::move(row));
    }
    finish_sweep(spec, res, outs);
    return res;
}

namespace {

// sqrt of the trapezoid rule over common sample times of ∫(a − b)².
double spacetime_distance(const std::vector<TrajectorySample>& a, const std::vector<TrajectorySample>& b,
                          bool use_u) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2) throw std::runtime_error("too few common samples for a space-time distance");
    std::vector<double> sq(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (std::abs(a[s].t - b[s].t) > 1e-9 * std::max(1.0, std::abs(a[s].t)))
            throw std::runtime_error("sample times differ between runs");
        const Field& fa = use_u ? a[s].u : a[s].v;
        const Field& fb = use_u ? b[s].u : b[s].v;
        double acc = 0.0;
        for (std::size_t k = 0; k < fa.size(); ++k) acc += (fa[k] - fb[k]) * (fa[k] - fb[k]);
        sq[s] = acc * fa.grid().cell_volume();
    }
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < n; ++s) total += 0.5 * (a[s + 1].t - a[s].t) * (sq[s] + sq[s + 1]);
    return std::sqrt(total);
}

} // namespace

SweepResult exp_eps_limit(const ExperimentSpec& spec) {
    spec.validate();
    const RunConfig& b = spec.base;
    const int N = b.grid.dim();
    std::vector<double> eps = spec.axes.eps;
    if (eps.empty())
        for (int k = 0; k <= spec.eps_levels; ++k) eps.push_back(spec.eps0 * std::ldexp(1.0, -k));

    std::vector<Job> jobs;
    for (double e : eps) jobs.push_back({ModelParams(b.params.chi(), b.params.kappa(), b.params.mu(), e),
                                         b.initial_data(), b.solver});

    std::vector<JobOutput> outs(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), spec.threads,
                 [&](int i) { outs[i] = execute(spec, jobs[i], i, true); });

    SweepResult res;
    res.scenario = Scenario::eps_limit;
    const double t_end = b.solver.t_end;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        SweepRow row = make_row(static_cast<int>(i), jobs[i], outs[i], N);
        if (jobs[i].params.kappa() > 0.0)
            row.metrics.push_back({"window_integral",
                                   window_integral_u_dist(outs[i].result.records, t_end - spec.window, t_end)});
        if (row.classification != "bounded")
            res.violations.push_back(run_name(row.run_id) + ": run ended with " + to_string(row.termination));
        res.rows.push_back(std::move(row));
    }
    if (!res.violations.empty()) {
        finish_sweep(spec, res, outs);
        return res;
    }

    std::vector<double> du, dv;
    for (std::size_t k = 0; k + 1 < outs.size(); ++k) {
        du.push_back(spacetime_distance(outs[k].samples, outs[k + 1].samples, true));
        dv.push_back(spacetime_distance(outs[k].samples, outs[k + 1].samples, false));
        res.summary.push_back({"d_u_" + std::to_string(k), du.back()});
        res.summary.push_back({"d_v_" + std::to_string(k), dv.back()});
    }
    if (du.size() >= 2) {
        const std::size_t K1 = du.size() - 1;
        if (!(du[K1] < du[0] / 4))
            res.violations.push_back("d_u_" + std::to_string(K1) + " = " + fmt(du[K1]) + " is not below d_u_0/4 = " +
                                     fmt(du[0] / 4));
        if (!(dv[K1] < dv[0] / 4))
            res.violations.push_back("d_v_" + std::to_string(K1) + " = " + fmt(dv[K1]) + " is not below d_v_0/4 = " +
                                     fmt(dv[0] / 4));
    }
    finish_sweep(spec, res, outs);
    return res;
}

ManufacturedSolution::ManufacturedSolution(const ModelParams& params, const GridSpec& grid)
    : params_(params), grid_(grid) {
    kx_ = std::numbers::pi / grid.length(0);
    ky_ = grid.dim() == 2 ? std::numbers::pi / grid.length(1) : 0.0;
}

double ManufacturedSolution::u(double x, double y, double t) const {
    return std::exp(-t) * (2.0 + std::cos(kx_ * x) * std::cos(ky_ * y));
}

double ManufacturedSolution::v(double x, double, double t) const {
    return 0.5 * std::exp(-t) * (2.0 + std::cos(kx_ * x));
}

double ManufacturedSolution::source_u(double x, double y, double t) const {
    const double E = std::exp(-t);
    const double cx = std::cos(kx_ * x), sx = std::sin(kx_ * x), cy = std::cos(ky_ * y);
    const double uu = E * (2.0 + cx * cy);
    const double u_t = -uu;
    const double u_x = -E * kx_ * sx * cy;
    const double lap_u = -E * (kx_ * kx_ + ky_ * ky_) * cx * cy;
    const double v_x = -0.5 * E * kx_ * sx;
    const double lap_v = -0.5 * E * kx_ * kx_ * cx;
    // ∇·(u∇v) = u_x v_x + u Δv since v does not depend on y.
    return u_t - lap_u + params_.chi() * (u_x * v_x + uu * lap_v) - reaction(uu, params_);
}

double ManufacturedSolution::source_v(double x, double y, double t) const {
    const double E = std::exp(-t);
    const double vv = v(x, y, t);
    const double lap_v = -0.5 * E * kx_ * kx_ * std::cos(kx_ * x);
    return -vv - lap_v + u(x, y, t) * vv;
}

InitialData ManufacturedSolution::initial_data() const {
    return {Field::sample(grid_, [&](double x, double y) { return u(x, y, 0.0); }),
            Field::sample(grid_, [&](double x, double y) { return v(x, y, 0.0); })};
}

Forcing ManufacturedSolution::forcing() const {
    return [ms = *this](double t, Field& fu, Field& fv) {
        fu = Field::sample(ms.grid_, [&](double x, double y) { return ms.source_u(x, y, t); });
        fv = Field::sample(ms.grid_, [&](double x, double y) { return ms.source_v(x, y, t); });
    };
}

MmsReport manufactured_convergence(const ExperimentSpec& spec) {
    spec.validate();
    const RunConfig& b = spec.base;
    MmsReport rep;
    rep.cells = spec.mms_cells;
    const int n_levels = static_cast<int>(rep.cells.size());
    rep.dt.resize(n_levels);
    rep.err_u.resize(n_levels);
    rep.err_v.resize(n_levels);

    parallel_for(n_levels, spec.threads, [&](int i) {
        const int n = rep.cells[i];
        const GridSpec g = b.grid.dim() == 1 ? GridSpec::interval(n, b.grid.length(0))
                                             : GridSpec::rectangle(n, n, b.grid.length(0), b.grid.length(1));
        const ManufacturedSolution ms(b.params, g);
        const double h = g.spacing(0);
        const double T = spec.mms_t_end;
        const long steps = static_cast<long>(std::ceil(T / (spec.mms_dt_factor * h * h)));
        SolverConfig c = b.solver;
        c.dt = T / static_cast<double>(steps);
        c.t_end = T;
        c.adaptive = false;
        c.steady_tol = 0.0;
        rep.dt[i] = c.dt;

        RunOptions opts;
        opts.sample_every = T;
        opts.diagnostics = b.diagnostics;
        opts.forcing = ms.forcing();
        const RunResult r = run(ms.initial_data(), b.params, c, opts);
        if (r.termination != Termination::reached_t_end)
            throw SolverFailure("manufactured run at " + std::to_string(n) + " cells ended with " +
                                to_string(r.termination) + ": " + r.message);
        const double t = r.final_state.t;
        const Field eu = r.final_state.u - Field::sample(g, [&](double x, double y) { return ms.u(x, y, t); });
        const Field ev = r.final_state.v - Field::sample(g, [&](double x, double y) { return ms.v(x, y, t); });
        rep.err_u[i] = norm_lp(eu, 2.0);
        rep.err_v[i] = norm_lp(ev, 2.0);
    });

    rep.passed = true;
    for (int i = 0; i + 1 < n_levels; ++i) {
        const double r = std::log(static_cast<double>(rep.cells[i + 1]) / rep.cells[i]);
        rep.order_u.push_back(std::log(rep.err_u[i] / rep.err_u[i + 1]) / r);
        rep.order_v.push_back(std::log(rep.err_v[i] / rep.err_v[i + 1]) / r);
        rep.passed = rep.passed && rep.order_u.back() >= 1.8 && rep.order_v.back() >= 1.8;
    }
    return rep;
}

SweepResult run_experiment(const ExperimentSpec& spec) {
    switch (spec.scenario) {
    case Scenario::boundedness: return exp_boundedness(spec);
    case Scenario::stabilization: return exp_stabilization(spec);
    case Scenario::eps_limit: return exp_eps_limit(spec);
    case Scenario::blowup_probe: return exp_blowup_probe(spec);
    case Scenario::mms: break;
    }
    throw std::invalid_argument("run_experiment: use manufactured_convergence for mms");
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "run_id,chi,kappa,mu,eps,v0_sup,threshold,p_star,condition,termination,classification,max_u_sup";
    for (const char* c : {"t", "mass", "u_sup", "v_sup", "grad_v_l2sq", "y_p", "lyapunov_F", "entropy_E",
                          "u_dist_l2", "v_lp", "cum_dissipation"})
        os << ",final_" << c;
    if (!result.rows.empty())
        for (const auto& [k, v] : result.rows.front().metrics) os << ',' << k;
    os << '\n';
    for (const auto& r : result.rows) {
        os << r.run_id << ',' << fmt(r.chi) << ',' << fmt(r.kappa) << ',' << fmt(r.mu) << ',' << fmt(r.eps) << ','
           << fmt(r.v0_sup) << ',' << fmt(r.condition.threshold) << ',' << fmt(r.condition.p) << ','
           << (r.condition.satisfied ? "satisfied" : "unsatisfied") << ',' << to_string(r.termination) << ','
           << r.classification << ',' << fmt(r.max_u_sup) << ',' << diagnostics_row(r.final_record);
        for (const auto& [k, v] : r.metrics) os << ',' << (std::isnan(v) ? std::string() : fmt(v));
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path.string());
}

void write_manifest(const std::filesystem::path& path, const ExperimentSpec& spec, const SweepResult& result) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "scenario " << to_string(spec.scenario) << '\n';
    os << "runs " << result.rows.size() << '\n';
    os << "status " << (result.passed() ? "passed" : "failed") << '\n';
    for (const auto& v : result.violations) os << "violation " << v << '\n';
    for (const auto& [k, v] : result.summary) os << "summary " << k << ' ' << fmt(v) << '\n';
    for (const auto& a : result.artifacts) os << "artifact " << a.generic_string() << '\n';
    os << "spec-begin\n";
    std::istringstream echo(spec.echo);
    for (std::string line; std::getline(echo, line);) os << "  " << line << '\n';
    os << "spec-end\n";
    if (!os) throw IoError("write failed: " + path.string());
}

} // namespace chemo
