#include "chemo/stepper.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace chemo {

void SolverConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("solver: dt must be > 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("solver: t_end must be >= 0");
    if (t_end > 0.0 && dt > t_end) throw std::invalid_argument("solver: dt must not exceed t_end");
    if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("solver: safety must lie in (0, 1]");
    if (!(blowup_threshold > 0.0)) throw std::invalid_argument("solver: blowup_threshold must be > 0");
    if (!(steady_tol >= 0.0)) throw std::invalid_argument("solver: steady_tol must be >= 0");
    if (!(positivity_floor >= 0.0)) throw std::invalid_argument("solver: positivity floor must be >= 0");
    if (!(linsolve_tol > 0.0)) throw std::invalid_argument("solver: linsolve_tol must be > 0");
    if (linsolve_maxiter <= 0) throw std::invalid_argument("solver: linsolve_maxiter must be > 0");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

class ShiftedLaplacian {
public:
    ShiftedLaplacian(const GridSpec& g, std::span<const double> coeff, double dt)
        : grid_(g), coeff_(coeff), dt_(dt), lap_(g.size()), diag_(g.size()) {
        const int ny = g.dim() == 2 ? g.cells(1) : 1;
        const double ihx2 = 1.0 / (g.spacing(0) * g.spacing(0));
        const double ihy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < g.cells(0); ++i) {
                int nbx = (i > 0) + (i + 1 < g.cells(0));
                int nby = g.dim() == 2 ? (j > 0) + (j + 1 < g.cells(1)) : 0;
                const std::size_t k = g.index(i, j);
                diag_[k] = 1.0 + dt * (nbx * ihx2 + nby * ihy2) + dt * coeff[k];
            }
        }
    }

    void apply(std::span<const double> x, std::span<double> out) {
        laplacian_into(x, grid_, lap_);
        for (std::size_t k = 0; k < x.size(); ++k)
            out[k] = x[k] - dt_ * lap_[k] + dt_ * coeff_[k] * x[k];
    }

    double diag(std::size_t k) const { return diag_[k]; }

private:
    const GridSpec& grid_;
    std::span<const double> coeff_;
    double dt_;
    std::vector<double> lap_;
    std::vector<double> diag_;
};

} // namespace

LinearSolveResult solve_shifted_laplacian(const Field& rhs, const Field& coeff, double dt,
                                          const LinearSolveOptions& opts) {
    require_same_grid(rhs, coeff);
    if (!(dt > 0.0)) throw std::invalid_argument("solve_shifted_laplacian: dt must be > 0");
    if (coeff.min() < 0.0) throw std::invalid_argument("solve_shifted_laplacian: coeff must be >= 0");

    const GridSpec& g = rhs.grid();
    const std::size_t n = rhs.size();
    const auto b = rhs.values();
    const auto c = coeff.values();
    ShiftedLaplacian A(g, c, dt);

    LinearSolveResult res;
    res.solution = Field(g);
    auto x = res.solution.values();
    for (std::size_t k = 0; k < n; ++k) x[k] = b[k] / (1.0 + dt * c[k]);

    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return res;
    }

    std::vector<double> r(n), z(n), p(n), Ap(n);
    A.apply(x, Ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - Ap[k];
    double rnorm = std::sqrt(dot(r, r));
    int it = 0;
    if (rnorm > opts.tol * bnorm) {
        for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / A.diag(k);
        p = z;
        double rz = dot(r, z);
        for (it = 1; it <= opts.max_iter; ++it) {
            A.apply(p, Ap);
            const double pAp = dot(p, Ap);
            if (!(pAp > 0.0)) break;
            const double alpha = rz / pAp;
            for (std::size_t k = 0; k < n; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * Ap[k];
            }
            rnorm = std::sqrt(dot(r, r));
            if (rnorm <= opts.tol * bnorm) break;
            for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / A.diag(k);
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
        }
        it = std::min(it, opts.max_iter);
    }

    // True residual; the recurrence drifts slightly.
    A.apply(x, Ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - Ap[k];
    const bool pure_diffusion = std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
    if (pure_diffusion) {
        // A·1 = 1, so shifting by the mean residual removes its constant mode.
        const double shift = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += shift;
            r[k] -= shift;
        }
    }
    rnorm = std::sqrt(dot(r, r));
    res.iterations = it;
    res.relative_residual = rnorm / bnorm;
    if (!std::isfinite(rnorm) || res.relative_residual > opts.tol * 10.0)
        throw SolverFailure("linear solver did not converge (relative residual " +
                                std::to_string(res.relative_residual) + ")",
                            res.relative_residual);

    if (rhs.min() >= 0.0) {
        const double allowed = 10.0 * opts.tol * norm_inf(res.solution) + 1e-300;
        for (std::size_t k = 0; k < n; ++k) {
            if (x[k] < 0.0) {
                if (-x[k] > allowed)
                    throw SolverFailure("inverse positivity violated in cell " + std::to_string(k),
                                        res.relative_residual);
                x[k] = 0.0;
            }
        }
    }
    return res;
}

StepResult step(const SimState& state, const ModelParams& params, const SolverConfig& config,
                double dt, const Forcing& forcing) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    const GridSpec& g = state.u.grid();
    const LinearSolveOptions lin{config.linsolve_tol, config.linsolve_maxiter};

    StepResult out{state, {}};
    out.report.dt = dt;

    Field fu, fv;
    if (forcing) {
        fu = Field(g);
        fv = Field(g);
        forcing(state.t, fu, fv);
    }

    Field v_rhs = state.v;
    if (forcing)
        for (std::size_t k = 0; k < v_rhs.size(); ++k) v_rhs[k] += dt * fv[k];
    auto v_solve = solve_shifted_laplacian(v_rhs, state.u, dt, lin);
    out.report.v_iterations = v_solve.iterations;

    out.report.cfl = params.chi() * max_face_gradient(v_solve.solution) * dt / g.min_spacing();
    if (config.adaptive && out.report.cfl > 0.5 * config.safety) {
        out.report.status = StepStatus::rejected_cfl;
        return out;
    }

    const Field taxis = chemotaxis_divergence(state.u, v_solve.solution, params.chi(), config.taxis);
    Field u_rhs = state.u;
    for (std::size_t k = 0; k < u_rhs.size(); ++k) {
        double explicit_part = -taxis[k] + reaction(state.u[k], params);
        if (forcing) explicit_part += fu[k];
        u_rhs[k] += dt * explicit_part;
    }
    auto u_solve = solve_shifted_laplacian(u_rhs, Field(g, 0.0), dt, lin);
    out.report.u_iterations = u_solve.iterations;
    Field& u_next = u_solve.solution;

    if (!u_next.all_finite() || !v_solve.solution.all_finite())
        throw SolverFailure("non-finite value after step " + std::to_string(state.step_index + 1));

    const double floor = config.positivity_floor;
    for (std::size_t k = 0; k < u_next.size(); ++k) {
        if (u_next[k] < floor) {
            if (config.positivity == PositivityPolicy::reject) {
                out.report.status = StepStatus::rejected_negative;
                return out;
            }
            u_next[k] = floor;
            ++out.report.clamped_cells;
        }
    }

    out.state.t = state.t + dt;
    out.state.u = std::move(u_next);
    out.state.v = std::move(v_solve.solution);
    out.state.step_index = state.step_index + 1;
    return out;
}

StepResult step(const SimState& state, const ModelParams& params, const SolverConfig& config) {
    return step(state, params, config, config.dt);
}

const char* to_string(Termination t) {
    switch (t) {
    case Termination::reached_t_end: return "reached_t_end";
    case Termination::steady_state: return "steady_state";
    case Termination::blow_up: return "blow_up";
    case Termination::solver_failure: return "solver_failure";
    case Termination::wall_time_exceeded: return "wall_time_exceeded";
    }
    return "unknown";
}

RunResult run(const InitialData& init, const ModelParams& params, const SolverConfig& config,
              const RunOptions& options) {
    init.validate();
    config.validate();
    if (!(options.sample_every > 0.0)) throw std::invalid_argument("run: sample_every must be > 0");

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    RunResult result;
    SimState state{0.0, init.u0, init.v0, 0};
    double cum = 0.0;
    double rate = dissipation_rate(state.u, params);
    auto record = [&](const SimState& st) {
        result.records.push_back(compute_record(st.t, st.u, st.v, params, options.diagnostics, cum));
        if (options.on_sample) options.on_sample(st);
    };
    record(state);
    result.max_u_sup = norm_inf(state.u);
    double next_sample = options.sample_every;

    double dt = config.dt;
    int accepted_since_change = 0;
    const double dt_min = 1e-12 * std::max(config.t_end, config.dt);
    bool done = config.t_end <= 0.0;

    auto finish = [&](Termination why, std::string msg = {}) {
        result.termination = why;
        result.message = std::move(msg);
        done = true;
    };

    while (!done) {
        const double remaining = config.t_end - state.t;
        if (remaining <= 1e-9 * config.dt) {
            finish(Termination::reached_t_end);
            break;
        }
        double h = dt;
        if (remaining < h * (1.0 + 1e-9)) h = remaining;

        StepResult sr;
        try {
            sr = step(state, params, config, h, options.forcing);
        } catch (const SolverFailure& e) {
            finish(Termination::solver_failure, e.what());
            break;
        }
        if (sr.report.status != StepStatus::accepted) {
            ++result.rejected_steps;
            if (!config.adaptive) {
                finish(Termination::solver_failure, "step rejected (negative density) with adaptivity off");
                break;
            }
            dt = 0.5 * h;
            accepted_since_change = 0;
            if (dt < dt_min) {
                finish(Termination::solver_failure, "time step underflow");
                break;
            }
            continue;
        }

        ++result.accepted_steps;
        result.clamped_cells += sr.report.clamped_cells;
        const double new_rate = dissipation_rate(sr.state.u, params);
        cum += 0.5 * h * (rate + new_rate);
        rate = new_rate;

        bool steady = false;
        if (config.steady_tol > 0.0) {
            double du = 0.0, dv = 0.0;
            for (std::size_t k = 0; k < state.u.size(); ++k) {
                du = std::max(du, std::abs(sr.state.u[k] - state.u[k]));
                dv = std::max(dv, std::abs(sr.state.v[k] - state.v[k]));
            }
            steady = du / h < config.steady_tol && dv / h < config.steady_tol;
        }

        if (options.observer) options.observer(state, sr.state, sr.report);
        state = std::move(sr.state);

        const double usup = norm_inf(state.u);
        result.max_u_sup = std::max(result.max_u_sup, usup);

        if (state.t >= next_sample - 1e-9 * config.dt) {
            record(state);
            while (next_sample <= state.t + 1e-9 * config.dt) next_sample += options.sample_every;
        }

        if (usup >= config.blowup_threshold)
            finish(Termination::blow_up, "sup norm of u reached " + std::to_string(usup));
        else if (steady)
            finish(Termination::steady_state);
        else if (config.t_end - state.t <= 1e-9 * config.dt)
            finish(Termination::reached_t_end);
        else if (options.wall_time_limit > 0.0 && elapsed() > options.wall_time_limit)
            finish(Termination::wall_time_exceeded);

        if (config.adaptive && ++accepted_since_change >= 10 && dt < config.dt) {
            dt = std::min(2.0 * dt, config.dt);
            accepted_since_change = 0;
        }
    }

    if (result.records.back().t != state.t) record(state);
    result.final_state = std::move(state);
    result.wall_time = elapsed();
    return result;
}

} // namespace chemo
