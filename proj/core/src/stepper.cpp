#include "kvdg/stepper.hpp"

#include <chrono>
#include <cmath>

#include "kvdg/errors.hpp"

namespace kvdg {

namespace {
double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
} // namespace

void SolverConfig::validate() const {
    form_params().validate(velocity_degree);
    if (n < 1) throw ConfigError("config: n must be >= 1");
    if (velocity_degree < 1) throw ConfigError("config: velocity degree must be >= 1");
    if (pressure_degree < 0 || pressure_degree > velocity_degree)
        throw ConfigError("config: pressure degree must lie in [0, velocity degree]");
    if (dt <= 0.0) throw ConfigError("config: dt must be positive");
    if (t_final < dt) throw ConfigError("config: t_final must be >= dt");
    const double steps = t_final / dt;
    if (std::fabs(steps - std::llround(steps)) > 1e-9 * std::max(1.0, steps))
        throw ConfigError("config: t_final must be an integer multiple of dt "
                          "(a final partial step is not taken)");
    if (gmres_tol <= 0.0 || gmres_restart < 1 || gmres_max_iters < 1)
        throw ConfigError("config: invalid GMRES parameters");
}

int SolverConfig::num_steps() const { return static_cast<int>(std::llround(t_final / dt)); }

KelvinVoigtSolver::KelvinVoigtSolver(const TriMesh& mesh, const SolverConfig& config)
    : config_(config), mesh_(&mesh) {
    config_.validate();
    vspace_ = std::make_unique<BrokenSpace>(mesh, config.velocity_degree, 2);
    pspace_ = std::make_unique<BrokenSpace>(mesh, config.pressure_degree, 1);

    mass_ = assemble_mass(*vspace_);
    sipg_ = assemble_sipg(*vspace_, config_.form_params());
    div_ = assemble_divergence(*vspace_, *pspace_);
    mvec_ = pressure_integrals(*pspace_);

    // M + kappa A and the time-independent part of the step matrix both live
    // on the A pattern (the mass pattern is a subset of it).
    const std::vector<long> mslots = mass_.map_into(sipg_);
    mka_ = sipg_;
    std::fill(mka_.values().begin(), mka_.values().end(), 0.0);
    {
        long idx = 0;
        for (double v : mass_.values()) mka_.values()[mslots[idx++]] = v;
    }
    for (long i = 0; i < sipg_.nnz(); ++i)
        mka_.values()[i] += config_.kappa * sipg_.values()[i];

    k0_ = sipg_;
    const double inv_dt = 1.0 / config_.dt;
    for (long i = 0; i < sipg_.nnz(); ++i)
        k0_.values()[i] = inv_dt * mka_.values()[i] + config_.nu * sipg_.values()[i];

    step_k_ = k0_;
    step_sys_ = std::make_unique<BlockSaddleSystem>(step_k_, div_, mvec_,
                                                    vspace_->dofs_per_element(),
                                                    pspace_->dofs_per_element());
}

FemField KelvinVoigtSolver::ph_project(const SpaceFn& u0) const {
    return ph_project(project_elementwise(
        *vspace_, [&u0](double x, double y, double* out) { u0(x, y, out); }));
}

FemField KelvinVoigtSolver::ph_project(const FemField& w) const {
    if (w.space != vspace_.get())
        throw ConfigError("ph_project: field not in this solver's velocity space");
    if (!proj_sys_)
        proj_sys_ = std::make_unique<BlockSaddleSystem>(mass_, div_, mvec_,
                                                        vspace_->dofs_per_element(),
                                                        pspace_->dofs_per_element());
    std::vector<double> rhs(vspace_->total_dofs());
    mass_.multiply(w.coeff, rhs);
    const SaddleSolution sol = proj_sys_->solve(rhs, config_.gmres_options());
    FemField out(*vspace_);
    out.coeff = sol.u;
    return out;
}

StepState KelvinVoigtSolver::initial_state(const Problem& problem) const {
    if (!problem.u0) throw ConfigError("problem: initial velocity u0 is required");
    StepState s;
    s.u = ph_project(problem.u0);
    s.p = FemField(*pspace_);
    s.t = 0.0;
    s.step = 0;
    s.diag.energy = energy_of(s.u);
    s.diag.div_residual = div_residual_of(s.u);
    return s;
}

StepState KelvinVoigtSolver::step(const StepState& prev, const Problem& problem) {
    const double t_new = prev.t + config_.dt;

    // Velocity block: (1/dt)(M + kappa A) + nu A + N(U^{n-1}).
    step_k_.values() = k0_.values();
    if (!config_.convection_frozen) accumulate_convection(prev.u, *vspace_, step_k_);
    step_sys_->update_velocity_block(step_k_);

    // rhs = (f^n, v) + (1/dt)(M + kappa A) U^{n-1} + weak Dirichlet data.
    std::vector<double> rhs(vspace_->total_dofs(), 0.0);
    if (problem.forcing) {
        rhs = load_vector(*vspace_, [&](double x, double y, double* out) {
            problem.forcing(x, y, t_new, out);
        });
    }
    mka_.multiply_add(prev.u.coeff, rhs, 1.0 / config_.dt);
    if (problem.boundary) {
        const auto g = [&](double x, double y, double* out) { problem.boundary(x, y, t_new, out); };
        const std::vector<double> gdata = dirichlet_rhs(*vspace_, config_.form_params(), g);
        axpy(config_.nu, gdata, rhs);
        if (!config_.convection_frozen) {
            const std::vector<double> inflow = convection_inflow_rhs(prev.u, g);
            axpy(1.0, inflow, rhs);
        }
    }

    const SaddleSolution sol = step_sys_->solve(rhs, config_.gmres_options(), &warm_);

    StepState next;
    next.u = FemField(*vspace_);
    next.u.coeff = sol.u;
    next.p = FemField(*pspace_);
    next.p.coeff = sol.p;
    next.t = t_new;
    next.step = prev.step + 1;
    next.diag.energy = energy_of(next.u);
    next.diag.div_residual = sol.div_residual;
    next.diag.gmres_iters = sol.stats.iterations;
    next.diag.gmres_res = sol.stats.residual;
    if (!std::isfinite(next.diag.energy) || !std::isfinite(next.diag.div_residual))
        throw SolveError("non-finite state detected at step " + std::to_string(next.step) +
                         " (t = " + std::to_string(t_new) + ")");
    return next;
}

RunResult KelvinVoigtSolver::run(const Problem& problem, const RunOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    warm_.clear();

    StepState state = initial_state(problem);
    if (options.observer) options.observer(state);
    result.max_div_residual = state.diag.div_residual;

    const int steps = config_.num_steps();
    const auto t1 = std::chrono::steady_clock::now();
    result.assembly_seconds = seconds_since(t0);

    for (int k = 1; k <= steps; ++k) {
        StepState next = step(state, problem);
        const double metric = l2_distance(next.u, state.u) / config_.dt;
        result.diagnostics.push_back(next.diag);
        result.steady_metric.push_back(metric);
        result.max_div_residual = std::max(result.max_div_residual, next.diag.div_residual);
        state = std::move(next);
        if (options.observer) options.observer(state);
        result.steps_executed = k;
        if (options.steady_tol > 0.0 && metric < options.steady_tol) {
            result.stopped_steady = true;
            break;
        }
    }
    result.solve_seconds = seconds_since(t1);
    result.final_state = std::move(state);
    return result;
}

double KelvinVoigtSolver::energy_of(const FemField& u) const {
    std::vector<double> tmp(u.coeff.size());
    mass_.multiply(u.coeff, tmp);
    double e = dot(u.coeff, tmp);
    if (config_.kappa != 0.0) {
        sipg_.multiply(u.coeff, tmp);
        e += config_.kappa * dot(u.coeff, tmp);
    }
    return e;
}

double KelvinVoigtSolver::div_residual_of(const FemField& u) const {
    std::vector<double> bu(pspace_->total_dofs());
    div_.multiply(u.coeff, bu);
    return norm2(bu);
}

double KelvinVoigtSolver::l2_distance(const FemField& u, const FemField& v) const {
    std::vector<double> d(u.coeff.size());
    for (size_t i = 0; i < d.size(); ++i) d[i] = u.coeff[i] - v.coeff[i];
    std::vector<double> md(d.size());
    mass_.multiply(d, md);
    return std::sqrt(std::max(0.0, dot(d, md)));
}

} // namespace kvdg
