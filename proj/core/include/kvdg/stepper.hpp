#ifndef KVDG_STEPPER_HPP
#define KVDG_STEPPER_HPP

#include <functional>
#include <memory>
#include <optional>

#include "kvdg/forms.hpp"
#include "kvdg/saddle.hpp"

namespace kvdg {

using SpaceFn = std::function<void(double x, double y, double* out)>;
using SpaceTimeFn = std::function<void(double x, double y, double t, double* out)>;

/// Full configuration of a run: physics, discretization, time stepping and
/// linear-solver parameters. t_final must be an integer multiple of dt; a
/// final partial step is rejected at validation time.
struct SolverConfig {
    double nu = 1.0;
    double kappa = 0.01;
    double sigma_e = 10.0;
    int epsilon_sym = -1;

    int n = 8; // structured mesh resolution, h = 1/n
    int velocity_degree = 1;
    int pressure_degree = 0;

    double dt = 1.0 / 64.0;
    double t_final = 1.0;

    double gmres_tol = 1e-10;
    int gmres_restart = 200;
    int gmres_max_iters = 4000;

    bool convection_frozen = false; // keep N = 0 (Stokes mode)

    void validate() const;
    int num_steps() const;
    FormParams form_params() const {
        return {nu, kappa, sigma_e, epsilon_sym};
    }
    GmresOptions gmres_options() const { return {gmres_tol, gmres_restart, gmres_max_iters}; }
};

/// Data of one initial-boundary-value problem. Null forcing means f = 0;
/// null boundary means homogeneous Dirichlet data.
struct Problem {
    SpaceFn u0;
    SpaceTimeFn forcing;
    SpaceTimeFn boundary;
};

struct StepDiagnostics {
    double energy = 0.0;       // ||U||^2 + kappa (a+J0)(U,U)
    double div_residual = 0.0; // ||B U||
    int gmres_iters = 0;
    double gmres_res = 0.0;
};

struct StepState {
    FemField u;
    FemField p;
    double t = 0.0;
    int step = 0;
    StepDiagnostics diag;
};

struct RunOptions {
    std::function<void(const StepState&)> observer;
    double steady_tol = 0.0; // > 0: stop once ||U^n - U^{n-1}||/dt drops below
};

struct RunResult {
    StepState final_state;
    std::vector<StepDiagnostics> diagnostics; // one entry per executed step
    std::vector<double> steady_metric;        // ||U^n - U^{n-1}||_{L^2}/dt per step
    double max_div_residual = 0.0;
    int steps_executed = 0;
    bool stopped_steady = false;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// Backward-Euler time stepper for the Kelvin-Voigt system
///
///   (d_t U, v) + kappa (a+J0)(d_t U, v) + nu (a+J0)(U^n, v)
///     + c^{U^{n-1}}(U^{n-1}, U^n, v) + b(v, P^n) = (f^n, v),   b(U^n, q) = 0,
///
/// with U^0 the divergence-free projection of the initial data. Each step is
/// one linear saddle solve: the convection is lagged in its first argument.
class KelvinVoigtSolver {
public:
    KelvinVoigtSolver(const TriMesh& mesh, const SolverConfig& config);

    const SolverConfig& config() const { return config_; }
    const BrokenSpace& velocity_space() const { return *vspace_; }
    const BrokenSpace& pressure_space() const { return *pspace_; }

    /// L^2 projection onto the discretely divergence-free subspace:
    /// solves [[M, B^T, 0],[B, 0, m],[0, m^T, 0]] with rhs [M w; 0; 0].
    FemField ph_project(const SpaceFn& u0) const;
    FemField ph_project(const FemField& w) const;

    StepState initial_state(const Problem& problem) const;
    StepState step(const StepState& prev, const Problem& problem);
    RunResult run(const Problem& problem, const RunOptions& options = {});

    // Assembled operators, exposed for diagnostics and verification.
    const CsrMatrix& mass() const { return mass_; }
    const CsrMatrix& sipg() const { return sipg_; }
    const CsrMatrix& divergence() const { return div_; }
    /// Velocity block (1/dt)(M + kappa A) + nu A + N(U^{n-1}) of the last step.
    const CsrMatrix& step_matrix() const { return step_k_; }

    double energy_of(const FemField& u) const;
    double div_residual_of(const FemField& u) const;
    /// ||u - v||_{L^2} through the mass matrix.
    double l2_distance(const FemField& u, const FemField& v) const;

private:
    SolverConfig config_;
    const TriMesh* mesh_;
    std::unique_ptr<BrokenSpace> vspace_;
    std::unique_ptr<BrokenSpace> pspace_;

    CsrMatrix mass_;
    CsrMatrix sipg_;   // A = a + J0
    CsrMatrix div_;    // B
    CsrMatrix mka_;    // M + kappa A on the A pattern (rhs operator)
    CsrMatrix k0_;     // (1/dt)(M + kappa A) + nu A, pattern of A
    CsrMatrix step_k_; // k0_ plus the lagged convection of the latest step
    std::vector<double> mvec_;

    std::unique_ptr<BlockSaddleSystem> step_sys_;
    mutable std::unique_ptr<BlockSaddleSystem> proj_sys_;
    std::vector<double> warm_;
};

} // namespace kvdg

#endif
