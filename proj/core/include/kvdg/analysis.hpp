#ifndef KVDG_ANALYSIS_HPP
#define KVDG_ANALYSIS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "kvdg/stepper.hpp"

namespace kvdg {

/// Analytic benchmark solution with hardcoded derivatives. The forcing is
/// derived from the momentum equation
///   f = u_t + (u.grad)u - kappa lap(u_t) - nu lap(u) + grad p,
/// so any (nu, kappa) pair reproduces the same exact (u, p). The velocity is
/// divergence-free and vanishes on the boundary of the unit square; the
/// pressure has zero mean at every time.
struct ManufacturedCase {
    int id = 0;
    void (*u)(double x, double y, double t, double out[2]) = nullptr;
    void (*u_t)(double x, double y, double t, double out[2]) = nullptr;
    /// Row-major velocity Jacobian: [du1/dx, du1/dy, du2/dx, du2/dy].
    void (*grad_u)(double x, double y, double t, double out[4]) = nullptr;
    void (*lap_u)(double x, double y, double t, double out[2]) = nullptr;
    void (*lap_u_t)(double x, double y, double t, double out[2]) = nullptr;
    double (*p)(double x, double y, double t) = nullptr;
    void (*grad_p)(double x, double y, double t, double out[2]) = nullptr;

    void forcing(double x, double y, double t, double nu, double kappa, double out[2]) const;

    /// Built-in cases 1 and 2.
    static const ManufacturedCase& example(int id);

    /// Problem data (initial condition + forcing) for a given (nu, kappa).
    Problem problem(double nu, double kappa) const;
};

/// L^2 velocity error ||U - u(t)|| by over-integrated elementwise quadrature.
double error_l2(const FemField& U, const ManufacturedCase& mc, double t);

/// Broken energy error: elementwise ||grad U - grad u(t)||^2 plus the J0
/// seminorm of the mismatch (the exact solution contributes no interior
/// jumps; on boundary edges the jump is the trace of U - u).
double error_energy(const FemField& U, const ManufacturedCase& mc, double t, double sigma_e);

/// L^2 pressure error after shifting both fields to zero mean (L^2/R).
double error_pressure(const FemField& P, const ManufacturedCase& mc, double t);

/// Observed orders between consecutive ladder levels:
/// order_i = log(e_i/e_{i+1}) / log(h_i/h_{i+1}). NaN marks an undefined cell.
std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err);

struct ConvergenceLevel {
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    int steps = 0;
    bool solved = false;
    std::string failure;
    double err_l2 = 0.0;
    double err_energy = 0.0;
    double err_p = 0.0;
    double max_div_residual = 0.0;
    double seconds = 0.0;
};

/// Errors and observed orders across a refinement ladder, plus the
/// configuration they were produced with.
struct ConvergenceReport {
    int example_id = 0;
    SolverConfig base; // n/dt fields vary per level; the rest is metadata
    std::vector<ConvergenceLevel> levels;
    std::vector<double> order_l2, order_energy, order_p; // size levels-1

    void compute_orders();
    bool all_solved() const;
    void write_csv(std::ostream& out) const;
    void write_markdown(std::ostream& out) const;
};

/// Runs `num_levels` refinements n = first_n, 2*first_n, ... to t_final = 1
/// with dt = h^2, recording final-time errors and observed orders.
ConvergenceReport convergence_study(int example_id, const SolverConfig& base, int num_levels,
                                    int first_n = 4);

} // namespace kvdg

#endif
