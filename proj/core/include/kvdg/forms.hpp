#ifndef KVDG_FORMS_HPP
#define KVDG_FORMS_HPP

#include <functional>

#include "kvdg/linalg.hpp"
#include "kvdg/space.hpp"

namespace kvdg {

/// Physical and discretization parameters of the interior-penalty forms.
/// epsilon_sym = -1 selects the symmetric (SIPG) variant, +1 the
/// non-symmetric one. For SIPG the penalty must satisfy sigma_e >= 4k^2
/// with k the velocity degree; validate() enforces this.
struct FormParams {
    double nu = 1.0;       // kinematic viscosity
    double kappa = 0.0;    // retardation time (0 recovers Navier-Stokes)
    double sigma_e = 10.0; // edge penalty, uniform over all edges
    int epsilon_sym = -1;

    void validate(int velocity_degree) const;
};

/// Block-diagonal mass matrix M_ij = sum_T int_T phi_j . phi_i.
CsrMatrix assemble_mass(const BrokenSpace& space);

/// Interior-penalty diffusion operator A = a + J0 with
///   a(w,v)  = sum_T int grad w : grad v - sum_e int {grad w} n_e . [v]
///             + eps sum_e int {grad v} n_e . [w]
///   J0(w,v) = sum_e (sigma_e/|e|) int [w].[v]
/// summed over all edges, boundary ones included (jump = trace there).
CsrMatrix assemble_sipg(const BrokenSpace& space, const FormParams& params);

/// Velocity-pressure coupling, rows indexed by pressure DOFs:
///   B[q,v] = b(phi_v, psi_q) = -sum_T int q div v + sum_e int {q}[v].n_e.
CsrMatrix assemble_divergence(const BrokenSpace& velocity, const BrokenSpace& pressure);

/// Upwinded convection N(w)_ij = c^w(w, phi_j, phi_i):
///   sum_T int (w.grad z).rho + upwind inflow term + 1/2 sum_T int (div w) z.rho
///   - 1/2 sum_e int [w].n_e {z.rho},
/// realized as an edge loop: on an interior edge with s = {w}.n_e the inflow
/// side is T_m when s < 0 and T_n when s > 0; exterior boundary traces are
/// zero. Satisfies z^T N(w) z >= 0.
CsrMatrix assemble_convection(const FemField& w, const BrokenSpace& space);

/// Same operator accumulated into an existing matrix whose pattern contains
/// the convection stencil (the SIPG pattern does).
void accumulate_convection(const FemField& w, const BrokenSpace& space, CsrMatrix& into);

/// J0(v, w) = sum_e (sigma_e/|e|) int_e [v].[w].
double j0_value(const FemField& v, const FemField& w, double sigma_e);

/// Broken energy norm ||v||_eps = (sum_T ||grad v||_T^2 + J0(v,v))^{1/2}.
double energy_norm(const FemField& v, double sigma_e);

/// Load vector b_i = sum_T int_T f . phi_i (over-integrated).
std::vector<double> load_vector(const BrokenSpace& space,
                                const std::function<void(double, double, double*)>& f);

/// Weak Dirichlet data for the diffusion operator (unit viscosity):
///   rhs_i = sum_{boundary e} (sigma_e/|e|) int g.phi_i + eps int ({grad phi_i} n_e).g.
/// Scale by the viscosity in front of the SIPG term.
std::vector<double> dirichlet_rhs(const BrokenSpace& space, const FormParams& params,
                                  const std::function<void(double, double, double*)>& g);

/// Inflow part of the convection boundary term for Dirichlet data g:
///   rhs_i = sum_{boundary e} int_{w.n_e < 0} |w.n_e| g.phi_i.
std::vector<double> convection_inflow_rhs(const FemField& w,
                                          const std::function<void(double, double, double*)>& g);

/// Integral of every pressure basis function (the zero-mean constraint row).
std::vector<double> pressure_integrals(const BrokenSpace& pressure);

} // namespace kvdg

#endif
