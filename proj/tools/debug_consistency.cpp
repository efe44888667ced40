// Scratch diagnostics (not installed): verifies that substituting the exact
// manufactured solution into the assembled weak forms leaves only quadrature
// error, and that the constraint operator annihilates constants.
#include <cmath>
#include <cstdio>
#include <vector>

#include "kvdg/analysis.hpp"

using namespace kvdg;

int main() {
    const ManufacturedCase& mc = ManufacturedCase::example(1);
    const double nu = 1.0, kappa = 0.01, t = 0.3;

    for (int n : {2, 4, 8}) {
        const TriMesh mesh = TriMesh::structured(n);
        const BrokenSpace vs(mesh, 1, 2);
        const BrokenSpace ps(mesh, 0, 1);
        const CsrMatrix B = assemble_divergence(vs, ps);

        // b(v, 1) must vanish identically: check ||B^T 1||.
        std::vector<double> ones(ps.total_dofs(), 1.0);
        std::vector<double> bt1(vs.total_dofs(), 0.0);
        const auto Bd = B.to_dense();
        for (int q = 0; q < B.rows(); ++q)
            for (int v = 0; v < B.cols(); ++v) bt1[v] += Bd[q][v];
        double bt1n = 0;
        for (double x : bt1) bt1n = std::max(bt1n, std::fabs(x));

        // Exact-solution residual of the weak form with analytic traces:
        // r_i = (f,phi_i) - (u_t,phi_i) - kappa*(a+J0)(u_t,phi_i)
        //       - nu*(a+J0)(u,phi_i) - c(u,u,phi_i) - b(phi_i,p).
        // u is smooth and vanishes on the boundary, so (a+J0)(w,phi) =
        // sum_T int grad w : grad phi - sum_e int (grad w n_e).[phi]
        // and c(u,u,phi) = sum_T int (u.grad u).phi.
        std::vector<double> r = load_vector(vs, [&](double x, double y, double* out) {
            double f[2], ut[2], uu[2], gu[4];
            mc.forcing(x, y, t, nu, kappa, f);
            mc.u_t(x, y, t, ut);
            mc.u(x, y, t, uu);
            mc.grad_u(x, y, t, gu);
            out[0] = f[0] - ut[0] - (uu[0] * gu[0] + uu[1] * gu[1]);
            out[1] = f[1] - ut[1] - (uu[0] * gu[2] + uu[1] * gu[3]);
        });
        // volume gradient terms: -(kappa grad u_t + nu grad u) : grad phi_i
        // via quadrature; edge terms: + (kappa grad u_t + nu grad u){n}.[phi]
        // and + p jump term from b(phi, p) = -int p div phi + int {p}[phi].n.
        const QuadRule& vrule = triangle_rule(6);
        const QuadRule& erule = edge_rule(6);
        const BasisTable tab(vs, vrule);
        const int nl = vs.nodes_per_element();
        std::vector<Vec2> g(nl);
        for (int e = 0; e < mesh.num_triangles(); ++e) {
            const double jac = 2.0 * mesh.area[e];
            const auto& jt = mesh.inv_jac_t(e);
            for (int q = 0; q < vrule.size(); ++q) {
                for (int i = 0; i < nl; ++i) {
                    const Vec2& d = tab.ref_grad(q, i);
                    g[i] = {jt[0] * d[0] + jt[2] * d[1], jt[1] * d[0] + jt[3] * d[1]};
                }
                const Vec2 x = mesh.point(e, vrule.points[q]);
                double gu[4], gut[4];
                mc.grad_u(x[0], x[1], t, gu);
                // grad of u_t for case 1: shape * d/dt cos = -sin scaling
                mc.grad_u(x[0], x[1], t, gut);
                const double scal = -std::sin(t) / std::cos(t);
                for (int k = 0; k < 4; ++k) gut[k] = gu[k] * scal;
                const double pval = mc.p(x[0], x[1], t);
                const double w = vrule.weights[q] * jac;
                for (int i = 0; i < nl; ++i)
                    for (int c = 0; c < 2; ++c) {
                        const double gdot =
                            (kappa * gut[2 * c] + nu * gu[2 * c]) * g[i][0] +
                            (kappa * gut[2 * c + 1] + nu * gu[2 * c + 1]) * g[i][1];
                        // -(nu a + kappa a)(.) volume part and +p div phi from -b
                        r[vs.dof(e, i, c)] += w * (-gdot + pval * g[i][c]);
                    }
            }
        }
        for (int ei = 0; ei < mesh.num_edges(); ++ei) {
            const Edge& ed = mesh.edges[ei];
            const EdgeTraceFrame frame = mesh.trace_frame(ei, erule);
            const int nsides = ed.boundary ? 1 : 2;
            std::vector<double> phi(nl);
            for (int q = 0; q < erule.size(); ++q) {
                const Vec2& x = frame.phys[q];
                double gu[4];
                mc.grad_u(x[0], x[1], t, gu);
                const double scal = -std::sin(t) / std::cos(t);
                const double pval = mc.p(x[0], x[1], t);
                const double w = erule.weights[q] * ed.length;
                for (int side = 0; side < nsides; ++side) {
                    const double sgn = side == 0 ? 1.0 : -1.0;
                    vs.eval_basis(side == 0 ? frame.ref_m[q] : frame.ref_n[q], phi.data());
                    for (int i = 0; i < nl; ++i)
                        for (int c = 0; c < 2; ++c) {
                            const double gn = (nu + kappa * scal) *
                                              (gu[2 * c] * ed.normal[0] + gu[2 * c + 1] * ed.normal[1]);
                            // +{grad w}n.[phi] from -(a-term), -{p}[phi].n from -b
                            r[vs.dof(ed.tri[side], i, c)] +=
                                w * sgn * phi[i] * (gn - pval * ed.normal[c]);
                        }
                }
            }
        }
        double rn = 0;
        for (double x : r) rn = std::max(rn, std::fabs(x));
        std::printf("n=%2d  ||B^T 1||_inf = %.3e   consistency residual = %.3e\n", n, bt1n, rn);
    }
    return 0;
}
