// Scratch: rate isolation. Runs the manufactured ladder with the convection
// term frozen (and the matching linear forcing) to separate spatial
// discretization issues from the convection operator.
#include <cmath>
#include <cstdio>

#include "kvdg/analysis.hpp"

using namespace kvdg;

int main(int argc, char** argv) {
    const char mode = argc > 1 ? argv[1][0] : 'x';
    const ManufacturedCase& mc = ManufacturedCase::example(1);
    const double nu = 1.0, kappa = 0.01;

    if (mode == 'q') {
        // Scalar Poisson sanity: -lap u = f, u = sin(pi x) sin(pi y).
        const double sigma = argc > 2 ? std::atof(argv[2]) : 10.0;
        const double pi = 3.14159265358979323846;
        double prev_l2 = 0, prev_en = 0;
        for (int n : {4, 8, 16, 32}) {
            const TriMesh mesh = TriMesh::structured(n);
            const BrokenSpace s(mesh, 1, 1);
            FormParams fp{1.0, 0.0, sigma, -1};
            const CsrMatrix A = assemble_sipg(s, fp);
            const auto F = load_vector(s, [&](double x, double y, double* out) {
                out[0] = 2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
            });
            std::vector<double> x(s.total_dofs(), 0.0);
            const Ilu0 ilu = Ilu0::factor(A);
            const GmresStats st = gmres(A, F, x, {1e-13, 200, 20000}, &ilu);
            FemField U(s);
            U.coeff = x;
            // true L2 and broken H1 errors by quadrature
            const QuadRule& rule = triangle_rule(6);
            const BasisTable tab(s, rule);
            double e2 = 0, g2 = 0;
            for (int t = 0; t < mesh.num_triangles(); ++t) {
                const double jac = 2.0 * mesh.area[t];
                const auto& jt = mesh.inv_jac_t(t);
                for (int q = 0; q < rule.size(); ++q) {
                    double uh = 0, gx = 0, gy = 0;
                    for (int i = 0; i < s.nodes_per_element(); ++i) {
                        const double c = x[s.dof(t, i, 0)];
                        uh += c * tab.value(q, i);
                        const Vec2& d = tab.ref_grad(q, i);
                        gx += c * (jt[0] * d[0] + jt[2] * d[1]);
                        gy += c * (jt[1] * d[0] + jt[3] * d[1]);
                    }
                    const Vec2 xp = mesh.point(t, rule.points[q]);
                    const double ue = std::sin(pi * xp[0]) * std::sin(pi * xp[1]);
                    const double uex = pi * std::cos(pi * xp[0]) * std::sin(pi * xp[1]);
                    const double uey = pi * std::sin(pi * xp[0]) * std::cos(pi * xp[1]);
                    e2 += rule.weights[q] * jac * (uh - ue) * (uh - ue);
                    g2 += rule.weights[q] * jac *
                          ((gx - uex) * (gx - uex) + (gy - uey) * (gy - uey));
                }
            }
            const double el2 = std::sqrt(e2), een = std::sqrt(g2);
            std::printf("poisson n=%2d  h1 %.4e (%5.3f)  l2 %.4e (%5.3f)  it %d conv %d\n", n,
                        een, prev_en ? std::log2(prev_en / een) : 0.0, el2,
                        prev_l2 ? std::log2(prev_l2 / el2) : 0.0, st.iterations, st.converged);
            prev_l2 = el2;
            prev_en = een;
        }
        return 0;
    }

    if (mode == 's') {
        // Steady Stokes: nu A U + B^T P = F, B U = 0 at frozen time T.
        // argv[2] = sigma, argv[3] = pressure degree, argv[4] = 'p' to also
        // report the error against the elementwise projection of u.
        const double sigma = argc > 2 ? std::atof(argv[2]) : 10.0;
        const int pdeg = argc > 3 ? std::atoi(argv[3]) : 0;
        const bool proj_err = argc > 4 && argv[4][0] == 'p';
        const double T = 1.0;
        const char diag = argc > 5 ? argv[5][0] : 'u'; // u=uniform, a=alternating, r=reverse
        double prev_l2 = 0, prev_en = 0, prev_p = 0, prev_pl2 = 0;
        for (int n : {4, 8, 16, 32}) {
            TriMesh mesh = TriMesh::structured(n);
            if (diag != 'u') {
                std::vector<Vec2> verts;
                for (int j = 0; j <= n; ++j)
                    for (int i = 0; i <= n; ++i)
                        verts.push_back({double(i) / n, double(j) / n});
                auto vid = [n](int i, int j) { return j * (n + 1) + i; };
                std::vector<std::array<int, 3>> tris;
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        const int a = vid(i, j), b = vid(i + 1, j);
                        const int c = vid(i + 1, j + 1), d = vid(i, j + 1);
                        const bool flip = diag == 'r' || (diag == 'a' && (i + j) % 2 == 1);
                        if (!flip) {
                            tris.push_back({a, b, c});
                            tris.push_back({a, c, d});
                        } else {
                            tris.push_back({a, b, d});
                            tris.push_back({b, c, d});
                        }
                    }
                mesh = TriMesh::from_triangles(std::move(verts), std::move(tris));
            }
            const BrokenSpace vs(mesh, 1, 2);
            const BrokenSpace ps(mesh, pdeg, 1);
            FormParams fp{nu, 0.0, sigma, -1};
            CsrMatrix A = assemble_sipg(vs, fp);
            A.scale(nu);
            const CsrMatrix B = assemble_divergence(vs, ps);
            BlockSaddleSystem sys(A, B, pressure_integrals(ps), vs.dofs_per_element(), ps.dofs_per_element());
            const auto F = load_vector(vs, [&](double x, double y, double* out) {
                double lu[2], gp[2];
                mc.lap_u(x, y, T, lu);
                mc.grad_p(x, y, T, gp);
                out[0] = -nu * lu[0] + gp[0];
                out[1] = -nu * lu[1] + gp[1];
            });
            const SaddleSolution sol = sys.solve(F, {1e-12, 200, 20000});
            FemField U(vs), P(ps);
            U.coeff = sol.u;
            P.coeff = sol.p;
            const double el2 = error_l2(U, mc, T);
            const double een = error_energy(U, mc, T, fp.sigma_e);
            const double ep = error_pressure(P, mc, T);
            double epl2 = 0.0;
            if (proj_err) {
                const FemField Pu = project_elementwise(vs, [&](double x, double y, double* o) {
                    mc.u(x, y, T, o);
                });
                FemField D(vs);
                for (size_t i = 0; i < D.coeff.size(); ++i)
                    D.coeff[i] = U.coeff[i] - Pu.coeff[i];
                // reuse error_l2 against zero by a tiny local quadrature
                const CsrMatrix M = assemble_mass(vs);
                std::vector<double> md(D.coeff.size());
                M.multiply(D.coeff, md);
                epl2 = std::sqrt(dot(D.coeff, md));
            }
            std::printf(
                "steady n=%2d  en %.4e (%5.3f)  l2 %.4e (%5.3f)  p %.4e (%5.3f)  pl2 %.4e (%5.3f) it %d\n",
                n, een, prev_en ? std::log2(prev_en / een) : 0.0, el2,
                prev_l2 ? std::log2(prev_l2 / el2) : 0.0, ep,
                prev_p ? std::log2(prev_p / ep) : 0.0, epl2,
                prev_pl2 ? std::log2(prev_pl2 / epl2) : 0.0, sol.stats.iterations);
            prev_l2 = el2;
            prev_en = een;
            prev_p = ep;
            prev_pl2 = epl2;
        }
        return 0;
    }

    const bool frozen = mode == 'f' || mode == 'd';
    double prev_l2 = 0, prev_en = 0, prev_p = 0;
    for (int n : {4, 8, 16}) {
        SolverConfig cfg;
        cfg.nu = nu;
        cfg.kappa = kappa;
        cfg.sigma_e = 10.0;
        cfg.n = n;
        cfg.dt = mode == 'd' ? 1.0 / (4.0 * n * n) : 1.0 / (n * n); // 'd': refine dt 4x
        cfg.t_final = 1.0;
        cfg.convection_frozen = frozen;
        const TriMesh mesh = TriMesh::structured(n);
        KelvinVoigtSolver solver(mesh, cfg);
        Problem pr = mc.problem(nu, kappa);
        if (frozen) {
            // Linear problem: f = u_t - kappa lap u_t - nu lap u + grad p.
            pr.forcing = [&mc, nu, kappa](double x, double y, double t, double* out) {
                double ut[2], lu[2], lut[2], gp[2];
                mc.u_t(x, y, t, ut);
                mc.lap_u(x, y, t, lu);
                mc.lap_u_t(x, y, t, lut);
                mc.grad_p(x, y, t, gp);
                out[0] = ut[0] - kappa * lut[0] - nu * lu[0] + gp[0];
                out[1] = ut[1] - kappa * lut[1] - nu * lu[1] + gp[1];
            };
        }
        const RunResult rr = solver.run(pr);
        const double el2 = error_l2(rr.final_state.u, mc, 1.0);
        const double een = error_energy(rr.final_state.u, mc, 1.0, cfg.sigma_e);
        const double ep = error_pressure(rr.final_state.p, mc, 1.0);
        int iters = 0;
        long tot = 0;
        for (const auto& d : rr.diagnostics) {
            iters = std::max(iters, d.gmres_iters);
            tot += d.gmres_iters;
        }
        std::printf("n=%2d  en %.4e (%5.3f)  l2 %.4e (%5.3f)  p %.4e (%5.3f)  max_it %d avg %.1f "
                    "(%.2fs)\n",
                    n, een, prev_en ? std::log2(prev_en / een) : 0.0, el2,
                    prev_l2 ? std::log2(prev_l2 / el2) : 0.0, ep,
                    prev_p ? std::log2(prev_p / ep) : 0.0, iters,
                    double(tot) / rr.diagnostics.size(), rr.solve_seconds);
        prev_l2 = el2;
        prev_en = een;
        prev_p = ep;
    }
    return 0;
}
