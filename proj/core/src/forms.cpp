#include "kvdg/forms.hpp"

#include <cassert>
#include <cmath>

#include "kvdg/errors.hpp"

namespace kvdg {

namespace {

int matrix_quad_degree(int k) { return std::min(std::max(2 * k + 2, 2), 6); }
int over_quad_degree(int k) { return std::min(2 * k + 4, 6); }

// Basis traces on one edge: values and normal derivatives of the scalar
// basis from each adjacent side at the edge quadrature points.
struct EdgeBasis {
    int nsides = 1;
    int elem[2] = {-1, -1};
    std::vector<double> phi[2]; // q*nl + i
    std::vector<double> gn[2];  // (grad_phys phi_i) . n_e

    EdgeBasis(const BrokenSpace& s, const TriMesh& mesh, int edge, const QuadRule& rule) {
        const Edge& e = mesh.edges[edge];
        nsides = e.boundary ? 1 : 2;
        const int nl = s.nodes_per_element(), nq = rule.size();
        const EdgeTraceFrame frame = mesh.trace_frame(edge, rule);
        std::vector<Vec2> dref(nl);
        for (int side = 0; side < nsides; ++side) {
            const int t = e.tri[side];
            elem[side] = t;
            phi[side].resize(nq * nl);
            gn[side].resize(nq * nl);
            const auto& jt = mesh.inv_jac_t(t);
            for (int q = 0; q < nq; ++q) {
                const Vec2& ref = side == 0 ? frame.ref_m[q] : frame.ref_n[q];
                s.eval_basis(ref, &phi[side][q * nl]);
                s.eval_basis_grad(ref, dref.data());
                for (int i = 0; i < nl; ++i) {
                    const double gx = jt[0] * dref[i][0] + jt[2] * dref[i][1];
                    const double gy = jt[1] * dref[i][0] + jt[3] * dref[i][1];
                    gn[side][q * nl + i] = gx * e.normal[0] + gy * e.normal[1];
                }
            }
        }
    }
};

// Trace values of a (vector) field on both sides of an edge.
void field_traces(const FemField& f, const EdgeBasis& eb, int q, int nl, double out[2][2]) {
    const BrokenSpace& s = *f.space;
    const int nc = s.components();
    for (int side = 0; side < eb.nsides; ++side) {
        for (int c = 0; c < nc; ++c) out[side][c] = 0.0;
        for (int i = 0; i < nl; ++i) {
            const double p = eb.phi[side][q * nl + i];
            for (int c = 0; c < nc; ++c)
                out[side][c] += p * f.coeff[s.dof(eb.elem[side], i, c)];
        }
    }
}

// Physical gradients of the scalar basis on one element (tabulated
// reference gradients mapped through the affine chart).
void physical_grads(const BasisTable& tab, const std::array<double, 4>& jt, int q,
                    Vec2* out) {
    for (int i = 0; i < tab.nl; ++i) {
        const Vec2& d = tab.ref_grad(q, i);
        out[i] = {jt[0] * d[0] + jt[2] * d[1], jt[1] * d[0] + jt[3] * d[1]};
    }
}

using Sink = std::function<void(long, long, double)>;

void convection_assemble(const FemField& wf, const BrokenSpace& space, const Sink& add) {
    if (wf.space->components() != 2 || !wf.space->same_mesh(space))
        throw ConfigError("assemble_convection: w must be a vector field on the same mesh");
    const TriMesh& mesh = space.mesh();
    const int k = space.degree();
    const int nl = space.nodes_per_element(), nc = space.components();
    const QuadRule& vrule = triangle_rule(matrix_quad_degree(k));
    const QuadRule& erule = edge_rule(matrix_quad_degree(k));
    const BasisTable vtab(space, vrule);
    const BrokenSpace& ws = *wf.space;
    const BasisTable wtab(ws, vrule);
    const int wnl = ws.nodes_per_element();

    std::vector<Vec2> g(nl), wg(wnl);
    // Volume: (w.grad z).rho + 1/2 (div w) z.rho, both component-diagonal.
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        const auto& jt = mesh.inv_jac_t(t);
        for (int q = 0; q < vrule.size(); ++q) {
            physical_grads(vtab, jt, q, g.data());
            physical_grads(wtab, jt, q, wg.data());
            double wval[2] = {0.0, 0.0}, divw = 0.0;
            for (int i = 0; i < wnl; ++i) {
                const double p = wtab.value(q, i);
                const double c0 = wf.coeff[ws.dof(t, i, 0)];
                const double c1 = wf.coeff[ws.dof(t, i, 1)];
                wval[0] += p * c0;
                wval[1] += p * c1;
                divw += c0 * wg[i][0] + c1 * wg[i][1];
            }
            const double wq = vrule.weights[q] * jac;
            for (int b = 0; b < nl; ++b) {
                const double transport = wval[0] * g[b][0] + wval[1] * g[b][1];
                const double react = 0.5 * divw * vtab.value(q, b);
                for (int a = 0; a < nl; ++a) {
                    const double v = wq * vtab.value(q, a) * (transport + react);
                    for (int c = 0; c < nc; ++c)
                        add(space.dof(t, a, c), space.dof(t, b, c), v);
                }
            }
        }
    }

    // Edge terms: upwind inflow and -1/2 [w].n {z.rho}.
    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        const EdgeBasis eb(space, mesh, ei, erule);
        const EdgeBasis wb(ws, mesh, ei, erule);
        for (int q = 0; q < erule.size(); ++q) {
            const double wq = erule.weights[q] * e.length;
            double wtr[2][2];
            field_traces(wf, wb, q, wnl, wtr);
            const double* pm = &eb.phi[0][q * nl];
            if (e.boundary) {
                const double s = wtr[0][0] * e.normal[0] + wtr[0][1] * e.normal[1];
                // inflow (exterior trace zero): |s| z.rho, plus -1/2 s z.rho
                const double f = (s < 0.0 ? -s : 0.0) - 0.5 * s;
                if (f == 0.0) continue;
                for (int a = 0; a < nl; ++a)
                    for (int b = 0; b < nl; ++b) {
                        const double v = wq * f * pm[a] * pm[b];
                        for (int c = 0; c < nc; ++c)
                            add(space.dof(e.tri[0], a, c), space.dof(e.tri[0], b, c), v);
                    }
                continue;
            }
            const double* pn = &eb.phi[1][q * nl];
            const double s_avg = 0.5 * ((wtr[0][0] + wtr[1][0]) * e.normal[0] +
                                        (wtr[0][1] + wtr[1][1]) * e.normal[1]);
            const double s_jmp = (wtr[0][0] - wtr[1][0]) * e.normal[0] +
                                 (wtr[0][1] - wtr[1][1]) * e.normal[1];
            for (int a = 0; a < nl; ++a) {
                for (int b = 0; b < nl; ++b) {
                    double mm = -0.25 * s_jmp * pm[a] * pm[b];
                    double nn = -0.25 * s_jmp * pn[a] * pn[b];
                    double mn = 0.0, nm = 0.0;
                    if (s_avg < 0.0) { // T_m is the inflow side
                        mm += -s_avg * pm[a] * pm[b];
                        mn -= -s_avg * pm[a] * pn[b];
                    } else if (s_avg > 0.0) { // T_n is the inflow side
                        nn += s_avg * pn[a] * pn[b];
                        nm -= s_avg * pn[a] * pm[b];
                    }
                    for (int c = 0; c < nc; ++c) {
                        const long am = space.dof(e.tri[0], a, c), bm = space.dof(e.tri[0], b, c);
                        const long an = space.dof(e.tri[1], a, c), bn = space.dof(e.tri[1], b, c);
                        if (mm != 0.0) add(am, bm, wq * mm);
                        if (nn != 0.0) add(an, bn, wq * nn);
                        if (mn != 0.0) add(am, bn, wq * mn);
                        if (nm != 0.0) add(an, bm, wq * nm);
                    }
                }
            }
        }
    }
}

} // namespace

void FormParams::validate(int velocity_degree) const {
    if (nu <= 0.0) throw ConfigError("forms: nu must be positive");
    if (kappa < 0.0) throw ConfigError("forms: kappa must be nonnegative");
    if (sigma_e <= 0.0) throw ConfigError("forms: sigma_e must be positive");
    if (epsilon_sym != -1 && epsilon_sym != 1)
        throw ConfigError("forms: epsilon_sym must be -1 or +1");
    const double sigma0 = 4.0 * velocity_degree * velocity_degree;
    if (epsilon_sym == -1 && sigma_e < sigma0)
        throw ConfigError("forms: SIPG penalty sigma_e=" + std::to_string(sigma_e) +
                          " below sigma0=" + std::to_string(sigma0));
}

CsrMatrix assemble_mass(const BrokenSpace& space) {
    const TriMesh& mesh = space.mesh();
    const QuadRule& rule = triangle_rule(matrix_quad_degree(space.degree()));
    const BasisTable tab(space, rule);
    const int nl = space.nodes_per_element(), nc = space.components();

    // Reference Gram matrix; physical blocks scale by 2*area.
    std::vector<double> gram(nl * nl, 0.0);
    for (int q = 0; q < rule.size(); ++q)
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                gram[i * nl + j] += rule.weights[q] * tab.value(q, i) * tab.value(q, j);

    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(mesh.num_triangles()) * nl * nl * nc);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                for (int c = 0; c < nc; ++c)
                    trip.push_back({static_cast<int>(space.dof(t, i, c)),
                                    static_cast<int>(space.dof(t, j, c)),
                                    jac * gram[i * nl + j]});
    }
    const int n = static_cast<int>(space.total_dofs());
    return CsrMatrix::from_triplets(n, n, std::move(trip));
}

CsrMatrix assemble_sipg(const BrokenSpace& space, const FormParams& params) {
    params.validate(space.degree());
    const TriMesh& mesh = space.mesh();
    const int k = space.degree();
    const int nl = space.nodes_per_element(), nc = space.components();
    const QuadRule& vrule = triangle_rule(matrix_quad_degree(k));
    const QuadRule& erule = edge_rule(matrix_quad_degree(k));
    const BasisTable vtab(space, vrule);
    const double eps = params.epsilon_sym;

    std::vector<Triplet> trip;
    std::vector<Vec2> g(nl);

    // Volume gradient term.
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        const auto& jt = mesh.inv_jac_t(t);
        std::vector<double> local(nl * nl, 0.0);
        for (int q = 0; q < vrule.size(); ++q) {
            physical_grads(vtab, jt, q, g.data());
            const double wq = vrule.weights[q] * jac;
            for (int i = 0; i < nl; ++i)
                for (int j = 0; j < nl; ++j)
                    local[i * nl + j] += wq * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                for (int c = 0; c < nc; ++c)
                    trip.push_back({static_cast<int>(space.dof(t, i, c)),
                                    static_cast<int>(space.dof(t, j, c)), local[i * nl + j]});
    }

    // Edge terms: consistency, symmetrization, penalty.
    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        const EdgeBasis eb(space, mesh, ei, erule);
        const double pen = params.sigma_e / e.length;
        const double sgn[2] = {1.0, -1.0};
        for (int q = 0; q < erule.size(); ++q) {
            const double wq = erule.weights[q] * e.length;
            if (e.boundary) {
                const double* phi = &eb.phi[0][q * nl];
                const double* gn = &eb.gn[0][q * nl];
                for (int i = 0; i < nl; ++i)
                    for (int j = 0; j < nl; ++j) {
                        const double v =
                            wq * (-gn[j] * phi[i] + eps * gn[i] * phi[j] + pen * phi[j] * phi[i]);
                        for (int c = 0; c < nc; ++c)
                            trip.push_back({static_cast<int>(space.dof(eb.elem[0], i, c)),
                                            static_cast<int>(space.dof(eb.elem[0], j, c)), v});
                    }
                continue;
            }
            for (int sv = 0; sv < 2; ++sv) {
                const double* phi_v = &eb.phi[sv][q * nl];
                const double* gn_v = &eb.gn[sv][q * nl];
                for (int su = 0; su < 2; ++su) {
                    const double* phi_u = &eb.phi[su][q * nl];
                    const double* gn_u = &eb.gn[su][q * nl];
                    for (int i = 0; i < nl; ++i)
                        for (int j = 0; j < nl; ++j) {
                            const double v = wq * (-0.5 * gn_u[j] * sgn[sv] * phi_v[i] +
                                                   eps * 0.5 * gn_v[i] * sgn[su] * phi_u[j] +
                                                   pen * sgn[su] * phi_u[j] * sgn[sv] * phi_v[i]);
                            for (int c = 0; c < nc; ++c)
                                trip.push_back({static_cast<int>(space.dof(eb.elem[sv], i, c)),
                                                static_cast<int>(space.dof(eb.elem[su], j, c)), v});
                        }
                }
            }
        }
    }
    const int n = static_cast<int>(space.total_dofs());
    return CsrMatrix::from_triplets(n, n, std::move(trip));
}

CsrMatrix assemble_divergence(const BrokenSpace& velocity, const BrokenSpace& pressure) {
    if (!velocity.same_mesh(pressure))
        throw ConfigError("assemble_divergence: spaces on different meshes");
    if (velocity.components() != 2 || pressure.components() != 1)
        throw ConfigError("assemble_divergence: expected vector velocity, scalar pressure");
    const TriMesh& mesh = velocity.mesh();
    const int deg = matrix_quad_degree(velocity.degree());
    const QuadRule& vrule = triangle_rule(deg);
    const QuadRule& erule = edge_rule(deg);
    const BasisTable vtab(velocity, vrule);
    const BasisTable ptab(pressure, vrule);
    const int nlv = velocity.nodes_per_element(), nlp = pressure.nodes_per_element();

    std::vector<Triplet> trip;
    std::vector<Vec2> g(nlv);

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        const auto& jt = mesh.inv_jac_t(t);
        for (int q = 0; q < vrule.size(); ++q) {
            physical_grads(vtab, jt, q, g.data());
            const double wq = vrule.weights[q] * jac;
            for (int iq = 0; iq < nlp; ++iq) {
                const double qv = wq * ptab.value(q, iq);
                for (int b = 0; b < nlv; ++b)
                    for (int c = 0; c < 2; ++c)
                        trip.push_back({static_cast<int>(pressure.dof(t, iq, 0)),
                                        static_cast<int>(velocity.dof(t, b, c)),
                                        -qv * g[b][c]});
            }
        }
    }

    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        const EdgeBasis vb(velocity, mesh, ei, erule);
        const EdgeBasis pb(pressure, mesh, ei, erule);
        const double sgn[2] = {1.0, -1.0};
        const int nsides = vb.nsides;
        const double half = nsides == 2 ? 0.5 : 1.0;
        for (int q = 0; q < erule.size(); ++q) {
            const double wq = erule.weights[q] * e.length;
            for (int sq = 0; sq < nsides; ++sq)
                for (int sv = 0; sv < nsides; ++sv)
                    for (int iq = 0; iq < nlp; ++iq)
                        for (int b = 0; b < nlv; ++b) {
                            const double v = wq * half * pb.phi[sq][q * nlp + iq] * sgn[sv] *
                                             vb.phi[sv][q * nlv + b];
                            for (int c = 0; c < 2; ++c)
                                trip.push_back({static_cast<int>(pressure.dof(pb.elem[sq], iq, 0)),
                                                static_cast<int>(velocity.dof(vb.elem[sv], b, c)),
                                                v * e.normal[c]});
                        }
        }
    }
    return CsrMatrix::from_triplets(static_cast<int>(pressure.total_dofs()),
                                    static_cast<int>(velocity.total_dofs()), std::move(trip));
}

CsrMatrix assemble_convection(const FemField& w, const BrokenSpace& space) {
    std::vector<Triplet> trip;
    convection_assemble(w, space, [&trip](long r, long c, double v) {
        trip.push_back({static_cast<int>(r), static_cast<int>(c), v});
    });
    const int n = static_cast<int>(space.total_dofs());
    return CsrMatrix::from_triplets(n, n, std::move(trip));
}

void accumulate_convection(const FemField& w, const BrokenSpace& space, CsrMatrix& into) {
    convection_assemble(w, space, [&into](long r, long c, double v) {
        into.add(static_cast<int>(r), static_cast<int>(c), v);
    });
}

double j0_value(const FemField& v, const FemField& w, double sigma_e) {
    if (v.space != w.space) throw ConfigError("j0_value: fields in different spaces");
    const BrokenSpace& s = *v.space;
    const TriMesh& mesh = s.mesh();
    const int nl = s.nodes_per_element(), nc = s.components();
    const QuadRule& erule = edge_rule(matrix_quad_degree(s.degree()));
    double total = 0.0;
    double vt[2][2], wt[2][2];
    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        const EdgeBasis eb(s, mesh, ei, erule);
        double acc = 0.0;
        for (int q = 0; q < erule.size(); ++q) {
            field_traces(v, eb, q, nl, vt);
            field_traces(w, eb, q, nl, wt);
            double prod = 0.0;
            for (int c = 0; c < nc; ++c) {
                const double jv = e.boundary ? vt[0][c] : vt[0][c] - vt[1][c];
                const double jw = e.boundary ? wt[0][c] : wt[0][c] - wt[1][c];
                prod += jv * jw;
            }
            acc += erule.weights[q] * e.length * prod;
        }
        total += sigma_e / e.length * acc;
    }
    return total;
}

double energy_norm(const FemField& v, double sigma_e) {
    const BrokenSpace& s = *v.space;
    const TriMesh& mesh = s.mesh();
    const QuadRule& vrule = triangle_rule(matrix_quad_degree(s.degree()));
    const BasisTable tab(s, vrule);
    const int nl = s.nodes_per_element(), nc = s.components();
    std::vector<Vec2> g(nl);
    double grad2 = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        const auto& jt = mesh.inv_jac_t(t);
        for (int q = 0; q < vrule.size(); ++q) {
            physical_grads(tab, jt, q, g.data());
            double frob = 0.0;
            for (int c = 0; c < nc; ++c) {
                Vec2 gc{0.0, 0.0};
                for (int i = 0; i < nl; ++i) {
                    const double ci = v.coeff[s.dof(t, i, c)];
                    gc[0] += ci * g[i][0];
                    gc[1] += ci * g[i][1];
                }
                frob += gc[0] * gc[0] + gc[1] * gc[1];
            }
            grad2 += vrule.weights[q] * jac * frob;
        }
    }
    return std::sqrt(grad2 + j0_value(v, v, sigma_e));
}

std::vector<double> load_vector(const BrokenSpace& space,
                                const std::function<void(double, double, double*)>& f) {
    const TriMesh& mesh = space.mesh();
    const QuadRule& rule = triangle_rule(over_quad_degree(space.degree()));
    const BasisTable tab(space, rule);
    const int nl = space.nodes_per_element(), nc = space.components();
    std::vector<double> rhs(space.total_dofs(), 0.0);
    std::vector<double> fv(nc);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 x = mesh.point(t, rule.points[q]);
            f(x[0], x[1], fv.data());
            const double wq = rule.weights[q] * jac;
            for (int i = 0; i < nl; ++i) {
                const double wphi = wq * tab.value(q, i);
                for (int c = 0; c < nc; ++c) rhs[space.dof(t, i, c)] += wphi * fv[c];
            }
        }
    }
    return rhs;
}

std::vector<double> dirichlet_rhs(const BrokenSpace& space, const FormParams& params,
                                  const std::function<void(double, double, double*)>& g) {
    const TriMesh& mesh = space.mesh();
    const int nl = space.nodes_per_element(), nc = space.components();
    const QuadRule& erule = edge_rule(over_quad_degree(space.degree()));
    std::vector<double> rhs(space.total_dofs(), 0.0);
    std::vector<double> gv(nc);
    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        if (!e.boundary) continue;
        const EdgeBasis eb(space, mesh, ei, erule);
        const EdgeTraceFrame frame = mesh.trace_frame(ei, erule);
        const double pen = params.sigma_e / e.length;
        for (int q = 0; q < erule.size(); ++q) {
            g(frame.phys[q][0], frame.phys[q][1], gv.data());
            const double wq = erule.weights[q] * e.length;
            const double* phi = &eb.phi[0][q * nl];
            const double* gn = &eb.gn[0][q * nl];
            for (int i = 0; i < nl; ++i)
                for (int c = 0; c < nc; ++c)
                    rhs[space.dof(e.tri[0], i, c)] +=
                        wq * gv[c] * (pen * phi[i] + params.epsilon_sym * gn[i]);
        }
    }
    return rhs;
}

std::vector<double> convection_inflow_rhs(const FemField& w,
                                          const std::function<void(double, double, double*)>& g) {
    const BrokenSpace& space = *w.space;
    const TriMesh& mesh = space.mesh();
    const int nl = space.nodes_per_element(), nc = space.components();
    const QuadRule& erule = edge_rule(over_quad_degree(space.degree()));
    std::vector<double> rhs(space.total_dofs(), 0.0);
    std::vector<double> gv(nc);
    double wt[2][2];
    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        if (!e.boundary) continue;
        const EdgeBasis eb(space, mesh, ei, erule);
        const EdgeTraceFrame frame = mesh.trace_frame(ei, erule);
        for (int q = 0; q < erule.size(); ++q) {
            field_traces(w, eb, q, nl, wt);
            const double s = wt[0][0] * e.normal[0] + wt[0][1] * e.normal[1];
            if (s >= 0.0) continue;
            g(frame.phys[q][0], frame.phys[q][1], gv.data());
            const double wq = erule.weights[q] * e.length * (-s);
            const double* phi = &eb.phi[0][q * nl];
            for (int i = 0; i < nl; ++i)
                for (int c = 0; c < nc; ++c)
                    rhs[space.dof(e.tri[0], i, c)] += wq * gv[c] * phi[i];
        }
    }
    return rhs;
}

std::vector<double> pressure_integrals(const BrokenSpace& pressure) {
    const TriMesh& mesh = pressure.mesh();
    const QuadRule& rule = triangle_rule(matrix_quad_degree(pressure.degree()));
    const BasisTable tab(pressure, rule);
    const int nl = pressure.nodes_per_element();
    std::vector<double> m(pressure.total_dofs(), 0.0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double jac = 2.0 * mesh.area[t];
        for (int q = 0; q < rule.size(); ++q)
            for (int i = 0; i < nl; ++i)
                m[pressure.dof(t, i, 0)] += rule.weights[q] * jac * tab.value(q, i);
    }
    return m;
}

} // namespace kvdg
