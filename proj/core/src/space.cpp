#include "kvdg/space.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "kvdg/errors.hpp"

namespace kvdg {

namespace {

// In-place Gauss-Jordan inverse with partial pivoting; n is small (the
// local basis size), so stability and cost are non-issues.
void invert_dense(std::vector<double>& a, int n) {
    std::vector<double> inv(n * n, 0.0);
    for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        if (std::fabs(a[piv * n + col]) < 1e-14)
            throw ConfigError("space: singular nodal Vandermonde/mass matrix");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a[piv * n + j], a[col * n + j]);
                std::swap(inv[piv * n + j], inv[col * n + j]);
            }
        const double d = a[col * n + col];
        for (int j = 0; j < n; ++j) {
            a[col * n + j] /= d;
            inv[col * n + j] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                a[r * n + j] -= f * a[col * n + j];
                inv[r * n + j] -= f * inv[col * n + j];
            }
        }
    }
    a = std::move(inv);
}

} // namespace

BrokenSpace::BrokenSpace(const TriMesh& mesh, int degree, int components)
    : mesh_(&mesh), degree_(degree), components_(components) {
    if (degree < 0) throw ConfigError("space: degree must be >= 0");
    if (components != 1 && components != 2)
        throw ConfigError("space: components must be 1 or 2");
    nodes_ = (degree + 1) * (degree + 2) / 2;

    if (degree == 0) {
        nodes_ref_ = {{1.0 / 3.0, 1.0 / 3.0}};
        mono_ = {{0, 0}};
        coeff_ = {1.0};
        return;
    }
    for (int j = 0; j <= degree; ++j)
        for (int i = 0; i + j <= degree; ++i) {
            nodes_ref_.push_back({double(i) / degree, double(j) / degree});
            mono_.push_back({i, j});
        }
    // Nodal basis from the monomial Vandermonde: coeff = inv(V)^T with
    // V[l][j] = mono_j(node_l).
    std::vector<double> vand(nodes_ * nodes_);
    for (int l = 0; l < nodes_; ++l)
        for (int j = 0; j < nodes_; ++j)
            vand[l * nodes_ + j] = std::pow(nodes_ref_[l][0], mono_[j][0]) *
                                   std::pow(nodes_ref_[l][1], mono_[j][1]);
    invert_dense(vand, nodes_);
    coeff_.resize(nodes_ * nodes_);
    for (int i = 0; i < nodes_; ++i)
        for (int j = 0; j < nodes_; ++j)
            coeff_[i * nodes_ + j] = vand[j * nodes_ + i];
}

void BrokenSpace::eval_basis(const Vec2& ref, double* out) const {
    // Monomial values first, then the coefficient combination.
    double mono_val[66]; // enough for degree <= 10
    assert(nodes_ <= 66);
    for (int j = 0; j < nodes_; ++j)
        mono_val[j] = std::pow(ref[0], mono_[j][0]) * std::pow(ref[1], mono_[j][1]);
    for (int i = 0; i < nodes_; ++i) {
        double s = 0.0;
        for (int j = 0; j < nodes_; ++j) s += coeff_[i * nodes_ + j] * mono_val[j];
        out[i] = s;
    }
}

void BrokenSpace::eval_basis_grad(const Vec2& ref, Vec2* out) const {
    double dx[66], dy[66];
    assert(nodes_ <= 66);
    for (int j = 0; j < nodes_; ++j) {
        const int a = mono_[j][0], b = mono_[j][1];
        dx[j] = a == 0 ? 0.0 : a * std::pow(ref[0], a - 1) * std::pow(ref[1], b);
        dy[j] = b == 0 ? 0.0 : b * std::pow(ref[0], a) * std::pow(ref[1], b - 1);
    }
    for (int i = 0; i < nodes_; ++i) {
        Vec2 g{0.0, 0.0};
        for (int j = 0; j < nodes_; ++j) {
            g[0] += coeff_[i * nodes_ + j] * dx[j];
            g[1] += coeff_[i * nodes_ + j] * dy[j];
        }
        out[i] = g;
    }
}

void evaluate(const FemField& f, int elem, const Vec2& ref, double* out) {
    const BrokenSpace& s = *f.space;
    if (elem < 0 || elem >= s.mesh().num_triangles())
        throw ConfigError("evaluate: element index out of range");
    const int nl = s.nodes_per_element(), nc = s.components();
    std::vector<double> phi(nl);
    s.eval_basis(ref, phi.data());
    for (int c = 0; c < nc; ++c) out[c] = 0.0;
    for (int i = 0; i < nl; ++i)
        for (int c = 0; c < nc; ++c)
            out[c] += f.coeff[s.dof(elem, i, c)] * phi[i];
}

void evaluate_gradient(const FemField& f, int elem, const Vec2& ref, Vec2* out) {
    const BrokenSpace& s = *f.space;
    if (elem < 0 || elem >= s.mesh().num_triangles())
        throw ConfigError("evaluate_gradient: element index out of range");
    const int nl = s.nodes_per_element(), nc = s.components();
    std::vector<Vec2> dphi(nl);
    s.eval_basis_grad(ref, dphi.data());
    const auto& jt = s.mesh().inv_jac_t(elem);
    for (int c = 0; c < nc; ++c) out[c] = {0.0, 0.0};
    for (int i = 0; i < nl; ++i) {
        const Vec2 g{jt[0] * dphi[i][0] + jt[2] * dphi[i][1],
                     jt[1] * dphi[i][0] + jt[3] * dphi[i][1]};
        for (int c = 0; c < nc; ++c) {
            const double ci = f.coeff[s.dof(elem, i, c)];
            out[c][0] += ci * g[0];
            out[c][1] += ci * g[1];
        }
    }
}

FemField project_elementwise(const BrokenSpace& space,
                             const std::function<void(double, double, double*)>& fn) {
    const int k = space.degree();
    const QuadRule& rule = triangle_rule(std::min(2 * k + 4, 6));
    const BasisTable tab(space, rule);
    const int nl = space.nodes_per_element(), nc = space.components();
    const int nq = rule.size();

    // Local Gram matrix on the reference triangle; the 2*area Jacobian
    // factor cancels between the mass matrix and the right-hand side.
    std::vector<double> gram(nl * nl, 0.0);
    for (int q = 0; q < nq; ++q)
        for (int i = 0; i < nl; ++i)
            for (int j = 0; j < nl; ++j)
                gram[i * nl + j] += rule.weights[q] * tab.value(q, i) * tab.value(q, j);
    invert_dense(gram, nl);

    FemField out(space);
    const TriMesh& mesh = space.mesh();
    std::vector<double> rhs(nl * nc), fv(nc);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (int q = 0; q < nq; ++q) {
            const Vec2 x = mesh.point(t, rule.points[q]);
            fn(x[0], x[1], fv.data());
            for (int i = 0; i < nl; ++i) {
                const double wphi = rule.weights[q] * tab.value(q, i);
                for (int c = 0; c < nc; ++c) rhs[i * nc + c] += wphi * fv[c];
            }
        }
        for (int i = 0; i < nl; ++i)
            for (int c = 0; c < nc; ++c) {
                double s = 0.0;
                for (int j = 0; j < nl; ++j) s += gram[i * nl + j] * rhs[j * nc + c];
                out.coeff[space.dof(t, i, c)] = s;
            }
    }
    return out;
}

BasisTable::BasisTable(const BrokenSpace& s, const QuadRule& rule)
    : nq(rule.size()), nl(s.nodes_per_element()), val(nq * nl), dref(nq * nl) {
    for (int q = 0; q < nq; ++q) {
        s.eval_basis(rule.points[q], &val[q * nl]);
        s.eval_basis_grad(rule.points[q], &dref[q * nl]);
    }
}

void dump_fields_csv(const FemField& velocity, const FemField& pressure, std::ostream& out) {
    const BrokenSpace& vs = *velocity.space;
    if (!vs.same_mesh(*pressure.space))
        throw ConfigError("dump_fields_csv: fields on different meshes");
    const TriMesh& mesh = vs.mesh();
    out << "x,y,u1,u2,p\n";
    char buf[160];
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        for (const Vec2& ref : vs.ref_nodes()) {
            const Vec2 x = mesh.point(t, ref);
            double u[2] = {0.0, 0.0}, p = 0.0;
            evaluate(velocity, t, ref, u);
            evaluate(pressure, t, ref, &p);
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                          x[0], x[1], u[0], u[1], p);
            out << buf;
        }
    }
}

} // namespace kvdg
