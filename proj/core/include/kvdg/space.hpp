#ifndef KVDG_SPACE_HPP
#define KVDG_SPACE_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "kvdg/mesh.hpp"
#include "kvdg/quadrature.hpp"

namespace kvdg {

/// Broken (fully discontinuous) polynomial space on a triangulation.
///
/// Each element carries its own Lagrange basis of degree k on the reference
/// triangle; no degrees of freedom are shared between elements. Vector
/// spaces store components interleaved per node, so all DOFs of an element
/// are contiguous: dof(e, node, comp) = e*dofs_per_element + node*components + comp.
class BrokenSpace {
public:
    BrokenSpace(const TriMesh& mesh, int degree, int components);

    const TriMesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int components() const { return components_; }
    int nodes_per_element() const { return nodes_; }
    int dofs_per_element() const { return nodes_ * components_; }
    long total_dofs() const {
        return static_cast<long>(mesh_->num_triangles()) * dofs_per_element();
    }
    long dof(int elem, int node, int comp) const {
        return static_cast<long>(elem) * dofs_per_element() + node * components_ + comp;
    }

    /// Reference coordinates of the Lagrange nodes.
    const std::vector<Vec2>& ref_nodes() const { return nodes_ref_; }

    /// Scalar basis values at a reference point; out has nodes_per_element entries.
    void eval_basis(const Vec2& ref, double* out) const;
    /// Reference-coordinate gradients of the scalar basis.
    void eval_basis_grad(const Vec2& ref, Vec2* out) const;

    bool same_mesh(const BrokenSpace& other) const { return mesh_ == other.mesh_; }

private:
    const TriMesh* mesh_;
    int degree_;
    int components_;
    int nodes_;
    std::vector<Vec2> nodes_ref_;
    std::vector<std::array<int, 2>> mono_;  // monomial exponents (a,b), a+b <= k
    std::vector<double> coeff_;             // phi_i = sum_j coeff_[i*nodes_+j] * x^a_j y^b_j
};

/// Coefficient vector in a broken space.
struct FemField {
    const BrokenSpace* space = nullptr;
    std::vector<double> coeff;

    FemField() = default;
    explicit FemField(const BrokenSpace& s) : space(&s), coeff(s.total_dofs(), 0.0) {}
};

/// Pointwise value of a field on one element: out has space->components() entries.
void evaluate(const FemField& f, int elem, const Vec2& ref, double* out);
/// Physical-coordinate gradient: out[c] = (d/dx, d/dy) of component c.
void evaluate_gradient(const FemField& f, int elem, const Vec2& ref, Vec2* out);

/// Elementwise L2 projection of an analytic function. fn writes
/// space.components() values at a physical point (x, y).
FemField project_elementwise(const BrokenSpace& space,
                             const std::function<void(double, double, double*)>& fn);

/// Tabulated basis data at the points of a quadrature rule; used by assembly
/// and norm evaluation loops.
struct BasisTable {
    int nq = 0, nl = 0;
    std::vector<double> val;  // nq x nl
    std::vector<Vec2> dref;   // nq x nl reference gradients

    BasisTable() = default;
    BasisTable(const BrokenSpace& s, const QuadRule& rule);
    double value(int q, int i) const { return val[q * nl + i]; }
    const Vec2& ref_grad(int q, int i) const { return dref[q * nl + i]; }
};

/// CSV dump (x,y,u1,u2,p) at the velocity nodes of every element.
void dump_fields_csv(const FemField& velocity, const FemField& pressure, std::ostream& out);

} // namespace kvdg

#endif
