#ifndef KVDG_MESH_HPP
#define KVDG_MESH_HPP

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "kvdg/quadrature.hpp"

namespace kvdg {

using Vec2 = std::array<double, 2>;

/// Mesh edge with full trace bookkeeping.
///
/// For an interior edge the two adjacent triangles are tri[0] (called T_m,
/// always the smaller triangle index) and tri[1] (T_n); the stored unit
/// normal points from T_m into T_n. Boundary edges have tri[1] == -1 and an
/// outward normal. Jumps of a piecewise function across the edge are taken
/// as trace(T_m) - trace(T_n), averages as the mean; on boundary edges both
/// reduce to the single trace.
struct Edge {
    std::array<int, 2> v{-1, -1};     // endpoint vertex indices
    std::array<int, 2> tri{-1, -1};   // adjacent triangles (tri[1] = -1 on boundary)
    std::array<int, 2> local{-1, -1}; // local edge index within each adjacent triangle
    Vec2 normal{0.0, 0.0};            // unit normal, T_m -> T_n (outward on boundary)
    double length = 0.0;
    bool boundary = false;
};

/// Per-quadrature-point references for evaluating traces from both sides of
/// an edge, in the (T_m, T_n) order consistent with the edge normal.
struct EdgeTraceFrame {
    std::vector<Vec2> phys;    // physical quadrature points on the edge
    std::vector<Vec2> ref_m;   // reference coordinates in tri[0]
    std::vector<Vec2> ref_n;   // reference coordinates in tri[1]; empty on boundary
};

/// Triangulation of a polygonal domain with oriented edge topology.
/// Immutable after construction and safely shareable across threads.
class TriMesh {
public:
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles; // CCW vertex triples
    std::vector<Edge> edges;
    std::vector<std::array<int, 3>> tri_edges; // per triangle: edge ids of local edges
    std::vector<double> area;                  // per triangle
    std::vector<double> diameter;              // per triangle
    double h_max = 0.0;

    /// Uniform triangulation of [0,1]^2: n x n squares, each split along the
    /// lower-left to upper-right diagonal. 2n^2 triangles, h_max = sqrt(2)/n.
    static TriMesh structured(int n);

    /// Build topology from an arbitrary vertex/triangle list. Triangles with
    /// negative signed area are reoriented.
    static TriMesh from_triangles(std::vector<Vec2> vertices,
                                  std::vector<std::array<int, 3>> triangles);

    /// Plain-text import: first line "V T", then V lines "x y", then T lines
    /// "i j k" (0-based vertex indices).
    static TriMesh load(std::istream& in);
    static TriMesh load_file(const std::string& path);

    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_boundary_edges() const { return n_boundary_; }

    /// Affine map from the reference triangle to triangle t.
    Vec2 point(int t, const Vec2& ref) const;
    /// Inverse affine map (exact for straight triangles).
    Vec2 to_reference(int t, const Vec2& phys) const;
    /// Physical gradient = inv_jac_t(t) * reference gradient.
    const std::array<double, 4>& inv_jac_t(int t) const { return inv_jac_t_[t]; }

    /// Trace-evaluation frame for one edge under an edge quadrature rule.
    EdgeTraceFrame trace_frame(int edge, const QuadRule& rule) const;

    /// Triangles whose closure contains p (1 in the interior of a triangle,
    /// 2+ on edges/vertices). Linear scan; intended for post-processing.
    std::vector<int> find_containing(const Vec2& p, double tol = 1e-12) const;

private:
    void build_geometry();
    void build_edges();

    std::vector<std::array<double, 4>> jac_;       // column-major [x_r, y_r, x_s, y_s]
    std::vector<std::array<double, 4>> inv_jac_t_; // transpose inverse, same layout
    int n_boundary_ = 0;
};

} // namespace kvdg

#endif
