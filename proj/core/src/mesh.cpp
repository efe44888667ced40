#include "kvdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "kvdg/errors.hpp"

namespace kvdg {

namespace {
double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}
double dist(const Vec2& a, const Vec2& b) {
    return std::hypot(b[0] - a[0], b[1] - a[1]);
}
} // namespace

TriMesh TriMesh::structured(int n) {
    if (n < 1) throw ConfigError("structured mesh: n must be >= 1");
    std::vector<Vec2> verts;
    verts.reserve(static_cast<size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            verts.push_back({double(i) / n, double(j) / n});

    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<size_t>(2) * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j);
            const int c = vid(i + 1, j + 1), d = vid(i, j + 1);
            tris.push_back({a, b, c}); // below the a-c diagonal
            tris.push_back({a, c, d}); // above
        }
    }
    return from_triangles(std::move(verts), std::move(tris));
}

TriMesh TriMesh::from_triangles(std::vector<Vec2> vertices,
                                std::vector<std::array<int, 3>> triangles) {
    TriMesh m;
    m.vertices = std::move(vertices);
    m.triangles = std::move(triangles);
    const int nv = static_cast<int>(m.vertices.size());
    for (auto& t : m.triangles) {
        for (int v : t)
            if (v < 0 || v >= nv)
                throw ConfigError("mesh: triangle vertex index out of range");
        if (signed_area(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]) < 0.0)
            std::swap(t[1], t[2]);
    }
    m.build_geometry();
    m.build_edges();
    return m;
}

void TriMesh::build_geometry() {
    const int nt = num_triangles();
    area.resize(nt);
    diameter.resize(nt);
    jac_.resize(nt);
    inv_jac_t_.resize(nt);
    h_max = 0.0;
    for (int t = 0; t < nt; ++t) {
        const Vec2& a = vertices[triangles[t][0]];
        const Vec2& b = vertices[triangles[t][1]];
        const Vec2& c = vertices[triangles[t][2]];
        area[t] = signed_area(a, b, c);
        if (area[t] <= 0.0) throw ConfigError("mesh: degenerate triangle " + std::to_string(t));
        diameter[t] = std::max({dist(a, b), dist(b, c), dist(c, a)});
        h_max = std::max(h_max, diameter[t]);
        const double xr = b[0] - a[0], yr = b[1] - a[1];
        const double xs = c[0] - a[0], ys = c[1] - a[1];
        jac_[t] = {xr, yr, xs, ys};
        const double det = xr * ys - xs * yr; // = 2*area > 0
        // inverse of [[xr, xs],[yr, ys]] is 1/det [[ys, -xs],[-yr, xr]]; store its transpose
        inv_jac_t_[t] = {ys / det, -xs / det, -yr / det, xr / det};
    }
}

void TriMesh::build_edges() {
    edges.clear();
    tri_edges.assign(triangles.size(), {-1, -1, -1});
    std::map<std::pair<int, int>, int> index;
    for (int t = 0; t < num_triangles(); ++t) {
        for (int l = 0; l < 3; ++l) {
            const int a = triangles[t][l], b = triangles[t][(l + 1) % 3];
            const auto key = std::minmax(a, b);
            auto it = index.find(key);
            if (it == index.end()) {
                Edge e;
                e.v = {a, b};
                e.tri[0] = t;
                e.local[0] = l;
                e.length = dist(vertices[a], vertices[b]);
                index.emplace(key, static_cast<int>(edges.size()));
                tri_edges[t][l] = static_cast<int>(edges.size());
                edges.push_back(e);
            } else {
                Edge& e = edges[it->second];
                if (e.tri[1] != -1)
                    throw ConfigError("mesh: edge shared by more than two triangles");
                e.tri[1] = t;
                e.local[1] = l;
                tri_edges[t][l] = it->second;
            }
        }
    }
    n_boundary_ = 0;
    for (Edge& e : edges) {
        if (e.tri[1] == -1) {
            e.boundary = true;
            ++n_boundary_;
        } else if (e.tri[0] > e.tri[1]) {
            std::swap(e.tri[0], e.tri[1]);
            std::swap(e.local[0], e.local[1]);
        }
        // Unit normal outward from tri[0]; for interior edges this points
        // from T_m into T_n.
        const Vec2& a = vertices[e.v[0]];
        const Vec2& b = vertices[e.v[1]];
        Vec2 n{(b[1] - a[1]) / e.length, -(b[0] - a[0]) / e.length};
        const auto& tm = triangles[e.tri[0]];
        int opp = -1;
        for (int v : tm)
            if (v != e.v[0] && v != e.v[1]) opp = v;
        const Vec2& c = vertices[opp];
        if (n[0] * (c[0] - a[0]) + n[1] * (c[1] - a[1]) > 0.0) {
            n[0] = -n[0];
            n[1] = -n[1];
        }
        e.normal = n;
    }
}

TriMesh TriMesh::load(std::istream& in) {
    int nv = 0, nt = 0;
    if (!(in >> nv >> nt) || nv < 3 || nt < 1)
        throw ConfigError("mesh file: expected header 'V T' with V >= 3, T >= 1");
    std::vector<Vec2> verts(nv);
    for (auto& p : verts)
        if (!(in >> p[0] >> p[1])) throw ConfigError("mesh file: truncated vertex list");
    std::vector<std::array<int, 3>> tris(nt);
    for (auto& t : tris)
        if (!(in >> t[0] >> t[1] >> t[2])) throw ConfigError("mesh file: truncated triangle list");
    return from_triangles(std::move(verts), std::move(tris));
}

TriMesh TriMesh::load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("mesh file: cannot open " + path);
    return load(f);
}

Vec2 TriMesh::point(int t, const Vec2& ref) const {
    const Vec2& a = vertices[triangles[t][0]];
    const auto& J = jac_[t];
    return {a[0] + J[0] * ref[0] + J[2] * ref[1],
            a[1] + J[1] * ref[0] + J[3] * ref[1]};
}

Vec2 TriMesh::to_reference(int t, const Vec2& phys) const {
    const Vec2& a = vertices[triangles[t][0]];
    const double dx = phys[0] - a[0], dy = phys[1] - a[1];
    // inv_jac_t_ stores J^{-T}; applying J^{-1} transposes the indexing.
    const auto& Jt = inv_jac_t_[t];
    return {Jt[0] * dx + Jt[1] * dy, Jt[2] * dx + Jt[3] * dy};
}

EdgeTraceFrame TriMesh::trace_frame(int edge, const QuadRule& rule) const {
    const Edge& e = edges[edge];
    const Vec2& a = vertices[e.v[0]];
    const Vec2& b = vertices[e.v[1]];
    EdgeTraceFrame f;
    const int nq = rule.size();
    f.phys.resize(nq);
    f.ref_m.resize(nq);
    if (!e.boundary) f.ref_n.resize(nq);
    for (int q = 0; q < nq; ++q) {
        const double s = rule.points[q][0];
        const Vec2 x{a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
        f.phys[q] = x;
        f.ref_m[q] = to_reference(e.tri[0], x);
        if (!e.boundary) f.ref_n[q] = to_reference(e.tri[1], x);
    }
    return f;
}

std::vector<int> TriMesh::find_containing(const Vec2& p, double tol) const {
    std::vector<int> hits;
    for (int t = 0; t < num_triangles(); ++t) {
        const Vec2 r = to_reference(t, p);
        if (r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol) hits.push_back(t);
    }
    return hits;
}

} // namespace kvdg
