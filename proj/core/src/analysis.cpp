#include "kvdg/analysis.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "kvdg/errors.hpp"

namespace kvdg {

namespace {

constexpr double kTwoPi = 6.2831853071795864769;

// Case 1: stream function psi = g(x) G(y) cos t with
//   g(z) = G(z) = z^2 (z-1)^2,  u = (psi_y, -psi_x),  p = 2(x - y) cos t.
double poly(double z) { return z * z * (z - 1.0) * (z - 1.0); }
double dpoly(double z) { return 2.0 * z * (z - 1.0) * (2.0 * z - 1.0); }
double d2poly(double z) { return 12.0 * z * z - 12.0 * z + 2.0; }
double d3poly(double z) { return 24.0 * z - 12.0; }

void ex1_shape(double x, double y, double out[2]) {
    out[0] = poly(x) * dpoly(y);
    out[1] = -dpoly(x) * poly(y);
}
void ex1_u(double x, double y, double t, double out[2]) {
    ex1_shape(x, y, out);
    out[0] *= std::cos(t);
    out[1] *= std::cos(t);
}
void ex1_ut(double x, double y, double t, double out[2]) {
    ex1_shape(x, y, out);
    out[0] *= -std::sin(t);
    out[1] *= -std::sin(t);
}
void ex1_grad_u(double x, double y, double t, double out[4]) {
    const double c = std::cos(t);
    out[0] = dpoly(x) * dpoly(y) * c;
    out[1] = poly(x) * d2poly(y) * c;
    out[2] = -d2poly(x) * poly(y) * c;
    out[3] = -dpoly(x) * dpoly(y) * c;
}
void ex1_lap_shape(double x, double y, double out[2]) {
    out[0] = d2poly(x) * dpoly(y) + poly(x) * d3poly(y);
    out[1] = -(d3poly(x) * poly(y) + dpoly(x) * d2poly(y));
}
void ex1_lap_u(double x, double y, double t, double out[2]) {
    ex1_lap_shape(x, y, out);
    out[0] *= std::cos(t);
    out[1] *= std::cos(t);
}
void ex1_lap_ut(double x, double y, double t, double out[2]) {
    ex1_lap_shape(x, y, out);
    out[0] *= -std::sin(t);
    out[1] *= -std::sin(t);
}
double ex1_p(double x, double y, double t) { return 2.0 * (x - y) * std::cos(t); }
void ex1_grad_p(double, double, double t, double out[2]) {
    out[0] = 2.0 * std::cos(t);
    out[1] = -2.0 * std::cos(t);
}

// Case 2: u = e^t (sin(2 pi y)(1 - cos(2 pi x)), sin(2 pi x)(cos(2 pi y) - 1)),
//         p = 2 pi e^t (cos(2 pi y) - cos(2 pi x)).
void ex2_u(double x, double y, double t, double out[2]) {
    const double e = std::exp(t);
    out[0] = e * std::sin(kTwoPi * y) * (1.0 - std::cos(kTwoPi * x));
    out[1] = e * std::sin(kTwoPi * x) * (std::cos(kTwoPi * y) - 1.0);
}
void ex2_grad_u(double x, double y, double t, double out[4]) {
    const double e = std::exp(t);
    const double sx = std::sin(kTwoPi * x), cx = std::cos(kTwoPi * x);
    const double sy = std::sin(kTwoPi * y), cy = std::cos(kTwoPi * y);
    out[0] = e * kTwoPi * sy * sx;
    out[1] = e * kTwoPi * cy * (1.0 - cx);
    out[2] = e * kTwoPi * cx * (cy - 1.0);
    out[3] = -e * kTwoPi * sx * sy;
}
void ex2_lap_u(double x, double y, double t, double out[2]) {
    const double e = std::exp(t);
    const double w2 = kTwoPi * kTwoPi;
    out[0] = e * w2 * std::sin(kTwoPi * y) * (2.0 * std::cos(kTwoPi * x) - 1.0);
    out[1] = -e * w2 * std::sin(kTwoPi * x) * (2.0 * std::cos(kTwoPi * y) - 1.0);
}
double ex2_p(double x, double y, double t) {
    return kTwoPi * std::exp(t) * (std::cos(kTwoPi * y) - std::cos(kTwoPi * x));
}
void ex2_grad_p(double x, double y, double t, double out[2]) {
    const double e = std::exp(t);
    out[0] = kTwoPi * kTwoPi * e * std::sin(kTwoPi * x);
    out[1] = -kTwoPi * kTwoPi * e * std::sin(kTwoPi * y);
}

int error_quad_degree(const BrokenSpace& s) { return std::min(2 * s.degree() + 4, 6); }

} // namespace

void ManufacturedCase::forcing(double x, double y, double t, double nu, double kappa,
                               double out[2]) const {
    double uv[2], ut[2], gu[4], lu[2], lut[2], gp[2];
    u(x, y, t, uv);
    u_t(x, y, t, ut);
    grad_u(x, y, t, gu);
    lap_u(x, y, t, lu);
    lap_u_t(x, y, t, lut);
    grad_p(x, y, t, gp);
    out[0] = ut[0] + uv[0] * gu[0] + uv[1] * gu[1] - kappa * lut[0] - nu * lu[0] + gp[0];
    out[1] = ut[1] + uv[0] * gu[2] + uv[1] * gu[3] - kappa * lut[1] - nu * lu[1] + gp[1];
}

const ManufacturedCase& ManufacturedCase::example(int id) {
    static const ManufacturedCase cases[] = {
        {1, ex1_u, ex1_ut, ex1_grad_u, ex1_lap_u, ex1_lap_ut, ex1_p, ex1_grad_p},
        // d/dt multiplies by 1 for e^t: u_t = u, lap(u_t) = lap(u)
        {2, ex2_u, ex2_u, ex2_grad_u, ex2_lap_u, ex2_lap_u, ex2_p, ex2_grad_p},
    };
    if (id < 1 || id > 2)
        throw ConfigError("unknown manufactured case " + std::to_string(id) +
                          " (available: 1, 2)");
    return cases[id - 1];
}

Problem ManufacturedCase::problem(double nu, double kappa) const {
    Problem pr;
    const ManufacturedCase* mc = this;
    pr.u0 = [mc](double x, double y, double* out) { mc->u(x, y, 0.0, out); };
    pr.forcing = [mc, nu, kappa](double x, double y, double t, double* out) {
        mc->forcing(x, y, t, nu, kappa, out);
    };
    return pr; // boundary stays null: both cases vanish on the boundary
}

double error_l2(const FemField& U, const ManufacturedCase& mc, double t) {
    const BrokenSpace& s = *U.space;
    const TriMesh& mesh = s.mesh();
    const QuadRule& rule = triangle_rule(error_quad_degree(s));
    const BasisTable tab(s, rule);
    const int nl = s.nodes_per_element();
    double total = 0.0;
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const double jac = 2.0 * mesh.area[e];
        for (int q = 0; q < rule.size(); ++q) {
            double uh[2] = {0.0, 0.0};
            for (int i = 0; i < nl; ++i) {
                const double p = tab.value(q, i);
                uh[0] += p * U.coeff[s.dof(e, i, 0)];
                uh[1] += p * U.coeff[s.dof(e, i, 1)];
            }
            const Vec2 x = mesh.point(e, rule.points[q]);
            double ue[2];
            mc.u(x[0], x[1], t, ue);
            const double dx = uh[0] - ue[0], dy = uh[1] - ue[1];
            total += rule.weights[q] * jac * (dx * dx + dy * dy);
        }
    }
    return std::sqrt(total);
}

double error_energy(const FemField& U, const ManufacturedCase& mc, double t, double sigma_e) {
    const BrokenSpace& s = *U.space;
    const TriMesh& mesh = s.mesh();
    const QuadRule& vrule = triangle_rule(error_quad_degree(s));
    const QuadRule& erule = edge_rule(error_quad_degree(s));
    const BasisTable tab(s, vrule);
    const int nl = s.nodes_per_element();
    std::vector<Vec2> gref(nl);

    double total = 0.0;
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const double jac = 2.0 * mesh.area[e];
        const auto& jt = mesh.inv_jac_t(e);
        for (int q = 0; q < vrule.size(); ++q) {
            double gh[4] = {0.0, 0.0, 0.0, 0.0};
            for (int i = 0; i < nl; ++i) {
                const Vec2& d = tab.ref_grad(q, i);
                const double gx = jt[0] * d[0] + jt[2] * d[1];
                const double gy = jt[1] * d[0] + jt[3] * d[1];
                const double c0 = U.coeff[s.dof(e, i, 0)];
                const double c1 = U.coeff[s.dof(e, i, 1)];
                gh[0] += c0 * gx;
                gh[1] += c0 * gy;
                gh[2] += c1 * gx;
                gh[3] += c1 * gy;
            }
            const Vec2 x = mesh.point(e, vrule.points[q]);
            double ge[4];
            mc.grad_u(x[0], x[1], t, ge);
            double frob = 0.0;
            for (int k = 0; k < 4; ++k) frob += (gh[k] - ge[k]) * (gh[k] - ge[k]);
            total += vrule.weights[q] * jac * frob;
        }
    }

    // Jump seminorm of the mismatch: interior jumps of u vanish, so only the
    // jumps of U appear there; on the boundary the jump is the trace of U - u.
    for (int ei = 0; ei < mesh.num_edges(); ++ei) {
        const Edge& e = mesh.edges[ei];
        const EdgeTraceFrame frame = mesh.trace_frame(ei, erule);
        double acc = 0.0;
        for (int q = 0; q < erule.size(); ++q) {
            double um[2], diff[2];
            evaluate(U, e.tri[0], frame.ref_m[q], um);
            if (e.boundary) {
                double ue[2];
                mc.u(frame.phys[q][0], frame.phys[q][1], t, ue);
                diff[0] = um[0] - ue[0];
                diff[1] = um[1] - ue[1];
            } else {
                double un[2];
                evaluate(U, e.tri[1], frame.ref_n[q], un);
                diff[0] = um[0] - un[0];
                diff[1] = um[1] - un[1];
            }
            acc += erule.weights[q] * e.length * (diff[0] * diff[0] + diff[1] * diff[1]);
        }
        total += sigma_e / e.length * acc;
    }
    return std::sqrt(total);
}

double error_pressure(const FemField& P, const ManufacturedCase& mc, double t) {
    const BrokenSpace& s = *P.space;
    const TriMesh& mesh = s.mesh();
    const QuadRule& rule = triangle_rule(6);
    const BasisTable tab(s, rule);
    const int nl = s.nodes_per_element();

    // Mean of both fields first (L^2/R comparison).
    double mean_h = 0.0, mean_e = 0.0, measure = 0.0;
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const double jac = 2.0 * mesh.area[e];
        for (int q = 0; q < rule.size(); ++q) {
            const double w = rule.weights[q] * jac;
            double ph = 0.0;
            for (int i = 0; i < nl; ++i) ph += tab.value(q, i) * P.coeff[s.dof(e, i, 0)];
            const Vec2 x = mesh.point(e, rule.points[q]);
            mean_h += w * ph;
            mean_e += w * mc.p(x[0], x[1], t);
            measure += w;
        }
    }
    mean_h /= measure;
    mean_e /= measure;

    double total = 0.0;
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const double jac = 2.0 * mesh.area[e];
        for (int q = 0; q < rule.size(); ++q) {
            double ph = 0.0;
            for (int i = 0; i < nl; ++i) ph += tab.value(q, i) * P.coeff[s.dof(e, i, 0)];
            const Vec2 x = mesh.point(e, rule.points[q]);
            const double d = (ph - mean_h) - (mc.p(x[0], x[1], t) - mean_e);
            total += rule.weights[q] * jac * d * d;
        }
    }
    return std::sqrt(total);
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& err) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> orders;
    for (size_t i = 0; i + 1 < h.size(); ++i) {
        if (err[i] > 0.0 && err[i + 1] > 0.0 && h[i] > h[i + 1])
            orders.push_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
        else
            orders.push_back(nan);
    }
    return orders;
}

void ConvergenceReport::compute_orders() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    order_l2.assign(levels.size() > 0 ? levels.size() - 1 : 0, nan);
    order_energy = order_l2;
    order_p = order_l2;
    for (size_t i = 0; i + 1 < levels.size(); ++i) {
        const ConvergenceLevel& a = levels[i];
        const ConvergenceLevel& b = levels[i + 1];
        if (!a.solved || !b.solved) continue;
        const double lh = std::log(a.h / b.h);
        if (a.err_l2 > 0.0 && b.err_l2 > 0.0) order_l2[i] = std::log(a.err_l2 / b.err_l2) / lh;
        if (a.err_energy > 0.0 && b.err_energy > 0.0)
            order_energy[i] = std::log(a.err_energy / b.err_energy) / lh;
        if (a.err_p > 0.0 && b.err_p > 0.0) order_p[i] = std::log(a.err_p / b.err_p) / lh;
    }
}

bool ConvergenceReport::all_solved() const {
    for (const auto& l : levels)
        if (!l.solved) return false;
    return true;
}

void ConvergenceReport::write_csv(std::ostream& out) const {
    out << "h,dt,err_l2,rate_l2,err_energy,rate_energy,err_p,rate_p\n";
    char buf[320];
    for (size_t i = 0; i < levels.size(); ++i) {
        const ConvergenceLevel& l = levels[i];
        if (!l.solved) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,,,,,,\n", l.h, l.dt);
            out << buf;
            continue;
        }
        std::string rl2, ren, rp;
        if (i > 0) {
            char tmp[40];
            if (std::isfinite(order_l2[i - 1])) {
                std::snprintf(tmp, sizeof tmp, "%.17g", order_l2[i - 1]);
                rl2 = tmp;
            }
            if (std::isfinite(order_energy[i - 1])) {
                std::snprintf(tmp, sizeof tmp, "%.17g", order_energy[i - 1]);
                ren = tmp;
            }
            if (std::isfinite(order_p[i - 1])) {
                std::snprintf(tmp, sizeof tmp, "%.17g", order_p[i - 1]);
                rp = tmp;
            }
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s,%.17g,%s,%.17g,%s\n", l.h, l.dt,
                      l.err_l2, rl2.c_str(), l.err_energy, ren.c_str(), l.err_p, rp.c_str());
        out << buf;
    }
}

void ConvergenceReport::write_markdown(std::ostream& out) const {
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "Errors and convergence rates (example %d, nu=%g, kappa=%g, sigma_e=%g, "
                  "P%d-P%d, dt=h^2, T=%g)\n\n",
                  example_id, base.nu, base.kappa, base.sigma_e, base.velocity_degree,
                  base.pressure_degree, base.t_final);
    out << buf;
    out << "| h | energy error | rate | L2 error | rate | pressure error | rate |\n";
    out << "|---|---|---|---|---|---|---|\n";
    auto fmt_rate = [](double r, char* tmp, size_t n) {
        if (std::isfinite(r))
            std::snprintf(tmp, n, "%.4f", r);
        else
            std::snprintf(tmp, n, " ");
    };
    for (size_t i = 0; i < levels.size(); ++i) {
        const ConvergenceLevel& l = levels[i];
        if (!l.solved) {
            std::snprintf(buf, sizeof buf, "| 1/%d | failed: %s | | | | | |\n", l.n,
                          l.failure.c_str());
            out << buf;
            continue;
        }
        char r1[24], r2[24], r3[24];
        fmt_rate(i > 0 ? order_energy[i - 1] : std::numeric_limits<double>::quiet_NaN(), r1, 24);
        fmt_rate(i > 0 ? order_l2[i - 1] : std::numeric_limits<double>::quiet_NaN(), r2, 24);
        fmt_rate(i > 0 ? order_p[i - 1] : std::numeric_limits<double>::quiet_NaN(), r3, 24);
        std::snprintf(buf, sizeof buf, "| 1/%d | %.4e | %s | %.4e | %s | %.4e | %s |\n", l.n,
                      l.err_energy, r1, l.err_l2, r2, l.err_p, r3);
        out << buf;
    }
}

ConvergenceReport convergence_study(int example_id, const SolverConfig& base, int num_levels,
                                    int first_n) {
    if (num_levels < 1) throw ConfigError("convergence_study: need at least one level");
    const ManufacturedCase& mc = ManufacturedCase::example(example_id);

    ConvergenceReport report;
    report.example_id = example_id;
    report.base = base;

    for (int lvl = 0; lvl < num_levels; ++lvl) {
        const int n = first_n << lvl;
        ConvergenceLevel level;
        level.n = n;
        level.h = 1.0 / n; // lattice spacing, the table convention (h_max is sqrt(2)/n)
        SolverConfig cfg = base;
        cfg.n = n;
        cfg.dt = 1.0 / (static_cast<double>(n) * n); // dt = (1/n)^2
        level.dt = cfg.dt;
        level.steps = cfg.num_steps();
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const TriMesh mesh = TriMesh::structured(n);
            KelvinVoigtSolver solver(mesh, cfg);
            const Problem pr = mc.problem(cfg.nu, cfg.kappa);
            const RunResult rr = solver.run(pr);
            level.err_l2 = error_l2(rr.final_state.u, mc, cfg.t_final);
            level.err_energy = error_energy(rr.final_state.u, mc, cfg.t_final, cfg.sigma_e);
            level.err_p = error_pressure(rr.final_state.p, mc, cfg.t_final);
            level.max_div_residual = rr.max_div_residual;
            level.solved = true;
        } catch (const std::exception& ex) {
            level.solved = false;
            level.failure = ex.what();
        }
        level.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.levels.push_back(std::move(level));
    }
    report.compute_orders();
    return report;
}

} // namespace kvdg
