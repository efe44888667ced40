#include "kvdg/quadrature.hpp"

#include "kvdg/errors.hpp"

namespace kvdg {
namespace {

// Points for a 3-fold symmetric orbit (a,a), (1-2a,a), (a,1-2a).
void orbit3(QuadRule& r, double a, double w) {
    r.points.push_back({a, a});
    r.points.push_back({1.0 - 2.0 * a, a});
    r.points.push_back({a, 1.0 - 2.0 * a});
    r.weights.insert(r.weights.end(), 3, w);
}

// Six permutations of the barycentric triple (b, c, 1-b-c).
void orbit6(QuadRule& r, double b, double c, double w) {
    const double d = 1.0 - b - c;
    r.points.push_back({b, c});
    r.points.push_back({c, b});
    r.points.push_back({d, b});
    r.points.push_back({b, d});
    r.points.push_back({c, d});
    r.points.push_back({d, c});
    r.weights.insert(r.weights.end(), 6, w);
}

// Tabulated weights below are normalized to sum to 1; the factor 1/2 maps
// them onto the reference triangle of area 1/2.
QuadRule make_triangle_rule(int degree) {
    QuadRule r;
    switch (degree) {
    case 1:
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(1.0);
        r.exactness_degree = 1;
        break;
    case 2:
        orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
        r.exactness_degree = 2;
        break;
    case 3:
    case 4:
        orbit3(r, 0.44594849091596489, 0.22338158967801147);
        orbit3(r, 0.09157621350977074, 0.10995174365532187);
        r.exactness_degree = 4;
        break;
    case 5:
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(0.225);
        orbit3(r, 0.47014206410511509, 0.13239415278850618);
        orbit3(r, 0.10128650732345633, 0.12593918054482716);
        r.exactness_degree = 5;
        break;
    case 6:
        orbit3(r, 0.24928674517091042, 0.11678627572637936);
        orbit3(r, 0.06308901449150223, 0.05084490637020681);
        orbit6(r, 0.31035245103378439, 0.05314504984481695, 0.08285107561837358);
        r.exactness_degree = 6;
        break;
    default:
        throw ConfigError("triangle_rule: unsupported degree " + std::to_string(degree) +
                          " (supported range 1..6)");
    }
    for (double& w : r.weights) w *= 0.5;
    return r;
}

QuadRule make_edge_rule(int degree) {
    QuadRule r;
    auto pt = [&r](double x, double w) {
        r.points.push_back({x, 0.0});
        r.weights.push_back(w);
    };
    switch (degree) {
    case 1:
        pt(0.5, 1.0);
        r.exactness_degree = 1;
        break;
    case 2:
    case 3: {
        const double d = 0.28867513459481287; // 1/(2*sqrt(3))
        pt(0.5 - d, 0.5);
        pt(0.5 + d, 0.5);
        r.exactness_degree = 3;
        break;
    }
    case 4:
    case 5: {
        const double d = 0.38729833462074170; // sqrt(3/5)/2
        pt(0.5 - d, 2.5 / 9.0);
        pt(0.5, 4.0 / 9.0);
        pt(0.5 + d, 2.5 / 9.0);
        r.exactness_degree = 5;
        break;
    }
    case 6: {
        const double x1 = 0.33998104358485626, w1 = 0.65214515486254614;
        const double x2 = 0.86113631159405258, w2 = 0.34785484513745386;
        pt(0.5 * (1.0 - x2), 0.5 * w2);
        pt(0.5 * (1.0 - x1), 0.5 * w1);
        pt(0.5 * (1.0 + x1), 0.5 * w1);
        pt(0.5 * (1.0 + x2), 0.5 * w2);
        r.exactness_degree = 7;
        break;
    }
    default:
        throw ConfigError("edge_rule: unsupported degree " + std::to_string(degree) +
                          " (supported range 1..6)");
    }
    return r;
}

} // namespace

const QuadRule& triangle_rule(int degree) {
    static const QuadRule rules[] = {
        make_triangle_rule(1), make_triangle_rule(2), make_triangle_rule(3),
        make_triangle_rule(4), make_triangle_rule(5), make_triangle_rule(6),
    };
    if (degree < 1 || degree > 6)
        throw ConfigError("triangle_rule: unsupported degree " + std::to_string(degree) +
                          " (supported range 1..6)");
    return rules[degree - 1];
}

const QuadRule& edge_rule(int degree) {
    static const QuadRule rules[] = {
        make_edge_rule(1), make_edge_rule(2), make_edge_rule(3),
        make_edge_rule(4), make_edge_rule(5), make_edge_rule(6),
    };
    if (degree < 1 || degree > 6)
        throw ConfigError("edge_rule: unsupported degree " + std::to_string(degree) +
                          " (supported range 1..6)");
    return rules[degree - 1];
}

} // namespace kvdg
