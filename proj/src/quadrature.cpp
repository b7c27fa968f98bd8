#include "approx/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "approx/rng.hpp"

namespace approx {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

Quad1D quadrature_rule_1d(Basis measure, int npoints) {
    if (npoints < 1) throw std::invalid_argument("quadrature_rule_1d: npoints >= 1");
    Quad1D q;
    q.nodes.resize(npoints);
    q.weights.resize(npoints);
    if (npoints == 1) {
        q.nodes[0] = 0.0;
        q.weights[0] = 1.0;
        return q;
    }
    const int n = npoints - 1;
    for (int j = 0; j <= n; ++j) q.nodes[j] = std::cos(j * kPi / n);

    if (measure == Basis::chebyshev) {
        // trapezoid in theta integrates the arcsine measure exactly on cosines
        for (int j = 0; j <= n; ++j)
            q.weights[j] = (j == 0 || j == n) ? 0.5 / n : 1.0 / n;
    } else {
        // classic Clenshaw-Curtis, normalized to the uniform probability measure
        for (int j = 0; j <= n; ++j) {
            double s = 1.0;
            for (int k = 1; k <= n / 2; ++k) {
                const double b = (2 * k == n) ? 1.0 : 2.0;
                s -= b * std::cos(2.0 * k * j * kPi / n) / (4.0 * k * k - 1.0);
            }
            const double c = (j == 0 || j == n) ? 1.0 : 2.0;
            q.weights[j] = 0.5 * c * s / n; // halved: d(rho) = dy / 2
        }
    }
    return q;
}

QuadratureSpec QuadratureSpec::tensor_cc(int level) {
    QuadratureSpec s;
    s.kind = Kind::tensor_clenshaw_curtis;
    s.cc_level = level;
    return s;
}

QuadratureSpec QuadratureSpec::monte_carlo(long points, std::uint64_t seed) {
    QuadratureSpec s;
    s.kind = Kind::monte_carlo;
    s.mc_points = points;
    s.mc_seed = seed;
    return s;
}

QuadratureSpec QuadratureSpec::parse(const std::string& text) {
    if (text.rfind("cc:", 0) == 0) return tensor_cc(std::stoi(text.substr(3)));
    if (text.rfind("mc:", 0) == 0) {
        const auto rest = text.substr(3);
        const auto colon = rest.find(':');
        const long pts = std::stol(rest.substr(0, colon));
        const std::uint64_t seed = colon == std::string::npos ? 1 : std::stoull(rest.substr(colon + 1));
        return monte_carlo(pts, seed);
    }
    throw std::invalid_argument("bad quadrature spec: " + text + " (want cc:<level> or mc:<points>[:<seed>])");
}

std::string QuadratureSpec::to_text() const {
    if (kind == Kind::tensor_clenshaw_curtis) return "cc:" + std::to_string(cc_level);
    return "mc:" + std::to_string(mc_points) + ":" + std::to_string(mc_seed);
}

long node_count(const QuadratureSpec& spec, int d) {
    if (spec.kind == QuadratureSpec::Kind::monte_carlo) return spec.mc_points;
    const long per_dim = (1L << spec.cc_level) + 1;
    double total = std::pow(static_cast<double>(per_dim), d);
    if (total > 2147483647.0)
        throw std::invalid_argument("tensor quadrature too large in dimension " + std::to_string(d));
    long t = 1;
    for (int k = 0; k < d; ++k) t *= per_dim;
    return t;
}

void for_each_node(const QuadratureSpec& spec, Basis measure, int d,
                   const std::function<void(const double*, double)>& visit) {
    if (d < 1) throw std::invalid_argument("for_each_node: d >= 1");
    if (spec.kind == QuadratureSpec::Kind::monte_carlo) {
        Rng rng(spec.mc_seed);
        std::vector<double> y(d);
        const double w = 1.0 / static_cast<double>(spec.mc_points);
        for (long i = 0; i < spec.mc_points; ++i) {
            for (int k = 0; k < d; ++k) {
                const double u = rng.uniform01();
                y[k] = measure == Basis::chebyshev ? -std::cos(kPi * u) : 2.0 * u - 1.0;
            }
            visit(y.data(), w);
        }
        return;
    }

    const int per_dim = (1 << spec.cc_level) + 1;
    node_count(spec, d); // size guard
    const Quad1D rule = quadrature_rule_1d(measure, per_dim);
    std::vector<int> idx(d, 0);
    std::vector<double> y(d);
    for (int k = 0; k < d; ++k) y[k] = rule.nodes[0];
    for (;;) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) w *= rule.weights[idx[k]];
        visit(y.data(), w);
        int k = 0;
        while (k < d) {
            if (++idx[k] < per_dim) {
                y[k] = rule.nodes[idx[k]];
                break;
            }
            idx[k] = 0;
            y[k] = rule.nodes[0];
            ++k;
        }
        if (k == d) break;
    }
}

Eigen::MatrixXd sample_points(Basis basis, int m, int d, std::uint64_t seed) {
    if (m < 1 || d < 1) throw std::invalid_argument("sample_points: m, d >= 1");
    Rng rng(seed);
    Eigen::MatrixXd pts(m, d);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < d; ++k) {
            const double u = rng.uniform01();
            pts(i, k) = basis == Basis::chebyshev ? -std::cos(kPi * u) : 2.0 * u - 1.0;
        }
    return pts;
}

} // namespace approx
