#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "approx/orthopoly.hpp"

namespace approx {

/// Nodes and probability-normalized weights of a 1-D rule (weights sum to 1).
struct Quad1D {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

/// Clenshaw-Curtis points matched to the basis measure: classic CC weights
/// for the uniform measure, the trapezoidal cosine rule for the arcsine
/// measure. npoints >= 1; exact for polynomial degree up to npoints-1.
Quad1D quadrature_rule_1d(Basis measure, int npoints);

struct QuadratureSpec {
    enum class Kind { tensor_clenshaw_curtis, monte_carlo };
    Kind kind = Kind::tensor_clenshaw_curtis;
    int cc_level = 6;              // 2^level + 1 points per dimension
    long mc_points = 100000;       // total Monte Carlo nodes
    std::uint64_t mc_seed = 1;

    static QuadratureSpec tensor_cc(int level);
    static QuadratureSpec monte_carlo(long points, std::uint64_t seed);
    static QuadratureSpec parse(const std::string& text); // "cc:6" or "mc:100000:7"
    std::string to_text() const;
};

/// Visits every node of the rule over [-1,1]^d with its weight. Tensor rules
/// require cc_npoints^d <= 2^31.
void for_each_node(const QuadratureSpec& spec, Basis measure, int d,
                   const std::function<void(const double* y, double w)>& visit);

long node_count(const QuadratureSpec& spec, int d);

/// i.i.d. points from the basis measure: uniform for Legendre, arcsine
/// (cosine transform of a uniform) for Chebyshev. Row i is point i.
Eigen::MatrixXd sample_points(Basis basis, int m, int d, std::uint64_t seed);

} // namespace approx
