#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "approx/quadrature.hpp"
#include "approx/srlasso.hpp"

namespace approx {

enum class RateMode { algebraic, exponential };

std::string to_string(RateMode m);
RateMode rate_mode_from_string(const std::string& s);

/// The polylogarithmic sample factor L(m, d, eps); natural logarithms,
/// d = kInfiniteDim selects the dimension-free branch. Requires m >= 3.
double log_factor_L(int m, int d, double eps_fail);

/// Order of the index set from the sample budget: ceil(m/L) in the algebraic
/// case; ceil(sqrt(m/L)) (Legendre) or ceil(m / (2^d L)) (Chebyshev) in the
/// exponential case. Floors at 1.
int choose_order(RateMode mode, int m, int d, double eps_fail, Basis basis);

struct ProblemSpec {
    int dim = 1;                 // d, or kInfiniteDim with truncation order n
    Basis basis = Basis::legendre;
    int num_samples = 0;         // m
    double failure_prob = 1e-3;  // eps in (0,1)
    RateMode rate_mode = RateMode::algebraic;
    SolverMode solver_mode = SolverMode::practical;
    std::uint64_t seed = 1;
};

/// Knobs that override what the spec would derive.
struct PipelineOverrides {
    std::optional<int> order;          // index-set order n
    std::optional<double> zeta_prime;  // default 1e-8
    std::optional<int> restarts;
    std::optional<double> stop_factor;
    std::optional<double> cstar;
};

/// The computed polynomial surrogate: index set, basis and an N x K
/// coefficient block over the discretization space.
struct PolynomialApproximant {
    MultiIndexSet index_set;
    Basis basis;
    Block coefficients;
    int K;
    std::string gram_provenance;

    void save(std::ostream& out) const;
    static PolynomialApproximant load(std::istream& in);
};

/// Value at a point: sum_j P_{nu_j}(y) (row j of the coefficients).
Eigen::VectorXcd evaluate(const PolynomialApproximant& fhat, std::span<const double> y);

/// Evaluate at many points (rows); returns an M x K block.
Block evaluate_many(const PolynomialApproximant& fhat, const Eigen::MatrixXd& points);

struct ApproximateResult {
    PolynomialApproximant approximant;
    SolveReport report;
    SolverConfig config;
    int order = 0; // the order n actually used
};

/// End-to-end fit from samples: picks the index set, builds the measurement
/// matrix and weights, fills the solver configuration for the requested mode
/// and runs the restarted iteration with early stopping.
ApproximateResult approximate(const Eigen::MatrixXd& points, const Eigen::MatrixXd& data,
                              const ProblemSpec& spec, const GramOperator& G,
                              const PipelineOverrides& overrides = {});
ApproximateResult approximate(const Eigen::MatrixXd& points, const Block& data,
                              const ProblemSpec& spec, const GramOperator& G,
                              const PipelineOverrides& overrides = {});

/// Reference sampler: writes the K coordinates of f(y) into out.
using ReferenceSampler = std::function<void(const double* y, Eigen::VectorXcd& out)>;

struct ErrorEstimate {
    double value = 0.0;
    double rel_std = 0.0; // Monte Carlo only: relative std of the squared-error mean
};

/// Relative L2 error |f - fhat| / |f| in the discrete quadrature norm, with
/// V-norms taken through G. Monte Carlo rules also report the estimator
/// spread. |f| = 0 is an error.
ErrorEstimate relative_error(const PolynomialApproximant& fhat, const ReferenceSampler& f,
                             const GramOperator& G, const QuadratureSpec& quad);

/// Scalar convenience overload (K = 1).
ErrorEstimate relative_error(const PolynomialApproximant& fhat,
                             const std::function<double(const double*)>& f,
                             const QuadratureSpec& quad);

/// L2 reference data for cheap per-iteration error tracking: the coefficients
/// of f on the index set, the norm of f and the squared tail outside the set,
/// all in the quadrature norm. The error of a candidate block C then is
/// sqrt(|C - coeffs|_{F,G}^2 + tail_sq) / f_norm.
struct L2Reference {
    Block coefficients;
    double f_norm = 0.0;
    double tail_sq = 0.0;

    double relative_error_of(const Block& C, const GramOperator& G) const;
};

L2Reference build_l2_reference(const MultiIndexSet& set, Basis basis, const ReferenceSampler& f,
                               int K, const GramOperator& G, const QuadratureSpec& quad);

} // namespace approx
