#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "approx/multi_index.hpp"

namespace approx {

/// Polynomial family, orthonormal for its probability measure on [-1,1]:
/// Chebyshev for the arcsine measure, Legendre for the uniform measure.
enum class Basis { chebyshev, legendre };

std::string to_string(Basis b);
Basis basis_from_string(const std::string& s);

/// Positive weights aligned with a MultiIndexSet ordering; all >= 1.
struct Weights {
    std::vector<double> values;

    explicit Weights(std::vector<double> v);
    int size() const { return static_cast<int>(values.size()); }
    double operator[](int i) const { return values[i]; }
};

/// Values (P_0(z), ..., P_nmax(z)) of the orthonormal 1-D polynomials by
/// three-term recurrence. Inputs are clamped to [-1,1] with 1e-14 slack;
/// anything farther out is a domain error.
std::vector<double> eval_1d(Basis basis, int nmax, double z);

/// Tensor-product value: the product of 1-D values over the support of nu.
double eval_tensor(Basis basis, const MultiIndex& nu, std::span<const double> y);

/// Sup-norms of the basis polynomials: prod sqrt(2 nu_j + 1) for Legendre,
/// 2^{|supp(nu)|/2} for Chebyshev.
Weights intrinsic_weights(Basis basis, const MultiIndexSet& set);

/// The m x N sampling matrix with entries P_{nu_j}(y_i) / sqrt(m). Real in
/// exact arithmetic for both bases; stored dense row-major.
struct MeasurementMatrix {
    Eigen::MatrixXd entries;
    Basis basis;
    std::string provenance; // basis, index set, sample id

    int m() const { return static_cast<int>(entries.rows()); }
    int N() const { return static_cast<int>(entries.cols()); }

    /// CSV with header row "m,N,basis" then entries row-major.
    void export_csv(std::ostream& out) const;
};

/// Per sample point, evaluates the 1-D values up to the needed degree on the
/// active coordinates, forms the products per index and scales by 1/sqrt(m).
MeasurementMatrix build_measurement_matrix(const Eigen::MatrixXd& points,
                                           const MultiIndexSet& set, Basis basis,
                                           const std::string& sample_id = "");

/// |set|^alpha with alpha = 1 (Legendre) or log3/log4 (Chebyshev); an upper
/// bound for the spectral norm of any measurement matrix over a lower set.
double operator_norm_upper_bound(const MultiIndexSet& set, Basis basis);

struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Largest singular value by power iteration on the Gram of the short side,
/// relative tolerance 1e-6, at most 500 iterations. A non-converged run
/// still reports its best estimate, flagged.
NormEstimate operator_norm_estimate(const Eigen::MatrixXd& A);
NormEstimate operator_norm_estimate(const MeasurementMatrix& A);

} // namespace approx
