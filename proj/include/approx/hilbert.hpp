#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "approx/orthopoly.hpp"

namespace approx {

/// Coefficient and sample blocks: rows indexed by multi-indices (or sample
/// points), columns by the K discretization coordinates.
using Block = Eigen::MatrixXcd;

/// The K x K Hermitian positive-definite inner-product operator of the
/// discretization basis. Accessed only through matrix-vector products; the
/// square root is never formed.
class GramOperator {
public:
    static GramOperator identity(int K);
    static GramOperator from_dense(Eigen::MatrixXcd G, bool validate = true);
    static GramOperator from_sparse(Eigen::SparseMatrix<double> G, bool validate = true);

    int dim() const { return dim_; }
    /// Cost hint: arithmetic operations per apply.
    std::int64_t apply_cost() const { return apply_cost_; }
    bool is_identity() const { return kind_ == Kind::identity; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

    /// Row-wise application: result row i is (G c_i)^T for c_i the i-th row.
    Block apply_rows(const Block& C) const;

    /// Quadratic forms Re(c_i^* G c_i) per row, clamped at zero; values below
    /// -1e-12 raise a definiteness error.
    Eigen::VectorXd row_quadforms(const Block& C) const;

    const Eigen::MatrixXcd& dense() const; // throws unless dense storage exists

private:
    enum class Kind { identity, dense, sparse_real };
    GramOperator() = default;
    void validate_shape() const;
    void spot_check() const;

    Kind kind_ = Kind::identity;
    int dim_ = 0;
    std::int64_t apply_cost_ = 0;
    Eigen::MatrixXcd dense_;
    Eigen::SparseMatrix<double> sparse_;
};

/// sqrt(x^* G x); small negative radicands are clamped, anything below
/// -1e-12 is a definiteness error.
double v_norm(const Eigen::VectorXcd& x, const GramOperator& G);

/// sqrt(sum_i c_i^* G c_i) over the rows of a block.
double block_frobenius_G(const Block& C, const GramOperator& G);

/// sum_i w_i sqrt(c_i^* G c_i).
double block_21w_norm(const Block& C, const Weights& w, const GramOperator& G);

/// A C and A^* Xi as ordinary matrix products; A is real so the adjoint is
/// the transpose.
Block apply_A(const MeasurementMatrix& A, const Block& C);
Block apply_A_adjoint(const MeasurementMatrix& A, const Block& Xi);

/// Same products for a raw real matrix.
Block apply_real(const Eigen::MatrixXd& M, const Block& C);
Block apply_real_adjoint(const Eigen::MatrixXd& M, const Block& C);

/// CSV with header "N,K"; complex entries written as re;im pairs.
void export_block_csv(const Block& C, std::ostream& out);
Block import_block_csv(std::istream& in);

/// Bit-stable little-endian binary round trip.
void export_block_binary(const Block& C, std::ostream& out);
Block import_block_binary(std::istream& in);

} // namespace approx
