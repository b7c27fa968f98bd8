#include "approx/hilbert.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "approx/rng.hpp"

namespace approx {

namespace {

bool imag_is_zero(const Block& C) { return C.imag().isZero(0.0); }

} // namespace

GramOperator GramOperator::identity(int K) {
    if (K < 1) throw std::invalid_argument("GramOperator: K >= 1 required");
    GramOperator G;
    G.kind_ = Kind::identity;
    G.dim_ = K;
    G.apply_cost_ = K;
    return G;
}

GramOperator GramOperator::from_dense(Eigen::MatrixXcd M, bool validate) {
    if (M.rows() != M.cols() || M.rows() < 1)
        throw std::invalid_argument("GramOperator: square matrix required");
    GramOperator G;
    G.kind_ = Kind::dense;
    G.dim_ = static_cast<int>(M.rows());
    G.apply_cost_ = 2ll * G.dim_ * G.dim_;
    G.dense_ = std::move(M);
    if (validate) G.spot_check();
    return G;
}

GramOperator GramOperator::from_sparse(Eigen::SparseMatrix<double> M, bool validate) {
    if (M.rows() != M.cols() || M.rows() < 1)
        throw std::invalid_argument("GramOperator: square matrix required");
    GramOperator G;
    G.kind_ = Kind::sparse_real;
    G.dim_ = static_cast<int>(M.rows());
    G.apply_cost_ = 2ll * M.nonZeros();
    G.sparse_ = std::move(M);
    G.sparse_.makeCompressed();
    if (validate) G.spot_check();
    return G;
}

void GramOperator::spot_check() const {
    // Hermitian and positive on a few random probes.
    Rng rng(0x6772616dULL);
    for (int probe = 0; probe < 4; ++probe) {
        Eigen::VectorXcd x(dim_), y(dim_);
        for (int i = 0; i < dim_; ++i) {
            x[i] = std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
            y[i] = std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
        }
        const Eigen::VectorXcd Gx = apply(x);
        const Eigen::VectorXcd Gy = apply(y);
        const std::complex<double> a = y.dot(Gx); // y^* G x
        const std::complex<double> b = Gy.dot(x); // (G y)^* x = y^* G^* x
        const double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
        if (std::abs(a - b) > 1e-10 * scale)
            throw std::invalid_argument("GramOperator: matrix is not Hermitian");
        const double q = std::real(x.dot(Gx));
        if (!(q > 0.0))
            throw std::invalid_argument("GramOperator: matrix is not positive definite");
    }
}

Eigen::VectorXcd GramOperator::apply(const Eigen::VectorXcd& x) const {
    if (x.size() != dim_) throw std::invalid_argument("GramOperator::apply: dimension mismatch");
    switch (kind_) {
        case Kind::identity: return x;
        case Kind::dense: return dense_ * x;
        case Kind::sparse_real: {
            Eigen::VectorXd xr = x.real(), xi = x.imag();
            Eigen::VectorXcd out(dim_);
            out.real() = sparse_ * xr;
            out.imag() = sparse_ * xi;
            return out;
        }
    }
    return x;
}

Block GramOperator::apply_rows(const Block& C) const {
    if (C.cols() != dim_) throw std::invalid_argument("GramOperator::apply_rows: dimension mismatch");
    switch (kind_) {
        case Kind::identity: return C;
        case Kind::dense: return C * dense_.transpose();
        case Kind::sparse_real: {
            // (G c_i)^T rows; G real symmetric so this is C * G
            const Eigen::MatrixXd Cr = C.real(), Ci = C.imag();
            Block out(C.rows(), C.cols());
            out.real() = Cr * sparse_;
            if (imag_is_zero(C))
                out.imag().setZero();
            else
                out.imag() = Ci * sparse_;
            return out;
        }
    }
    return C;
}

Eigen::VectorXd GramOperator::row_quadforms(const Block& C) const {
    Eigen::VectorXd q;
    if (kind_ == Kind::identity) {
        q = C.cwiseAbs2().rowwise().sum();
    } else {
        const Block GC = apply_rows(C);
        q = C.conjugate().cwiseProduct(GC).rowwise().sum().real();
    }
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q[i] < -1e-12)
            throw std::runtime_error("GramOperator: negative quadratic form (operator not positive definite)");
        if (q[i] < 0.0) q[i] = 0.0;
    }
    return q;
}

const Eigen::MatrixXcd& GramOperator::dense() const {
    if (kind_ != Kind::dense) throw std::logic_error("GramOperator: no dense storage");
    return dense_;
}

double v_norm(const Eigen::VectorXcd& x, const GramOperator& G) {
    if (x.size() != G.dim()) throw std::invalid_argument("v_norm: dimension mismatch");
    const double q = std::real(x.dot(G.apply(x)));
    if (q < -1e-12) throw std::runtime_error("v_norm: negative quadratic form");
    return std::sqrt(std::max(q, 0.0));
}

double block_frobenius_G(const Block& C, const GramOperator& G) {
    return std::sqrt(G.row_quadforms(C).sum());
}

double block_21w_norm(const Block& C, const Weights& w, const GramOperator& G) {
    if (w.size() != C.rows())
        throw std::invalid_argument("block_21w_norm: weights not aligned with rows");
    const Eigen::VectorXd q = G.row_quadforms(C);
    double s = 0.0;
    for (int i = 0; i < w.size(); ++i) s += w[i] * std::sqrt(q[i]);
    return s;
}

Block apply_real(const Eigen::MatrixXd& M, const Block& C) {
    if (M.cols() != C.rows()) throw std::invalid_argument("apply_real: shape mismatch");
    const Eigen::MatrixXd Cr = C.real();
    Block out(M.rows(), C.cols());
    out.real() = M * Cr;
    if (imag_is_zero(C)) {
        out.imag().setZero();
    } else {
        const Eigen::MatrixXd Ci = C.imag();
        out.imag() = M * Ci;
    }
    return out;
}

Block apply_real_adjoint(const Eigen::MatrixXd& M, const Block& C) {
    if (M.rows() != C.rows()) throw std::invalid_argument("apply_real_adjoint: shape mismatch");
    const Eigen::MatrixXd Cr = C.real();
    Block out(M.cols(), C.cols());
    out.real() = M.transpose() * Cr;
    if (imag_is_zero(C)) {
        out.imag().setZero();
    } else {
        const Eigen::MatrixXd Ci = C.imag();
        out.imag() = M.transpose() * Ci;
    }
    return out;
}

Block apply_A(const MeasurementMatrix& A, const Block& C) { return apply_real(A.entries, C); }

Block apply_A_adjoint(const MeasurementMatrix& A, const Block& Xi) {
    return apply_real_adjoint(A.entries, Xi);
}

void export_block_csv(const Block& C, std::ostream& out) {
    out << C.rows() << "," << C.cols() << "\n";
    char buf[80];
    for (Eigen::Index i = 0; i < C.rows(); ++i) {
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g;%.17g", C(i, j).real(), C(i, j).imag());
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

Block import_block_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty block stream");
    Eigen::Index N = 0, K = 0;
    if (std::sscanf(line.c_str(), "%ld,%ld", &N, &K) != 2 || N < 0 || K < 0)
        throw std::runtime_error("bad block header: " + line);
    Block C(N, K);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("truncated block");
        std::istringstream ls(line);
        std::string cell;
        for (Eigen::Index j = 0; j < K; ++j) {
            if (!std::getline(ls, cell, ',')) throw std::runtime_error("short block row");
            double re = 0, im = 0;
            if (std::sscanf(cell.c_str(), "%lf;%lf", &re, &im) != 2)
                throw std::runtime_error("bad block cell: " + cell);
            C(i, j) = {re, im};
        }
    }
    return C;
}

void export_block_binary(const Block& C, std::ostream& out) {
    const char magic[8] = {'A', 'P', 'X', 'B', 'L', 'K', '0', '1'};
    out.write(magic, 8);
    const std::int64_t n = C.rows(), k = C.cols();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&k), 8);
    for (Eigen::Index i = 0; i < C.rows(); ++i)
        for (Eigen::Index j = 0; j < C.cols(); ++j) {
            const double re = C(i, j).real(), im = C(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
}

Block import_block_binary(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "APXBLK01")
        throw std::runtime_error("bad block binary magic");
    std::int64_t n = 0, k = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&k), 8);
    if (!in || n < 0 || k < 0) throw std::runtime_error("bad block binary header");
    Block C(n, k);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < k; ++j) {
            double re = 0, im = 0;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            if (!in) throw std::runtime_error("truncated block binary");
            C(i, j) = {re, im};
        }
    return C;
}

} // namespace approx
