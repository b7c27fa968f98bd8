#include "approx/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace approx {

std::string to_string(Basis b) {
    return b == Basis::chebyshev ? "chebyshev" : "legendre";
}

Basis basis_from_string(const std::string& s) {
    if (s == "chebyshev") return Basis::chebyshev;
    if (s == "legendre") return Basis::legendre;
    throw std::invalid_argument("unknown basis: " + s);
}

Weights::Weights(std::vector<double> v) : values(std::move(v)) {
    for (double w : values)
        if (!(w >= 1.0)) throw std::invalid_argument("weights must be >= 1");
}

std::vector<double> eval_1d(Basis basis, int nmax, double z) {
    if (nmax < 0) throw std::invalid_argument("eval_1d: nmax must be >= 0");
    if (std::abs(z) > 1.0 + 1e-14)
        throw std::domain_error("eval_1d: point outside [-1,1]");
    z = std::clamp(z, -1.0, 1.0);

    std::vector<double> v(static_cast<std::size_t>(nmax) + 1);
    v[0] = 1.0;
    if (nmax == 0) return v;

    if (basis == Basis::chebyshev) {
        // Normalized Chebyshev: P_k = sqrt(2) cos(k arccos z) for k >= 1.
        // The step from P_1 to P_2 carries a sqrt(2) on the P_0 term.
        v[1] = std::sqrt(2.0) * z;
        if (nmax >= 2) v[2] = 2.0 * z * v[1] - std::sqrt(2.0) * v[0];
        for (int j = 2; j + 1 <= nmax; ++j) v[j + 1] = 2.0 * z * v[j] - v[j - 1];
    } else {
        v[1] = std::sqrt(3.0) * z;
        for (int j = 1; j + 1 <= nmax; ++j) {
            const double a = std::sqrt(j + 1.5) / (j + 1);
            const double bz = (2.0 * j + 1.0) / std::sqrt(j + 0.5);
            const double c = j / std::sqrt(j - 0.5);
            v[j + 1] = a * (bz * z * v[j] - c * v[j - 1]);
        }
    }
    return v;
}

double eval_tensor(Basis basis, const MultiIndex& nu, std::span<const double> y) {
    if (y.size() < nu.size())
        throw std::invalid_argument("eval_tensor: point dimension smaller than index dimension");
    double p = 1.0;
    for (std::size_t k = 0; k < nu.size(); ++k) {
        if (nu[k] == 0) continue;
        p *= eval_1d(basis, nu[k], y[k])[nu[k]];
    }
    return p;
}

Weights intrinsic_weights(Basis basis, const MultiIndexSet& set) {
    std::vector<double> w(set.size());
    for (int i = 0; i < set.size(); ++i) {
        const MultiIndex& nu = set[i];
        if (basis == Basis::legendre) {
            double p = 1.0;
            for (int e : nu) p *= 2.0 * e + 1.0;
            w[i] = std::sqrt(p);
        } else {
            int nnz = 0;
            for (int e : nu)
                if (e != 0) ++nnz;
            w[i] = std::pow(2.0, 0.5 * nnz);
        }
    }
    return Weights(std::move(w));
}

void MeasurementMatrix::export_csv(std::ostream& out) const {
    out << m() << "," << N() << "," << to_string(basis) << "\n";
    char buf[32];
    for (int i = 0; i < m(); ++i) {
        for (int j = 0; j < N(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", entries(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

MeasurementMatrix build_measurement_matrix(const Eigen::MatrixXd& points,
                                           const MultiIndexSet& set, Basis basis,
                                           const std::string& sample_id) {
    const int m = static_cast<int>(points.rows());
    const int N = set.size();
    if (m < 1) throw std::invalid_argument("build_measurement_matrix: m >= 1 required");
    const int active = set.max_active_coordinate();
    if (static_cast<int>(points.cols()) < active)
        throw std::invalid_argument("build_measurement_matrix: points have fewer coordinates than the index set uses");

    // per-coordinate maximum degrees
    std::vector<int> degree(active, 0);
    for (const auto& nu : set.indices())
        for (int j = 0; j < active && j < static_cast<int>(nu.size()); ++j)
            degree[j] = std::max(degree[j], nu[j]);

    MeasurementMatrix A;
    A.basis = basis;
    A.provenance = to_string(basis) + "|" + to_string(set.kind()) + " n=" +
                   std::to_string(set.order()) + " N=" + std::to_string(N) +
                   (sample_id.empty() ? "" : "|" + sample_id);
    A.entries.resize(m, N);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    std::vector<std::vector<double>> table(active);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < active; ++j)
            table[j] = eval_1d(basis, degree[j], points(i, j));
        for (int col = 0; col < N; ++col) {
            const MultiIndex& nu = set[col];
            double p = 1.0;
            for (int j = 0; j < active; ++j)
                if (nu[j] != 0) p *= table[j][nu[j]];
            A.entries(i, col) = p * scale;
        }
    }
    return A;
}

double operator_norm_upper_bound(const MultiIndexSet& set, Basis basis) {
    const double theta = static_cast<double>(set.size());
    const double alpha = basis == Basis::legendre ? 1.0 : std::log(3.0) / std::log(4.0);
    return std::pow(theta, alpha);
}

NormEstimate operator_norm_estimate(const Eigen::MatrixXd& A) {
    if (A.size() == 0 || A.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("operator_norm_estimate: matrix is zero");

    // power iteration on the smaller of A A^T, A^T A
    const bool use_rows = A.rows() <= A.cols();
    const Eigen::Index k = use_rows ? A.rows() : A.cols();
    Eigen::VectorXd v(k);
    for (Eigen::Index i = 0; i < k; ++i)
        v[i] = 0.5 + std::cos(1.0 + 0.7 * static_cast<double>(i)); // fixed, never orthogonal by accident
    v.normalize();

    NormEstimate est;
    double lambda = 0.0;
    for (int it = 1; it <= 500; ++it) {
        Eigen::VectorXd w = use_rows ? Eigen::VectorXd(A * (A.transpose() * v))
                                     : Eigen::VectorXd(A.transpose() * (A * v));
        const double lambda_new = v.dot(w);
        const double nw = w.norm();
        est.iterations = it;
        if (nw == 0.0) { // v in the null space; restart deterministically shifted
            for (Eigen::Index i = 0; i < k; ++i) v[i] = std::sin(0.3 + 1.3 * static_cast<double>(i));
            v.normalize();
            continue;
        }
        v = w / nw;
        if (it > 1 && std::abs(lambda_new - lambda) <= 5e-7 * std::abs(lambda_new)) {
            lambda = lambda_new;
            est.converged = true;
            break;
        }
        lambda = lambda_new;
    }
    est.value = std::sqrt(std::max(lambda, 0.0));
    return est;
}

NormEstimate operator_norm_estimate(const MeasurementMatrix& A) {
    return operator_norm_estimate(A.entries);
}

} // namespace approx
