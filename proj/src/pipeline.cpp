#include "approx/pipeline.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace approx {

std::string to_string(RateMode m) {
    return m == RateMode::algebraic ? "algebraic" : "exponential";
}

RateMode rate_mode_from_string(const std::string& s) {
    if (s == "algebraic") return RateMode::algebraic;
    if (s == "exponential") return RateMode::exponential;
    throw std::invalid_argument("unknown rate mode: " + s);
}

double log_factor_L(int m, int d, double eps_fail) {
    if (m < 3) throw std::invalid_argument("log_factor_L: m >= 3 required");
    if (!(eps_fail > 0.0 && eps_fail < 1.0))
        throw std::invalid_argument("log_factor_L: eps in (0,1) required");
    const double lm = std::log(static_cast<double>(m));
    const double leps = std::log(1.0 / eps_fail);
    if (d == kInfiniteDim) return lm * (lm * lm * lm + leps);
    if (d < 1) throw std::invalid_argument("log_factor_L: d >= 1 required");
    const double dd = d;
    return lm * (lm * std::min(lm + dd, std::log(std::exp(1.0) * dd) * lm) + leps);
}

int choose_order(RateMode mode, int m, int d, double eps_fail, Basis basis) {
    const double L = log_factor_L(m, d, eps_fail);
    double n = 1.0;
    if (mode == RateMode::algebraic) {
        n = std::ceil(m / L);
    } else {
        if (d == kInfiniteDim)
            throw std::invalid_argument("choose_order: exponential mode needs finite d");
        if (basis == Basis::legendre)
            n = std::ceil(std::sqrt(m / L));
        else
            n = std::ceil(m / (std::ldexp(1.0, d) * L));
    }
    return std::max(1, static_cast<int>(n));
}

void PolynomialApproximant::save(std::ostream& out) const {
    out << "basis=" << to_string(basis) << " K=" << K << " ordering=" << std::hex
        << index_set.ordering_hash() << std::dec
        << (gram_provenance.empty() ? "" : " gram=" + gram_provenance) << "\n";
    index_set.serialize(out);
    export_block_csv(coefficients, out);
}

PolynomialApproximant PolynomialApproximant::load(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty approximant stream");
    PolynomialApproximant out{MultiIndexSet(1, {{0}}, IndexSetKind::custom), Basis::legendre,
                              Block(), 0, ""};
    std::uint64_t hash = 0;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("basis=", 0) == 0) out.basis = basis_from_string(tok.substr(6));
            else if (tok.rfind("K=", 0) == 0) out.K = std::stoi(tok.substr(2));
            else if (tok.rfind("ordering=", 0) == 0) hash = std::stoull(tok.substr(9), nullptr, 16);
            else if (tok.rfind("gram=", 0) == 0) out.gram_provenance = tok.substr(5);
        }
    }
    out.index_set = MultiIndexSet::deserialize(in);
    if (out.index_set.ordering_hash() != hash)
        throw std::runtime_error("approximant load: ordering hash mismatch");
    out.coefficients = import_block_csv(in);
    if (out.coefficients.rows() != out.index_set.size() || out.coefficients.cols() != out.K)
        throw std::runtime_error("approximant load: coefficient shape mismatch");
    return out;
}

Eigen::VectorXcd evaluate(const PolynomialApproximant& fhat, std::span<const double> y) {
    const int active = fhat.index_set.max_active_coordinate();
    if (static_cast<int>(y.size()) < active)
        throw std::invalid_argument("evaluate: point has too few coordinates");
    for (double yk : y)
        if (std::abs(yk) > 1.0 + 1e-14) throw std::domain_error("evaluate: point outside [-1,1]^d");

    std::vector<int> degree(active, 0);
    for (const auto& nu : fhat.index_set.indices())
        for (int j = 0; j < active; ++j) degree[j] = std::max(degree[j], nu[j]);
    std::vector<std::vector<double>> table(active);
    for (int j = 0; j < active; ++j) table[j] = eval_1d(fhat.basis, degree[j], y[j]);

    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(fhat.K);
    for (int row = 0; row < fhat.index_set.size(); ++row) {
        const MultiIndex& nu = fhat.index_set[row];
        double psi = 1.0;
        for (int j = 0; j < active; ++j)
            if (nu[j] != 0) psi *= table[j][nu[j]];
        acc += psi * fhat.coefficients.row(row).transpose();
    }
    return acc;
}

Block evaluate_many(const PolynomialApproximant& fhat, const Eigen::MatrixXd& points) {
    // chunked so the Psi block never exceeds ~64 MB
    const int M = static_cast<int>(points.rows());
    const int N = fhat.index_set.size();
    const int chunk = std::max(1, static_cast<int>(8000000 / std::max(1, N)));
    Block out(M, fhat.K);
    for (int start = 0; start < M; start += chunk) {
        const int rows = std::min(chunk, M - start);
        const MeasurementMatrix Psi = build_measurement_matrix(
            points.middleRows(start, rows), fhat.index_set, fhat.basis);
        // undo the 1/sqrt(rows) sampling normalization
        const double scale = std::sqrt(static_cast<double>(rows));
        out.middleRows(start, rows) = scale * apply_A(Psi, fhat.coefficients);
    }
    return out;
}

ApproximateResult approximate(const Eigen::MatrixXd& points, const Eigen::MatrixXd& data,
                              const ProblemSpec& spec, const GramOperator& G,
                              const PipelineOverrides& overrides) {
    return approximate(points, Block(data.cast<std::complex<double>>()), spec, G, overrides);
}

ApproximateResult approximate(const Eigen::MatrixXd& points, const Block& data,
                              const ProblemSpec& spec, const GramOperator& G,
                              const PipelineOverrides& overrides) {
    const int m = spec.num_samples;
    if (points.rows() != m || data.rows() != m)
        throw std::invalid_argument("approximate: points/data rows must equal m");
    if (data.cols() != G.dim())
        throw std::invalid_argument("approximate: data columns must match the Gram dimension");

    const int order = overrides.order
                          ? *overrides.order
                          : choose_order(spec.rate_mode, m, spec.dim, spec.failure_prob, spec.basis);
    const MultiIndexSet Lambda = spec.dim == kInfiniteDim ? hyperbolic_cross_infinite(order)
                                                          : hyperbolic_cross(order, spec.dim);
    if (points.cols() < Lambda.max_active_coordinate())
        throw std::invalid_argument("approximate: sample points supply too few coordinates");

    const MeasurementMatrix A = build_measurement_matrix(points, Lambda, spec.basis,
                                                         "seed=" + std::to_string(spec.seed));
    const Weights w = intrinsic_weights(spec.basis, Lambda);
    const Block B = data / std::sqrt(static_cast<double>(m));

    SolverConfig cfg = default_config(spec.solver_mode, m, spec.dim, spec.failure_prob, spec.basis,
                                      Lambda, &A, overrides.zeta_prime.value_or(1e-8),
                                      overrides.restarts.value_or(100),
                                      overrides.cstar.value_or(1.0));
    if (overrides.stop_factor) cfg.stop_factor = *overrides.stop_factor;

    auto [C, report] = restarted_with_stop(A, B, w, G, cfg);

    ApproximateResult res{PolynomialApproximant{Lambda, spec.basis, std::move(C), G.dim(),
                                                std::to_string(G.dim()) + "-dim gram"},
                          std::move(report), cfg, order};
    return res;
}

namespace {

ErrorEstimate relative_error_impl(const PolynomialApproximant& fhat, const ReferenceSampler& f,
                                  const GramOperator& G, const QuadratureSpec& quad, int d) {
    const long M = node_count(quad, d);
    Eigen::MatrixXd nodes(M, d);
    Eigen::VectorXd weights(M);
    long at = 0;
    for_each_node(quad, fhat.basis, d, [&](const double* y, double w) {
        for (int k = 0; k < d; ++k) nodes(at, k) = y[k];
        weights[at] = w;
        ++at;
    });

    double num = 0.0, den = 0.0;
    double num_sq = 0.0; // for the Monte Carlo spread of the squared error
    Eigen::VectorXcd fy(fhat.K);
    const long chunk = std::max<long>(1, 4000000 / std::max(1, fhat.index_set.size()));
    for (long start = 0; start < M; start += chunk) {
        const long rows = std::min<long>(chunk, M - start);
        const Block fhat_vals = evaluate_many(fhat, nodes.middleRows(start, rows));
        for (long i = 0; i < rows; ++i) {
            // nodes rows are not contiguous; copy through a small buffer
            Eigen::VectorXd y = nodes.row(start + i);
            f(y.data(), fy);
            const Eigen::VectorXcd err = fy - fhat_vals.row(i).transpose();
            const double e2 = std::real(err.dot(G.apply(err)));
            const double f2 = std::real(fy.dot(G.apply(fy)));
            const double w = weights[start + i];
            num += w * e2;
            den += w * f2;
            num_sq += w * e2 * e2;
        }
    }
    if (den <= 0.0) throw std::runtime_error("relative_error: reference function has zero norm");
    ErrorEstimate est;
    est.value = std::sqrt(std::max(num, 0.0) / den);
    if (quad.kind == QuadratureSpec::Kind::monte_carlo && num > 0.0 && M > 1) {
        const double var = std::max(0.0, num_sq / M - (num / M) * (num / M));
        est.rel_std = std::sqrt(var / M) / (num / M);
    }
    return est;
}

} // namespace

ErrorEstimate relative_error(const PolynomialApproximant& fhat, const ReferenceSampler& f,
                             const GramOperator& G, const QuadratureSpec& quad) {
    return relative_error_impl(fhat, f, G, quad, fhat.index_set.dim());
}

ErrorEstimate relative_error(const PolynomialApproximant& fhat,
                             const std::function<double(const double*)>& f,
                             const QuadratureSpec& quad) {
    const GramOperator G = GramOperator::identity(1);
    return relative_error_impl(
        fhat,
        [&f](const double* y, Eigen::VectorXcd& out) { out[0] = f(y); },
        G, quad, fhat.index_set.dim());
}

double L2Reference::relative_error_of(const Block& C, const GramOperator& G) const {
    const double head = block_frobenius_G(C - coefficients, G);
    return std::sqrt(head * head + std::max(tail_sq, 0.0)) / f_norm;
}

L2Reference build_l2_reference(const MultiIndexSet& set, Basis basis, const ReferenceSampler& f,
                               int K, const GramOperator& G, const QuadratureSpec& quad) {
    L2Reference ref;
    ref.coefficients = Block::Zero(set.size(), K);
    double fsq = 0.0;
    const int d = set.dim();
    Eigen::VectorXcd fy(K);
    std::vector<std::vector<double>> table(set.max_active_coordinate());
    std::vector<int> degree(table.size(), 0);
    for (const auto& nu : set.indices())
        for (std::size_t j = 0; j < table.size(); ++j)
            if (j < nu.size()) degree[j] = std::max(degree[j], nu[j]);

    for_each_node(quad, basis, d, [&](const double* y, double w) {
        f(y, fy);
        fsq += w * std::real(fy.dot(G.apply(fy)));
        for (std::size_t j = 0; j < table.size(); ++j) table[j] = eval_1d(basis, degree[j], y[j]);
        for (int row = 0; row < set.size(); ++row) {
            const MultiIndex& nu = set[row];
            double psi = 1.0;
            for (std::size_t j = 0; j < table.size(); ++j)
                if (j < nu.size() && nu[j] != 0) psi *= table[j][nu[j]];
            ref.coefficients.row(row) += (w * psi) * fy.transpose();
        }
    });
    ref.f_norm = std::sqrt(fsq);
    const double head = block_frobenius_G(ref.coefficients, G);
    ref.tail_sq = std::max(0.0, fsq - head * head);
    return ref;
}

} // namespace approx
