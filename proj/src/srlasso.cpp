#include "approx/srlasso.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "approx/pipeline.hpp"

namespace approx {

std::string to_string(SolverMode m) {
    return m == SolverMode::theoretical ? "theoretical" : "practical";
}

SolverMode solver_mode_from_string(const std::string& s) {
    if (s == "theoretical") return SolverMode::theoretical;
    if (s == "practical") return SolverMode::practical;
    throw std::invalid_argument("unknown solver mode: " + s);
}

void SolveReport::export_csv(std::ostream& out) const {
    out << "outer_iter,inner_iters_cum,objective,iterate_diff,epsilon_l,a_l\n";
    char buf[160];
    for (std::size_t l = 0; l < objective.size(); ++l) {
        std::snprintf(buf, sizeof(buf), "%zu,%ld,%.17g,%.17g,%.17g,%.17g\n", l + 1,
                      inner_cum[l], objective[l], iterate_diff[l], epsilon[l + 1], a[l]);
        out << buf;
    }
}

double objective(const Block& C, const MeasurementMatrix& A, const Block& B,
                 const Weights& w, const GramOperator& G, double lambda) {
    if (C.rows() != A.N() || C.cols() != B.cols() || B.rows() != A.m())
        throw std::invalid_argument("objective: shape mismatch");
    const Block residual = apply_A(A, C) - B;
    return lambda * block_21w_norm(C, w, G) + block_frobenius_G(residual, G);
}

Block prox_shrink(const Block& P, const Eigen::VectorXd& thresholds, const GramOperator& G) {
    if (thresholds.size() != P.rows())
        throw std::invalid_argument("prox_shrink: one threshold per row required");
    for (Eigen::Index i = 0; i < thresholds.size(); ++i)
        if (thresholds[i] < 0.0) throw std::invalid_argument("prox_shrink: thresholds must be >= 0");
    const Eigen::VectorXd q = G.row_quadforms(P);
    Block out(P.rows(), P.cols());
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        const double n = std::sqrt(q[i]);
        if (n <= thresholds[i] || n == 0.0)
            out.row(i).setZero();
        else
            out.row(i) = P.row(i) * ((n - thresholds[i]) / n);
    }
    return out;
}

Block proj_dual_ball(const Block& Q, const GramOperator& G) {
    const double n = block_frobenius_G(Q, G);
    if (n <= 1.0) return Q;
    return Q / n;
}

namespace {

void check_solve_shapes(const MeasurementMatrix& A, const Block& B, const Weights& w,
                        const GramOperator& G) {
    if (B.rows() != A.m()) throw std::invalid_argument("solver: B rows must equal sample count");
    if (w.size() != A.N()) throw std::invalid_argument("solver: one weight per column required");
    if (G.dim() != B.cols()) throw std::invalid_argument("solver: Gram dimension must equal K");
}

} // namespace

PrimalDualResult primal_dual(const MeasurementMatrix& A, const Block& B, const Weights& w,
                             const GramOperator& G, double lambda, double tau, double sigma,
                             int T, const Block& C0, const Block& Xi0, const IterationHook& hook,
                             const double* op_norm_hint) {
    check_solve_shapes(A, B, w, G);
    if (C0.rows() != A.N() || C0.cols() != B.cols() || Xi0.rows() != A.m() || Xi0.cols() != B.cols())
        throw std::invalid_argument("primal_dual: initial value shape mismatch");
    if (!(tau > 0.0) || !(sigma > 0.0)) throw std::invalid_argument("primal_dual: step sizes must be positive");
    if (T < 0) throw std::invalid_argument("primal_dual: T >= 0 required");

    PrimalDualResult res;
    if (op_norm_hint) {
        res.op_norm_used = *op_norm_hint;
    } else {
        const NormEstimate est = operator_norm_estimate(A);
        res.op_norm_used = est.value;
        res.op_norm_converged = est.converged;
    }
    res.step_condition_ok = tau * sigma * res.op_norm_used * res.op_norm_used <= 1.0 + 1e-9;

    Eigen::VectorXd thresholds(A.N());
    for (int i = 0; i < A.N(); ++i) thresholds[i] = tau * lambda * w.values[i];

    Block C = C0;
    Block Xi = Xi0;
    Block Cbar = Block::Zero(A.N(), B.cols());

    for (int n = 0; n < T; ++n) {
        const Block P = C - tau * apply_A_adjoint(A, Xi);
        Block Cnew = prox_shrink(P, thresholds, G);
        const Block Q = Xi + sigma * apply_A(A, 2.0 * Cnew - C) - sigma * B;
        Xi = proj_dual_ball(Q, G);
        res.max_dual_gram_norm = std::max(res.max_dual_gram_norm, block_frobenius_G(Xi, G));
        C = std::move(Cnew);
        const double nn = static_cast<double>(n);
        Cbar = (nn / (nn + 1.0)) * Cbar + (1.0 / (nn + 1.0)) * C;
        if (!C.allFinite() || !Xi.allFinite())
            throw SolveDivergedError("primal_dual: iterate lost finiteness at iteration " +
                                         std::to_string(n + 1),
                                     n + 1);
        if (hook) hook(n + 1, Cbar, C);
    }

    res.ergodic = std::move(Cbar);
    res.last = std::move(C);
    res.dual = std::move(Xi);
    return res;
}

namespace {

std::pair<Block, SolveReport> restarted_impl(const MeasurementMatrix& A, const Block& B,
                                             const Weights& w, const GramOperator& G,
                                             const SolverConfig& cfg, bool stop_enabled,
                                             const IterationHook& hook) {
    check_solve_shapes(A, B, w, G);
    if (!(cfg.scale_r > 0.0 && cfg.scale_r < 1.0))
        throw std::invalid_argument("restarted: r must lie in (0,1)");
    if (!(cfg.restart_s > 0.0)) throw std::invalid_argument("restarted: s must be positive");
    if (cfg.zeta_prime < 0.0) throw std::invalid_argument("restarted: zeta' must be >= 0");
    if (cfg.restarts < 0) throw std::invalid_argument("restarted: R >= 0 required");
    if (stop_enabled && !(cfg.stop_factor > 0.0))
        throw std::invalid_argument("restarted: stop factor must be positive");

    const auto t0 = std::chrono::steady_clock::now();
    const int N = A.N(), K = static_cast<int>(B.cols());

    SolveReport report;
    const NormEstimate est = operator_norm_estimate(A);
    report.op_norm_used = est.value;
    report.op_norm_converged = est.converged;
    report.step_condition_ok = cfg.tau * cfg.sigma * est.value * est.value <= 1.0 + 1e-9;

    double eps = block_frobenius_G(B, G);
    report.epsilon.push_back(eps);
    Block Ct = Block::Zero(N, K);
    Block dual = Block::Zero(A.m(), K);
    report.termination = "max-restarts";

    for (int l = 0; l < cfg.restarts; ++l) {
        const double eps_next = cfg.scale_r * (eps + cfg.zeta_prime);
        const double a = cfg.restart_s * eps_next;
        if (a == 0.0) {
            report.epsilon.push_back(eps_next);
            report.termination = "zero-data";
            break;
        }

        IterationHook inner;
        if (hook) {
            const long base = report.total_inner_iterations;
            inner = [&hook, a, base](long n, const Block& erg, const Block& it) {
                hook(base + n, a * erg, a * it);
            };
        }
        PrimalDualResult pd = primal_dual(A, B / a, w, G, cfg.lambda, cfg.tau, cfg.sigma,
                                          cfg.inner_iterations, Ct / a,
                                          cfg.warm_start_dual ? dual : Block::Zero(A.m(), K),
                                          inner, &report.op_norm_used);
        Block Cnext = a * pd.ergodic;
        dual = std::move(pd.dual);

        report.max_dual_gram_norm = std::max(report.max_dual_gram_norm, pd.max_dual_gram_norm);
        report.total_inner_iterations += cfg.inner_iterations;
        const double diff = block_frobenius_G(Cnext - Ct, G);
        eps = eps_next;
        report.epsilon.push_back(eps);
        report.a.push_back(a);
        report.iterate_diff.push_back(diff);
        report.inner_cum.push_back(report.total_inner_iterations);
        report.objective.push_back(objective(Cnext, A, B, w, G, cfg.lambda));
        Ct = std::move(Cnext);

        if (stop_enabled && diff <= cfg.stop_factor * cfg.zeta_prime) {
            report.termination = "stopped-early";
            break;
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(Ct), std::move(report)};
}

} // namespace

std::pair<Block, SolveReport> restarted(const MeasurementMatrix& A, const Block& B,
                                        const Weights& w, const GramOperator& G,
                                        const SolverConfig& cfg, const IterationHook& hook) {
    return restarted_impl(A, B, w, G, cfg, false, hook);
}

std::pair<Block, SolveReport> restarted_with_stop(const MeasurementMatrix& A, const Block& B,
                                                  const Weights& w, const GramOperator& G,
                                                  const SolverConfig& cfg,
                                                  const IterationHook& hook) {
    return restarted_impl(A, B, w, G, cfg, true, hook);
}

SolverConfig default_config(SolverMode mode, int m, int d, double eps_fail, Basis basis,
                            const MultiIndexSet& Lambda, const MeasurementMatrix* A,
                            double zeta_prime, int restarts, double cstar) {
    SolverConfig cfg;
    cfg.zeta_prime = zeta_prime;
    cfg.restarts = restarts;
    cfg.cstar = cstar;
    cfg.scale_r = std::exp(-1.0);

    if (mode == SolverMode::practical) {
        if (!A) throw std::invalid_argument("default_config: practical mode needs the measurement matrix");
        if (m < 1) throw std::invalid_argument("default_config: m >= 1 required");
        const NormEstimate est = operator_norm_estimate(*A);
        const double norm = est.value;
        cfg.lambda = 1.0 / std::sqrt(25.0 * m);
        cfg.tau = cfg.sigma = 1.0 / norm;
        cfg.inner_iterations = static_cast<int>(std::ceil(2.0 * norm / cfg.scale_r));
        cfg.restart_s = cfg.inner_iterations / (2.0 * norm);
        return cfg;
    }

    if (m < 3) throw std::invalid_argument("default_config: theoretical mode requires m >= 3");
    const double L = log_factor_L(m, d, eps_fail);
    const double theta = static_cast<double>(Lambda.size());
    const double alpha = basis == Basis::legendre ? 1.0 : std::log(3.0) / std::log(4.0);
    cfg.lambda = 1.0 / (4.0 * std::sqrt(m / L));
    cfg.tau = cfg.sigma = std::pow(theta, -alpha);
    cfg.inner_iterations = static_cast<int>(std::ceil(std::pow(theta, alpha) * cstar));
    cfg.restart_s = cfg.sigma * cfg.inner_iterations / 2.0;
    return cfg;
}

double restart_rate(double op_norm) {
    return 1.0 / std::ceil(2.0 * std::exp(1.0) * op_norm);
}

} // namespace approx
