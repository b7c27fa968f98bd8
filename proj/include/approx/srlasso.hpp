#pragma once

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "approx/hilbert.hpp"

namespace approx {

/// Sentinel dimension for the infinite-dimensional setting.
inline constexpr int kInfiniteDim = -1;

enum class SolverMode { theoretical, practical };

std::string to_string(SolverMode m);
SolverMode solver_mode_from_string(const std::string& s);

/// Hyperparameters of the (restarted) primal-dual solve.
///
/// tau * sigma * |A|_2^2 <= 1 is required for the step sizes; the solver
/// checks it against an estimated norm and flags (but does not abort on)
/// violations, since it is only a sufficient condition.
struct SolverConfig {
    double lambda = 0.0;       // penalty weight
    double tau = 0.0;          // primal step
    double sigma = 0.0;        // dual step
    int inner_iterations = 1;  // T, per restart
    int restarts = 100;        // R
    double scale_r = 0.36787944117144233; // r in (0,1), e^{-1} by default
    double restart_s = 0.0;    // s, scale constant: a_l = s * eps_{l+1}
    double zeta_prime = 0.0;   // tolerance floor, >= 0
    double stop_factor = 5.0;  // early stop when outer diff <= stop_factor * zeta_prime
    double cstar = 1.0;        // inner-length constant of the theoretical mode
    bool warm_start_dual = false; // off: every restart passes a zero dual
};

/// Thrown when an iterate loses finiteness; carries the iteration index.
class SolveDivergedError : public std::runtime_error {
public:
    SolveDivergedError(const std::string& what, long iteration)
        : std::runtime_error(what), iteration(iteration) {}
    long iteration;
};

/// Per-restart diagnostics. epsilon holds eps_0..eps_L (one entry longer than
/// the others); epsilon[l+1] = scale_r * (epsilon[l] + zeta_prime) exactly as
/// iterated, left to right.
struct SolveReport {
    std::vector<double> objective;
    std::vector<double> iterate_diff;
    std::vector<double> epsilon;
    std::vector<double> a;
    std::vector<long> inner_cum;
    long total_inner_iterations = 0;
    double wall_seconds = 0.0;
    std::string termination;
    double op_norm_used = 0.0;
    bool op_norm_converged = true;
    bool step_condition_ok = true;
    double max_dual_gram_norm = 0.0;

    /// CSV columns: outer_iter, inner_iters_cum, objective, iterate_diff,
    /// epsilon_l, a_l.
    void export_csv(std::ostream& out) const;
};

/// lambda |C|_{2,1,w} + |(A C - B) G^{1/2}|_F, the quantity every solve
/// decreases.
double objective(const Block& C, const MeasurementMatrix& A, const Block& B,
                 const Weights& w, const GramOperator& G, double lambda);

/// Row-wise shrinkage: row i scaled by max{n_i - t_i, 0} / n_i with
/// n_i = sqrt(p_i^* G p_i); the row is zeroed when n_i = 0 or n_i <= t_i.
Block prox_shrink(const Block& P, const Eigen::VectorXd& thresholds, const GramOperator& G);

/// min{1, 1 / |Q G^{1/2}|_F} Q, the projection onto the dual unit ball.
Block proj_dual_ball(const Block& Q, const GramOperator& G);

/// Called after each inner iteration with the 1-based iteration count and the
/// current ergodic and last iterates (rescaled to the original problem when
/// running under restarts).
using IterationHook = std::function<void(long iter, const Block& ergodic, const Block& iterate)>;

struct PrimalDualResult {
    Block ergodic;  // running average of the primal iterates
    Block last;     // final primal iterate
    Block dual;     // final dual iterate
    bool step_condition_ok = true;
    double op_norm_used = 0.0;
    bool op_norm_converged = true;
    double max_dual_gram_norm = 0.0;
};

/// T steps of the primal-dual iteration on the weighted square-root LASSO.
/// Update order per step: P = C - tau A* Xi; shrink; Q = Xi +
/// sigma A (2 C_new - C_old) - sigma B; project; ergodic average.
/// T = 0 returns ergodic = 0 and C = C0 untouched.
PrimalDualResult primal_dual(const MeasurementMatrix& A, const Block& B, const Weights& w,
                             const GramOperator& G, double lambda, double tau, double sigma,
                             int T, const Block& C0, const Block& Xi0,
                             const IterationHook& hook = {},
                             const double* op_norm_hint = nullptr);

/// Restarted iteration: eps_0 = |B G^{1/2}|_F, then per restart
/// eps_{l+1} = r (eps_l + zeta'), a_l = s eps_{l+1}, and the inner solve runs
/// on (B / a_l) from C_l / a_l with a zero dual, its ergodic output scaled
/// back by a_l. Runs all R restarts.
std::pair<Block, SolveReport> restarted(const MeasurementMatrix& A, const Block& B,
                                        const Weights& w, const GramOperator& G,
                                        const SolverConfig& cfg,
                                        const IterationHook& hook = {});

/// Same scheme, halting once consecutive outer iterates differ by at most
/// stop_factor * zeta' in the G-weighted Frobenius norm.
std::pair<Block, SolveReport> restarted_with_stop(const MeasurementMatrix& A, const Block& B,
                                                  const Weights& w, const GramOperator& G,
                                                  const SolverConfig& cfg,
                                                  const IterationHook& hook = {});

/// Fills every hyperparameter for the given mode. Practical mode estimates
/// |A|_2 and uses lambda = (sqrt(25 m))^{-1}, tau = sigma = |A|^{-1},
/// T = ceil(2 |A| / r), s = T / (2 |A|). Theoretical mode (m >= 3 required)
/// uses lambda = (4 sqrt(m / L))^{-1}, tau = sigma = Theta^{-alpha},
/// T = ceil(Theta^alpha cstar), s = sigma T / 2 with Theta = |Lambda|.
SolverConfig default_config(SolverMode mode, int m, int d, double eps_fail, Basis basis,
                            const MultiIndexSet& Lambda, const MeasurementMatrix* A,
                            double zeta_prime, int restarts = 100, double cstar = 1.0);

/// Decay-rate constant of the restarted scheme: 1 / ceil(2 e |A|_2).
double restart_rate(double op_norm);

} // namespace approx
