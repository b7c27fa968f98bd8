#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "approx/pipeline.hpp"

namespace approx {

/// One experiment per file, flat "key = value" lines, '#' comments.
/// Parsed keys keep their order so a config round-trips losslessly.
struct ExperimentConfig {
    std::vector<std::pair<std::string, std::string>> raw;

    std::string id = "custom"; // fig1..fig8 or custom
    std::string function = "f1";
    std::string kind = "iteration"; // iteration | m-sweep
    Basis basis = Basis::legendre;
    int d = 2;
    std::optional<int> order;     // index-set order n
    std::optional<int> target_N;  // pick the smallest order reaching this cardinality
    std::optional<int> caption_N; // documented reference value, recorded side by side
    int m = 0;
    std::vector<int> m_grid;
    int trials = 1;
    std::uint64_t seed = 1;
    SolverMode solver = SolverMode::practical;
    std::vector<double> zeta_primes{1e-8};
    long total_iterations = 1000; // iteration kind: inner-iteration budget
    QuadratureSpec quadrature;
    int mesh_q = 33;
    double noise = 0.0;    // relative sample-noise magnitude
    int sparse_terms = 5;  // sparse-synthetic only
    std::string output;    // directory name under the output root
    int jobs = 1;
    double eps_fail = 1e-3;
    RateMode rate = RateMode::algebraic;

    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_text(const std::string& text);
    std::string serialize() const;
    void validate() const; // throws std::invalid_argument with the offending key
};

std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

/// Geometric mean and the one-log-std band of positive values; nonpositive
/// entries are excluded (counted).
struct LogStats {
    double geomean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int used = 0;
    int excluded = 0;
};
LogStats aggregate_log_stats(const std::vector<double>& values);

struct RunOutcome {
    std::string directory;
    int total_trials = 0;
    int failed_trials = 0;
    bool cardinality_mismatch = false;
};

/// Runs the experiment and writes per-trial CSVs, the aggregate table, solver
/// reports, a gnuplot script and a manifest into <out_root>/<config.output>.
/// Identical configs and seeds give byte-identical CSV output. Trial failures
/// are recorded and do not stop the run.
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                          int jobs_override = 0, std::ostream* log = nullptr);

} // namespace approx
