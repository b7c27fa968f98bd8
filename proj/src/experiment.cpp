#include "approx/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "approx/rng.hpp"
#include "approx/testbed.hpp"

namespace approx {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "approx 0.1.0";

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

} // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line without '=': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        cfg.raw.emplace_back(key, value);
    }

    for (const auto& [key, value] : cfg.raw) {
        try {
            if (key == "id") cfg.id = value;
            else if (key == "function") cfg.function = value;
            else if (key == "kind") cfg.kind = value;
            else if (key == "basis") cfg.basis = basis_from_string(value);
            else if (key == "d") cfg.d = std::stoi(value);
            else if (key == "n") cfg.order = std::stoi(value);
            else if (key == "N") cfg.target_N = std::stoi(value);
            else if (key == "N_caption") cfg.caption_N = std::stoi(value);
            else if (key == "m") cfg.m = std::stoi(value);
            else if (key == "m_grid") {
                cfg.m_grid.clear();
                for (const auto& t : split_ws(value)) cfg.m_grid.push_back(std::stoi(t));
            } else if (key == "trials") cfg.trials = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "solver") cfg.solver = solver_mode_from_string(value);
            else if (key == "zeta_prime") {
                cfg.zeta_primes.clear();
                for (const auto& t : split_ws(value)) cfg.zeta_primes.push_back(std::stod(t));
            } else if (key == "total_iterations") cfg.total_iterations = std::stol(value);
            else if (key == "quadrature") cfg.quadrature = QuadratureSpec::parse(value);
            else if (key == "mesh_q") cfg.mesh_q = std::stoi(value);
            else if (key == "noise") cfg.noise = std::stod(value);
            else if (key == "sparse_terms") cfg.sparse_terms = std::stoi(value);
            else if (key == "output") cfg.output = value;
            else if (key == "jobs") cfg.jobs = std::stoi(value);
            else if (key == "epsilon") cfg.eps_fail = std::stod(value);
            else if (key == "rate") cfg.rate = rate_mode_from_string(value);
            else throw std::invalid_argument("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception& e) {
            throw std::invalid_argument("bad value for '" + key + "': " + value + " (" + e.what() + ")");
        }
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    return parse(in);
}

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
}

std::string ExperimentConfig::serialize() const {
    std::string out;
    for (const auto& [key, value] : raw) out += key + " = " + value + "\n";
    return out;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    const bool known_fig = id.rfind("fig", 0) == 0 && id.size() == 4 && id[3] >= '1' && id[3] <= '8';
    if (!known_fig && id != "custom") fail("id must be fig1..fig8 or custom");
    if (function != "f1" && function != "f2" && function != "f3" && function != "f4" &&
        function != "sparse-synthetic")
        fail("function must be one of f1 f2 f3 f4 sparse-synthetic");
    if (kind != "iteration" && kind != "m-sweep") fail("kind must be iteration or m-sweep");
    if (d < 1) fail("d must be >= 1");
    if (function == "f3" && d != 2) fail("f3 requires d = 2");
    if (function == "f4" && d < 2) fail("f4 requires d >= 2");
    if (kind == "iteration" && m < 1) fail("iteration kind needs m >= 1");
    if (kind == "m-sweep" && m_grid.empty()) fail("m-sweep needs a nonempty m_grid");
    for (int mm : m_grid)
        if (mm < 1) fail("m_grid entries must be >= 1");
    if (trials < 1) fail("trials must be >= 1");
    if (zeta_primes.empty()) fail("zeta_prime list must be nonempty");
    for (double z : zeta_primes)
        if (z < 0) fail("zeta_prime entries must be >= 0");
    if (total_iterations < 1) fail("total_iterations must be >= 1");
    if (quadrature.kind == QuadratureSpec::Kind::tensor_clenshaw_curtis && d > 4)
        fail("tensor quadrature is limited to d <= 4; use mc:<points>");
    if ((function == "f3" || function == "f4") && mesh_q < 3) fail("mesh_q must be >= 3");
    if (function == "sparse-synthetic" && sparse_terms < 1) fail("sparse_terms must be >= 1");
    if (order && *order < 1) fail("n must be >= 1");
    if (target_N && *target_N < 1) fail("N must be >= 1");
    if (jobs < 1) fail("jobs must be >= 1");
    if (!(eps_fail > 0.0 && eps_fail < 1.0)) fail("epsilon must lie in (0,1)");
    if (output.empty()) fail("output directory name required");
}

std::vector<std::string> preset_names() {
    return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "sparse2d"};
}

std::string preset_text(const std::string& name) {
    if (name == "fig1")
        return "id = fig1\n"
               "function = f1\n"
               "kind = iteration\n"
               "basis = legendre\n"
               "d = 2\n"
               "N = 997\n"
               "N_caption = 997\n"
               "m = 250\n"
               "trials = 1\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-4 1e-8 1e-10\n"
               "total_iterations = 1000\n"
               "quadrature = cc:6\n"
               "output = fig1\n";
    if (name == "fig2")
        return "id = fig2\n"
               "function = f2\n"
               "kind = iteration\n"
               "basis = legendre\n"
               "d = 16\n"
               "N = 8277\n"
               "N_caption = 8277\n"
               "m = 2000\n"
               "trials = 1\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-4 1e-8 1e-10\n"
               "total_iterations = 1000\n"
               "quadrature = mc:20000:99\n"
               "output = fig2\n";
    if (name == "fig3")
        return "id = fig3\n"
               "function = f3\n"
               "kind = iteration\n"
               "basis = legendre\n"
               "d = 2\n"
               "N = 997\n"
               "N_caption = 997\n"
               "m = 250\n"
               "trials = 1\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-4 1e-8 1e-10\n"
               "total_iterations = 1000\n"
               "quadrature = cc:5\n"
               "mesh_q = 33\n"
               "output = fig3\n";
    if (name == "fig4")
        return "id = fig4\n"
               "function = f4\n"
               "kind = iteration\n"
               "basis = legendre\n"
               "d = 30\n"
               "N = 7841\n"
               "N_caption = 7841\n"
               "m = 1000\n"
               "trials = 1\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-4 1e-8 1e-10\n"
               "total_iterations = 1000\n"
               "quadrature = mc:2000:99\n"
               "mesh_q = 33\n"
               "output = fig4\n";
    if (name == "fig5")
        return "id = fig5\n"
               "function = f1\n"
               "kind = m-sweep\n"
               "basis = legendre\n"
               "d = 2\n"
               "N = 997\n"
               "N_caption = 997\n"
               "m_grid = 10 25 50 100 150 200 250\n"
               "trials = 50\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-8\n"
               "quadrature = cc:6\n"
               "output = fig5\n";
    if (name == "fig6")
        return "id = fig6\n"
               "function = f2\n"
               "kind = m-sweep\n"
               "basis = legendre\n"
               "d = 16\n"
               "N = 8277\n"
               "N_caption = 8277\n"
               "m_grid = 250 500 1000 1500 2000\n"
               "trials = 10\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-4\n"
               "quadrature = mc:20000:99\n"
               "output = fig6\n";
    if (name == "fig7")
        return "id = fig7\n"
               "function = f3\n"
               "kind = m-sweep\n"
               "basis = legendre\n"
               "d = 2\n"
               "N = 997\n"
               "N_caption = 997\n"
               "m_grid = 25 50 100 175 250\n"
               "trials = 10\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-8\n"
               "quadrature = cc:5\n"
               "mesh_q = 17\n"
               "output = fig7\n";
    if (name == "fig8")
        return "id = fig8\n"
               "function = f4\n"
               "kind = m-sweep\n"
               "basis = legendre\n"
               "d = 30\n"
               "N = 7841\n"
               "N_caption = 7841\n"
               "m_grid = 125 250 500 1000\n"
               "trials = 10\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-4\n"
               "quadrature = mc:2000:99\n"
               "mesh_q = 9\n"
               "output = fig8\n";
    if (name == "sparse2d")
        return "id = custom\n"
               "function = sparse-synthetic\n"
               "kind = m-sweep\n"
               "basis = legendre\n"
               "d = 2\n"
               "N = 997\n"
               "m_grid = 50 100 250\n"
               "trials = 10\n"
               "seed = 20260809\n"
               "solver = practical\n"
               "zeta_prime = 1e-10\n"
               "sparse_terms = 5\n"
               "quadrature = cc:6\n"
               "output = sparse2d\n";
    throw std::invalid_argument("unknown preset: " + name);
}

LogStats aggregate_log_stats(const std::vector<double>& values) {
    LogStats s;
    std::vector<double> logs;
    for (double v : values) {
        if (v > 0.0)
            logs.push_back(std::log(v));
        else
            ++s.excluded;
    }
    s.used = static_cast<int>(logs.size());
    if (logs.empty()) return s;
    double mean = 0.0;
    for (double l : logs) mean += l;
    mean /= logs.size();
    double var = 0.0;
    for (double l : logs) var += (l - mean) * (l - mean);
    const double sd = logs.size() > 1 ? std::sqrt(var / (logs.size() - 1)) : 0.0;
    s.geomean = std::exp(mean);
    s.lo = std::exp(mean - sd);
    s.hi = std::exp(mean + sd);
    return s;
}

// ---------------------------------------------------------------------------
// run_experiment internals
// ---------------------------------------------------------------------------

namespace {

long hc_count(int n, int d) {
    std::function<long(int, long)> rec = [&](int dim, long budget) -> long {
        if (dim == 0) return 1;
        long tot = 0;
        for (long k = 1; k <= budget; ++k) tot += rec(dim - 1, budget / k);
        return tot;
    };
    return rec(d, n);
}

int order_for_cardinality(int target, int d) {
    for (int n = 1;; ++n)
        if (hc_count(n, d) >= target) return n;
}

struct TargetFunction {
    int K = 1;
    ReferenceSampler eval;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> snapshots;
};

TargetFunction make_scalar_target(const std::function<double(std::span<const double>)>& f, int d) {
    TargetFunction t;
    t.K = 1;
    t.eval = [f, d](const double* y, Eigen::VectorXcd& out) {
        out[0] = f(std::span<const double>(y, d));
    };
    t.snapshots = [f, d](const Eigen::MatrixXd& pts) {
        Eigen::MatrixXd D(pts.rows(), 1);
        std::vector<double> y(d);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
            for (int k = 0; k < d; ++k) y[k] = pts(i, k);
            D(i, 0) = f(std::span<const double>(y.data(), d));
        }
        return D;
    };
    return t;
}

TargetFunction make_pde_target(const StructuredMesh& mesh, DiffusionVariant v, int d) {
    TargetFunction t;
    t.K = mesh.interior_count();
    t.eval = [mesh, v, d](const double* y, Eigen::VectorXcd& out) {
        Eigen::MatrixXd pt(1, d);
        for (int k = 0; k < d; ++k) pt(0, k) = y[k];
        out = diffusion_snapshots(mesh, v, pt).row(0).cast<std::complex<double>>();
    };
    t.snapshots = [mesh, v](const Eigen::MatrixXd& pts) {
        return diffusion_snapshots(mesh, v, pts);
    };
    return t;
}

// Quadrature nodes, weights and reference values cached for repeated error
// evaluations against the same function.
struct ErrorContext {
    Eigen::MatrixXd nodes;
    Eigen::VectorXd weights;
    Block fvals;
    double fnorm_sq = 0.0;

    double rel_error(const PolynomialApproximant& fhat, const GramOperator& G) const {
        const Block fh = evaluate_many(fhat, nodes);
        const Eigen::VectorXd q = G.row_quadforms(fvals - fh);
        const double num = weights.dot(q);
        return std::sqrt(std::max(num, 0.0) / fnorm_sq);
    }
};

ErrorContext build_error_context(const QuadratureSpec& quad, Basis basis, int d,
                                 const TargetFunction& f, const GramOperator& G) {
    ErrorContext ctx;
    const long M = node_count(quad, d);
    ctx.nodes.resize(M, d);
    ctx.weights.resize(M);
    long at = 0;
    for_each_node(quad, basis, d, [&](const double* y, double w) {
        for (int k = 0; k < d; ++k) ctx.nodes(at, k) = y[k];
        ctx.weights[at] = w;
        ++at;
    });
    ctx.fvals.resize(M, f.K);
    Eigen::VectorXcd fy(f.K);
    std::vector<double> y(d);
    for (long i = 0; i < M; ++i) {
        for (int k = 0; k < d; ++k) y[k] = ctx.nodes(i, k);
        f.eval(y.data(), fy);
        ctx.fvals.row(i) = fy.transpose();
    }
    ctx.fnorm_sq = ctx.weights.dot(G.row_quadforms(ctx.fvals));
    if (!(ctx.fnorm_sq > 0.0)) throw std::runtime_error("error context: zero reference norm");
    return ctx;
}

void add_relative_noise(Eigen::MatrixXd& D, double eta, const GramOperator& G,
                        std::uint64_t seed) {
    if (eta <= 0.0) return;
    Rng rng(seed);
    Eigen::MatrixXd Nz(D.rows(), D.cols());
    for (Eigen::Index i = 0; i < Nz.rows(); ++i)
        for (Eigen::Index j = 0; j < Nz.cols(); ++j) Nz(i, j) = rng.normal();
    const double data_norm = block_frobenius_G(D.cast<std::complex<double>>(), G);
    const double noise_norm = block_frobenius_G(Nz.cast<std::complex<double>>(), G);
    if (noise_norm > 0.0) D += Nz * (eta * data_norm / noise_norm);
}

struct Setup {
    MultiIndexSet Lambda;
    GramOperator G;
    TargetFunction target;
    std::optional<StructuredMesh> mesh;
    bool cardinality_mismatch = false;
    int order_used = 0;
};

Setup build_setup(const ExperimentConfig& cfg) {
    int n;
    if (cfg.order) {
        n = *cfg.order;
    } else if (cfg.target_N) {
        n = order_for_cardinality(*cfg.target_N, cfg.d);
    } else {
        const int m_max = cfg.kind == "iteration"
                              ? cfg.m
                              : *std::max_element(cfg.m_grid.begin(), cfg.m_grid.end());
        n = choose_order(cfg.rate, m_max, cfg.d, cfg.eps_fail, cfg.basis);
    }
    MultiIndexSet Lambda = hyperbolic_cross(n, cfg.d);

    Setup s{std::move(Lambda), GramOperator::identity(1), TargetFunction{}, std::nullopt, false, n};
    if (cfg.target_N && s.Lambda.size() != *cfg.target_N) s.cardinality_mismatch = true;
    if (cfg.caption_N && s.Lambda.size() != *cfg.caption_N) s.cardinality_mismatch = true;

    if (cfg.function == "f3" || cfg.function == "f4") {
        s.mesh = StructuredMesh::unit_square(cfg.mesh_q);
        s.G = h1_gram(*s.mesh);
        s.target = make_pde_target(*s.mesh,
                                   cfg.function == "f3" ? DiffusionVariant::f3
                                                        : DiffusionVariant::f4,
                                   cfg.d);
    } else if (cfg.function == "f1") {
        s.target = make_scalar_target([](std::span<const double> y) { return f1(y); }, cfg.d);
    } else if (cfg.function == "f2") {
        s.target = make_scalar_target([](std::span<const double> y) { return f2(y); }, cfg.d);
    }
    // sparse-synthetic targets are per-trial; filled in later
    return s;
}

struct TrialRow {
    int m = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double error = 0.0;
    double coeff_max_err = -1.0; // sparse-synthetic only
    long inner_iterations = 0;
    int restarts = 0;
    std::string status = "ok";
};

void write_gnuplot_iteration(std::ostream& out, const ExperimentConfig& cfg, int columns_per_z) {
    out << "set datafile separator ','\n"
        << "set logscale y\n"
        << "set xlabel 'iteration'\n"
        << "set ylabel 'relative L2 error'\n"
        << "set key outside\n"
        << "plot 'trial_0.csv' using 1:2 with lines title 'PD iterate', \\\n"
        << "     'trial_0.csv' using 1:3 with lines title 'PD ergodic'";
    for (std::size_t z = 0; z < cfg.zeta_primes.size(); ++z) {
        const int base = 4 + static_cast<int>(z) * columns_per_z;
        out << ", \\\n     'trial_0.csv' using 1:" << base << " with lines title 'PDR iterate z" << z
            << "'"
            << ", \\\n     'trial_0.csv' using 1:" << base + 1
            << " with lines title 'PDR ergodic z" << z << "'";
    }
    out << ", \\\n     'trial_0.csv' using 1:" << 4 + cfg.zeta_primes.size() * columns_per_z
        << " with lines dashtype 2 title 'theory'\n";
}

void write_gnuplot_sweep(std::ostream& out) {
    out << "set datafile separator ','\n"
        << "set logscale y\n"
        << "set xlabel 'sample count m'\n"
        << "set ylabel 'relative L2 error'\n"
        << "set key outside\n"
        << "plot 'aggregate.csv' using 1:3:4 with filledcurves fc rgb '#cce5ff' title 'log-std band', \\\n"
        << "     'aggregate.csv' using 1:2 with linespoints title 'geometric mean'\n";
}

} // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_root,
                          int jobs_override, std::ostream* log) {
    cfg.validate();
    const int jobs = jobs_override > 0 ? jobs_override : cfg.jobs;

    fs::path dir = fs::path(out_root.empty() ? "." : out_root) / cfg.output;
    fs::create_directories(dir);

    Setup setup = build_setup(cfg);
    const bool sparse = cfg.function == "sparse-synthetic";
    RunOutcome outcome;
    outcome.directory = dir.string();
    outcome.cardinality_mismatch = setup.cardinality_mismatch;

    std::vector<std::string> notes;
    if (setup.cardinality_mismatch)
        notes.push_back("cardinality_mismatch: enumerated " + std::to_string(setup.Lambda.size()) +
                        " vs configured target/caption");

    std::vector<TrialRow> rows;
    std::mutex note_mutex;

    if (cfg.kind == "iteration") {
        outcome.total_trials = cfg.trials;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            const std::uint64_t tseed = Rng::derive(cfg.seed, 101 + trial);
            TrialRow row;
            row.m = cfg.m;
            row.trial = trial;
            row.seed = tseed;
            try {
                TargetFunction target = setup.target;
                if (sparse) {
                    auto poly = std::make_shared<SparsePolynomial>(SparsePolynomial::random(
                        cfg.sparse_terms, cfg.d, cfg.basis, Rng::derive(cfg.seed, 7000 + trial)));
                    target = make_scalar_target(
                        [poly](std::span<const double> y) { return (*poly)(y); }, cfg.d);
                }
                const Eigen::MatrixXd points = sample_points(cfg.basis, cfg.m, cfg.d, tseed);
                Eigen::MatrixXd D = target.snapshots(points);
                add_relative_noise(D, cfg.noise, setup.G, Rng::derive(tseed, 555));
                const Block B = D.cast<std::complex<double>>() / std::sqrt(double(cfg.m));
                const MeasurementMatrix A =
                    build_measurement_matrix(points, setup.Lambda, cfg.basis);
                const Weights w = intrinsic_weights(cfg.basis, setup.Lambda);

                const L2Reference ref = build_l2_reference(setup.Lambda, cfg.basis, target.eval,
                                                           target.K, setup.G, cfg.quadrature);
                const NormEstimate norm = operator_norm_estimate(A);
                const double rate_c = restart_rate(norm.value);
                const long T_total = cfg.total_iterations;

                std::vector<double> pd_iter(T_total), pd_erg(T_total);
                SolverConfig base = default_config(cfg.solver, cfg.m, cfg.d, cfg.eps_fail,
                                                   cfg.basis, setup.Lambda, &A,
                                                   cfg.zeta_primes.front());
                primal_dual(A, B, w, setup.G, base.lambda, base.tau, base.sigma,
                            static_cast<int>(T_total), Block::Zero(A.N(), target.K),
                            Block::Zero(cfg.m, target.K),
                            [&](long n, const Block& erg, const Block& it) {
                                pd_iter[n - 1] = ref.relative_error_of(it, setup.G);
                                pd_erg[n - 1] = ref.relative_error_of(erg, setup.G);
                            },
                            &norm.value);

                std::vector<std::vector<double>> pdr_iter, pdr_erg;
                long rows_needed = T_total;
                for (std::size_t z = 0; z < cfg.zeta_primes.size(); ++z) {
                    SolverConfig c = default_config(cfg.solver, cfg.m, cfg.d, cfg.eps_fail,
                                                    cfg.basis, setup.Lambda, &A,
                                                    cfg.zeta_primes[z]);
                    c.restarts = static_cast<int>(
                        (T_total + c.inner_iterations - 1) / c.inner_iterations);
                    std::vector<double> ei(static_cast<std::size_t>(c.restarts) *
                                           c.inner_iterations),
                        ee(ei.size());
                    auto [C, report] = restarted(
                        A, B, w, setup.G, c, [&](long n, const Block& erg, const Block& it) {
                            ei[n - 1] = ref.relative_error_of(it, setup.G);
                            ee[n - 1] = ref.relative_error_of(erg, setup.G);
                        });
                    rows_needed = std::max(rows_needed, static_cast<long>(ei.size()));
                    pdr_iter.push_back(std::move(ei));
                    pdr_erg.push_back(std::move(ee));

                    std::ofstream rep(dir / ("report_trial" + std::to_string(trial) + "_z" +
                                             std::to_string(z) + ".csv"));
                    report.export_csv(rep);
                    row.inner_iterations = report.total_inner_iterations;
                    row.restarts = static_cast<int>(report.objective.size());
                }
                row.error = pdr_erg.front().empty() ? 0.0 : pdr_erg.front().back();

                std::ofstream csv(dir / ("trial_" + std::to_string(trial) + ".csv"));
                csv << "iteration,pd_iterate,pd_ergodic";
                for (std::size_t z = 0; z < cfg.zeta_primes.size(); ++z)
                    csv << ",pdr_iterate_z" << z << ",pdr_ergodic_z" << z;
                csv << ",theory\n";
                for (long t = 0; t < rows_needed; ++t) {
                    csv << (t + 1);
                    csv << "," << (t < T_total ? g17(pd_iter[t]) : "");
                    csv << "," << (t < T_total ? g17(pd_erg[t]) : "");
                    for (std::size_t z = 0; z < cfg.zeta_primes.size(); ++z) {
                        csv << ","
                            << (t < static_cast<long>(pdr_iter[z].size()) ? g17(pdr_iter[z][t])
                                                                          : "");
                        csv << ","
                            << (t < static_cast<long>(pdr_erg[z].size()) ? g17(pdr_erg[z][t])
                                                                         : "");
                    }
                    csv << "," << g17(std::exp(-rate_c * static_cast<double>(t + 1))) << "\n";
                }
                {
                    std::lock_guard<std::mutex> lk(note_mutex);
                    notes.push_back("trial " + std::to_string(trial) +
                                    ": op_norm_estimate = " + g17(norm.value) +
                                    (norm.converged ? "" : " (not converged)"));
                }
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
                ++outcome.failed_trials;
            }
            rows.push_back(std::move(row));
            if (log) (*log) << "trial " << trial << " " << rows.back().status << "\n";
        }
        std::ofstream plot(dir / "plot.gp");
        write_gnuplot_iteration(plot, cfg, 2);
    } else {
        // m-sweep
        std::optional<ErrorContext> shared_ctx;
        if (!sparse)
            shared_ctx = build_error_context(cfg.quadrature, cfg.basis, cfg.d, setup.target,
                                             setup.G);
        outcome.total_trials = cfg.trials * static_cast<int>(cfg.m_grid.size());
        rows.resize(outcome.total_trials);

        std::vector<std::pair<int, int>> tasks; // (m index, trial)
        for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi)
            for (int t = 0; t < cfg.trials; ++t) tasks.emplace_back(static_cast<int>(mi), t);

        std::mutex fail_mutex;
        auto run_task = [&](std::size_t task_index) {
            const auto [mi, trial] = tasks[task_index];
            const int m = cfg.m_grid[mi];
            const std::uint64_t tseed =
                Rng::derive(cfg.seed, 10007ull * (mi + 1) + static_cast<unsigned>(trial));
            TrialRow row;
            row.m = m;
            row.trial = trial;
            row.seed = tseed;
            try {
                TargetFunction target = setup.target;
                std::shared_ptr<SparsePolynomial> poly;
                if (sparse) {
                    poly = std::make_shared<SparsePolynomial>(SparsePolynomial::random(
                        cfg.sparse_terms, cfg.d, cfg.basis, Rng::derive(cfg.seed, 7000 + trial)));
                    target = make_scalar_target(
                        [poly](std::span<const double> y) { return (*poly)(y); }, cfg.d);
                }
                const Eigen::MatrixXd points = sample_points(cfg.basis, m, cfg.d, tseed);
                Eigen::MatrixXd D = target.snapshots(points);
                add_relative_noise(D, cfg.noise, setup.G, Rng::derive(tseed, 555));

                ProblemSpec spec;
                spec.dim = cfg.d;
                spec.basis = cfg.basis;
                spec.num_samples = m;
                spec.failure_prob = cfg.eps_fail;
                spec.rate_mode = cfg.rate;
                spec.solver_mode = cfg.solver;
                spec.seed = tseed;
                PipelineOverrides ov;
                ov.order = setup.order_used;
                ov.zeta_prime = cfg.zeta_primes.front();
                ApproximateResult res = approximate(points, D, spec, setup.G, ov);

                if (sparse) {
                    ErrorContext ctx = build_error_context(cfg.quadrature, cfg.basis, cfg.d,
                                                           target, setup.G);
                    row.error = ctx.rel_error(res.approximant, setup.G);
                    double worst = 0.0;
                    for (int j = 0; j < setup.Lambda.size(); ++j) {
                        double truth = 0.0;
                        if (auto pos = poly->support.position(setup.Lambda[j]))
                            truth = poly->coefficients[*pos];
                        worst = std::max(worst,
                                         std::abs(res.approximant.coefficients(j, 0) - truth));
                    }
                    row.coeff_max_err = worst;
                } else {
                    row.error = shared_ctx->rel_error(res.approximant, setup.G);
                }
                row.inner_iterations = res.report.total_inner_iterations;
                row.restarts = static_cast<int>(res.report.objective.size());
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
                std::lock_guard<std::mutex> lk(fail_mutex);
                ++outcome.failed_trials;
            }
            rows[task_index] = std::move(row);
        };

        if (jobs <= 1) {
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                run_task(i);
                if (log) (*log) << "task " << i + 1 << "/" << tasks.size() << " done\n";
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            for (int j = 0; j < jobs; ++j)
                pool.emplace_back([&]() {
                    for (;;) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= tasks.size()) return;
                        run_task(i);
                    }
                });
            for (auto& th : pool) th.join();
        }

        std::ofstream trials_csv(dir / "trials.csv");
        trials_csv << "m,trial,seed,error,coeff_max_err,inner_iterations,restarts,status\n";
        for (const auto& r : rows) {
            trials_csv << r.m << "," << r.trial << "," << r.seed << "," << g17(r.error) << ","
                       << (r.coeff_max_err >= 0 ? g17(r.coeff_max_err) : "") << ","
                       << r.inner_iterations << "," << r.restarts << "," << r.status << "\n";
        }

        std::ofstream agg(dir / "aggregate.csv");
        agg << "m,err_geomean,err_lo,err_hi,trials_used,trials_failed,nonincreasing_vs_prev\n";
        double prev = -1.0;
        for (std::size_t mi = 0; mi < cfg.m_grid.size(); ++mi) {
            std::vector<double> errs;
            int failed = 0;
            for (const auto& r : rows)
                if (r.m == cfg.m_grid[mi]) {
                    if (r.status == "ok")
                        errs.push_back(r.error);
                    else
                        ++failed;
                }
            const LogStats st = aggregate_log_stats(errs);
            const int flag = prev < 0 ? 1 : (st.geomean <= prev ? 1 : 0);
            agg << cfg.m_grid[mi] << "," << g17(st.geomean) << "," << g17(st.lo) << ","
                << g17(st.hi) << "," << st.used << "," << failed << "," << flag << "\n";
            prev = st.geomean;
        }
        std::ofstream plot(dir / "plot.gp");
        write_gnuplot_sweep(plot);
    }

    // manifest: config echo, derived values, per-trial seeds; no timestamps,
    // identical runs must produce identical bytes
    std::ofstream man(dir / "manifest.txt");
    man << "# manifest (" << kVersion << ")\n";
    man << cfg.serialize();
    man << "[derived]\n";
    man << "order_used = " << setup.order_used << "\n";
    man << "cardinality = " << setup.Lambda.size() << "\n";
    if (cfg.caption_N) man << "caption_N = " << *cfg.caption_N << "\n";
    if (cfg.target_N) man << "target_N = " << *cfg.target_N << "\n";
    man << "cardinality_mismatch = " << (setup.cardinality_mismatch ? "yes" : "no") << "\n";
    man << "K = " << (setup.mesh ? setup.mesh->interior_count() : 1) << "\n";
    man << "zeta_prime_index_map =";
    for (std::size_t z = 0; z < cfg.zeta_primes.size(); ++z)
        man << " z" << z << "=" << g17(cfg.zeta_primes[z]);
    man << "\n";
    for (const auto& r : rows)
        man << "trial m=" << r.m << " trial=" << r.trial << " seed=" << r.seed << " status=\""
            << r.status << "\"\n";
    for (const auto& n : notes) man << "note: " << n << "\n";

    return outcome;
}

} // namespace approx
