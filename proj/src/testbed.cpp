#include "approx/testbed.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "approx/orthopoly.hpp"
#include "approx/rng.hpp"

namespace approx {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double f1(std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v;
    return std::exp(-s / (2.0 * static_cast<double>(y.size())));
}

double f2(std::span<const double> y) {
    const int d = static_cast<int>(y.size());
    double s = 0.0;
    for (int k = 1; k <= d; ++k) {
        const double w = (k % 2 == 0 ? 1.0 : -1.0) / (k + 1.0);
        const double t = y[k - 1] - w;
        s += t * t;
    }
    return std::exp(-2.0 * s / d);
}

double diffusion_coefficient(DiffusionVariant v, const double* x, std::span<const double> y) {
    if (v == DiffusionVariant::f3) {
        if (y.size() < 2) throw std::invalid_argument("f3 coefficient needs d = 2");
        return 5.0 + std::exp(x[0] * y[0] + x[1] * y[1]);
    }
    const int d = static_cast<int>(y.size());
    const double beta_c = 1.0 / 8.0;
    const double beta_p = std::max(1.0, 2.0 * beta_c);
    const double beta = beta_c / beta_p;
    double expo = 1.0 + y[0] * std::sqrt(std::sqrt(kPi) * beta / 2.0);
    for (int i = 2; i <= d; ++i) {
        const double half = std::floor(i / 2.0);
        const double zeta =
            std::sqrt(std::sqrt(kPi) * beta) * std::exp(-std::pow(half * kPi * beta, 2.0) / 8.0);
        const double arg = half * kPi * x[0] / beta_p;
        const double theta = (i % 2 == 0) ? std::sin(arg) : std::cos(arg);
        expo += zeta * theta * y[i - 1];
    }
    return std::exp(expo);
}

StructuredMesh StructuredMesh::unit_square(int q) {
    if (q < 3) throw std::invalid_argument("mesh needs at least 3 nodes per side");
    StructuredMesh m;
    m.q = q;
    m.dx = 1.0 / (q - 1);
    return m;
}

namespace {

struct Tri {
    int gi[3], gj[3]; // grid coordinates of the three vertices
};

// Each cell splits along the (i,j) -> (i+1,j+1) diagonal.
template <class Visit>
void for_each_triangle(const StructuredMesh& mesh, Visit&& visit) {
    for (int j = 0; j < mesh.q - 1; ++j)
        for (int i = 0; i < mesh.q - 1; ++i) {
            visit(Tri{{i, i + 1, i + 1}, {j, j, j + 1}});
            visit(Tri{{i, i + 1, i}, {j, j + 1, j + 1}});
        }
}

} // namespace

FemSystem assemble(const StructuredMesh& mesh,
                   const std::function<double(double, double)>& coefficient, double g) {
    const int K = mesh.interior_count();
    FemSystem sys;
    sys.stiffness.resize(K, K);
    sys.load = Eigen::VectorXd::Zero(K);

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.element_count()) * 9);
    const double area = 0.5 * mesh.dx * mesh.dx;

    for_each_triangle(mesh, [&](const Tri& t) {
        double px[3], py[3];
        int dof[3];
        for (int v = 0; v < 3; ++v) {
            px[v] = mesh.node_x(t.gi[v]);
            py[v] = mesh.node_y(t.gj[v]);
            dof[v] = mesh.dof(t.gi[v], t.gj[v]);
        }
        const double cx = (px[0] + px[1] + px[2]) / 3.0;
        const double cy = (py[0] + py[1] + py[2]) / 3.0;
        const double a = coefficient(cx, cy);
        if (!(a > 0.0))
            throw std::runtime_error("assemble: nonpositive coefficient at element centroid (" +
                                     std::to_string(cx) + ", " + std::to_string(cy) + ")");

        // P1 gradients: grad lambda_v = (b_v, c_v) / (2 area)
        double b[3], c[3];
        for (int v = 0; v < 3; ++v) {
            const int v1 = (v + 1) % 3, v2 = (v + 2) % 3;
            b[v] = py[v1] - py[v2];
            c[v] = px[v2] - px[v1];
        }
        for (int r = 0; r < 3; ++r) {
            if (dof[r] < 0) continue;
            sys.load[dof[r]] += g * area / 3.0;
            for (int s = 0; s < 3; ++s) {
                if (dof[s] < 0) continue;
                const double k_rs = a * (b[r] * b[s] + c[r] * c[s]) / (4.0 * area);
                trips.emplace_back(dof[r], dof[s], k_rs);
            }
        }
    });
    sys.stiffness.setFromTriplets(trips.begin(), trips.end());
    sys.stiffness.makeCompressed();
    return sys;
}

Eigen::VectorXd solve_diffusion(const FemSystem& system, const std::string& context) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system.stiffness);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_diffusion: factorization failed" +
                                 (context.empty() ? "" : " at " + context));
    Eigen::VectorXd u = solver.solve(system.load);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("solve_diffusion: solve failed" +
                                 (context.empty() ? "" : " at " + context));
    const double rhs_norm = system.load.norm();
    if (rhs_norm > 0.0) {
        const double rel = (system.stiffness * u - system.load).norm() / rhs_norm;
        if (rel > 1e-10)
            throw std::runtime_error("solve_diffusion: residual " + std::to_string(rel) +
                                     (context.empty() ? "" : " at " + context));
    }
    return u;
}

GramOperator h1_gram(const StructuredMesh& mesh) {
    const FemSystem sys = assemble(mesh, [](double, double) { return 1.0; }, 0.0);
    return GramOperator::from_sparse(sys.stiffness);
}

Eigen::MatrixXd diffusion_snapshots(const StructuredMesh& mesh, DiffusionVariant v,
                                    const Eigen::MatrixXd& points, double g) {
    const int m = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    Eigen::MatrixXd D(m, mesh.interior_count());
    std::vector<double> y(d);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < d; ++k) y[k] = points(i, k);
        const std::span<const double> ys(y.data(), y.size());
        const FemSystem sys = assemble(
            mesh, [&](double x0, double x1) {
                const double x[2] = {x0, x1};
                return diffusion_coefficient(v, x, ys);
            },
            g);
        D.row(i) = solve_diffusion(sys, "sample point " + std::to_string(i)).transpose();
    }
    return D;
}

void export_coefficient_field(DiffusionVariant v, std::span<const double> y, int nx,
                              std::ostream& out) {
    out << "x1,x2,a\n";
    char buf[96];
    for (int j = 0; j < nx; ++j)
        for (int i = 0; i < nx; ++i) {
            const double x[2] = {static_cast<double>(i) / (nx - 1),
                                 static_cast<double>(j) / (nx - 1)};
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x[0], x[1],
                          diffusion_coefficient(v, x, y));
            out << buf;
        }
}

double SparsePolynomial::operator()(std::span<const double> y) const {
    double s = 0.0;
    for (int j = 0; j < support.size(); ++j)
        s += coefficients[j] * eval_tensor(basis, support[j], y);
    return s;
}

SparsePolynomial SparsePolynomial::random(int terms, int d, Basis basis, std::uint64_t seed) {
    if (terms < 1 || d < 1) throw std::invalid_argument("SparsePolynomial: terms, d >= 1");
    Rng rng(seed);
    std::vector<MultiIndex> members{MultiIndex(d, 0)};
    auto contains = [&members](const MultiIndex& nu) {
        for (const auto& mu : members)
            if (mu == nu) return true;
        return false;
    };
    while (static_cast<int>(members.size()) < terms) {
        std::vector<MultiIndex> candidates;
        for (const auto& nu : members)
            for (int j = 0; j < d; ++j) {
                MultiIndex cand = nu;
                cand[j] += 1;
                if (contains(cand)) continue;
                bool lower = true;
                for (int k = 0; k < d && lower; ++k) {
                    if (cand[k] == 0) continue;
                    MultiIndex pred = cand;
                    pred[k] -= 1;
                    lower = contains(pred);
                }
                if (lower) candidates.push_back(std::move(cand));
            }
        members.push_back(candidates[rng.below(candidates.size())]);
    }
    SparsePolynomial p{MultiIndexSet(d, std::move(members), IndexSetKind::custom),
                       Eigen::VectorXd(terms), basis};
    for (int j = 0; j < terms; ++j) {
        const double mag = rng.uniform(0.5, 2.0);
        p.coefficients[j] = rng.uniform01() < 0.5 ? -mag : mag;
    }
    return p;
}

} // namespace approx
