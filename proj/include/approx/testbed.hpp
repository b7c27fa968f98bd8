#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <span>
#include <functional>
#include <string>

#include "approx/hilbert.hpp"
#include "approx/multi_index.hpp"

namespace approx {

/// exp(-(1/2d) sum y_k); smooth, default d = 2.
double f1(std::span<const double> y);

/// exp(-(2/d) sum (y_k - w_k)^2) with w_k = (-1)^k/(k+1); default d = 16.
double f2(std::span<const double> y);

enum class DiffusionVariant { f3, f4 };

/// Diffusion coefficient a(x, y) of the parametric elliptic problem:
/// 5 + exp(x1 y1 + x2 y2) for f3 (d = 2), and the 30-dimensional layered
/// cosine/sine expansion for f4 (only x1 enters).
double diffusion_coefficient(DiffusionVariant v, const double* x, std::span<const double> y);

/// Uniform triangulation of the unit square: q nodes per side, every cell cut
/// along the same diagonal, interior nodes Dirichlet-free.
struct StructuredMesh {
    int q = 0;
    double dx = 0.0;

    static StructuredMesh unit_square(int q);

    int node_count() const { return q * q; }
    int element_count() const { return 2 * (q - 1) * (q - 1); }
    double mesh_size() const { return std::sqrt(2.0) * dx; }
    int interior_count() const { return (q - 2) * (q - 2); }

    /// Interior dof id for grid node (i, j); -1 on the boundary.
    int dof(int i, int j) const {
        if (i <= 0 || j <= 0 || i >= q - 1 || j >= q - 1) return -1;
        return (j - 1) * (q - 2) + (i - 1);
    }
    double node_x(int i) const { return i * dx; }
    double node_y(int j) const { return j * dx; }
};

/// Dirichlet-eliminated P1 system for -div(a grad u) = g on the interior dofs.
struct FemSystem {
    Eigen::SparseMatrix<double> stiffness;
    Eigen::VectorXd load;
};

/// One-point (centroid) quadrature for the coefficient, exact load for
/// constant g.
FemSystem assemble(const StructuredMesh& mesh,
                   const std::function<double(double, double)>& coefficient, double g = 10.0);

/// Direct sparse solve; context names the parameter point in error messages.
Eigen::VectorXd solve_diffusion(const FemSystem& system, const std::string& context = "");

/// Stiffness of the hat basis with unit coefficient: the inner-product
/// operator of the discretization space.
GramOperator h1_gram(const StructuredMesh& mesh);

/// Snapshot matrix: row i holds the interior-node coordinates of the solution
/// at parameter point i.
Eigen::MatrixXd diffusion_snapshots(const StructuredMesh& mesh, DiffusionVariant v,
                                    const Eigen::MatrixXd& points, double g = 10.0);

/// Coefficient-field plotting data: a(x, y) on an nx-per-side grid for one y.
void export_coefficient_field(DiffusionVariant v, std::span<const double> y, int nx,
                              std::ostream& out);

/// A synthetic target with a known sparse lower-set expansion; exact
/// coefficients make recovery checkable to machine precision.
struct SparsePolynomial {
    MultiIndexSet support;
    Eigen::VectorXd coefficients;
    Basis basis;

    double operator()(std::span<const double> y) const;

    /// Random instance: a lower set of the given size grown index by index,
    /// coefficient magnitudes in [0.5, 2] with random signs.
    static SparsePolynomial random(int terms, int d, Basis basis, std::uint64_t seed);
};

} // namespace approx
