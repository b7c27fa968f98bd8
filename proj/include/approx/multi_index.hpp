#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace approx {

/// A multi-index: a vector of nonnegative integer degrees, one per variable.
using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& nu);

/// Canonical comparison: ascending total degree, then descending
/// lexicographic on the entries, so that in two variables degree 2 lists as
/// (2,0), (1,1), (0,2).
bool canonical_less(const MultiIndex& a, const MultiIndex& b);

enum class IndexSetKind { hyperbolic_cross, hyperbolic_cross_infinite, custom };

std::string to_string(IndexSetKind kind);

/// An ordered, duplicate-free family of multi-indices in a fixed dimension.
/// The ordering fixed at construction is the row ordering used by every
/// downstream matrix and file format.
class MultiIndexSet {
public:
    MultiIndexSet(int dim, std::vector<MultiIndex> indices, IndexSetKind kind,
                  int order = 0);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(indices_.size()); }
    IndexSetKind kind() const { return kind_; }
    /// Order n of a hyperbolic cross; 0 for custom sets.
    int order() const { return order_; }

    const MultiIndex& operator[](int i) const { return indices_[i]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }

    bool contains(const MultiIndex& nu) const;
    /// Position of nu in the canonical ordering, or nullopt.
    std::optional<int> position(const MultiIndex& nu) const;

    /// Largest degree appearing in any coordinate.
    int max_degree() const;
    /// Largest coordinate index (1-based) with a nonzero entry; 0 for {0}.
    int max_active_coordinate() const;

    /// FNV-1a hash of (kind, order, dim, entries); pins the ordering in files.
    std::uint64_t ordering_hash() const;

    void serialize(std::ostream& out) const;
    static MultiIndexSet deserialize(std::istream& in);

private:
    int dim_;
    std::vector<MultiIndex> indices_;
    IndexSetKind kind_;
    int order_;
};

/// All nu in N_0^d with prod_k (nu_k + 1) <= n, canonically ordered.
/// The product test saturates at 64 bits, so large probes never wrap around
/// into false membership.
MultiIndexSet hyperbolic_cross(int n, int d);

/// The infinite-dimensional cross truncated to its first n coordinates;
/// identical to hyperbolic_cross(n, n) under the restriction map.
MultiIndexSet hyperbolic_cross_infinite(int n);

/// Downward closed: every componentwise-smaller index of a member is a member.
bool is_lower(const MultiIndexSet& set);

/// Lower, and e_j in the set implies e_1, ..., e_j are all in the set.
bool is_anchored(const MultiIndexSet& set);

struct Weights; // defined in orthopoly.hpp

/// Sum of squared weights over the subset given by positions into the set
/// ordering. Throws if a position has no weight.
double weighted_cardinality(const std::vector<int>& subset_positions, const Weights& w);

/// Weighted cardinality of the whole set.
double weighted_cardinality(const MultiIndexSet& set, const Weights& w);

enum class Basis; // defined in orthopoly.hpp

/// Closed-form bound on the largest weighted cardinality of a lower set of
/// size at most s under the intrinsic weights: s^2 for Legendre,
/// min{2^d s, s^{log3/log2}} for Chebyshev.
double lower_set_weight_budget_bound(int s, int d, Basis basis);

/// Exact value by enumeration of all lower sets of size <= s. Refuses
/// instances with s^d > 1e6; intended as a test oracle at small sizes.
double lower_set_weight_budget_exact(int s, int d, Basis basis);

struct CardinalityBounds {
    double cube;       // 2 n^3 4^d
    double power;      // e n^{2 + log2 d}
    double factorial;  // n (log n + d log 2)^{d-1} / (d-1)!
    double min() const;
};

/// The three standard upper bounds on |hyperbolic_cross(n, d)|.
CardinalityBounds hyperbolic_cross_cardinality_bounds(int n, int d);

} // namespace approx
