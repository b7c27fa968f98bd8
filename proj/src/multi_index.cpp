#include "approx/multi_index.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "approx/orthopoly.hpp"

namespace approx {

namespace {

void check_entries(const MultiIndex& nu) {
    for (int e : nu)
        if (e < 0) throw std::invalid_argument("multi-index entry must be nonnegative");
}

} // namespace

int total_degree(const MultiIndex& nu) {
    int s = 0;
    for (int e : nu) s += e;
    return s;
}

bool canonical_less(const MultiIndex& a, const MultiIndex& b) {
    const int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::string to_string(IndexSetKind kind) {
    switch (kind) {
        case IndexSetKind::hyperbolic_cross: return "hyperbolic-cross";
        case IndexSetKind::hyperbolic_cross_infinite: return "hyperbolic-cross-infinite";
        case IndexSetKind::custom: return "custom";
    }
    return "custom";
}

MultiIndexSet::MultiIndexSet(int dim, std::vector<MultiIndex> indices, IndexSetKind kind,
                             int order)
    : dim_(dim), indices_(std::move(indices)), kind_(kind), order_(order) {
    if (dim_ < 1) throw std::invalid_argument("dimension must be >= 1");
    for (const auto& nu : indices_) {
        if (static_cast<int>(nu.size()) != dim_)
            throw std::invalid_argument("multi-index length does not match set dimension");
        check_entries(nu);
    }
    std::sort(indices_.begin(), indices_.end(), canonical_less);
    for (std::size_t i = 1; i < indices_.size(); ++i)
        if (indices_[i] == indices_[i - 1])
            throw std::invalid_argument("duplicate multi-index");
}

bool MultiIndexSet::contains(const MultiIndex& nu) const {
    return position(nu).has_value();
}

std::optional<int> MultiIndexSet::position(const MultiIndex& nu) const {
    auto it = std::lower_bound(indices_.begin(), indices_.end(), nu, canonical_less);
    if (it != indices_.end() && *it == nu)
        return static_cast<int>(it - indices_.begin());
    return std::nullopt;
}

int MultiIndexSet::max_degree() const {
    int m = 0;
    for (const auto& nu : indices_)
        for (int e : nu) m = std::max(m, e);
    return m;
}

int MultiIndexSet::max_active_coordinate() const {
    int k = 0;
    for (const auto& nu : indices_)
        for (int j = dim_ - 1; j >= 0; --j)
            if (nu[j] != 0) {
                k = std::max(k, j + 1);
                break;
            }
    return k;
}

std::uint64_t MultiIndexSet::ordering_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    mix(static_cast<std::uint64_t>(kind_));
    mix(static_cast<std::uint64_t>(order_));
    mix(static_cast<std::uint64_t>(dim_));
    for (const auto& nu : indices_)
        for (int e : nu) mix(static_cast<std::uint64_t>(e));
    return h;
}

void MultiIndexSet::serialize(std::ostream& out) const {
    out << "d=" << dim_ << " n=" << order_ << " kind=" << to_string(kind_) << "\n";
    for (const auto& nu : indices_) {
        for (int j = 0; j < dim_; ++j) out << (j ? " " : "") << nu[j];
        out << "\n";
    }
}

MultiIndexSet MultiIndexSet::deserialize(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty index set stream");
    int d = 0, n = 0;
    std::string kind_str;
    {
        std::istringstream hs(header);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("d=", 0) == 0) d = std::stoi(tok.substr(2));
            else if (tok.rfind("n=", 0) == 0) n = std::stoi(tok.substr(2));
            else if (tok.rfind("kind=", 0) == 0) kind_str = tok.substr(5);
        }
    }
    if (d < 1) throw std::runtime_error("bad index set header: " + header);
    IndexSetKind kind = IndexSetKind::custom;
    if (kind_str == "hyperbolic-cross") kind = IndexSetKind::hyperbolic_cross;
    else if (kind_str == "hyperbolic-cross-infinite") kind = IndexSetKind::hyperbolic_cross_infinite;
    std::vector<MultiIndex> indices;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) break;
        std::istringstream ls(line);
        MultiIndex nu(d);
        for (int j = 0; j < d; ++j)
            if (!(ls >> nu[j])) throw std::runtime_error("bad index line: " + line);
        indices.push_back(std::move(nu));
    }
    return MultiIndexSet(d, std::move(indices), kind, n);
}

namespace {

void enumerate_cross(int n, int d, int coord, std::int64_t prefix, MultiIndex& nu,
                     std::vector<MultiIndex>& out) {
    if (coord == d) {
        out.push_back(nu);
        return;
    }
    for (int e = 0;; ++e) {
        std::int64_t p;
        if (__builtin_mul_overflow(prefix, static_cast<std::int64_t>(e) + 1, &p)) break;
        if (p > n) break;
        nu[coord] = e;
        enumerate_cross(n, d, coord + 1, p, nu, out);
    }
    nu[coord] = 0;
}

} // namespace

MultiIndexSet hyperbolic_cross(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("hyperbolic_cross requires n >= 1, d >= 1");
    std::vector<MultiIndex> indices;
    MultiIndex nu(d, 0);
    enumerate_cross(n, d, 0, 1, nu, indices);
    return MultiIndexSet(d, std::move(indices), IndexSetKind::hyperbolic_cross, n);
}

MultiIndexSet hyperbolic_cross_infinite(int n) {
    if (n < 1) throw std::invalid_argument("hyperbolic_cross_infinite requires n >= 1");
    std::vector<MultiIndex> indices;
    MultiIndex nu(n, 0);
    enumerate_cross(n, n, 0, 1, nu, indices);
    return MultiIndexSet(n, std::move(indices), IndexSetKind::hyperbolic_cross_infinite, n);
}

bool is_lower(const MultiIndexSet& set) {
    for (const auto& nu : set.indices()) {
        for (int j = 0; j < set.dim(); ++j) {
            if (nu[j] == 0) continue;
            MultiIndex mu = nu;
            mu[j] -= 1;
            if (!set.contains(mu)) return false;
        }
    }
    return true;
}

bool is_anchored(const MultiIndexSet& set) {
    if (!is_lower(set)) return false;
    // highest j with e_j in the set
    int top = 0;
    MultiIndex ej(set.dim(), 0);
    for (int j = 0; j < set.dim(); ++j) {
        ej.assign(set.dim(), 0);
        ej[j] = 1;
        if (set.contains(ej)) top = j + 1;
    }
    for (int j = 0; j < top; ++j) {
        ej.assign(set.dim(), 0);
        ej[j] = 1;
        if (!set.contains(ej)) return false;
    }
    return true;
}

double weighted_cardinality(const std::vector<int>& subset_positions, const Weights& w) {
    double s = 0.0;
    for (int i : subset_positions) {
        if (i < 0 || i >= static_cast<int>(w.values.size()))
            throw std::out_of_range("weighted_cardinality: index has no weight");
        s += w.values[i] * w.values[i];
    }
    return s;
}

double weighted_cardinality(const MultiIndexSet& set, const Weights& w) {
    if (static_cast<int>(w.values.size()) != set.size())
        throw std::invalid_argument("weighted_cardinality: weights not aligned with set");
    double s = 0.0;
    for (double v : w.values) s += v * v;
    return s;
}

double lower_set_weight_budget_bound(int s, int d, Basis basis) {
    if (s < 1) throw std::invalid_argument("lower_set_weight_budget: s >= 1 required");
    if (basis == Basis::legendre) return static_cast<double>(s) * s;
    const double ds = static_cast<double>(s);
    return std::min(std::ldexp(ds, d), std::pow(ds, std::log(3.0) / std::log(2.0)));
}

namespace {

double intrinsic_weight_sq(const MultiIndex& nu, Basis basis) {
    if (basis == Basis::legendre) {
        double p = 1.0;
        for (int e : nu) p *= 2.0 * e + 1.0;
        return p;
    }
    double p = 1.0;
    for (int e : nu)
        if (e != 0) p *= 2.0;
    return p;
}

std::string key_of(const std::set<MultiIndex>& s) {
    std::string k;
    for (const auto& nu : s) {
        for (int e : nu) k += std::to_string(e) + ",";
        k += ";";
    }
    return k;
}

} // namespace

double lower_set_weight_budget_exact(int s, int d, Basis basis) {
    if (s < 1 || d < 1) throw std::invalid_argument("lower_set_weight_budget: s, d >= 1 required");
    if (std::pow(static_cast<double>(s), d) > 1e6)
        throw std::invalid_argument("lower_set_weight_budget_exact: instance too large (s^d > 1e6)");

    // Grow lower sets one index at a time; dedupe via canonical string keys.
    const MultiIndex zero(d, 0);
    std::set<MultiIndex> seed{zero};
    std::unordered_set<std::string> seen{key_of(seed)};
    std::vector<std::set<MultiIndex>> frontier{seed};
    double best = intrinsic_weight_sq(zero, basis);

    for (int size = 1; size < s; ++size) {
        std::vector<std::set<MultiIndex>> next;
        for (const auto& cur : frontier) {
            for (const auto& nu : cur) {
                for (int j = 0; j < d; ++j) {
                    MultiIndex cand = nu;
                    cand[j] += 1;
                    if (cand[j] >= s) continue; // a lower set of size <= s stays below s per axis
                    if (cur.count(cand)) continue;
                    bool lower = true;
                    for (int k = 0; k < d && lower; ++k) {
                        if (cand[k] == 0) continue;
                        MultiIndex pred = cand;
                        pred[k] -= 1;
                        lower = cur.count(pred) > 0;
                    }
                    if (!lower) continue;
                    auto grown = cur;
                    grown.insert(cand);
                    auto key = key_of(grown);
                    if (!seen.insert(key).second) continue;
                    double wsum = 0.0;
                    for (const auto& mu : grown) wsum += intrinsic_weight_sq(mu, basis);
                    best = std::max(best, wsum);
                    next.push_back(std::move(grown));
                }
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return best;
}

double CardinalityBounds::min() const { return std::min({cube, power, factorial}); }

CardinalityBounds hyperbolic_cross_cardinality_bounds(int n, int d) {
    if (n < 1 || d < 1) throw std::invalid_argument("bounds require n >= 1, d >= 1");
    const double nd = n, dd = d;
    CardinalityBounds b{};
    b.cube = 2.0 * nd * nd * nd * std::pow(4.0, dd);
    b.power = std::exp(1.0) * std::pow(nd, 2.0 + std::log(dd) / std::log(2.0));
    double log_fact = std::lgamma(dd); // log((d-1)!)
    b.factorial = nd * std::exp((dd - 1.0) * std::log(std::log(nd) + dd * std::log(2.0)) - log_fact);
    return b;
}

} // namespace approx
