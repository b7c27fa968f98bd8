#include <doctest.h>

#include <cmath>
#include <sstream>

#include "approx/multi_index.hpp"
#include "approx/orthopoly.hpp"

using namespace approx;

namespace {

// Brute-force oracle: every index in the box [0, n]^d against the product
// condition, independently of the production enumeration.
std::vector<MultiIndex> brute_force_cross(int n, int d) {
    std::vector<MultiIndex> out;
    MultiIndex nu(d, 0);
    for (;;) {
        long p = 1;
        for (int e : nu) p *= e + 1;
        if (p <= n) out.push_back(nu);
        int k = 0;
        while (k < d && ++nu[k] > n) nu[k++] = 0;
        if (k == d) break;
    }
    return out;
}

} // namespace

TEST_SUITE("multi_index") {

TEST_CASE("hyperbolic cross basics") {
    CHECK(hyperbolic_cross(1, 3).size() == 1);
    CHECK(hyperbolic_cross(1, 3)[0] == MultiIndex{0, 0, 0});
    CHECK(hyperbolic_cross(5, 1).size() == 5);

    const auto s = hyperbolic_cross(3, 2);
    REQUIRE(s.size() == 5);
    CHECK(s[0] == MultiIndex{0, 0});
    CHECK(s[1] == MultiIndex{1, 0});
    CHECK(s[2] == MultiIndex{0, 1});
    CHECK(s[3] == MultiIndex{2, 0});
    CHECK(s[4] == MultiIndex{0, 2});
}

TEST_CASE("hyperbolic cross matches the brute-force oracle") {
    for (const auto [n, d] : {std::pair{3, 2}, {7, 3}, {12, 2}, {4, 4}}) {
        const auto set = hyperbolic_cross(n, d);
        const auto oracle = brute_force_cross(n, d);
        REQUIRE(set.size() == static_cast<int>(oracle.size()));
        for (const auto& nu : oracle) CHECK(set.contains(nu));
    }
}

TEST_CASE("infinite-dimensional cross is the d = n cross") {
    CHECK(hyperbolic_cross_infinite(1).size() == 1);
    const auto s2 = hyperbolic_cross_infinite(2);
    REQUIRE(s2.size() == 3);
    CHECK(s2.contains(MultiIndex{0, 0}));
    CHECK(s2.contains(MultiIndex{1, 0}));
    CHECK(s2.contains(MultiIndex{0, 1}));
    CHECK(hyperbolic_cross_infinite(3).size() ==
          static_cast<int>(brute_force_cross(3, 3).size()));
    CHECK(hyperbolic_cross_infinite(3).size() == 7);
}

TEST_CASE("lower and anchored predicates") {
    const MultiIndexSet single(2, {{0, 0}}, IndexSetKind::custom);
    CHECK(is_lower(single));
    CHECK(is_anchored(single));

    const MultiIndexSet gap(2, {{0, 0}, {1, 1}}, IndexSetKind::custom);
    CHECK_FALSE(is_lower(gap));

    const MultiIndexSet e2_only(2, {{0, 0}, {0, 1}}, IndexSetKind::custom);
    CHECK(is_lower(e2_only));
    CHECK_FALSE(is_anchored(e2_only));

    for (const auto [n, d] : {std::pair{6, 2}, {4, 3}}) {
        CHECK(is_lower(hyperbolic_cross(n, d)));
        CHECK(is_anchored(hyperbolic_cross(n, d)));
    }
    CHECK(is_anchored(hyperbolic_cross_infinite(4)));
}

TEST_CASE("monotonicity in the order") {
    for (int n = 1; n < 8; ++n) {
        const auto small = hyperbolic_cross(n, 3);
        const auto big = hyperbolic_cross(n + 1, 3);
        for (const auto& nu : small.indices()) CHECK(big.contains(nu));
    }
}

TEST_CASE("weighted cardinality") {
    const auto set = hyperbolic_cross(2, 1); // {0, 1}
    const Weights cheb = intrinsic_weights(Basis::chebyshev, set);
    CHECK(weighted_cardinality(set, cheb) == doctest::Approx(3.0)); // 1 + 2
    CHECK(weighted_cardinality(std::vector<int>{}, cheb) == 0.0);
    CHECK(weighted_cardinality(std::vector<int>{0}, cheb) == doctest::Approx(1.0));
    CHECK_THROWS(weighted_cardinality(std::vector<int>{5}, cheb));

    // w == 1 gives the plain cardinality
    const auto s2 = hyperbolic_cross(4, 2);
    const Weights ones(std::vector<double>(s2.size(), 1.0));
    CHECK(weighted_cardinality(s2, ones) == doctest::Approx(s2.size()));
}

TEST_CASE("cardinality bounds hold at desk scale") {
    for (const auto [n, d] : {std::pair{1, 1}, {3, 2}, {8, 2}, {5, 3}, {16, 4}, {40, 2}}) {
        const auto set = hyperbolic_cross(n, d);
        const auto b = hyperbolic_cross_cardinality_bounds(n, d);
        CHECK(set.size() <= b.cube);
        CHECK(set.size() <= b.power);
        CHECK(set.size() <= b.factorial);
    }
}

TEST_CASE("lower-set weight budget") {
    CHECK(lower_set_weight_budget_bound(3, 1, Basis::legendre) == doctest::Approx(9.0));
    CHECK(lower_set_weight_budget_exact(1, 1, Basis::legendre) == doctest::Approx(1.0));
    CHECK(lower_set_weight_budget_exact(1, 3, Basis::chebyshev) == doctest::Approx(1.0));

    // d = 1, Chebyshev: the only lower sets are prefixes {0..j}; max budget
    // over size <= 2 is 1 + 2 = 3, and the bound min{4, 3} is tight.
    CHECK(lower_set_weight_budget_exact(2, 1, Basis::chebyshev) == doctest::Approx(3.0));
    CHECK(lower_set_weight_budget_bound(2, 1, Basis::chebyshev) == doctest::Approx(3.0));

    // Legendre exact equals s^2 (attained on the 1-D prefix set)
    for (int s = 1; s <= 4; ++s)
        CHECK(lower_set_weight_budget_exact(s, 2, Basis::legendre) ==
              doctest::Approx(static_cast<double>(s) * s));

    // exact never exceeds the closed-form bound
    for (int s = 1; s <= 4; ++s)
        for (int d = 1; d <= 3; ++d)
            CHECK(lower_set_weight_budget_exact(s, d, Basis::chebyshev) <=
                  lower_set_weight_budget_bound(s, d, Basis::chebyshev) + 1e-12);

    CHECK_THROWS(lower_set_weight_budget_exact(100, 4, Basis::legendre));
}

TEST_CASE("serialization round trip") {
    const auto set = hyperbolic_cross(5, 3);
    std::stringstream ss;
    set.serialize(ss);
    const auto back = MultiIndexSet::deserialize(ss);
    CHECK(back.dim() == set.dim());
    CHECK(back.order() == set.order());
    CHECK(back.kind() == set.kind());
    REQUIRE(back.size() == set.size());
    for (int i = 0; i < set.size(); ++i) CHECK(back[i] == set[i]);
    CHECK(back.ordering_hash() == set.ordering_hash());
}

TEST_CASE("constructor rejections") {
    CHECK_THROWS(MultiIndexSet(2, {{0, 0}, {0, 0}}, IndexSetKind::custom));
    CHECK_THROWS(MultiIndexSet(2, {{0, 0, 0}}, IndexSetKind::custom));
    CHECK_THROWS(MultiIndexSet(2, {{0, -1}}, IndexSetKind::custom));
    CHECK_THROWS(hyperbolic_cross(0, 2));
}

} // TEST_SUITE

