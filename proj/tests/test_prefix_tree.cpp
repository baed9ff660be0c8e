#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "vla/errors.hpp"
#include "vla/prefix_tree.hpp"

using namespace vla;

namespace {

using Touched = std::vector<std::pair<unsigned, std::uint64_t>>;

std::vector<std::uint64_t> random_y(std::size_t n, unsigned sigma, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> dist(1, std::uint64_t{1} << sigma);
    std::vector<std::uint64_t> y(n);
    for (auto& v : y) {
        v = dist(rng);
    }
    return y;
}

}  // namespace

TEST_CASE("eight leaves: level contents") {
    const std::vector<std::uint64_t> y = {3, 1, 4, 1, 5, 2, 6, 5};
    const PrefixSumTree t = build_tree(y, 3);
    REQUIRE(t.level_count() == 4);
    CHECK(t.level(1).size() == 4);
    CHECK(t.level(2).size() == 2);
    CHECK(t.level(3).size() == 1);
    CHECK(t.level(4).size() == 1);
    CHECK(t.node_sum(1, 1) == y[0]);
    CHECK(t.node_sum(1, 3) == y[2]);
    CHECK(t.node_sum(1, 5) == y[4]);
    CHECK(t.node_sum(1, 7) == y[6]);
    CHECK(t.node_sum(2, 1) == y[0] + y[1]);
    CHECK(t.node_sum(2, 3) == y[4] + y[5]);
    CHECK(t.node_sum(3, 1) == y[0] + y[1] + y[2] + y[3]);
    CHECK(t.node_sum(4, 1) == 27);
    // Stored values carry the minus-count offset.
    CHECK(t.stored(2, 1) == y[0] + y[1] - 2);
    CHECK_THROWS_AS(t.stored(2, 2), BoundsError);
    CHECK_THROWS_AS(t.stored(5, 1), BoundsError);
}

TEST_CASE("eight leaves: query decompositions") {
    const std::vector<std::uint64_t> y = {3, 1, 4, 1, 5, 2, 6, 5};
    const PrefixSumTree t = build_tree(y, 3);
    QueryTrace trace;
    CHECK(t.prefix_sum(7, &trace) == 3 + 1 + 4 + 1 + 5 + 2 + 6);
    CHECK(trace.touched == Touched{{3, 1}, {2, 3}, {1, 7}});
    trace.clear();
    CHECK(t.prefix_sum(5, &trace) == 3 + 1 + 4 + 1 + 5);
    CHECK(trace.touched == Touched{{3, 1}, {1, 5}});
    trace.clear();
    CHECK(t.prefix_sum(3, &trace) == 8);
    CHECK(trace.touched == Touched{{2, 1}, {1, 3}});
    trace.clear();
    CHECK(t.prefix_sum(8, &trace) == 27);
    CHECK(trace.touched == Touched{{4, 1}});
    trace.clear();
    CHECK(t.prefix_sum(0, &trace) == 0);
    CHECK(trace.words == 0);
    CHECK_THROWS_AS(t.prefix_sum(9), BoundsError);
}

TEST_CASE("single leaf") {
    const std::vector<std::uint64_t> y = {3};
    const PrefixSumTree t = build_tree(y, 3);
    REQUIRE(t.level_count() == 1);
    CHECK(t.level(1).size() == 1);
    CHECK(t.stored(1, 1) == 2);
    CHECK(t.prefix_sum(1) == 3);
    CHECK(tree_memory_bits(t) == 3);
}

TEST_CASE("six leaves follow the binary indexed layout") {
    const std::vector<std::uint64_t> y = {1, 2, 3, 4, 5, 6};
    const PrefixSumTree t = build_tree(y, 3);
    // Node n covers the lowbit(n) values ending at n; computed by direct summation.
    const auto direct = [&](std::uint64_t node) {
        const std::uint64_t span = node & (~node + 1);
        std::uint64_t s = 0;
        for (std::uint64_t k = node - span + 1; k <= node; ++k) {
            s += y[k - 1];
        }
        return s;
    };
    const std::vector<std::uint64_t> expected = {1, 3, 3, 10, 5, 11};
    for (std::uint64_t node = 1; node <= 6; ++node) {
        CHECK(direct(node) == expected[node - 1]);
        const unsigned k = static_cast<unsigned>(std::countr_zero(node)) + 1;
        CHECK(t.node_sum(k, node >> (k - 1)) == expected[node - 1]);
    }
    CHECK(t.level_count() == 3);
    CHECK(t.level(1).size() == 3);
    CHECK(t.level(2).size() == 2);
    CHECK(t.level(3).size() == 1);
}

TEST_CASE("build_tree rejects out-of-range lengths") {
    CHECK_THROWS_AS(build_tree(std::vector<std::uint64_t>{1, 0, 2}, 3), RangeError);
    CHECK_THROWS_AS(build_tree(std::vector<std::uint64_t>{9}, 3), RangeError);
    CHECK_NOTHROW(build_tree(std::vector<std::uint64_t>{8}, 3));
    CHECK_THROWS_AS(build_tree(std::vector<std::uint64_t>{1}, 0), RangeError);
    const PrefixSumTree empty = build_tree(std::vector<std::uint64_t>{}, 3);
    CHECK(empty.size() == 0);
    CHECK(empty.prefix_sum(0) == 0);
    CHECK(empty.memory_bits() == 0);
}

TEST_CASE("memory: level counts times widths") {
    std::mt19937_64 rng(1);
    const PrefixSumTree eight = build_tree(random_y(8, 3, rng), 3);
    CHECK(tree_memory_bits(eight) == 4 * 3 + 2 * 4 + 1 * 5 + 1 * 6);
    CHECK(tree_memory_bits(eight) == 31);
    CHECK(31 <= 8 * (3 + 1));

    const std::uint64_t n = 1 << 16;
    const PrefixSumTree big = build_tree(random_y(n, 5, rng), 5);
    std::uint64_t closed_form = 0;
    for (unsigned k = 1; k <= 16; ++k) {
        closed_form += (n >> k) * (5 + k - 1);
    }
    closed_form += 5 + 16;  // the root level
    CHECK(tree_memory_bits(big) == closed_form);
    CHECK(tree_memory_bits(big) <= n * 6);
    CHECK(PrefixSumTree::serialized_bits(n, 5) == closed_form);
}

TEST_CASE("property: prefix sums match direct summation for every N and j") {
    std::mt19937_64 rng(17);
    for (std::size_t n = 1; n <= 600; ++n) {
        const unsigned sigma = 1 + static_cast<unsigned>(rng() % 5);
        const auto y = random_y(n, sigma, rng);
        const auto expected = oracle::prefix_sums(y);
        const PrefixSumTree t = build_tree(y, sigma);
        for (std::uint64_t j = 0; j <= n; ++j) {
            QueryTrace a;
            QueryTrace b;
            REQUIRE(t.prefix_sum(j, &a) == expected[j]);
            REQUIRE(t.prefix_sum_lowbit(j, &b) == expected[j]);
            // Both walks read the same nodes, at most one per level.
            REQUIRE(a.words == b.words);
            REQUIRE(a.words <= t.level_count());
        }
    }
}

TEST_CASE("property: stored values fit their level widths at the extremes") {
    for (unsigned sigma = 1; sigma <= 6; ++sigma) {
        for (std::size_t n : {1u, 2u, 7u, 64u, 1000u}) {
            const std::vector<std::uint64_t> top(n, std::uint64_t{1} << sigma);
            const std::vector<std::uint64_t> bottom(n, 1);
            CHECK(build_tree(top, sigma).prefix_sum(n) == n << sigma);
            CHECK(build_tree(bottom, sigma).prefix_sum(n) == n);
        }
    }
}

TEST_CASE("property: memory stays within N(sigma+1) for any N") {
    for (unsigned sigma = 1; sigma <= 6; ++sigma) {
        for (std::uint64_t n = 1; n <= 3000; ++n) {
            REQUIRE(PrefixSumTree::serialized_bits(n, sigma) <= n * (sigma + 1));
        }
    }
}

TEST_CASE("serialization round trip") {
    std::mt19937_64 rng(4);
    for (std::size_t n : {1u, 5u, 8u, 100u, 1023u}) {
        const auto y = random_y(n, 4, rng);
        const PrefixSumTree t = build_tree(y, 4);
        BitSequence bits;
        bits.append_bits(3, 2);
        t.append_to(bits);
        CHECK(bits.size() == 2 + PrefixSumTree::serialized_bits(n, 4));
        CHECK(PrefixSumTree::read_from(bits, 2, n, 4) == t);
    }
}
