#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vla/bitstore.hpp"

namespace vla {

// Records which stored entries a query read, as (level, odd index) pairs.
// Callers own the trace, so a shared tree stays read-only under concurrent
// queries.
struct QueryTrace {
    std::vector<std::pair<unsigned, std::uint64_t>> touched;
    std::uint64_t words = 0;

    void note(unsigned level, std::uint64_t odd_index) {
        touched.emplace_back(level, odd_index);
        ++words;
    }
    void clear() {
        touched.clear();
        words = 0;
    }
};

// Binary indexed tree over positive values y_1..y_N, each at most 2^sigma.
//
// Node n (1-based) with lowest set bit 2^(k-1) stores y_{n-2^(k-1)+1} + ... + y_n.
// Writing n = j * 2^(k-1) with j odd, the node lives at level k, odd index j.
// Level k holds every such node with n <= N, packed at sigma + k - 1 bits.
// A sum of 2^(k-1) values can reach 2^(sigma+k-1), one past the field range,
// so each node stores its sum minus the number of summed values instead.
class PrefixSumTree {
public:
    PrefixSumTree() = default;

    std::uint64_t size() const noexcept { return size_; }
    unsigned sigma() const noexcept { return sigma_; }
    // Number of stored levels, floor(log2 N) + 1 (0 for an empty tree).
    unsigned level_count() const noexcept { return static_cast<unsigned>(levels_.size()); }
    // Level k (1-based).
    const PackedIntArray& level(unsigned k) const { return levels_.at(k - 1); }

    // Stored (offset) value of node (level k, odd index j).
    std::uint64_t stored(unsigned k, std::uint64_t odd_index) const;
    // The sum y_{(j-1)2^(k-1)+1} + ... + y_{j 2^(k-1)} that node holds.
    std::uint64_t node_sum(unsigned k, std::uint64_t odd_index) const;

    // y_1 + ... + y_j using the most-significant-bit-first walk over the
    // binary expansion of j. Throws BoundsError for j > N.
    std::uint64_t prefix_sum(std::uint64_t j, QueryTrace* trace = nullptr) const;
    // Same value via the classic walk that strips the lowest set bit of j.
    std::uint64_t prefix_sum_lowbit(std::uint64_t j, QueryTrace* trace = nullptr) const;

    // Payload bits over all levels.
    std::uint64_t memory_bits() const noexcept;

    // Level payloads concatenated from level 1 up.
    void append_to(BitSequence& out) const;
    // Inverse of append_to for a tree of n leaves and the given sigma.
    static PrefixSumTree read_from(const BitSequence& in, std::uint64_t offset, std::uint64_t n,
                                   unsigned sigma);
    // Bits append_to writes for a tree of n leaves.
    static std::uint64_t serialized_bits(std::uint64_t n, unsigned sigma);

    friend PrefixSumTree build_tree(std::span<const std::uint64_t> y, unsigned sigma);
    friend bool operator==(const PrefixSumTree&, const PrefixSumTree&) = default;

private:
    static std::uint64_t level_size(std::uint64_t n, unsigned k);

    std::vector<PackedIntArray> levels_;
    std::uint64_t size_ = 0;
    unsigned sigma_ = 0;
};

// Throws RangeError if any y is 0 or above 2^sigma, or sigma is outside
// 1..63. An empty y gives an empty tree.
PrefixSumTree build_tree(std::span<const std::uint64_t> y, unsigned sigma);

// Total payload bits of the tree (alias of PrefixSumTree::memory_bits).
inline std::uint64_t tree_memory_bits(const PrefixSumTree& t) { return t.memory_bits(); }

}  // namespace vla
