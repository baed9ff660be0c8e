#include "vla/prefix_tree.hpp"

#include <bit>
#include <string>

#include "vla/errors.hpp"

namespace vla {

std::uint64_t PrefixSumTree::level_size(std::uint64_t n, unsigned k) {
    // Odd j with j * 2^(k-1) <= n.
    return ((n >> (k - 1)) + 1) / 2;
}

PrefixSumTree build_tree(std::span<const std::uint64_t> y, unsigned sigma) {
    if (sigma == 0 || sigma >= kMaxFieldWidth) {
        throw RangeError("sigma " + std::to_string(sigma) + " outside 1..63");
    }
    const std::uint64_t n = y.size();
    const unsigned levels = bits_for(n);
    if (levels != 0 && sigma + levels - 1 > kMaxFieldWidth) {
        throw RangeError("tree too deep for 64-bit level fields");
    }
    const std::uint64_t max_value = std::uint64_t{1} << sigma;

    // fen[n] = sum of the lowbit(n) values ending at position n (1-based).
    std::vector<std::uint64_t> fen(n + 1, 0);
    for (std::uint64_t i = 1; i <= n; ++i) {
        const std::uint64_t v = y[i - 1];
        if (v == 0 || v > max_value) {
            throw RangeError("y_" + std::to_string(i) + " = " + std::to_string(v) +
                             " outside 1.." + std::to_string(max_value));
        }
        fen[i] += v;
        if (const std::uint64_t up = i + (i & (~i + 1)); up <= n) {
            fen[up] += fen[i];
        }
    }

    PrefixSumTree t;
    t.size_ = n;
    t.sigma_ = sigma;
    t.levels_.reserve(levels);
    for (unsigned k = 1; k <= levels; ++k) {
        t.levels_.emplace_back(PrefixSumTree::level_size(n, k), sigma + k - 1);
    }
    for (std::uint64_t node = 1; node <= n; ++node) {
        const unsigned k = static_cast<unsigned>(std::countr_zero(node)) + 1;
        const std::uint64_t odd = node >> (k - 1);
        // set() rejects values that overflow the level width.
        t.levels_[k - 1].set((odd - 1) / 2, fen[node] - (std::uint64_t{1} << (k - 1)));
    }
    return t;
}

std::uint64_t PrefixSumTree::stored(unsigned k, std::uint64_t odd_index) const {
    if (k == 0 || k > levels_.size() || (odd_index & 1) == 0) {
        throw BoundsError("no node at level " + std::to_string(k) + ", index " +
                          std::to_string(odd_index));
    }
    return levels_[k - 1].get((odd_index - 1) / 2);
}

std::uint64_t PrefixSumTree::node_sum(unsigned k, std::uint64_t odd_index) const {
    return stored(k, odd_index) + (std::uint64_t{1} << (k - 1));
}

std::uint64_t PrefixSumTree::prefix_sum(std::uint64_t j, QueryTrace* trace) const {
    if (j > size_) {
        throw BoundsError("prefix length " + std::to_string(j) + " > " + std::to_string(size_));
    }
    if (j == 0) {
        return 0;
    }
    // bin_{nu+1}(j) read from its most significant bit; T accumulates the
    // bits seen so far and is odd whenever the current bit is set.
    const unsigned nu = level_count() - 1;
    std::uint64_t sum = 0;
    std::uint64_t prefix = 0;
    for (unsigned i = 0; i <= nu; ++i) {
        const std::uint64_t bit = (j >> (nu - i)) & 1;
        prefix = 2 * prefix + bit;
        if (bit != 0) {
            const unsigned k = nu - i + 1;
            sum += levels_[k - 1].get((prefix - 1) / 2) + (std::uint64_t{1} << (k - 1));
            if (trace != nullptr) {
                trace->note(k, prefix);
            }
        }
    }
    return sum;
}

std::uint64_t PrefixSumTree::prefix_sum_lowbit(std::uint64_t j, QueryTrace* trace) const {
    if (j > size_) {
        throw BoundsError("prefix length " + std::to_string(j) + " > " + std::to_string(size_));
    }
    std::uint64_t sum = 0;
    while (j != 0) {
        const unsigned k = static_cast<unsigned>(std::countr_zero(j)) + 1;
        const std::uint64_t odd = j >> (k - 1);
        sum += levels_[k - 1].get((odd - 1) / 2) + (std::uint64_t{1} << (k - 1));
        if (trace != nullptr) {
            trace->note(k, odd);
        }
        j &= j - 1;
    }
    return sum;
}

std::uint64_t PrefixSumTree::memory_bits() const noexcept {
    std::uint64_t bits = 0;
    for (const auto& level : levels_) {
        bits += level.payload_bits();
    }
    return bits;
}

void PrefixSumTree::append_to(BitSequence& out) const {
    for (const auto& level : levels_) {
        level.append_to(out);
    }
}

std::uint64_t PrefixSumTree::serialized_bits(std::uint64_t n, unsigned sigma) {
    std::uint64_t bits = 0;
    for (unsigned k = 1; k <= bits_for(n); ++k) {
        bits += level_size(n, k) * (sigma + k - 1);
    }
    return bits;
}

PrefixSumTree PrefixSumTree::read_from(const BitSequence& in, std::uint64_t offset,
                                       std::uint64_t n, unsigned sigma) {
    if (sigma == 0 || sigma >= kMaxFieldWidth || (n != 0 && sigma + bits_for(n) - 1 > kMaxFieldWidth)) {
        throw CorruptionError("invalid tree parameters");
    }
    PrefixSumTree t;
    t.size_ = n;
    t.sigma_ = sigma;
    for (unsigned k = 1; k <= bits_for(n); ++k) {
        const std::uint64_t count = level_size(n, k);
        t.levels_.push_back(PackedIntArray::read_from(in, offset, count, sigma + k - 1));
        offset += count * (sigma + k - 1);
    }
    return t;
}

}  // namespace vla
