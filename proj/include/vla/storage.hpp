#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vla/bitstore.hpp"
#include "vla/codes.hpp"
#include "vla/prefix_tree.hpp"

namespace vla {

enum class Variant : std::uint8_t {
    Fixed = 0,        // bin_l(x_i), l = ceil(log2 L); no index
    SigmaTr = 1,      // trimmed codewords + flat stream of lengths
    SigmaBit = 2,     // trimmed codewords + prefix-sum tree over lengths
    Blocked = 3,      // per-block trees + table of block start offsets
    Superletter = 4,  // blocks of M letters coded as letters of their own
};

std::string_view variant_name(Variant v);
// Accepts the CLI spellings: fixed, sigma-tr, sigma-bit, blocked, superletter.
std::optional<Variant> parse_variant(std::string_view name);

// Counts index words read by one access. z reads are not counted.
struct AccessCounter {
    std::uint64_t index_words = 0;
};

// Index for Blocked: x is cut into blocks of block_len letters (the last may
// be shorter); starts[r] is the bit offset of block r in z.
struct BlockIndex {
    std::uint64_t block_len = 0;
    PackedIntArray starts;
    std::vector<PrefixSumTree> trees;

    friend bool operator==(const BlockIndex&, const BlockIndex&) = default;
};

// Index for Superletter: words[b] is the letter string of block-letter b.
// The block-letter sequence is stored with a tree over its codeword lengths.
struct SuperletterIndex {
    std::uint64_t block_len = 0;
    std::vector<std::vector<Letter>> words;
    PrefixSumTree tree;

    friend bool operator==(const SuperletterIndex&, const SuperletterIndex&) = default;
};

using SequenceIndex =
    std::variant<std::monostate, PackedIntArray, PrefixSumTree, BlockIndex, SuperletterIndex>;

struct StorageStats {
    Variant variant = Variant::Fixed;
    std::uint64_t letters = 0;          // N
    std::uint32_t alphabet_size = 0;    // L
    std::uint64_t z_bits = 0;
    std::uint64_t index_bits = 0;
    std::uint64_t codebook_bits = 0;
    std::uint64_t payload_bits = 0;     // z + index, what the size bounds cover
    std::uint64_t total_bits = 0;       // payload + codebook
    double bits_per_letter = 0;         // payload_bits / N
    double total_bits_per_letter = 0;   // total_bits / N
    double empirical_h1 = 0;
    double empirical_hM = 0;            // Superletter only
    std::uint64_t block_len = 0;        // M for Blocked / Superletter
    std::uint64_t blocks = 0;           // m for Blocked / Superletter
    double bound_bits = 0;
    double slack = 0;                   // bound_bits - payload_bits
    // Superletter only: the additive constant C for which
    // payload = N h_M + (N/M)(log M + log log L + C).
    double measured_constant = 0;
};

// A letter sequence stored for direct access. Immutable once built; access
// is const and safe to call from many threads at once.
class CompressedSequence {
public:
    CompressedSequence() = default;

    Variant variant() const noexcept { return variant_; }
    std::uint64_t size() const noexcept { return size_; }
    std::uint32_t alphabet_size() const noexcept { return alphabet_size_; }
    const BitSequence& z() const noexcept { return z_; }
    const SequenceIndex& index() const noexcept { return index_; }
    // Fixed: the fixed-width code. Others: the Huffman code that was trimmed
    // (over block-letters for Superletter).
    const CodeBook& base_code() const noexcept { return base_; }
    const TrimmedCodeBook& trimmed_code() const;
    // Width of one stored length field (0 for Fixed).
    unsigned sigma() const noexcept;
    // M for Blocked and Superletter, 0 otherwise.
    std::uint64_t block_len() const noexcept;
    // Number of blocks for Blocked and Superletter, 0 otherwise.
    std::uint64_t block_count() const noexcept;

    // x_i for 1 <= i <= N, dispatched on the variant. Throws BoundsError.
    Letter access(std::uint64_t i, AccessCounter* counter = nullptr) const;
    // Bit offset of the codeword of x_i (Superletter: of the block holding x_i).
    std::uint64_t codeword_offset(std::uint64_t i, AccessCounter* counter = nullptr) const;

    // All N letters, decoded front to back in one pass.
    std::vector<Letter> decode_all() const;

    std::uint64_t index_bits() const noexcept;
    // Size of the codebook as the container stores it.
    std::uint64_t codebook_bits() const;

    // Reassembles a sequence from its parts, checking that they are mutually
    // consistent. Throws CorruptionError otherwise. Used by the container.
    static CompressedSequence assemble(Variant variant, std::uint32_t alphabet_size,
                                       std::uint64_t size, CodeBook base, BitSequence z,
                                       SequenceIndex index);

    friend CompressedSequence build_fixed(std::span<const Letter>, std::uint32_t);
    friend CompressedSequence build_sigma_tr(std::span<const Letter>, const TrimmedCodeBook&);
    friend CompressedSequence build_sigma_bit(std::span<const Letter>, const TrimmedCodeBook&);
    friend CompressedSequence build_blocked(std::span<const Letter>, const TrimmedCodeBook&,
                                            std::uint64_t);
    friend CompressedSequence build_superletter(std::span<const Letter>, std::uint32_t,
                                                std::uint64_t);
    friend Letter access_sigma_tr(const CompressedSequence&, std::uint64_t, AccessCounter*);
    friend Letter access_sigma_bit(const CompressedSequence&, std::uint64_t, AccessCounter*);
    friend Letter access_blocked(const CompressedSequence&, std::uint64_t, AccessCounter*);
    friend Letter access_superletter(const CompressedSequence&, std::uint64_t, AccessCounter*);

private:
    void set_code(CodeBook base);
    Letter decode(std::uint64_t offset) const;
    void require(Variant v, std::uint64_t i) const;

    Variant variant_ = Variant::Fixed;
    std::uint32_t alphabet_size_ = 0;
    std::uint64_t size_ = 0;
    CodeBook base_;
    std::optional<TrimmedCodeBook> trimmed_;
    std::optional<DecodeTable> table_;
    BitSequence z_;
    SequenceIndex index_;
};

// Baseline: every letter in ceil(log2 L) bits.
CompressedSequence build_fixed(std::span<const Letter> x, std::uint32_t alphabet_size);

// z = concatenated trimmed codewords, y_i = |codeword(x_i)| - 1 in sigma bits.
// Throws EmptyInputError for empty x, EncodingError for letters outside the code.
CompressedSequence build_sigma_tr(std::span<const Letter> x, const TrimmedCodeBook& code);
// Finds the codeword start by summing y_1..y_{i-1} directly.
Letter access_sigma_tr(const CompressedSequence& cs, std::uint64_t i,
                       AccessCounter* counter = nullptr);

// Same z; the lengths are indexed by a prefix-sum tree instead.
CompressedSequence build_sigma_bit(std::span<const Letter> x, const TrimmedCodeBook& code);
Letter access_sigma_bit(const CompressedSequence& cs, std::uint64_t i,
                        AccessCounter* counter = nullptr);

// x cut into blocks of M = ceil(N / m) letters, each with its own tree, plus a
// table of block start offsets. Throws RangeError unless 1 <= m <= N.
CompressedSequence build_blocked(std::span<const Letter> x, const TrimmedCodeBook& code,
                                 std::uint64_t m);
Letter access_blocked(const CompressedSequence& cs, std::uint64_t i,
                      AccessCounter* counter = nullptr);

// x cut into blocks of M letters; the distinct blocks form a new alphabet
// that gets its own trimmed Huffman code, and the block sequence is stored as
// SigmaBit. Throws RangeError unless 1 <= M <= N.
CompressedSequence build_superletter(std::span<const Letter> x, std::uint32_t alphabet_size,
                                     std::uint64_t block_len);
Letter access_superletter(const CompressedSequence& cs, std::uint64_t i,
                          AccessCounter* counter = nullptr);

// Builds the trimmed Huffman code of x's own letter frequencies.
TrimmedCodeBook trimmed_huffman(std::span<const Letter> x, std::uint32_t alphabet_size);

// Convenience: build any variant from x with a code derived from x. `param`
// is m for Blocked and M for Superletter, ignored otherwise.
CompressedSequence build_variant(Variant v, std::span<const Letter> x,
                                 std::uint32_t alphabet_size, std::uint64_t param = 0);

// Per-letter entropy of the blocks of M letters of x: -(1/M) sum p(u) log2 p(u).
double block_entropy(std::span<const Letter> x, std::uint64_t block_len);

// Sizes, empirical entropies of the stored sequence and the size bound for
// this variant.
StorageStats stats(const CompressedSequence& cs);

// The size bounds, in bits, as functions of N, L and the empirical entropy.
double two_stream_bound(std::uint64_t n, std::uint32_t alphabet_size, double h1);
double tree_bound(std::uint64_t n, std::uint32_t alphabet_size, double h1);
double blocked_bound(std::uint64_t n, std::uint32_t alphabet_size, double h1, std::uint64_t m);
double superletter_bound(std::uint64_t n, std::uint32_t alphabet_size, double h_m,
                         std::uint64_t block_len);

}  // namespace vla
