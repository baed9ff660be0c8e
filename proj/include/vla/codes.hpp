#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vla/bitstore.hpp"

namespace vla {

// Letters are indices 0..L-1 into an alphabet.
using Letter = std::uint32_t;

// Maps external symbols (raw bytes or whitespace-separated tokens) to letter
// indices. L must be at least 2.
class Alphabet {
public:
    // The 256 byte values, letter i is byte i.
    static Alphabet bytes();
    // Distinct tokens in lexicographic order. A single distinct token gets a
    // second, empty placeholder symbol so that L >= 2.
    static Alphabet from_tokens(const std::vector<std::string>& tokens);

    std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(symbols_.size()); }
    bool is_bytes() const noexcept { return bytes_; }
    const std::string& symbol(Letter a) const;
    // Throws EncodingError for symbols outside the alphabet.
    Letter letter_of(const std::string& symbol) const;
    const std::vector<std::string>& symbols() const noexcept { return symbols_; }

private:
    std::vector<std::string> symbols_;
    bool bytes_ = false;
};

class FrequencyTable {
public:
    FrequencyTable() = default;
    explicit FrequencyTable(std::vector<std::uint64_t> counts);

    // Counts every letter of x; throws EncodingError if a letter is >= L.
    static FrequencyTable of(std::span<const Letter> x, std::uint32_t alphabet_size);

    std::uint32_t alphabet_size() const noexcept { return static_cast<std::uint32_t>(counts_.size()); }
    std::uint64_t count(Letter a) const { return counts_.at(a); }
    const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    std::uint64_t total() const noexcept { return total_; }
    double probability(Letter a) const;

    // -sum p log2 p over the letters with non-zero count.
    double entropy() const;
    // sum p(a) * lengths[a].
    double average_length(std::span<const unsigned> lengths) const;

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

// A prefix-free code in canonical form: codewords are numbered in order of
// (length, letter). Codewords are only materialized up to 64 bits; longer
// ones keep their length but cannot be emitted directly.
class CodeBook {
public:
    CodeBook() = default;

    // Throws CorruptionError if the lengths violate Kraft's inequality or
    // contain a zero, RangeError for fewer than two letters.
    static CodeBook from_lengths(std::vector<unsigned> lengths);

    std::uint32_t alphabet_size() const noexcept { return static_cast<std::uint32_t>(lengths_.size()); }
    unsigned length(Letter a) const { return lengths_.at(a); }
    const std::vector<unsigned>& lengths() const noexcept { return lengths_; }
    unsigned max_length() const noexcept { return max_length_; }
    // Throws RangeError for codewords longer than 64 bits.
    std::uint64_t codeword(Letter a) const;
    std::string codeword_string(Letter a) const;

    friend bool operator==(const CodeBook& a, const CodeBook& b) = default;

private:
    std::vector<unsigned> lengths_;
    std::vector<std::uint64_t> codewords_;
    unsigned max_length_ = 0;
};

// Huffman code for the given counts. Letters with zero count are treated as
// having count 1 so that every letter remains encodable. Merge ties are broken
// by (weight, smallest letter in the subtree).
CodeBook build_huffman(const FrequencyTable& freqs);

// bin_l(i) with l = ceil(log2 L) for every letter.
CodeBook fixed_width_codebook(std::uint32_t alphabet_size);

struct Codeword {
    std::uint64_t bits = 0;
    unsigned width = 0;

    friend bool operator==(const Codeword&, const Codeword&) = default;
};

// Caps every codeword at ceil(log2 L) + 1 bits: letters whose base codeword
// fits in ceil(log2 L) bits are written as 0 followed by that codeword, the
// others as 1 followed by their index in ceil(log2 L) bits.
class TrimmedCodeBook {
public:
    TrimmedCodeBook() = default;

    const CodeBook& base() const noexcept { return base_; }
    std::uint32_t alphabet_size() const noexcept { return base_.alphabet_size(); }
    // ceil(log2 L)
    unsigned index_width() const noexcept { return index_width_; }
    // Longest trimmed codeword, index_width() + 1.
    unsigned max_length() const noexcept { return index_width_ + 1; }
    // Bits needed to store (length - 1) of any trimmed codeword.
    unsigned length_field_width() const noexcept { return ceil_log2(max_length()); }

    const Codeword& codeword(Letter a) const { return codewords_.at(a); }
    unsigned length(Letter a) const { return codewords_.at(a).width; }
    std::vector<unsigned> lengths() const;

    friend TrimmedCodeBook trim(const CodeBook& base, std::uint32_t alphabet_size);

private:
    CodeBook base_;
    std::vector<Codeword> codewords_;
    unsigned index_width_ = 0;
};

// Throws RangeError if base does not cover exactly alphabet_size letters.
TrimmedCodeBook trim(const CodeBook& base, std::uint32_t alphabet_size);

// Throws BoundsError for a >= L.
Codeword encode_letter(const TrimmedCodeBook& code, Letter a);

struct DecodedLetter {
    Letter letter = 0;
    unsigned width = 0;

    friend bool operator==(const DecodedLetter&, const DecodedLetter&) = default;
};

// One entry per max_length()-bit window: the letter whose trimmed codeword is
// a prefix of the window, or width 0 when no codeword is.
class DecodeTable {
public:
    DecodeTable() = default;
    explicit DecodeTable(const TrimmedCodeBook& code);

    unsigned window_width() const noexcept { return window_; }
    const DecodedLetter& lookup(std::uint64_t window) const { return entries_[window]; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::vector<DecodedLetter> entries_;
    unsigned window_ = 0;
};

// Decodes the codeword starting at bit `offset` of z with a single table
// lookup. Throws CorruptionError if no codeword starts there and BoundsError
// if offset is past the end of z.
DecodedLetter decode_at(const TrimmedCodeBook& code, const DecodeTable& table,
                        const BitSequence& z, std::uint64_t offset);

}  // namespace vla
