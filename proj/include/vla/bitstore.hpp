#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vla {

// ceil(log2(n)) for n >= 1; ceil_log2(1) == 0.
constexpr unsigned ceil_log2(std::uint64_t n) {
    return n <= 1 ? 0u : static_cast<unsigned>(std::bit_width(n - 1));
}

// Number of bits needed to write n in binary; bits_for(0) == 0.
constexpr unsigned bits_for(std::uint64_t n) {
    return static_cast<unsigned>(std::bit_width(n));
}

inline constexpr unsigned kMaxFieldWidth = 64;

// Append-only bit string. Each appended field is written most significant
// bit first, so bit 0 of the sequence is the MSB of the first field.
class BitSequence {
public:
    BitSequence() = default;

    // Builds a sequence from a string of '0'/'1' characters. Spaces are
    // skipped so that grouped literals like "10101 00 00" can be used.
    static BitSequence from_string(std::string_view bits);

    // Reconstructs a sequence of `length` bits from MSB-first packed bytes.
    static BitSequence from_bytes(std::span<const std::uint8_t> bytes, std::uint64_t length);

    // Appends the width-bit big-endian representation of value.
    // Throws RangeError if width is 0 or above 64, or value >= 2^width.
    void append_bits(std::uint64_t value, unsigned width);

    void append(const BitSequence& other);

    // Throws BoundsError unless offset + width <= size(). A zero-width read
    // returns 0.
    std::uint64_t read_bits(std::uint64_t offset, unsigned width) const;

    bool bit(std::uint64_t offset) const { return read_bits(offset, 1) != 0; }

    std::uint64_t size() const noexcept { return length_; }
    bool empty() const noexcept { return length_ == 0; }

    void reserve(std::uint64_t bits) { words_.reserve((bits + 63) / 64); }

    // MSB-first packing, zero-padded to a byte boundary.
    std::vector<std::uint8_t> to_bytes() const;
    std::string to_string() const;

    friend bool operator==(const BitSequence& a, const BitSequence& b) = default;

private:
    std::vector<std::uint64_t> words_;
    std::uint64_t length_ = 0;
};

// Fixed-width array of unsigned integers stored back to back with no
// per-entry padding. Entries start at zero.
class PackedIntArray {
public:
    PackedIntArray() = default;
    PackedIntArray(std::uint64_t count, unsigned width);

    // Throws BoundsError for i >= size().
    std::uint64_t get(std::uint64_t i) const;
    // Throws BoundsError for i >= size(), RangeError for value >= 2^width.
    void set(std::uint64_t i, std::uint64_t value);

    std::uint64_t size() const noexcept { return count_; }
    unsigned width() const noexcept { return width_; }
    std::uint64_t payload_bits() const noexcept { return count_ * width_; }

    // Appends the payload (size() * width() bits) to out.
    void append_to(BitSequence& out) const;
    // Reads count entries of the given width starting at bit offset.
    static PackedIntArray read_from(const BitSequence& in, std::uint64_t offset,
                                    std::uint64_t count, unsigned width);

    friend bool operator==(const PackedIntArray& a, const PackedIntArray& b) = default;

private:
    std::uint64_t get_unchecked(std::uint64_t i) const;

    std::vector<std::uint64_t> words_;
    std::uint64_t count_ = 0;
    unsigned width_ = 0;
};

}  // namespace vla
