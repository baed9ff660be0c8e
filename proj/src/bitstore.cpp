#include "vla/bitstore.hpp"

#include "vla/errors.hpp"

#include <algorithm>

namespace vla {

namespace {

constexpr std::uint64_t low_mask(unsigned width) {
    return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

void check_field(std::uint64_t value, unsigned width) {
    if (width == 0 || width > kMaxFieldWidth) {
        throw RangeError("field width " + std::to_string(width) + " outside 1..64");
    }
    if (width < 64 && (value >> width) != 0) {
        throw RangeError("value " + std::to_string(value) + " does not fit in " +
                         std::to_string(width) + " bits");
    }
}

// Words hold bits MSB first: bit p lives in words[p / 64] at position 63 - p % 64.
std::uint64_t read_field(const std::vector<std::uint64_t>& words, std::uint64_t offset,
                         unsigned width) {
    if (width == 0) {
        return 0;
    }
    const std::uint64_t w = offset >> 6;
    const unsigned shift = static_cast<unsigned>(offset & 63);
    std::uint64_t hi = words[w] << shift;
    if (shift != 0 && shift + width > 64) {
        hi |= words[w + 1] >> (64 - shift);
    }
    return hi >> (64 - width);
}

void write_field(std::vector<std::uint64_t>& words, std::uint64_t offset, std::uint64_t value,
                 unsigned width) {
    const std::uint64_t w = offset >> 6;
    const unsigned shift = static_cast<unsigned>(offset & 63);
    const unsigned first = std::min(width, 64 - shift);
    const unsigned rest = width - first;
    // Bits of value that land in word w are its top `first` bits.
    const std::uint64_t head = value >> rest;
    const unsigned head_pos = 64 - shift - first;
    words[w] = (words[w] & ~(low_mask(first) << head_pos)) | (head << head_pos);
    if (rest != 0) {
        const unsigned tail_pos = 64 - rest;
        words[w + 1] = (words[w + 1] & ~(low_mask(rest) << tail_pos)) |
                       ((value & low_mask(rest)) << tail_pos);
    }
}

}  // namespace

BitSequence BitSequence::from_string(std::string_view bits) {
    BitSequence seq;
    for (char c : bits) {
        if (c == ' ') {
            continue;
        }
        if (c != '0' && c != '1') {
            throw RangeError(std::string("invalid bit character '") + c + "'");
        }
        seq.append_bits(c == '1' ? 1 : 0, 1);
    }
    return seq;
}

BitSequence BitSequence::from_bytes(std::span<const std::uint8_t> bytes, std::uint64_t length) {
    if ((length + 7) / 8 > bytes.size()) {
        throw BoundsError("byte buffer too short for " + std::to_string(length) + " bits");
    }
    BitSequence seq;
    seq.words_.assign((length + 63) / 64, 0);
    for (std::uint64_t b = 0; b < (length + 7) / 8; ++b) {
        seq.words_[b / 8] |= std::uint64_t{bytes[b]} << (56 - 8 * (b % 8));
    }
    seq.length_ = length;
    // Clear padding past the logical end so equality and re-serialization
    // only ever see the declared bits.
    if (const unsigned used = static_cast<unsigned>(length & 63); used != 0) {
        seq.words_.back() &= ~low_mask(64 - used);
    }
    return seq;
}

void BitSequence::append_bits(std::uint64_t value, unsigned width) {
    check_field(value, width);
    if (((length_ + width + 63) >> 6) > words_.size()) {
        words_.push_back(0);
    }
    write_field(words_, length_, value, width);
    length_ += width;
}

void BitSequence::append(const BitSequence& other) {
    reserve(length_ + other.length_);
    std::uint64_t pos = 0;
    for (; pos + 64 <= other.length_; pos += 64) {
        append_bits(other.read_bits(pos, 64), 64);
    }
    if (const auto left = static_cast<unsigned>(other.length_ - pos); left != 0) {
        append_bits(other.read_bits(pos, left), left);
    }
}

std::uint64_t BitSequence::read_bits(std::uint64_t offset, unsigned width) const {
    if (width > kMaxFieldWidth) {
        throw RangeError("read width " + std::to_string(width) + " above 64");
    }
    if (offset > length_ || width > length_ - offset) {
        throw BoundsError("read of " + std::to_string(width) + " bits at offset " +
                          std::to_string(offset) + " past end of " + std::to_string(length_) +
                          "-bit sequence");
    }
    return read_field(words_, offset, width);
}

std::vector<std::uint8_t> BitSequence::to_bytes() const {
    std::vector<std::uint8_t> out((length_ + 7) / 8);
    for (std::uint64_t b = 0; b < out.size(); ++b) {
        out[b] = static_cast<std::uint8_t>(words_[b / 8] >> (56 - 8 * (b % 8)));
    }
    return out;
}

std::string BitSequence::to_string() const {
    std::string s;
    s.reserve(length_);
    for (std::uint64_t i = 0; i < length_; ++i) {
        s.push_back(read_field(words_, i, 1) ? '1' : '0');
    }
    return s;
}

PackedIntArray::PackedIntArray(std::uint64_t count, unsigned width) : count_(count), width_(width) {
    if (width == 0 || width > kMaxFieldWidth) {
        throw RangeError("packed width " + std::to_string(width) + " outside 1..64");
    }
    words_.assign((count * width + 63) / 64, 0);
}

std::uint64_t PackedIntArray::get(std::uint64_t i) const {
    if (i >= count_) {
        throw BoundsError("packed index " + std::to_string(i) + " >= size " +
                          std::to_string(count_));
    }
    return get_unchecked(i);
}

std::uint64_t PackedIntArray::get_unchecked(std::uint64_t i) const {
    return read_field(words_, i * width_, width_);
}

void PackedIntArray::set(std::uint64_t i, std::uint64_t value) {
    if (i >= count_) {
        throw BoundsError("packed index " + std::to_string(i) + " >= size " +
                          std::to_string(count_));
    }
    check_field(value, width_);
    write_field(words_, i * width_, value, width_);
}

void PackedIntArray::append_to(BitSequence& out) const {
    out.reserve(out.size() + payload_bits());
    for (std::uint64_t i = 0; i < count_; ++i) {
        out.append_bits(get_unchecked(i), width_);
    }
}

PackedIntArray PackedIntArray::read_from(const BitSequence& in, std::uint64_t offset,
                                         std::uint64_t count, unsigned width) {
    PackedIntArray arr(count, width);
    if (offset > in.size() || count * width > in.size() - offset) {
        throw BoundsError("packed array of " + std::to_string(count) + "x" +
                          std::to_string(width) + " bits exceeds source");
    }
    for (std::uint64_t i = 0; i < count; ++i) {
        write_field(arr.words_, i * width, in.read_bits(offset + i * width, width), width);
    }
    return arr;
}

}  // namespace vla
