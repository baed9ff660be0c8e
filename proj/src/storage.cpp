#include "vla/storage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "vla/errors.hpp"

namespace vla {

namespace {

constexpr std::string_view kVariantNames[] = {"fixed", "sigma-tr", "sigma-bit", "blocked",
                                              "superletter"};

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return a / b + (a % b != 0); }

[[noreturn]] void fail(const std::string& what) { throw CorruptionError(what); }

void require_nonempty(std::span<const Letter> x) {
    if (x.empty()) {
        throw EmptyInputError("empty input");
    }
}

// Appends the trimmed codewords of x to z and returns their lengths.
std::vector<std::uint64_t> encode_all(std::span<const Letter> x, const TrimmedCodeBook& code,
                                      BitSequence& z) {
    std::vector<std::uint64_t> lengths;
    lengths.reserve(x.size());
    z.reserve(x.size() * code.max_length());
    for (Letter a : x) {
        if (a >= code.alphabet_size()) {
            throw EncodingError("letter " + std::to_string(a) + " outside alphabet of size " +
                                std::to_string(code.alphabet_size()));
        }
        const Codeword& c = code.codeword(a);
        z.append_bits(c.bits, c.width);
        lengths.push_back(c.width);
    }
    return lengths;
}

std::uint64_t tree_prefix(const PrefixSumTree& tree, std::uint64_t j, AccessCounter* counter) {
    if (counter == nullptr) {
        return tree.prefix_sum(j);
    }
    QueryTrace trace;
    const std::uint64_t sum = tree.prefix_sum(j, &trace);
    counter->index_words += trace.words;
    return sum;
}

double log2_log2_power_plus_two(std::uint32_t alphabet_size, std::uint64_t block_len) {
    // log2 log2 (L^M + 2) without forming L^M when it is astronomically large.
    const double bits = static_cast<double>(block_len) * std::log2(alphabet_size);
    const double inner = bits > 60 ? bits : std::log2(std::exp2(bits) + 2.0);
    return std::log2(inner);
}

}  // namespace

std::string_view variant_name(Variant v) { return kVariantNames[static_cast<int>(v)]; }

std::optional<Variant> parse_variant(std::string_view name) {
    for (int v = 0; v < 5; ++v) {
        if (kVariantNames[v] == name) {
            return static_cast<Variant>(v);
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// CompressedSequence

const TrimmedCodeBook& CompressedSequence::trimmed_code() const {
    if (!trimmed_) {
        throw VariantMismatchError("fixed-width sequences have no trimmed code");
    }
    return *trimmed_;
}

unsigned CompressedSequence::sigma() const noexcept {
    return trimmed_ ? trimmed_->length_field_width() : 0;
}

std::uint64_t CompressedSequence::block_len() const noexcept {
    if (const auto* b = std::get_if<BlockIndex>(&index_)) {
        return b->block_len;
    }
    if (const auto* s = std::get_if<SuperletterIndex>(&index_)) {
        return s->block_len;
    }
    return 0;
}

std::uint64_t CompressedSequence::block_count() const noexcept {
    const std::uint64_t m = block_len();
    return m == 0 ? 0 : ceil_div(size_, m);
}

void CompressedSequence::set_code(CodeBook base) {
    base_ = std::move(base);
    trimmed_ = trim(base_, base_.alphabet_size());
    table_.emplace(*trimmed_);
}

Letter CompressedSequence::decode(std::uint64_t offset) const {
    return decode_at(*trimmed_, *table_, z_, offset).letter;
}

void CompressedSequence::require(Variant v, std::uint64_t i) const {
    if (variant_ != v) {
        throw VariantMismatchError("sequence is " + std::string(variant_name(variant_)) +
                                   ", not " + std::string(variant_name(v)));
    }
    if (i == 0 || i > size_) {
        throw BoundsError("index " + std::to_string(i) + " outside 1.." + std::to_string(size_));
    }
}

Letter CompressedSequence::access(std::uint64_t i, AccessCounter* counter) const {
    switch (variant_) {
        case Variant::Fixed: {
            if (i == 0 || i > size_) {
                throw BoundsError("index " + std::to_string(i) + " outside 1.." +
                                  std::to_string(size_));
            }
            const unsigned width = base_.max_length();
            const std::uint64_t v = z_.read_bits((i - 1) * width, width);
            if (v >= alphabet_size_) {
                throw CorruptionError("stored letter " + std::to_string(v) + " outside alphabet");
            }
            return static_cast<Letter>(v);
        }
        case Variant::SigmaTr:
            return access_sigma_tr(*this, i, counter);
        case Variant::SigmaBit:
            return access_sigma_bit(*this, i, counter);
        case Variant::Blocked:
            return access_blocked(*this, i, counter);
        case Variant::Superletter:
            return access_superletter(*this, i, counter);
    }
    throw VariantMismatchError("unknown variant");
}

std::uint64_t CompressedSequence::codeword_offset(std::uint64_t i, AccessCounter* counter) const {
    if (i == 0 || i > size_) {
        throw BoundsError("index " + std::to_string(i) + " outside 1.." + std::to_string(size_));
    }
    switch (variant_) {
        case Variant::Fixed:
            return (i - 1) * base_.max_length();
        case Variant::SigmaTr: {
            const auto& y = std::get<PackedIntArray>(index_);
            std::uint64_t offset = 0;
            for (std::uint64_t k = 0; k + 1 < i; ++k) {
                offset += y.get(k) + 1;
            }
            if (counter != nullptr) {
                counter->index_words += i - 1;
            }
            return offset;
        }
        case Variant::SigmaBit:
            return tree_prefix(std::get<PrefixSumTree>(index_), i - 1, counter);
        case Variant::Blocked: {
            const auto& blocks = std::get<BlockIndex>(index_);
            const std::uint64_t r = (i - 1) / blocks.block_len;  // 0-based block
            const std::uint64_t j = i - r * blocks.block_len;     // 1-based within block
            const std::uint64_t start = blocks.starts.get(r);
            if (counter != nullptr) {
                counter->index_words += 1;
            }
            return start + tree_prefix(blocks.trees[r], j - 1, counter);
        }
        case Variant::Superletter: {
            const auto& super = std::get<SuperletterIndex>(index_);
            const std::uint64_t r = (i - 1) / super.block_len;
            return tree_prefix(super.tree, r, counter);
        }
    }
    throw VariantMismatchError("unknown variant");
}

Letter access_sigma_tr(const CompressedSequence& cs, std::uint64_t i, AccessCounter* counter) {
    cs.require(Variant::SigmaTr, i);
    return cs.decode(cs.codeword_offset(i, counter));
}

Letter access_sigma_bit(const CompressedSequence& cs, std::uint64_t i, AccessCounter* counter) {
    cs.require(Variant::SigmaBit, i);
    return cs.decode(cs.codeword_offset(i, counter));
}

Letter access_blocked(const CompressedSequence& cs, std::uint64_t i, AccessCounter* counter) {
    cs.require(Variant::Blocked, i);
    return cs.decode(cs.codeword_offset(i, counter));
}

Letter access_superletter(const CompressedSequence& cs, std::uint64_t i, AccessCounter* counter) {
    cs.require(Variant::Superletter, i);
    const auto& super = std::get<SuperletterIndex>(cs.index_);
    const Letter block = cs.decode(cs.codeword_offset(i, counter));
    const std::vector<Letter>& word = super.words[block];
    const std::uint64_t pos = (i - 1) % super.block_len;
    if (pos >= word.size()) {
        throw CorruptionError("block-letter " + std::to_string(block) + " too short for index " +
                              std::to_string(i));
    }
    return word[pos];
}

std::vector<Letter> CompressedSequence::decode_all() const {
    std::vector<Letter> out;
    out.reserve(size_);
    if (variant_ == Variant::Fixed) {
        for (std::uint64_t i = 1; i <= size_; ++i) {
            out.push_back(access(i));
        }
        return out;
    }
    const std::uint64_t codewords =
        variant_ == Variant::Superletter ? block_count() : size_;
    std::uint64_t offset = 0;
    for (std::uint64_t k = 0; k < codewords; ++k) {
        const DecodedLetter d = decode_at(*trimmed_, *table_, z_, offset);
        offset += d.width;
        if (variant_ == Variant::Superletter) {
            const auto& word = std::get<SuperletterIndex>(index_).words[d.letter];
            out.insert(out.end(), word.begin(), word.end());
        } else {
            out.push_back(d.letter);
        }
    }
    if (out.size() != size_) {
        throw CorruptionError("decoded " + std::to_string(out.size()) + " letters, expected " +
                              std::to_string(size_));
    }
    return out;
}

std::uint64_t CompressedSequence::index_bits() const noexcept {
    return std::visit(
        [](const auto& idx) -> std::uint64_t {
            using T = std::decay_t<decltype(idx)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return 0;
            } else if constexpr (std::is_same_v<T, PackedIntArray>) {
                return idx.payload_bits();
            } else if constexpr (std::is_same_v<T, PrefixSumTree>) {
                return idx.memory_bits();
            } else if constexpr (std::is_same_v<T, BlockIndex>) {
                std::uint64_t bits = idx.starts.payload_bits();
                for (const auto& t : idx.trees) {
                    bits += t.memory_bits();
                }
                return bits;
            } else {
                return idx.tree.memory_bits();
            }
        },
        index_);
}

std::uint64_t CompressedSequence::codebook_bits() const {
    // One byte per codeword length; Superletter adds a 32-bit entry count and
    // the packed block dictionary, padded to a byte.
    std::uint64_t bits = 8 * std::uint64_t{base_.alphabet_size()};
    if (const auto* super = std::get_if<SuperletterIndex>(&index_)) {
        const unsigned len_width = bits_for(super->block_len);
        const unsigned letter_width = ceil_log2(alphabet_size_);
        std::uint64_t dict = 0;
        for (const auto& word : super->words) {
            dict += len_width + word.size() * letter_width;
        }
        bits += 32 + 8 * ceil_div(dict, 8);
    }
    return bits;
}

CompressedSequence CompressedSequence::assemble(Variant variant, std::uint32_t alphabet_size,
                                                std::uint64_t size, CodeBook base, BitSequence z,
                                                SequenceIndex index) {
    if (alphabet_size < 2) {
        fail("alphabet size below 2");
    }
    if (size == 0) {
        fail("empty sequence");
    }
    CompressedSequence cs;
    cs.variant_ = variant;
    cs.alphabet_size_ = alphabet_size;
    cs.size_ = size;
    cs.z_ = std::move(z);
    cs.index_ = std::move(index);

    if (variant == Variant::Fixed) {
        if (!(base == fixed_width_codebook(alphabet_size))) {
            fail("fixed-width codebook expected");
        }
        cs.base_ = std::move(base);
        if (!std::holds_alternative<std::monostate>(cs.index_) ||
            cs.z_.size() != size * cs.base_.max_length()) {
            fail("fixed-width stream length mismatch");
        }
        return cs;
    }

    if (variant != Variant::Superletter && base.alphabet_size() != alphabet_size) {
        fail("codebook size does not match alphabet");
    }
    cs.set_code(std::move(base));
    const unsigned sigma = cs.sigma();
    auto check_tree = [&](const PrefixSumTree& t, std::uint64_t n, std::uint64_t bits) {
        if (t.size() != n || t.sigma() != sigma || t.prefix_sum(n) != bits) {
            fail("length index does not match the codeword stream");
        }
    };

    switch (variant) {
        case Variant::SigmaTr: {
            const auto* y = std::get_if<PackedIntArray>(&cs.index_);
            if (y == nullptr || y->size() != size || y->width() != sigma) {
                fail("length stream shape mismatch");
            }
            std::uint64_t total = 0;
            for (std::uint64_t k = 0; k < size; ++k) {
                total += y->get(k) + 1;
            }
            if (total != cs.z_.size()) {
                fail("length stream does not sum to the codeword stream");
            }
            break;
        }
        case Variant::SigmaBit: {
            const auto* t = std::get_if<PrefixSumTree>(&cs.index_);
            if (t == nullptr) {
                fail("missing tree index");
            }
            check_tree(*t, size, cs.z_.size());
            break;
        }
        case Variant::Blocked: {
            const auto* b = std::get_if<BlockIndex>(&cs.index_);
            if (b == nullptr || b->block_len == 0) {
                fail("missing block index");
            }
            const std::uint64_t blocks = ceil_div(size, b->block_len);
            if (b->starts.size() != blocks || b->trees.size() != blocks) {
                fail("block table size mismatch");
            }
            std::uint64_t offset = 0;
            for (std::uint64_t r = 0; r < blocks; ++r) {
                const std::uint64_t len = std::min(b->block_len, size - r * b->block_len);
                const PrefixSumTree& t = b->trees[r];
                if (b->starts.get(r) != offset || t.size() != len || t.sigma() != sigma) {
                    fail("block table does not match the block trees");
                }
                offset += t.prefix_sum(len);
            }
            if (offset != cs.z_.size()) {
                fail("blocks do not cover the codeword stream");
            }
            break;
        }
        case Variant::Superletter: {
            const auto* s = std::get_if<SuperletterIndex>(&cs.index_);
            if (s == nullptr || s->block_len == 0 || s->block_len > size) {
                fail("missing superletter index");
            }
            if (s->words.size() != cs.base_.alphabet_size()) {
                fail("block dictionary does not match block codebook");
            }
            for (const auto& word : s->words) {
                if (word.size() > s->block_len ||
                    std::any_of(word.begin(), word.end(),
                                [&](Letter a) { return a >= alphabet_size; })) {
                    fail("malformed block dictionary entry");
                }
            }
            check_tree(s->tree, ceil_div(size, s->block_len), cs.z_.size());
            break;
        }
        default:
            fail("unknown variant");
    }
    return cs;
}

// ---------------------------------------------------------------------------
// Builders

CompressedSequence build_fixed(std::span<const Letter> x, std::uint32_t alphabet_size) {
    require_nonempty(x);
    CompressedSequence cs;
    cs.variant_ = Variant::Fixed;
    cs.alphabet_size_ = alphabet_size;
    cs.size_ = x.size();
    cs.base_ = fixed_width_codebook(alphabet_size);
    const unsigned width = cs.base_.max_length();
    cs.z_.reserve(x.size() * width);
    for (Letter a : x) {
        if (a >= alphabet_size) {
            throw EncodingError("letter " + std::to_string(a) + " outside alphabet of size " +
                                std::to_string(alphabet_size));
        }
        cs.z_.append_bits(a, width);
    }
    return cs;
}

TrimmedCodeBook trimmed_huffman(std::span<const Letter> x, std::uint32_t alphabet_size) {
    require_nonempty(x);
    return trim(build_huffman(FrequencyTable::of(x, alphabet_size)), alphabet_size);
}

CompressedSequence build_sigma_tr(std::span<const Letter> x, const TrimmedCodeBook& code) {
    require_nonempty(x);
    CompressedSequence cs;
    cs.variant_ = Variant::SigmaTr;
    cs.alphabet_size_ = code.alphabet_size();
    cs.size_ = x.size();
    cs.set_code(code.base());
    const auto lengths = encode_all(x, code, cs.z_);
    PackedIntArray y(lengths.size(), code.length_field_width());
    for (std::uint64_t k = 0; k < lengths.size(); ++k) {
        y.set(k, lengths[k] - 1);
    }
    cs.index_ = std::move(y);
    return cs;
}

CompressedSequence build_sigma_bit(std::span<const Letter> x, const TrimmedCodeBook& code) {
    require_nonempty(x);
    CompressedSequence cs;
    cs.variant_ = Variant::SigmaBit;
    cs.alphabet_size_ = code.alphabet_size();
    cs.size_ = x.size();
    cs.set_code(code.base());
    const auto lengths = encode_all(x, code, cs.z_);
    cs.index_ = build_tree(lengths, code.length_field_width());
    return cs;
}

CompressedSequence build_blocked(std::span<const Letter> x, const TrimmedCodeBook& code,
                                 std::uint64_t m) {
    require_nonempty(x);
    const std::uint64_t n = x.size();
    if (m == 0 || m > n) {
        throw RangeError("block count " + std::to_string(m) + " outside 1.." + std::to_string(n));
    }
    CompressedSequence cs;
    cs.variant_ = Variant::Blocked;
    cs.alphabet_size_ = code.alphabet_size();
    cs.size_ = n;
    cs.set_code(code.base());
    const auto lengths = encode_all(x, code, cs.z_);

    BlockIndex blocks;
    blocks.block_len = ceil_div(n, m);
    const std::uint64_t count = ceil_div(n, blocks.block_len);
    blocks.starts = PackedIntArray(count, std::max(1u, bits_for(cs.z_.size())));
    blocks.trees.reserve(count);
    const std::span<const std::uint64_t> all(lengths);
    std::uint64_t offset = 0;
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::uint64_t first = r * blocks.block_len;
        const auto part = all.subspan(first, std::min(blocks.block_len, n - first));
        blocks.starts.set(r, offset);
        blocks.trees.push_back(build_tree(part, code.length_field_width()));
        for (std::uint64_t len : part) {
            offset += len;
        }
    }
    cs.index_ = std::move(blocks);
    return cs;
}

CompressedSequence build_superletter(std::span<const Letter> x, std::uint32_t alphabet_size,
                                     std::uint64_t block_len) {
    require_nonempty(x);
    const std::uint64_t n = x.size();
    if (block_len == 0 || block_len > n) {
        throw RangeError("block length " + std::to_string(block_len) + " outside 1.." +
                         std::to_string(n));
    }
    for (Letter a : x) {
        if (a >= alphabet_size) {
            throw EncodingError("letter " + std::to_string(a) + " outside alphabet of size " +
                                std::to_string(alphabet_size));
        }
    }

    // Distinct blocks in lexicographic order become the block-letters.
    const std::uint64_t count = ceil_div(n, block_len);
    std::map<std::vector<Letter>, Letter> dictionary;
    auto block = [&](std::uint64_t r) {
        const std::uint64_t first = r * block_len;
        return std::vector<Letter>(x.begin() + first,
                                   x.begin() + std::min(n, first + block_len));
    };
    for (std::uint64_t r = 0; r < count; ++r) {
        dictionary.emplace(block(r), 0);
    }
    if (dictionary.size() == 1) {
        // A lone distinct block still needs a two-letter code.
        dictionary.emplace(std::vector<Letter>{}, 0);
    }
    if (dictionary.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw RangeError("too many distinct blocks");
    }

    SuperletterIndex super;
    super.block_len = block_len;
    super.words.reserve(dictionary.size());
    for (auto& [word, id] : dictionary) {
        id = static_cast<Letter>(super.words.size());
        super.words.push_back(word);
    }
    std::vector<Letter> block_letters;
    block_letters.reserve(count);
    for (std::uint64_t r = 0; r < count; ++r) {
        block_letters.push_back(dictionary.at(block(r)));
    }

    const auto block_alphabet = static_cast<std::uint32_t>(super.words.size());
    const TrimmedCodeBook code = trimmed_huffman(block_letters, block_alphabet);

    CompressedSequence cs;
    cs.variant_ = Variant::Superletter;
    cs.alphabet_size_ = alphabet_size;
    cs.size_ = n;
    cs.set_code(code.base());
    const auto lengths = encode_all(block_letters, code, cs.z_);
    super.tree = build_tree(lengths, code.length_field_width());
    cs.index_ = std::move(super);
    return cs;
}

CompressedSequence build_variant(Variant v, std::span<const Letter> x,
                                 std::uint32_t alphabet_size, std::uint64_t param) {
    switch (v) {
        case Variant::Fixed:
            return build_fixed(x, alphabet_size);
        case Variant::SigmaTr:
            return build_sigma_tr(x, trimmed_huffman(x, alphabet_size));
        case Variant::SigmaBit:
            return build_sigma_bit(x, trimmed_huffman(x, alphabet_size));
        case Variant::Blocked:
            return build_blocked(x, trimmed_huffman(x, alphabet_size), param);
        case Variant::Superletter:
            return build_superletter(x, alphabet_size, param);
    }
    throw VariantMismatchError("unknown variant");
}

// ---------------------------------------------------------------------------
// Statistics and bounds

double block_entropy(std::span<const Letter> x, std::uint64_t block_len) {
    if (x.empty() || block_len == 0) {
        return 0.0;
    }
    std::map<std::vector<Letter>, std::uint64_t> counts;
    const std::uint64_t count = ceil_div(x.size(), block_len);
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::uint64_t first = r * block_len;
        ++counts[std::vector<Letter>(x.begin() + first,
                                     x.begin() + std::min<std::uint64_t>(x.size(), first + block_len))];
    }
    double h = 0.0;
    for (const auto& [word, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(count);
        h -= p * std::log2(p);
    }
    return h / static_cast<double>(block_len);
}

double two_stream_bound(std::uint64_t n, std::uint32_t alphabet_size, double h1) {
    return static_cast<double>(n) * (h1 + std::log2(std::log2(alphabet_size) + 2) + 3);
}

double tree_bound(std::uint64_t n, std::uint32_t alphabet_size, double h1) {
    return static_cast<double>(n) * (h1 + std::log2(std::log2(alphabet_size + 2.0)) + 4);
}

double blocked_bound(std::uint64_t n, std::uint32_t alphabet_size, double h1, std::uint64_t m) {
    const double table = std::ceil(
        std::log2(static_cast<double>(n) * (ceil_log2(alphabet_size) + 1)));
    return tree_bound(n, alphabet_size, h1) + static_cast<double>(m) * table;
}

double superletter_bound(std::uint64_t n, std::uint32_t alphabet_size, double h_m,
                         std::uint64_t block_len) {
    // The tree bound applied to ceil(N/M) block-letters over A^M, whose
    // per-block entropy is M h_M.
    const double blocks = static_cast<double>(ceil_div(n, block_len));
    return blocks * (static_cast<double>(block_len) * h_m +
                     log2_log2_power_plus_two(alphabet_size, block_len) + 4);
}

StorageStats stats(const CompressedSequence& cs) {
    const std::vector<Letter> x = cs.decode_all();
    StorageStats s;
    s.variant = cs.variant();
    s.letters = cs.size();
    s.alphabet_size = cs.alphabet_size();
    s.z_bits = cs.z().size();
    s.index_bits = cs.index_bits();
    s.codebook_bits = cs.codebook_bits();
    s.payload_bits = s.z_bits + s.index_bits;
    s.total_bits = s.payload_bits + s.codebook_bits;
    const double n = static_cast<double>(s.letters);
    s.bits_per_letter = static_cast<double>(s.payload_bits) / n;
    s.total_bits_per_letter = static_cast<double>(s.total_bits) / n;
    s.empirical_h1 = FrequencyTable::of(x, cs.alphabet_size()).entropy();
    s.block_len = cs.block_len();
    s.blocks = cs.block_count();

    switch (cs.variant()) {
        case Variant::Fixed:
            s.bound_bits = n * ceil_log2(s.alphabet_size);
            break;
        case Variant::SigmaTr:
            s.bound_bits = two_stream_bound(s.letters, s.alphabet_size, s.empirical_h1);
            break;
        case Variant::SigmaBit:
            s.bound_bits = tree_bound(s.letters, s.alphabet_size, s.empirical_h1);
            break;
        case Variant::Blocked:
            s.bound_bits = blocked_bound(s.letters, s.alphabet_size, s.empirical_h1, s.blocks);
            break;
        case Variant::Superletter: {
            s.empirical_hM = block_entropy(x, s.block_len);
            s.bound_bits =
                superletter_bound(s.letters, s.alphabet_size, s.empirical_hM, s.block_len);
            const double m = static_cast<double>(s.block_len);
            s.measured_constant = (static_cast<double>(s.payload_bits) - n * s.empirical_hM) * m / n -
                                  std::log2(m) - std::log2(std::log2(s.alphabet_size));
            break;
        }
    }
    s.slack = s.bound_bits - static_cast<double>(s.payload_bits);
    return s;
}

}  // namespace vla
