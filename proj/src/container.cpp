#include "vla/container.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "vla/errors.hpp"

namespace vla {

namespace {

class ByteWriter {
public:
    template <typename T>
    void put(T value) {
        for (std::size_t k = 0; k < sizeof(T); ++k) {
            out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * k)));
        }
    }
    void put_bytes(std::span<const std::uint8_t> bytes) {
        out_.insert(out_.end(), bytes.begin(), bytes.end());
    }
    std::vector<std::uint8_t>& bytes() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    template <typename T>
    T get() {
        const auto raw = take(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t k = 0; k < sizeof(T); ++k) {
            v |= std::uint64_t{raw[k]} << (8 * k);
        }
        return static_cast<T>(v);
    }
    std::span<const std::uint8_t> take(std::uint64_t n) {
        if (n > in_.size() - pos_) {
            throw CorruptionError("container truncated");
        }
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint64_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::uint64_t pos_ = 0;
};

std::uint64_t bytes_for_bits(std::uint64_t bits) { return bits / 8 + (bits % 8 != 0); }

std::uint32_t narrow32(std::uint64_t v, const char* what) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw RangeError(std::string(what) + " does not fit the 32-bit header field");
    }
    return static_cast<std::uint32_t>(v);
}

void put_lengths(ByteWriter& w, const CodeBook& code) {
    for (unsigned len : code.lengths()) {
        if (len > 255) {
            throw RangeError("codeword length above 255 cannot be stored");
        }
        w.put<std::uint8_t>(static_cast<std::uint8_t>(len));
    }
}

CodeBook get_lengths(ByteReader& r, std::uint64_t count) {
    const auto raw = r.take(count);
    return CodeBook::from_lengths(std::vector<unsigned>(raw.begin(), raw.end()));
}

std::vector<std::uint8_t> codebook_section(const CompressedSequence& cs) {
    ByteWriter w;
    const auto* super = std::get_if<SuperletterIndex>(&cs.index());
    if (super != nullptr) {
        w.put<std::uint32_t>(cs.base_code().alphabet_size());
    }
    put_lengths(w, cs.base_code());
    if (super != nullptr) {
        const unsigned len_width = bits_for(super->block_len);
        const unsigned letter_width = ceil_log2(cs.alphabet_size());
        BitSequence dict;
        for (const auto& word : super->words) {
            dict.append_bits(word.size(), len_width);
            for (Letter a : word) {
                dict.append_bits(a, letter_width);
            }
        }
        w.put_bytes(dict.to_bytes());
    }
    return std::move(w.bytes());
}

BitSequence index_section(const CompressedSequence& cs) {
    BitSequence out;
    std::visit(
        [&](const auto& idx) {
            using T = std::decay_t<decltype(idx)>;
            if constexpr (std::is_same_v<T, PackedIntArray> || std::is_same_v<T, PrefixSumTree>) {
                idx.append_to(out);
            } else if constexpr (std::is_same_v<T, BlockIndex>) {
                idx.starts.append_to(out);
                for (const auto& t : idx.trees) {
                    t.append_to(out);
                }
            } else if constexpr (std::is_same_v<T, SuperletterIndex>) {
                idx.tree.append_to(out);
            }
        },
        cs.index());
    return out;
}

}  // namespace

std::vector<std::uint8_t> serialize(const CompressedSequence& cs) {
    const auto codebook = codebook_section(cs);
    const BitSequence index = index_section(cs);

    ByteWriter w;
    w.put_bytes(ContainerHeader::kMagic);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cs.variant()));
    w.put<std::uint32_t>(cs.alphabet_size());
    w.put<std::uint64_t>(cs.size());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cs.sigma()));
    w.put<std::uint32_t>(narrow32(cs.block_count(), "block count"));
    w.put<std::uint32_t>(narrow32(cs.block_len(), "block length"));
    w.put<std::uint64_t>(codebook.size());
    w.put<std::uint64_t>(cs.z().size());
    w.put<std::uint64_t>(index.size());
    w.put_bytes(codebook);
    w.put_bytes(cs.z().to_bytes());
    w.put_bytes(index.to_bytes());
    return std::move(w.bytes());
}

ContainerHeader read_header(std::span<const std::uint8_t> bytes) {
    const auto& magic = ContainerHeader::kMagic;
    if (bytes.size() < 3 || !std::equal(magic.begin(), magic.begin() + 3, bytes.begin())) {
        throw FormatError("not a VLA container (bad magic)");
    }
    if (bytes.size() < 4) {
        throw CorruptionError("container truncated");
    }
    if (bytes[3] != magic[3]) {
        throw UnsupportedVersionError("unsupported container version '" +
                                      std::string(1, static_cast<char>(bytes[3])) + "'");
    }
    ByteReader r(bytes);
    r.take(4);
    ContainerHeader h;
    const auto tag = r.get<std::uint8_t>();
    if (tag > static_cast<std::uint8_t>(Variant::Superletter)) {
        throw FormatError("unknown variant tag " + std::to_string(tag));
    }
    h.variant = static_cast<Variant>(tag);
    h.alphabet_size = r.get<std::uint32_t>();
    h.letters = r.get<std::uint64_t>();
    h.sigma = r.get<std::uint8_t>();
    h.blocks = r.get<std::uint32_t>();
    h.block_len = r.get<std::uint32_t>();
    h.codebook_bytes = r.get<std::uint64_t>();
    h.z_bits = r.get<std::uint64_t>();
    h.index_bits = r.get<std::uint64_t>();
    return h;
}

CompressedSequence deserialize(std::span<const std::uint8_t> bytes) {
    const ContainerHeader h = read_header(bytes);
    ByteReader r(bytes);
    r.take(ContainerHeader::kSize);

    if (h.alphabet_size < 2 || h.letters == 0) {
        throw CorruptionError("header declares an empty sequence or alphabet");
    }
    const std::uint64_t z_bytes = bytes_for_bits(h.z_bits);
    const std::uint64_t index_bytes = bytes_for_bits(h.index_bits);
    if (h.codebook_bytes > r.remaining() || z_bytes > r.remaining() - h.codebook_bytes ||
        index_bytes > r.remaining() - h.codebook_bytes - z_bytes) {
        throw CorruptionError("container truncated");
    }
    if (r.remaining() != h.codebook_bytes + z_bytes + index_bytes) {
        throw CorruptionError("trailing bytes after container sections");
    }
    ByteReader codebook(r.take(h.codebook_bytes));
    BitSequence z = BitSequence::from_bytes(r.take(z_bytes), h.z_bits);
    BitSequence index_bits = BitSequence::from_bytes(r.take(index_bytes), h.index_bits);

    const bool blocked = h.variant == Variant::Blocked || h.variant == Variant::Superletter;
    if (blocked != (h.block_len != 0) ||
        (blocked && h.blocks != h.letters / h.block_len + (h.letters % h.block_len != 0))) {
        throw CorruptionError("block parameters inconsistent with sequence length");
    }

    CodeBook base;
    std::vector<std::vector<Letter>> words;
    if (h.variant == Variant::Superletter) {
        const auto count = codebook.get<std::uint32_t>();
        base = get_lengths(codebook, count);
        const auto rest = codebook.take(codebook.remaining());
        const BitSequence dict = BitSequence::from_bytes(rest, rest.size() * 8);
        const unsigned len_width = bits_for(h.block_len);
        const unsigned letter_width = ceil_log2(h.alphabet_size);
        std::uint64_t pos = 0;
        words.resize(count);
        try {
            for (auto& word : words) {
                const std::uint64_t len = dict.read_bits(pos, len_width);
                pos += len_width;
                if (len > h.block_len) {
                    throw CorruptionError("block dictionary entry longer than M");
                }
                for (std::uint64_t k = 0; k < len; ++k) {
                    word.push_back(static_cast<Letter>(dict.read_bits(pos, letter_width)));
                    pos += letter_width;
                }
            }
        } catch (const BoundsError&) {
            throw CorruptionError("block dictionary truncated");
        }
        if (bytes_for_bits(pos) != rest.size()) {
            throw CorruptionError("block dictionary size mismatch");
        }
    } else {
        if (h.codebook_bytes != h.alphabet_size) {
            throw CorruptionError("codebook section size mismatch");
        }
        base = get_lengths(codebook, h.alphabet_size);
    }

    // The length-field width follows from the codebook; the header copy must agree.
    const unsigned sigma =
        h.variant == Variant::Fixed ? 0 : trim(base, base.alphabet_size()).length_field_width();
    if (h.sigma != sigma) {
        throw CorruptionError("header sigma does not match the codebook");
    }

    SequenceIndex index;
    std::uint64_t expected_bits = 0;
    switch (h.variant) {
        case Variant::Fixed:
            break;
        case Variant::SigmaTr:
            expected_bits = h.letters * sigma;
            break;
        case Variant::SigmaBit:
            expected_bits = PrefixSumTree::serialized_bits(h.letters, sigma);
            break;
        case Variant::Blocked: {
            expected_bits = std::uint64_t{h.blocks} * std::max(1u, bits_for(h.z_bits));
            for (std::uint64_t b = 0; b < h.blocks; ++b) {
                const std::uint64_t len = std::min<std::uint64_t>(h.block_len, h.letters - b * h.block_len);
                expected_bits += PrefixSumTree::serialized_bits(len, sigma);
            }
            break;
        }
        case Variant::Superletter:
            expected_bits = PrefixSumTree::serialized_bits(h.blocks, sigma);
            break;
    }
    if (expected_bits != h.index_bits) {
        throw CorruptionError("index section size mismatch");
    }

    switch (h.variant) {
        case Variant::Fixed:
            break;
        case Variant::SigmaTr:
            index = PackedIntArray::read_from(index_bits, 0, h.letters, sigma);
            break;
        case Variant::SigmaBit:
            index = PrefixSumTree::read_from(index_bits, 0, h.letters, sigma);
            break;
        case Variant::Blocked: {
            BlockIndex blocks;
            blocks.block_len = h.block_len;
            const unsigned width = std::max(1u, bits_for(h.z_bits));
            blocks.starts = PackedIntArray::read_from(index_bits, 0, h.blocks, width);
            std::uint64_t pos = std::uint64_t{h.blocks} * width;
            for (std::uint64_t b = 0; b < h.blocks; ++b) {
                const std::uint64_t len = std::min<std::uint64_t>(h.block_len, h.letters - b * h.block_len);
                blocks.trees.push_back(PrefixSumTree::read_from(index_bits, pos, len, sigma));
                pos += PrefixSumTree::serialized_bits(len, sigma);
            }
            index = std::move(blocks);
            break;
        }
        case Variant::Superletter: {
            SuperletterIndex super;
            super.block_len = h.block_len;
            super.words = std::move(words);
            super.tree = PrefixSumTree::read_from(index_bits, 0, h.blocks, sigma);
            index = std::move(super);
            break;
        }
    }

    return CompressedSequence::assemble(h.variant, h.alphabet_size, h.letters, std::move(base),
                                        std::move(z), std::move(index));
}

void write_container(const std::filesystem::path& path, const CompressedSequence& cs) {
    const auto bytes = serialize(cs);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error("failed writing " + path.string());
    }
}

CompressedSequence read_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                          std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace vla
