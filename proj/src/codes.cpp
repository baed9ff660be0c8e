#include "vla/codes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "vla/errors.hpp"

namespace vla {

// ---------------------------------------------------------------------------
// Alphabet

Alphabet Alphabet::bytes() {
    Alphabet alpha;
    alpha.bytes_ = true;
    alpha.symbols_.reserve(256);
    for (int b = 0; b < 256; ++b) {
        alpha.symbols_.emplace_back(1, static_cast<char>(b));
    }
    return alpha;
}

Alphabet Alphabet::from_tokens(const std::vector<std::string>& tokens) {
    if (tokens.empty()) {
        throw EmptyInputError("empty input");
    }
    Alphabet alpha;
    alpha.symbols_ = tokens;
    std::sort(alpha.symbols_.begin(), alpha.symbols_.end());
    alpha.symbols_.erase(std::unique(alpha.symbols_.begin(), alpha.symbols_.end()),
                         alpha.symbols_.end());
    if (alpha.symbols_.size() == 1) {
        alpha.symbols_.insert(alpha.symbols_.begin(), std::string{});
    }
    return alpha;
}

const std::string& Alphabet::symbol(Letter a) const {
    if (a >= symbols_.size()) {
        throw BoundsError("letter " + std::to_string(a) + " outside alphabet of size " +
                          std::to_string(symbols_.size()));
    }
    return symbols_[a];
}

Letter Alphabet::letter_of(const std::string& symbol) const {
    if (bytes_) {
        if (symbol.size() != 1) {
            throw EncodingError("byte alphabet expects single-byte symbols");
        }
        return static_cast<unsigned char>(symbol[0]);
    }
    auto it = std::lower_bound(symbols_.begin(), symbols_.end(), symbol);
    if (it == symbols_.end() || *it != symbol) {
        throw EncodingError("symbol '" + symbol + "' not in alphabet");
    }
    return static_cast<Letter>(it - symbols_.begin());
}

// ---------------------------------------------------------------------------
// FrequencyTable

FrequencyTable::FrequencyTable(std::vector<std::uint64_t> counts)
    : counts_(std::move(counts)),
      total_(std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0})) {}

FrequencyTable FrequencyTable::of(std::span<const Letter> x, std::uint32_t alphabet_size) {
    std::vector<std::uint64_t> counts(alphabet_size, 0);
    for (Letter a : x) {
        if (a >= alphabet_size) {
            throw EncodingError("letter " + std::to_string(a) + " outside alphabet of size " +
                                std::to_string(alphabet_size));
        }
        ++counts[a];
    }
    return FrequencyTable(std::move(counts));
}

double FrequencyTable::probability(Letter a) const {
    return total_ == 0 ? 0.0 : static_cast<double>(count(a)) / static_cast<double>(total_);
}

double FrequencyTable::entropy() const {
    if (total_ == 0) {
        return 0.0;
    }
    const double n = static_cast<double>(total_);
    double h = 0.0;
    for (std::uint64_t c : counts_) {
        if (c != 0) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
    }
    return h;
}

double FrequencyTable::average_length(std::span<const unsigned> lengths) const {
    if (lengths.size() != counts_.size()) {
        throw RangeError("length vector does not match alphabet size");
    }
    if (total_ == 0) {
        return 0.0;
    }
    long double sum = 0;
    for (std::size_t a = 0; a < counts_.size(); ++a) {
        sum += static_cast<long double>(counts_[a]) * lengths[a];
    }
    return static_cast<double>(sum / static_cast<long double>(total_));
}

// ---------------------------------------------------------------------------
// CodeBook

namespace {

// Kraft's inequality checked exactly: walk the code tree level by level and
// make sure enough free nodes remain for the codewords of each length.
bool satisfies_kraft(const std::vector<unsigned>& lengths, unsigned max_length) {
    std::vector<std::uint64_t> per_length(max_length + 1, 0);
    for (unsigned l : lengths) {
        ++per_length[l];
    }
    const std::uint64_t cap = static_cast<std::uint64_t>(lengths.size()) + 1;
    std::uint64_t free_nodes = 1;
    for (unsigned l = 1; l <= max_length; ++l) {
        free_nodes = std::min(free_nodes * 2, cap);
        if (per_length[l] > free_nodes) {
            return false;
        }
        free_nodes -= per_length[l];
    }
    return true;
}

}  // namespace

CodeBook CodeBook::from_lengths(std::vector<unsigned> lengths) {
    if (lengths.size() < 2) {
        throw RangeError("alphabet must have at least two letters");
    }
    CodeBook book;
    book.max_length_ = *std::max_element(lengths.begin(), lengths.end());
    if (*std::min_element(lengths.begin(), lengths.end()) == 0) {
        throw CorruptionError("zero codeword length");
    }
    if (!satisfies_kraft(lengths, book.max_length_)) {
        throw CorruptionError("codeword lengths violate Kraft's inequality");
    }

    std::vector<Letter> order(lengths.size());
    std::iota(order.begin(), order.end(), Letter{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Letter a, Letter b) { return lengths[a] < lengths[b]; });

    book.codewords_.assign(lengths.size(), 0);
    std::uint64_t code = 0;
    unsigned prev = lengths[order.front()];
    bool first = true;
    for (Letter a : order) {
        const unsigned len = lengths[a];
        if (len > kMaxFieldWidth) {
            break;
        }
        if (!first) {
            code = (code + 1) << (len - prev);
        }
        first = false;
        prev = len;
        book.codewords_[a] = code;
    }
    book.lengths_ = std::move(lengths);
    return book;
}

std::uint64_t CodeBook::codeword(Letter a) const {
    if (length(a) > kMaxFieldWidth) {
        throw RangeError("codeword of letter " + std::to_string(a) + " is longer than 64 bits");
    }
    return codewords_[a];
}

std::string CodeBook::codeword_string(Letter a) const {
    const unsigned len = length(a);
    const std::uint64_t bits = codeword(a);
    std::string s(len, '0');
    for (unsigned k = 0; k < len; ++k) {
        if ((bits >> (len - 1 - k)) & 1) {
            s[k] = '1';
        }
    }
    return s;
}

CodeBook build_huffman(const FrequencyTable& freqs) {
    const std::uint32_t n = freqs.alphabet_size();
    if (n < 2) {
        throw RangeError("alphabet must have at least two letters");
    }
    if (freqs.total() == 0) {
        throw EmptyInputError("all letter counts are zero");
    }

    struct Node {
        std::uint64_t weight;
        Letter min_letter;
        std::uint32_t id;
    };
    auto heavier = [](const Node& a, const Node& b) {
        return a.weight != b.weight ? a.weight > b.weight : a.min_letter > b.min_letter;
    };
    std::priority_queue<Node, std::vector<Node>, decltype(heavier)> heap(heavier);
    for (Letter a = 0; a < n; ++a) {
        heap.push({std::max<std::uint64_t>(freqs.count(a), 1), a, a});
    }

    // Internal nodes get ids n, n+1, ...; a parent always has a larger id
    // than its children.
    std::vector<std::uint32_t> parent(2 * std::size_t{n} - 1, 0);
    std::uint32_t next = n;
    while (heap.size() > 1) {
        const Node a = heap.top();
        heap.pop();
        const Node b = heap.top();
        heap.pop();
        parent[a.id] = next;
        parent[b.id] = next;
        heap.push({a.weight + b.weight, std::min(a.min_letter, b.min_letter), next});
        ++next;
    }

    std::vector<unsigned> depth(parent.size(), 0);
    for (std::uint32_t id = next - 1; id-- > 0;) {
        depth[id] = depth[parent[id]] + 1;
    }
    return CodeBook::from_lengths(std::vector<unsigned>(depth.begin(), depth.begin() + n));
}

CodeBook fixed_width_codebook(std::uint32_t alphabet_size) {
    if (alphabet_size < 2) {
        throw RangeError("alphabet must have at least two letters");
    }
    return CodeBook::from_lengths(std::vector<unsigned>(alphabet_size, ceil_log2(alphabet_size)));
}

// ---------------------------------------------------------------------------
// TrimmedCodeBook

std::vector<unsigned> TrimmedCodeBook::lengths() const {
    std::vector<unsigned> out(codewords_.size());
    std::transform(codewords_.begin(), codewords_.end(), out.begin(),
                   [](const Codeword& c) { return c.width; });
    return out;
}

TrimmedCodeBook trim(const CodeBook& base, std::uint32_t alphabet_size) {
    if (base.alphabet_size() != alphabet_size || alphabet_size < 2) {
        throw RangeError("codebook covers " + std::to_string(base.alphabet_size()) +
                         " letters, expected " + std::to_string(alphabet_size));
    }
    TrimmedCodeBook out;
    out.base_ = base;
    out.index_width_ = ceil_log2(alphabet_size);
    out.codewords_.resize(alphabet_size);
    const unsigned ell = out.index_width_;
    for (Letter a = 0; a < alphabet_size; ++a) {
        const unsigned len = base.length(a);
        if (len <= ell) {
            out.codewords_[a] = {base.codeword(a), len + 1};
        } else {
            out.codewords_[a] = {(std::uint64_t{1} << ell) | a, ell + 1};
        }
    }
    return out;
}

Codeword encode_letter(const TrimmedCodeBook& code, Letter a) {
    if (a >= code.alphabet_size()) {
        throw BoundsError("letter " + std::to_string(a) + " outside alphabet of size " +
                          std::to_string(code.alphabet_size()));
    }
    return code.codeword(a);
}

// ---------------------------------------------------------------------------
// Decoding

DecodeTable::DecodeTable(const TrimmedCodeBook& code) : window_(code.max_length()) {
    entries_.assign(std::size_t{1} << window_, DecodedLetter{});
    for (Letter a = 0; a < code.alphabet_size(); ++a) {
        const Codeword& c = code.codeword(a);
        const unsigned pad = window_ - c.width;
        const std::uint64_t first = c.bits << pad;
        const std::uint64_t last = first + (std::uint64_t{1} << pad);
        for (std::uint64_t w = first; w < last; ++w) {
            entries_[w] = {a, c.width};
        }
    }
}

DecodedLetter decode_at(const TrimmedCodeBook& code, const DecodeTable& table,
                        const BitSequence& z, std::uint64_t offset) {
    if (table.window_width() != code.max_length()) {
        throw RangeError("decode table does not belong to this codebook");
    }
    if (offset >= z.size()) {
        throw BoundsError("decode offset " + std::to_string(offset) + " past end of " +
                          std::to_string(z.size()) + "-bit stream");
    }
    const unsigned window = table.window_width();
    const std::uint64_t left = z.size() - offset;
    const unsigned avail = left < window ? static_cast<unsigned>(left) : window;
    const std::uint64_t bits = z.read_bits(offset, avail) << (window - avail);
    const DecodedLetter& hit = table.lookup(bits);
    if (hit.width == 0 || hit.width > avail) {
        throw CorruptionError("no codeword starts at bit " + std::to_string(offset));
    }
    return hit;
}

}  // namespace vla
