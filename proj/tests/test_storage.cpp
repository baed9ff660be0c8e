#include "doctest.h"

#include <random>
#include <thread>

#include "oracles.hpp"
#include "vla/errors.hpp"
#include "vla/storage.hpp"

using namespace vla;

namespace {

TrimmedCodeBook dyadic15_code() {
    std::vector<std::uint64_t> counts;
    for (int k = 1; k <= 14; ++k) {
        counts.push_back(std::uint64_t{1} << (14 - k));
    }
    counts.push_back(1);
    return trim(build_huffman(FrequencyTable(counts)), 15);
}

const std::vector<Letter> kExample = {5, 0, 0, 10};

constexpr Variant kAll[] = {Variant::Fixed, Variant::SigmaTr, Variant::SigmaBit, Variant::Blocked,
                            Variant::Superletter};

std::uint64_t default_param(Variant v, std::uint64_t n) {
    if (v == Variant::Blocked) {
        return std::max<std::uint64_t>(1, n / 7);
    }
    if (v == Variant::Superletter) {
        return std::min<std::uint64_t>(n, 3);
    }
    return 0;
}

}  // namespace

TEST_CASE("two-stream layout of the four-letter example") {
    const auto tcb = dyadic15_code();
    const CompressedSequence cs = build_sigma_tr(kExample, tcb);
    CHECK(cs.z().to_string() == "1010100001" "1010");
    CHECK(cs.z() == BitSequence::from_string("10101 00 00 11010"));
    CHECK(cs.sigma() == 3);
    const auto& y = std::get<PackedIntArray>(cs.index());
    REQUIRE(y.size() == 4);
    CHECK(y.width() == 3);
    std::vector<std::uint64_t> lengths;
    for (std::uint64_t k = 0; k < 4; ++k) {
        lengths.push_back(y.get(k) + 1);
    }
    CHECK(lengths == std::vector<std::uint64_t>{5, 2, 2, 5});
    CHECK(access_sigma_tr(cs, 4) == 10);
    CHECK(cs.codeword_offset(4) == 9);
    CHECK(access_sigma_tr(cs, 1) == 5);
    CHECK(cs.codeword_offset(1) == 0);
    CHECK_THROWS_AS(access_sigma_tr(cs, 0), BoundsError);
    CHECK_THROWS_AS(access_sigma_tr(cs, 5), BoundsError);
    CHECK_THROWS_AS(access_sigma_bit(cs, 1), VariantMismatchError);
}

TEST_CASE("single repeated letter") {
    const auto tcb = dyadic15_code();
    const std::vector<Letter> x(4, 0);
    const CompressedSequence cs = build_sigma_tr(x, tcb);
    CHECK(cs.z().to_string() == "00000000");
    const auto& y = std::get<PackedIntArray>(cs.index());
    for (std::uint64_t k = 0; k < 4; ++k) {
        CHECK(y.get(k) + 1 == 2);
    }
}

TEST_CASE("tree-indexed example") {
    const auto tcb = dyadic15_code();
    const CompressedSequence cs = build_sigma_bit(kExample, tcb);
    CHECK(cs.z() == BitSequence::from_string("10101 00 00 11010"));
    const auto& tree = std::get<PrefixSumTree>(cs.index());
    CHECK(tree.prefix_sum(3) == 9);
    CHECK(tree.prefix_sum(4) == cs.z().size());
    CHECK(access_sigma_bit(cs, 4) == 10);
    CHECK(cs.codeword_offset(1) == 0);
    for (std::uint64_t i = 1; i <= 4; ++i) {
        CHECK(access_sigma_bit(cs, i) == kExample[i - 1]);
    }

    const CompressedSequence one = build_sigma_bit(std::vector<Letter>{7}, tcb);
    CHECK(std::get<PrefixSumTree>(one.index()).size() == 1);
    CHECK(one.codeword_offset(1) == 0);
    CHECK(access_sigma_bit(one, 1) == 7);
}

TEST_CASE("builders reject bad input") {
    const auto tcb = dyadic15_code();
    CHECK_THROWS_AS(build_sigma_tr(std::vector<Letter>{}, tcb), EmptyInputError);
    CHECK_THROWS_AS(build_sigma_bit(std::vector<Letter>{1, 15}, tcb), EncodingError);
    CHECK_THROWS_AS(build_fixed(std::vector<Letter>{1, 15}, 15), EncodingError);
    CHECK_THROWS_AS(build_blocked(kExample, tcb, 0), RangeError);
    CHECK_THROWS_AS(build_blocked(kExample, tcb, 5), RangeError);
    CHECK_THROWS_AS(build_superletter(kExample, 15, 0), RangeError);
    CHECK_THROWS_AS(build_superletter(kExample, 15, 5), RangeError);
    CHECK_THROWS_AS(build_superletter(kExample, 10, 2), EncodingError);
}

TEST_CASE("blocked degenerate cases") {
    std::mt19937_64 rng(8);
    const auto x = oracle::skewed_sequence(20, 300, rng);
    const auto tcb = trimmed_huffman(x, 20);

    const CompressedSequence per_letter = build_blocked(x, tcb, x.size());
    CHECK(per_letter.block_len() == 1);
    CHECK(per_letter.block_count() == x.size());
    for (std::uint64_t i = 1; i <= x.size(); ++i) {
        AccessCounter c;
        REQUIRE(access_blocked(per_letter, i, &c) == x[i - 1]);
        REQUIRE(c.index_words == 1);  // only the block table
    }

    const CompressedSequence single = build_blocked(x, tcb, 1);
    const CompressedSequence bit = build_sigma_bit(x, tcb);
    CHECK(single.block_count() == 1);
    CHECK(single.z() == bit.z());
    for (std::uint64_t i = 1; i <= x.size(); ++i) {
        REQUIRE(access_blocked(single, i) == access_sigma_bit(bit, i));
        REQUIRE(single.codeword_offset(i) == bit.codeword_offset(i));
    }
}

TEST_CASE("blocked boundaries and table") {
    std::mt19937_64 rng(9);
    const auto x = oracle::skewed_sequence(64, 4096, rng);
    const auto tcb = trimmed_huffman(x, 64);
    const CompressedSequence cs = build_blocked(x, tcb, 64);
    const auto& blocks = std::get<BlockIndex>(cs.index());
    CHECK(blocks.block_len == 64);
    CHECK(blocks.starts.size() == 64);
    CHECK(blocks.starts.width() == bits_for(cs.z().size()));
    for (std::uint64_t r = 1; r < 64; ++r) {
        CHECK(blocks.starts.get(r) > blocks.starts.get(r - 1));
    }
    CHECK(cs.codeword_offset(1) == blocks.starts.get(0));
    CHECK(cs.codeword_offset(65) == blocks.starts.get(1));
    CHECK(access_blocked(cs, 65) == x[64]);

    const StorageStats s = stats(cs);
    const double h1 = oracle::entropy(x, 64);
    CHECK(s.empirical_h1 == doctest::Approx(h1));
    const double bound = 4096 * (h1 + std::log2(std::log2(66.0)) + 4) +
                         64 * std::ceil(std::log2(4096.0 * (6 + 1)));
    CHECK(s.bound_bits == doctest::Approx(bound));
    CHECK(static_cast<double>(s.payload_bits) <= bound);
}

TEST_CASE("blocked with more blocks requested than fit uses ceil(N/m)") {
    std::vector<Letter> x(10);
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = static_cast<Letter>(k % 3);
    }
    const CompressedSequence cs = build_blocked(x, trimmed_huffman(x, 3), 6);
    CHECK(cs.block_len() == 2);
    CHECK(cs.block_count() == 5);
    for (std::uint64_t i = 1; i <= x.size(); ++i) {
        CHECK(cs.access(i) == x[i - 1]);
    }
}

TEST_CASE("superletter degenerate cases") {
    std::mt19937_64 rng(12);
    const auto x = oracle::skewed_sequence(15, 500, rng);

    const CompressedSequence m1 = build_superletter(x, 15, 1);
    const CompressedSequence bit = build_sigma_bit(x, trimmed_huffman(x, 15));
    for (std::uint64_t i = 1; i <= x.size(); ++i) {
        REQUIRE(access_superletter(m1, i) == access_sigma_bit(bit, i));
    }

    const CompressedSequence whole = build_superletter(x, 15, x.size());
    const auto& super = std::get<SuperletterIndex>(whole.index());
    CHECK(super.words.size() == 2);  // the one block plus the placeholder
    CHECK(whole.block_count() == 1);
    CHECK(whole.base_code().alphabet_size() == 2);
    CHECK(access_superletter(whole, 1) == x.front());
    CHECK(access_superletter(whole, x.size()) == x.back());
}

TEST_CASE("superletter short last block") {
    const std::vector<Letter> x = {0, 1, 2, 0, 1, 2, 0};
    const CompressedSequence cs = build_superletter(x, 3, 3);
    CHECK(cs.block_count() == 3);
    for (std::uint64_t i = 1; i <= x.size(); ++i) {
        CHECK(access_superletter(cs, i) == x[i - 1]);
    }
    CHECK(cs.decode_all() == x);
}

TEST_CASE("superletter gains on english-like text") {
    std::mt19937_64 rng(21);
    const auto x = oracle::english_like_bytes(1 << 16, rng);
    const StorageStats bit = stats(build_sigma_bit(x, trimmed_huffman(x, 256)));
    const StorageStats super = stats(build_superletter(x, 256, 4));
    CHECK(super.empirical_hM < bit.empirical_h1);
    CHECK(super.bits_per_letter < bit.bits_per_letter);
    CHECK(super.slack >= 0);
}

TEST_CASE("property: all variants agree with the original sequence") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const std::uint32_t alphabet = 2 + static_cast<std::uint32_t>(rng() % 511);
        const std::size_t n = 1 + rng() % 1500;
        const auto x = oracle::skewed_sequence(alphabet, n, rng);
        std::vector<CompressedSequence> built;
        for (Variant v : kAll) {
            built.push_back(build_variant(v, x, alphabet, default_param(v, n)));
        }
        for (std::uint64_t i = 1; i <= n; ++i) {
            for (const auto& cs : built) {
                REQUIRE(cs.access(i) == x[i - 1]);
            }
        }
        for (const auto& cs : built) {
            REQUIRE(cs.decode_all() == x);
        }
    }
}

TEST_CASE("property: tree offsets equal the linear-scan offsets") {
    std::mt19937_64 rng(41);
    const auto x = oracle::skewed_sequence(100, 2000, rng);
    const auto tcb = trimmed_huffman(x, 100);
    const CompressedSequence tr = build_sigma_tr(x, tcb);
    const CompressedSequence bit = build_sigma_bit(x, tcb);
    const auto& y = std::get<PackedIntArray>(tr.index());
    const auto& tree = std::get<PrefixSumTree>(bit.index());
    std::uint64_t scan = 0;
    for (std::uint64_t i = 1; i <= x.size(); ++i) {
        REQUIRE(tree.prefix_sum(i - 1) == scan);
        REQUIRE(tr.codeword_offset(i) == scan);
        scan += y.get(i - 1) + 1;
    }
    CHECK(tree.prefix_sum(x.size()) == bit.z().size());
}

TEST_CASE("access counters") {
    std::mt19937_64 rng(51);
    const std::size_t n = 5000;
    const auto x = oracle::skewed_sequence(40, n, rng);
    const auto tcb = trimmed_huffman(x, 40);
    const CompressedSequence tr = build_sigma_tr(x, tcb);
    const CompressedSequence bit = build_sigma_bit(x, tcb);
    const CompressedSequence blocked = build_blocked(x, tcb, 71);
    const unsigned log_n = ceil_log2(n);
    const unsigned log_m = ceil_log2(blocked.block_len());
    for (std::uint64_t i = 1; i <= n; i += 7) {
        AccessCounter a, b, c;
        access_sigma_tr(tr, i, &a);
        access_sigma_bit(bit, i, &b);
        access_blocked(blocked, i, &c);
        REQUIRE(a.index_words == i - 1);
        REQUIRE(b.index_words <= log_n + 1);
        REQUIRE(c.index_words <= log_m + 2);
    }
}

TEST_CASE("stats and bounds") {
    std::mt19937_64 rng(61);

    SUBCASE("dyadic fifteen-letter source") {
        std::vector<double> w;
        for (int k = 1; k <= 14; ++k) {
            w.push_back(std::ldexp(1.0, -k));
        }
        w.push_back(std::ldexp(1.0, -14));
        std::discrete_distribution<Letter> dist(w.begin(), w.end());
        std::vector<Letter> x(10000);
        for (auto& a : x) {
            a = dist(rng);
        }
        const StorageStats s = stats(build_variant(Variant::SigmaTr, x, 15));
        const double h1 = oracle::entropy(x, 15);
        CHECK(s.bits_per_letter < h1 + std::log2(std::log2(15.0) + 2) + 3);
        CHECK(s.slack >= 0);
    }

    SUBCASE("uniform binary source") {
        std::vector<Letter> x(4096);
        for (auto& a : x) {
            a = static_cast<Letter>(rng() & 1);
        }
        for (Variant v : {Variant::SigmaTr, Variant::SigmaBit}) {
            const StorageStats s = stats(build_variant(v, x, 2));
            CHECK(s.empirical_h1 == doctest::Approx(1.0).epsilon(0.01));
            CHECK(s.bits_per_letter <= 1 + 1 + 2);  // codeword + length field + tree overhead
            CHECK(s.slack >= 0);
        }
    }

    SUBCASE("constant sequence") {
        const std::vector<Letter> x(1000, 3);
        const StorageStats s = stats(build_variant(Variant::SigmaBit, x, 8));
        CHECK(s.empirical_h1 == 0.0);
        // All overhead: a 2-bit trimmed codeword plus the tree.
        CHECK(s.z_bits == 2000);
        CHECK(s.bits_per_letter == doctest::Approx((2000.0 + s.index_bits) / 1000));
        CHECK(s.slack >= 0);
    }

    SUBCASE("fixed baseline is exact") {
        const auto x = oracle::skewed_sequence(15, 1000, rng);
        const StorageStats s = stats(build_variant(Variant::Fixed, x, 15));
        CHECK(s.payload_bits == 4000);
        CHECK(s.index_bits == 0);
        CHECK(s.slack == 0);
    }
}

TEST_CASE("tree-indexed size on a 64-letter alphabet") {
    std::mt19937_64 rng(71);
    const auto x = oracle::skewed_sequence(64, 1 << 12, rng);
    const CompressedSequence cs = build_variant(Variant::SigmaBit, x, 64);
    CHECK(cs.sigma() == 3);
    CHECK(cs.index_bits() <= (1u << 12) * (cs.sigma() + 1));
}

TEST_CASE("concurrent readers see identical results") {
    std::mt19937_64 rng(81);
    const auto x = oracle::skewed_sequence(200, 20000, rng);
    const CompressedSequence cs = build_variant(Variant::Blocked, x, 200, 100);
    std::vector<int> mismatches(4, 0);
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&, t] {
            for (std::uint64_t i = 1 + t; i <= x.size(); i += 4) {
                AccessCounter c;
                if (cs.access(i, &c) != x[i - 1]) {
                    ++mismatches[t];
                }
            }
        });
    }
    for (auto& w : workers) {
        w.join();
    }
    CHECK(mismatches == std::vector<int>(4, 0));
}

TEST_CASE("variant names") {
    for (Variant v : kAll) {
        CHECK(parse_variant(variant_name(v)) == v);
    }
    CHECK_FALSE(parse_variant("huffman").has_value());
}
