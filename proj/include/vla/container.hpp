#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vla/storage.hpp"

namespace vla {

// Fixed 50-byte file header; integers little-endian. See
// docs/container_format.md for the full layout.
struct ContainerHeader {
    static constexpr std::array<std::uint8_t, 4> kMagic = {'V', 'L', 'A', '1'};
    static constexpr std::size_t kSize = 50;

    Variant variant = Variant::Fixed;
    std::uint32_t alphabet_size = 0;  // L of the base alphabet
    std::uint64_t letters = 0;        // N
    std::uint8_t sigma = 0;           // width of one length field, 0 for Fixed
    std::uint32_t blocks = 0;         // m, zero unless Blocked/Superletter
    std::uint32_t block_len = 0;      // M, zero unless Blocked/Superletter
    std::uint64_t codebook_bytes = 0;
    std::uint64_t z_bits = 0;
    std::uint64_t index_bits = 0;

    friend bool operator==(const ContainerHeader&, const ContainerHeader&) = default;
};

// Deterministic: equal sequences give equal bytes.
std::vector<std::uint8_t> serialize(const CompressedSequence& cs);

// Throws FormatError for a foreign file, UnsupportedVersionError for another
// container version and CorruptionError for truncated or inconsistent data.
CompressedSequence deserialize(std::span<const std::uint8_t> bytes);

// Parses and validates only the header.
ContainerHeader read_header(std::span<const std::uint8_t> bytes);

void write_container(const std::filesystem::path& path, const CompressedSequence& cs);
CompressedSequence read_container(const std::filesystem::path& path);

}  // namespace vla
