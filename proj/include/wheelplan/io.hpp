#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wheelplan::io {

/// Decoded binary netpbm raster (P5 graymap or P6 pixmap).
struct Netpbm {
    char kind = '5';  // '5' = graymap, '6' = pixmap
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<std::string> comments;  // text after '#', leading space stripped
    std::vector<std::uint16_t> samples;  // width*height*channels, row-major
};

Netpbm parse_netpbm(std::string_view bytes);
std::string encode_netpbm(const Netpbm& img);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories; throws IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// FNV-1a 64-bit digest, hex encoded. Used for input digests in provenance headers.
std::string digest(std::string_view bytes);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Provenance carried by every artifact the CLI writes.
struct Provenance {
    std::string subcommand;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  // name -> digest

    /// Single line, no leading comment marker.
    std::string line() const;
};

inline constexpr std::string_view kToolVersion = "wheelplan 0.1.0";

}  // namespace wheelplan::io
