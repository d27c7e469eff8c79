#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace bolw {

// FNV-1a, 64-bit. Used for vocabulary identity checks and for the input
// hashes echoed into resolved configs. Not cryptographic.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::filesystem::path& path);

} // namespace bolw
