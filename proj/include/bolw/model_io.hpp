#pragma once

#include <filesystem>

#include "bolw/lda.hpp"

namespace bolw {

// Model file: 8-byte magic, little-endian u32 format version, u64 JSON
// header length, the header (config, dimensions, vocabulary hash), then phi,
// theta and the ELBO trace as raw little-endian doubles. Byte-identical for
// identical models.
void save_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model(const std::filesystem::path& path);

} // namespace bolw
