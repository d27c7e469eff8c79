#pragma once

#include <stdexcept>
#include <string>

namespace bolw {

enum class Errc {
    file_not_found,
    malformed_record,
    duplicate_image_id,
    empty_corpus,
    index_out_of_range,
    unknown_camera,
    all_words_filtered,
    length_mismatch,
    invalid_target_weight,
    non_integer_weights,
    non_finite_weight,
    vocabulary_mismatch,
    incompatible_bin_width,
    invalid_config,
    io_error,
};

/// Library-wide error type. Every throwing operation reports one of the
/// Errc codes above so callers can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace bolw
