#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "rvarpro/linalg.hpp"

namespace rvarpro::harness {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    // Column-major, pixel (row i, column j) at i + j * height, values in [0,1].
    Vec pixels;
};

// Binary P5, maxval <= 255. Throws IoError with the path on failure.
GrayImage read_pgm(const std::string& path);
// Linear rescale of `pixels` from [min,max] to [0,255] (constant images map to 0).
std::string encode_pgm(const Vec& pixels, std::size_t height, std::size_t width);

// Writes to `path`.tmp then renames over `path`.
void write_file_atomic(const std::string& path, std::string_view contents);
// Creates `dir` if needed and verifies a file can be created in it.
void ensure_writable_directory(const std::string& dir);

// printf %.17g, with "nan"/"inf"/"-inf" for non-finite values.
std::string format_real(double v);

}  // namespace rvarpro::harness
