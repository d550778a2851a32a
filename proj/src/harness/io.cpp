#include "rvarpro/harness/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rvarpro/errors.hpp"

namespace rvarpro::harness {

namespace fs = std::filesystem;

namespace {

// Next whitespace-separated header token, skipping # comments.
std::string header_token(std::istream& in, const std::string& path) {
    std::string tok;
    while (true) {
        const int c = in.get();
        if (c == EOF) break;
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw IoError("'" + path + "': truncated PGM header");
    return tok;
}

std::size_t header_number(std::istream& in, const std::string& path) {
    const std::string tok = header_token(in, path);
    if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw IoError("'" + path + "': malformed PGM header field '" + tok + "'");
    }
    return std::stoul(tok);
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open PGM file '" + path + "'");
    if (header_token(in, path) != "P5") throw IoError("'" + path + "': not a binary (P5) PGM file");
    GrayImage img;
    img.width = header_number(in, path);
    img.height = header_number(in, path);
    // The single whitespace byte after maxval is consumed by header_token.
    const std::size_t maxval = header_number(in, path);
    if (img.width == 0 || img.height == 0) throw IoError("'" + path + "': empty image");
    if (maxval == 0 || maxval > 255) throw IoError("'" + path + "': only 8-bit PGM (maxval <= 255) is supported");
    std::string raster(img.width * img.height, '\0');
    in.read(raster.data(), static_cast<std::streamsize>(raster.size()));
    if (static_cast<std::size_t>(in.gcount()) != raster.size()) throw IoError("'" + path + "': truncated raster");
    img.pixels.resize(raster.size());
    // The raster is row-major; pixels are stored column-major.
    for (std::size_t r = 0; r < img.height; ++r)
        for (std::size_t c = 0; c < img.width; ++c) {
            const auto v = static_cast<unsigned char>(raster[r * img.width + c]);
            img.pixels[r + c * img.height] = static_cast<double>(v) / static_cast<double>(maxval);
        }
    return img;
}

std::string encode_pgm(const Vec& pixels, std::size_t height, std::size_t width) {
    if (pixels.size() != height * width) throw ArgumentError("encode_pgm: pixel count does not match size");
    const auto [lo_it, hi_it] = std::minmax_element(pixels.begin(), pixels.end());
    const double lo = pixels.empty() ? 0.0 : *lo_it;
    const double hi = pixels.empty() ? 0.0 : *hi_it;
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.reserve(out.size() + pixels.size());
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double v = pixels[r + c * height];
            const double t = hi > lo ? (v - lo) / (hi - lo) : 0.0;
            out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0))));
        }
    return out;
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw IoError("write failed for '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

void ensure_writable_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
    const fs::path probe = fs::path(dir) / ".rvarpro-write-probe";
    {
        std::ofstream out(probe, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("output directory '" + dir + "' is not writable");
    }
    fs::remove(probe, ec);
}

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace rvarpro::harness
