#pragma once

// Netpbm grey-map (PGM) reading and writing: P2 (ASCII) and P5 (binary),
// 8- or 16-bit samples, rows top to bottom.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "atflow/errors.hpp"
#include "atflow/fields.hpp"

namespace atflow {

/// Decoded grey map with samples mapped linearly to [0, 1].
struct PgmImage {
    std::size_t width = 0;
    std::size_t height = 0;
    unsigned maxval = 255;
    std::vector<double> values; // row-major, width fastest
};

namespace detail {

class PgmCursor {
public:
    explicit PgmCursor(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }
    void advance(std::size_t n) noexcept { pos_ += n; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const unsigned char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    unsigned long read_unsigned(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
            if (v > 0xFFFFFFFFul) throw ParseError(start, std::string(what) + " out of range");
            ++pos_;
        }
        if (pos_ == start) throw ParseError(start, std::string("expected ") + what);
        if (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
            throw ParseError(pos_, std::string("unexpected byte after ") + what);
        }
        return v;
    }

    // The single whitespace byte separating a P5 header from its raster.
    void expect_single_space() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw ParseError(pos_, "expected whitespace before raster");
        }
        ++pos_;
    }

    unsigned read_binary(unsigned bytes_per_sample) {
        if (pos_ + bytes_per_sample > bytes_.size()) throw ParseError(pos_, "raster truncated");
        unsigned v = bytes_[pos_];
        if (bytes_per_sample == 2) v = (v << 8) | bytes_[pos_ + 1];
        pos_ += bytes_per_sample;
        return v;
    }

private:
    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace detail

inline PgmImage decode_pgm(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P') throw FormatError("not a Netpbm file (missing 'P' magic)");
    const char kind = static_cast<char>(bytes[1]);
    if (kind != '2' && kind != '5') {
        throw FormatError(std::string("unsupported Netpbm magic 'P") + kind + "', expected P2 or P5");
    }
    detail::PgmCursor cur(bytes);
    cur.advance(2);

    PgmImage img;
    const std::size_t width_at = cur.offset();
    img.width = cur.read_unsigned("width");
    img.height = cur.read_unsigned("height");
    const std::size_t maxval_at = cur.offset();
    const unsigned long maxval = cur.read_unsigned("maxval");
    if (img.width == 0 || img.height == 0) throw ParseError(width_at, "zero image dimension");
    if (maxval == 0) throw ParseError(maxval_at, "maxval must be positive");
    if (maxval > 65535) throw FormatError("maxval " + std::to_string(maxval) + " exceeds 65535");
    img.maxval = static_cast<unsigned>(maxval);

    const std::size_t count = img.width * img.height;
    img.values.resize(count);
    const double maxval_d = static_cast<double>(img.maxval);
    if (kind == '5') {
        cur.expect_single_space();
        const unsigned bps = img.maxval < 256 ? 1u : 2u;
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t at = cur.offset();
            const unsigned v = cur.read_binary(bps);
            if (v > img.maxval) throw ParseError(at, "sample exceeds maxval");
            img.values[k] = static_cast<double>(v) / maxval_d;
        }
    } else {
        for (std::size_t k = 0; k < count; ++k) {
            cur.skip_space_and_comments();
            const std::size_t at = cur.offset();
            const unsigned long v = cur.read_unsigned("sample");
            if (v > img.maxval) throw ParseError(at, "sample exceeds maxval");
            img.values[k] = static_cast<double>(v) / maxval_d;
        }
    }
    return img;
}

inline PgmImage read_pgm(const std::filesystem::path& path) { return decode_pgm(detail::read_file(path)); }

/// Field on the grid nx = width, ny = height, lx = 1, ly = height / width.
/// Image row r is grid row j = r.
inline ScalarField2D image_to_field(const PgmImage& img) {
    if (img.width < 3 || img.height < 3) {
        throw UsageError("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                         " is too small for the solver grid (need at least 3x3)");
    }
    const Grid grid(img.width, img.height, 1.0, static_cast<double>(img.height) / static_cast<double>(img.width));
    return ScalarField2D(grid, img.values);
}

inline ScalarField2D load_pgm(const std::filesystem::path& path) { return image_to_field(read_pgm(path)); }

/// Round half to even, independent of the floating-point environment.
inline double round_half_even(double v) {
    const double r = std::floor(v);
    const double d = v - r;
    if (d > 0.5) return r + 1.0;
    if (d < 0.5) return r;
    return std::fmod(r, 2.0) == 0.0 ? r : r + 1.0;
}

/// 8-bit quantisation of v after clamping to [lo, hi].
inline std::uint8_t quantize(double v, double lo = 0.0, double hi = 1.0) {
    const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
    return static_cast<std::uint8_t>(round_half_even(t * 255.0));
}

inline std::vector<unsigned char> encode_pgm(std::size_t width, std::size_t height,
                                             const std::vector<std::uint8_t>& pixels) {
    const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.insert(out.end(), pixels.begin(), pixels.end());
    return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

/// Writes f as an 8-bit P5 grey map, clamping to [lo, hi].
inline void save_pgm(const ScalarField2D& f, const std::filesystem::path& path, double lo = 0.0, double hi = 1.0) {
    if (!(hi > lo)) throw UsageError("save_pgm: clip range must satisfy lo < hi");
    std::vector<std::uint8_t> pixels(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) pixels[k] = quantize(f[k], lo, hi);
    write_bytes(path, encode_pgm(f.nx(), f.ny(), pixels));
}

} // namespace atflow
