#include "fideval/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fideval/error.hpp"

namespace fideval {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::uint32_t read_be32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
}

bool has_png_signature(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= kPngSignature.size() &&
           std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin());
}

// Minimal PGM header tokenizer: whitespace separated fields, '#' comments.
class PgmHeader {
public:
    explicit PgmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::string token() {
        skip_space_and_comments();
        std::string out;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
            out.push_back(static_cast<char>(bytes_[pos_++]));
        }
        if (out.empty()) throw DecodeError("decode failure: truncated PGM header");
        return out;
    }

    int number() {
        const std::string t = token();
        if (!std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
            t.size() > 9) {
            throw DecodeError("decode failure: bad PGM header field '" + t + "'");
        }
        return std::stoi(t);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    std::size_t raster_offset() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw DecodeError("decode failure: malformed PGM header");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error("cannot read '" + path.string() + "'");
    return bytes;
}

ImagePlane decode_png(std::span<const std::uint8_t> bytes) {
    // Signature (8) + IHDR length/type (8) + IHDR body (13).
    if (!has_png_signature(bytes) || bytes.size() < 33 ||
        std::memcmp(bytes.data() + 12, "IHDR", 4) != 0) {
        throw DecodeError("decode failure: not a PNG stream");
    }
    const int bit_depth = bytes[24];
    const int color_type = bytes[25];
    if (bit_depth != 8) {
        throw DecodeError("unsupported bit depth " + std::to_string(bit_depth) + " (8-bit required)");
    }
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_RGB) {
        throw DecodeError("unsupported PNG color type " + std::to_string(color_type) +
                          " (grayscale or RGB required)");
    }

    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("decode failure: " + msg);
    }
    const bool rgb = color_type == PNG_COLOR_TYPE_RGB;
    image.format = rgb ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int width = static_cast<int>(read_be32(bytes.data() + 16));
    const int height = static_cast<int>(read_be32(bytes.data() + 20));
    std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
        std::string msg = image.message;
        png_image_free(&image);
        throw DecodeError("decode failure: " + msg);
    }

    std::vector<double> out(static_cast<std::size_t>(width) * height);
    if (rgb) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = rgb_to_luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
        }
    } else {
        std::copy(raw.begin(), raw.end(), out.begin());
    }
    return {width, height, std::move(out)};
}

ImagePlane decode_pgm(std::span<const std::uint8_t> bytes) {
    PgmHeader header(bytes);
    if (header.token() != "P5") throw DecodeError("decode failure: not a binary PGM (P5) stream");
    const int width = header.number();
    const int height = header.number();
    const int maxval = header.number();
    if (maxval < 1 || maxval > 255) {
        throw DecodeError("unsupported bit depth: PGM maxval " + std::to_string(maxval));
    }
    const std::size_t offset = header.raster_offset();
    if (width < 1 || height < 1) throw DecodeError("decode failure: empty PGM raster");
    const std::size_t count = static_cast<std::size_t>(width) * height;
    if (bytes.size() - offset < count) throw DecodeError("decode failure: truncated PGM raster");
    std::vector<double> out(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                            bytes.begin() + static_cast<std::ptrdiff_t>(offset + count));
    return {width, height, std::move(out)};
}

ImagePlane load_image(const std::filesystem::path& path, std::optional<ImageFormat> format) {
    const auto bytes = read_file_bytes(path);
    if (!format) {
        format = has_png_signature(bytes) ? ImageFormat::png : ImageFormat::pgm;
    }
    try {
        return *format == ImageFormat::png ? decode_png(bytes) : decode_pgm(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

Quantized quantize(const ImagePlane& img) {
    Quantized q;
    q.pixels.reserve(img.size());
    for (double v : img.data()) {
        if (!(v >= 0.0 && v <= 255.0)) ++q.clamped;
        const double c = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 255.0);
        q.pixels.push_back(static_cast<std::uint8_t>(std::lround(c)));
    }
    return q;
}

std::vector<std::uint8_t> encode_pgm(const ImagePlane& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const auto q = quantize(img);
    out.insert(out.end(), q.pixels.begin(), q.pixels.end());
    return out;
}

std::vector<std::uint8_t> encode_png(const ImagePlane& img) {
    const auto q = quantize(img);
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, q.pixels.data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failure: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, q.pixels.data(), 0, nullptr)) {
        throw Error(std::string("PNG encode failure: ") + image.message);
    }
    out.resize(size);
    return out;
}

std::size_t save_image(const ImagePlane& img, const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto bytes = ext == ".png" ? encode_png(img) : encode_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
    return quantize(img).clamped;
}

}  // namespace fideval
