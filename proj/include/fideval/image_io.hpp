#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fideval/image.hpp"

namespace fideval {

enum class ImageFormat { png, pgm };

/// Reads an 8-bit grayscale or 8-bit RGB image. RGB is reduced to luma;
/// samples are widened to double without rescaling. When `format` is empty
/// it is sniffed from the file signature.
ImagePlane load_image(const std::filesystem::path& path,
                      std::optional<ImageFormat> format = std::nullopt);

ImagePlane decode_png(std::span<const std::uint8_t> bytes);
ImagePlane decode_pgm(std::span<const std::uint8_t> bytes);

/// Result of quantizing a plane to 8 bits: rounded, clamped to [0, 255].
struct Quantized {
    std::vector<std::uint8_t> pixels;
    std::size_t clamped = 0;  // samples that fell outside [0, 255]
};

Quantized quantize(const ImagePlane& img);

std::vector<std::uint8_t> encode_pgm(const ImagePlane& img);
std::vector<std::uint8_t> encode_png(const ImagePlane& img);

/// Writes the image, choosing PGM or PNG by extension. Returns the number of
/// clamped samples.
std::size_t save_image(const ImagePlane& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace fideval
