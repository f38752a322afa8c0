#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ace/tensor.hpp"

namespace ace::dataio {

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = 3 * kCifarSide * kCifarSide;
inline constexpr std::size_t kCifarRecord = 1 + kCifarPixels;
inline constexpr std::size_t kCifarRecordsPerFile = 10000;

// Images in [0,1], channel-major (R, G, B planes), row-major within a plane,
// in on-disk record order.
struct Dataset {
    std::size_t channels = 3;
    std::size_t side = kCifarSide;
    std::vector<double> pixels;
    std::vector<std::uint8_t> labels;

    std::size_t size() const { return labels.size(); }
    std::size_t image_size() const { return channels * side * side; }
    std::span<const double> image(std::size_t i) const;
    // Copies observations [first, first + count) into [count, C, S, S].
    Tensor batch(std::size_t first, std::size_t count) const;
    Tensor gather(std::span<const std::size_t> indices) const;
};

// Concatenates CIFAR-10 binary batch files in the order given. Each file must
// hold exactly 10,000 records of 3,073 bytes. Throws InputError on a bad size
// or a label byte above 9.
Dataset load_cifar10(std::span<const std::filesystem::path> files);

// data_batch_1.bin .. data_batch_5.bin that exist under `dir`, in canonical
// order; throws InputError when none exist.
std::vector<std::filesystem::path> cifar_train_files(const std::filesystem::path& dir);
// test_batch.bin under `dir`.
std::vector<std::filesystem::path> cifar_test_files(const std::filesystem::path& dir);

// First `count` observations, in order.
Dataset subset(const Dataset& data, std::size_t count);

// SHA-1 over the little-endian bytes of labels and pixel doubles.
std::string dataset_checksum(const Dataset& data);

// Deterministic CIFAR-layout records (label byte + 3,072 pixel bytes each):
// class-dependent backgrounds and shapes with per-image placement, colour
// jitter and noise. Lets the pipeline run where the real dataset is absent.
std::vector<std::uint8_t> synthetic_cifar_records(std::size_t count, std::uint64_t seed);
void write_cifar_file(const std::filesystem::path& path, std::span<const std::uint8_t> records);

// ---------------------------------------------------------------------------
// Images

struct RgbImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;  // interleaved, row-major
};

// Clamp to [0,1], then round half away from zero onto 0..255.
std::uint8_t quantize(double value);

// Channel-major [3, side, side] values to an 8-bit image.
RgbImage to_rgb(std::span<const double> chw, std::size_t side);

// Row-major grid of equally sized tiles separated by black gutters (no outer
// border).
RgbImage tile_sheet(std::span<const RgbImage> tiles, std::size_t columns, std::size_t gutter = 2);

void write_png(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Hashing

std::string sha1_hex(std::span<const std::uint8_t> bytes);
// Git blob id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_hash(std::span<const std::uint8_t> bytes);
std::string git_blob_hash_file(const std::filesystem::path& path);

}  // namespace ace::dataio
