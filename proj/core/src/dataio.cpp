#include "ace/dataio.hpp"

#include <png.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>

#include "ace/errors.hpp"
#include "ace/rng.hpp"

namespace ace::dataio {

namespace fs = std::filesystem;

std::span<const double> Dataset::image(std::size_t i) const {
    if (i >= size()) throw std::out_of_range("observation " + std::to_string(i) + " out of range");
    return std::span<const double>(pixels).subspan(i * image_size(), image_size());
}

Tensor Dataset::batch(std::size_t first, std::size_t count) const {
    if (first + count > size()) {
        throw std::out_of_range("batch [" + std::to_string(first) + ", " + std::to_string(first + count) +
                                ") exceeds " + std::to_string(size()) + " observations");
    }
    const auto begin = pixels.begin() + static_cast<std::ptrdiff_t>(first * image_size());
    return Tensor({count, channels, side, side},
                  std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * image_size())));
}

Tensor Dataset::gather(std::span<const std::size_t> indices) const {
    std::vector<double> out;
    out.reserve(indices.size() * image_size());
    for (std::size_t i : indices) {
        auto img = image(i);
        out.insert(out.end(), img.begin(), img.end());
    }
    return Tensor({indices.size(), channels, side, side}, std::move(out));
}

Dataset load_cifar10(std::span<const fs::path> files) {
    Dataset data;
    for (const auto& path : files) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw InputError("cannot open dataset file " + path.string());
        const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                              std::istreambuf_iterator<char>());
        if (bytes.size() != kCifarRecordsPerFile * kCifarRecord) {
            throw InputError(path.string() + ": expected " +
                             std::to_string(kCifarRecordsPerFile * kCifarRecord) + " bytes, found " +
                             std::to_string(bytes.size()));
        }
        data.labels.reserve(data.labels.size() + kCifarRecordsPerFile);
        data.pixels.reserve(data.pixels.size() + kCifarRecordsPerFile * kCifarPixels);
        for (std::size_t r = 0; r < kCifarRecordsPerFile; ++r) {
            const std::uint8_t* rec = bytes.data() + r * kCifarRecord;
            if (rec[0] > 9) {
                throw InputError(path.string() + ": record " + std::to_string(r) + " has label " +
                                 std::to_string(rec[0]));
            }
            data.labels.push_back(rec[0]);
            for (std::size_t p = 1; p < kCifarRecord; ++p) data.pixels.push_back(rec[p] / 255.0);
        }
    }
    return data;
}

std::vector<fs::path> cifar_train_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (int i = 1; i <= 5; ++i) {
        fs::path p = dir / ("data_batch_" + std::to_string(i) + ".bin");
        if (fs::exists(p)) out.push_back(p);
    }
    if (out.empty()) throw InputError("no data_batch_*.bin files under " + dir.string());
    return out;
}

std::vector<fs::path> cifar_test_files(const fs::path& dir) {
    fs::path p = dir / "test_batch.bin";
    if (!fs::exists(p)) throw InputError("no test_batch.bin under " + dir.string());
    return {p};
}

Dataset subset(const Dataset& data, std::size_t count) {
    if (count > data.size()) {
        throw std::invalid_argument("subset of " + std::to_string(count) + " from " +
                                    std::to_string(data.size()) + " observations");
    }
    Dataset out;
    out.channels = data.channels;
    out.side = data.side;
    out.labels.assign(data.labels.begin(), data.labels.begin() + static_cast<std::ptrdiff_t>(count));
    out.pixels.assign(data.pixels.begin(),
                      data.pixels.begin() + static_cast<std::ptrdiff_t>(count * data.image_size()));
    return out;
}

std::string dataset_checksum(const Dataset& data) {
    std::vector<std::uint8_t> bytes(data.labels.begin(), data.labels.end());
    bytes.reserve(bytes.size() + 8 * data.pixels.size());
    for (double v : data.pixels) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    return sha1_hex(bytes);
}

std::vector<std::uint8_t> synthetic_cifar_records(std::size_t count, std::uint64_t seed) {
    // Per-class palette: background and foreground RGB.
    static constexpr std::array<std::array<double, 6>, 10> palette = {{
        {0.55, 0.70, 0.90, 0.85, 0.85, 0.80},
        {0.30, 0.30, 0.35, 0.80, 0.15, 0.10},
        {0.40, 0.60, 0.30, 0.55, 0.40, 0.20},
        {0.75, 0.70, 0.60, 0.30, 0.25, 0.20},
        {0.35, 0.55, 0.25, 0.60, 0.45, 0.30},
        {0.60, 0.55, 0.50, 0.45, 0.30, 0.15},
        {0.20, 0.35, 0.20, 0.40, 0.70, 0.30},
        {0.45, 0.65, 0.35, 0.50, 0.30, 0.20},
        {0.25, 0.45, 0.70, 0.85, 0.85, 0.90},
        {0.65, 0.65, 0.70, 0.90, 0.60, 0.10},
    }};
    constexpr std::size_t side = kCifarSide;
    std::vector<std::uint8_t> out;
    out.reserve(count * kCifarRecord);
    for (std::size_t n = 0; n < count; ++n) {
        CounterRng rng(seed, static_cast<std::uint32_t>(n));
        const auto label = static_cast<std::uint8_t>(std::min<std::size_t>(9, static_cast<std::size_t>(rng.uniform() * 10)));
        const auto& pal = palette[label];
        std::array<double, 3> bg{}, fg{};
        for (int c = 0; c < 3; ++c) {
            bg[c] = pal[c] + rng.uniform(-0.2, 0.2);
            fg[c] = pal[3 + c] + rng.uniform(-0.2, 0.2);
        }
        const double cx = rng.uniform(8, 24), cy = rng.uniform(8, 24);
        const double radius = rng.uniform(4, 11);
        const double tilt_x = rng.uniform(-0.012, 0.012), tilt_y = rng.uniform(-0.012, 0.012);
        const double freq = rng.uniform(0.35, 0.9);
        const int shape = label % 5;

        out.push_back(label);
        std::array<std::vector<std::uint8_t>, 3> planes;
        for (auto& p : planes) p.resize(side * side);
        for (std::size_t y = 0; y < side; ++y) {
            for (std::size_t x = 0; x < side; ++x) {
                const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
                bool inside = false;
                switch (shape) {
                    case 0: inside = dx * dx + dy * dy < radius * radius; break;
                    case 1: inside = std::abs(dx) < radius && std::abs(dy) < 0.7 * radius; break;
                    case 2: inside = std::abs(dy) < radius && std::sin(freq * static_cast<double>(x)) > 0; break;
                    case 3: inside = std::abs(dx) + std::abs(dy) < radius; break;
                    default: inside = dy > -radius && dy < radius && std::abs(dx) < (radius - dy) * 0.6; break;
                }
                const double light = 1.0 + tilt_x * dx + tilt_y * dy;
                for (int c = 0; c < 3; ++c) {
                    const double base = inside ? fg[c] : bg[c];
                    const double v = base * light + 0.04 * rng.normal();
                    planes[c][y * side + x] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
                }
            }
        }
        for (const auto& p : planes) out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

void write_cifar_file(const fs::path& path, std::span<const std::uint8_t> records) {
    if (records.size() % kCifarRecord != 0) {
        throw std::invalid_argument("record buffer is not a whole number of CIFAR records");
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(records.data()), static_cast<std::streamsize>(records.size()));
    if (!f) throw InputError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------

std::uint8_t quantize(double value) {
    const double v = std::clamp(std::isnan(value) ? 0.0 : value, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::round(v * 255.0));
}

RgbImage to_rgb(std::span<const double> chw, std::size_t side) {
    if (chw.size() != 3 * side * side) {
        throw std::invalid_argument("to_rgb: " + std::to_string(chw.size()) + " values for a 3x" +
                                    std::to_string(side) + "x" + std::to_string(side) + " image");
    }
    RgbImage img{side, side, std::vector<std::uint8_t>(3 * side * side)};
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t p = 0; p < side * side; ++p) img.rgb[3 * p + c] = quantize(chw[c * side * side + p]);
    }
    return img;
}

RgbImage tile_sheet(std::span<const RgbImage> tiles, std::size_t columns, std::size_t gutter) {
    if (tiles.empty() || columns == 0) throw std::invalid_argument("tile_sheet: nothing to lay out");
    const std::size_t tw = tiles[0].width, th = tiles[0].height;
    for (const auto& t : tiles) {
        if (t.width != tw || t.height != th) throw std::invalid_argument("tile_sheet: tiles differ in size");
    }
    const std::size_t cols = std::min(columns, tiles.size());
    const std::size_t rows = (tiles.size() + columns - 1) / columns;
    RgbImage sheet;
    sheet.width = cols * tw + (cols - 1) * gutter;
    sheet.height = rows * th + (rows - 1) * gutter;
    sheet.rgb.assign(3 * sheet.width * sheet.height, 0);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const std::size_t ox = (i % columns) * (tw + gutter), oy = (i / columns) * (th + gutter);
        for (std::size_t y = 0; y < th; ++y) {
            std::copy_n(tiles[i].rgb.begin() + static_cast<std::ptrdiff_t>(3 * y * tw), 3 * tw,
                        sheet.rgb.begin() + static_cast<std::ptrdiff_t>(3 * ((oy + y) * sheet.width + ox)));
        }
    }
    return sheet;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const fs::path& path, const RgbImage& image) {
    if (image.rgb.size() != 3 * image.width * image.height || image.width == 0) {
        throw std::invalid_argument("write_png: malformed image buffer");
    }
    File f(std::fopen(path.c_str(), "wb"));
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InputError("failed writing PNG " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < image.height; ++y) {
        png_write_row(png, image.rgb.data() + 3 * y * image.width);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RgbImage read_png(const fs::path& path) {
    File f(std::fopen(path.c_str(), "rb"));
    if (!f) throw InputError("cannot open PNG " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError("failed reading PNG " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    if (png_get_bit_depth(png, info) != 8 || png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw InputError(path.string() + ": only 8-bit RGB PNGs are supported");
    }
    RgbImage img;
    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    img.rgb.resize(3 * img.width * img.height);
    for (std::size_t y = 0; y < img.height; ++y) png_read_row(png, img.rgb.data() + 3 * y * img.width, nullptr);
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// ---------------------------------------------------------------------------

std::string sha1_hex(std::span<const std::uint8_t> bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string git_blob_hash(std::span<const std::uint8_t> bytes) {
    const std::string header = "blob " + std::to_string(bytes.size());
    std::vector<std::uint8_t> buf(header.begin(), header.end());
    buf.push_back(0);
    buf.insert(buf.end(), bytes.begin(), bytes.end());
    return sha1_hex(buf);
}

std::string git_blob_hash_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return git_blob_hash(bytes);
}

}  // namespace ace::dataio
