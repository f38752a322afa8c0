#include "synthetic.hpp"

#include <unistd.h>

#include <string>

namespace ace::testing {

namespace fs = std::filesystem;

namespace {

void ensure_file(const fs::path& path, std::uint64_t seed) {
    const auto expected = dataio::kCifarRecordsPerFile * dataio::kCifarRecord;
    std::error_code ec;
    if (fs::exists(path) && fs::file_size(path, ec) == expected) return;
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    dataio::write_cifar_file(tmp, dataio::synthetic_cifar_records(dataio::kCifarRecordsPerFile, seed));
    fs::rename(tmp, path);
}

}  // namespace

const fs::path& synthetic_data_dir() {
    static const fs::path dir = [] {
        fs::path d = ACE_TEST_DATA_DIR;
        fs::create_directories(d);
        ensure_file(d / "data_batch_1.bin", 2);
        ensure_file(d / "test_batch.bin", 1001);
        return d;
    }();
    return dir;
}

const dataio::Dataset& synthetic_train() {
    static const dataio::Dataset d = dataio::load_cifar10(dataio::cifar_train_files(synthetic_data_dir()));
    return d;
}

const dataio::Dataset& synthetic_test() {
    static const dataio::Dataset d = dataio::load_cifar10(dataio::cifar_test_files(synthetic_data_dir()));
    return d;
}

}  // namespace ace::testing
