// Writes a CIFAR-10-layout directory of procedurally generated images.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "ace/dataio.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Generate a synthetic dataset in the CIFAR-10 binary layout", "ace-synth"};
    std::string out;
    std::uint64_t seed = 1;
    int train_files = 1;
    app.add_option("--out", out, "output directory")->required();
    app.add_option("--seed", seed)->capture_default_str();
    app.add_option("--train-files", train_files, "number of data_batch_*.bin files")
        ->check(CLI::Range(1, 5))
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    namespace io = ace::dataio;
    try {
        std::filesystem::create_directories(out);
        for (int i = 1; i <= train_files; ++i) {
            const auto records = io::synthetic_cifar_records(io::kCifarRecordsPerFile, seed + static_cast<std::uint64_t>(i));
            io::write_cifar_file(std::filesystem::path(out) / ("data_batch_" + std::to_string(i) + ".bin"), records);
        }
        io::write_cifar_file(std::filesystem::path(out) / "test_batch.bin",
                             io::synthetic_cifar_records(io::kCifarRecordsPerFile, seed + 1000));
    } catch (const std::exception& e) {
        std::cerr << "ace-synth: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
