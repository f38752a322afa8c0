#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ace/trainer.hpp"

namespace ace::cli {

// key=value run configuration. Blank lines and '#' comments are ignored.
struct RunConfig {
    TrainConfig train;
    bool epochs_set = false;
    std::size_t train_subset = 0;  // 0 = every training observation
    std::size_t test_subset = 0;
    std::optional<std::filesystem::path> data_dir;

    // Every key with its effective value, defaults included.
    std::map<std::string, std::string> echo() const;
};

// Throws InputError on unknown keys or unparsable values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace ace::cli
