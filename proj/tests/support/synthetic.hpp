#pragma once

#include <filesystem>

#include "ace/dataio.hpp"

namespace ace::testing {

// Directory holding data_batch_1.bin and test_batch.bin generated with
// synthetic_cifar_records (seeds 2 and 1001, as `ace-synth --seed 1`).
// Created on first use.
const std::filesystem::path& synthetic_data_dir();

const dataio::Dataset& synthetic_train();
const dataio::Dataset& synthetic_test();

}  // namespace ace::testing
