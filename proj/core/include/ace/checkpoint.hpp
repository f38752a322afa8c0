#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ace/adam.hpp"
#include "ace/parameters.hpp"

namespace ace {

struct TensorRecord {
    std::string name;
    Shape shape;
    std::vector<double> values;
};

// On-disk layout, all integers and reals little-endian:
//
//   "ACE1"
//   u64 count, then `count` records      (parameters and buffers)
//   u64 count, then `count` records      (optimizer state)
//
//   record := u32 name_len, name bytes, u32 rank, u64 extent[rank],
//             f64 value[prod(extent)]
struct Checkpoint {
    std::vector<TensorRecord> tensors;
    std::vector<TensorRecord> optimizer;

    const TensorRecord* find(const std::string& name) const;
    const TensorRecord& at(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws InputError on a bad magic, truncation, or trailing bytes.
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::vector<TensorRecord> parameter_records(const ParameterSet& params);
// Copies values into matching parameters; every parameter must be present
// with an identical shape.
void load_parameters(const std::vector<TensorRecord>& records, ParameterSet& params);

std::vector<TensorRecord> adam_records(const AdamState& state, const ParameterSet& params);
AdamState adam_from_records(const std::vector<TensorRecord>& records, const ParameterSet& params);

}  // namespace ace
