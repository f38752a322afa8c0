#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>

#include "ace/laplace.hpp"
#include "ace/loss.hpp"
#include "ace/model.hpp"

namespace ace {

// (mu, sigma) per level per latent dimension, indexed [level_index][dim].
using ObservationDrift = std::array<std::array<laplace::PosteriorParams, kLatentDim>, 2>;

// Per-observation tentative empirical drifts, keyed by 0-based index in the
// initial dataset order.
//
// File format: header "index,level,dim,mu,sigma", then one row per
// (observation, level, dimension) with level in {1, 2}, dim in {0, 1} and
// reals at 17 significant digits.
class DriftRegistry {
public:
    void set(std::size_t index, const ObservationDrift& drift);
    bool contains(std::size_t index) const { return rows_.count(index) != 0; }
    // Throws InputError when the observation has no rows.
    const ObservationDrift& at(std::size_t index) const;
    std::size_t size() const { return rows_.size(); }
    // True when every index in [0, n) is present.
    bool complete(std::size_t n) const;

    // Targets for observations [first, first + count).
    LatentTargets targets(std::size_t first, std::size_t count) const;

    void write(const std::filesystem::path& path) const;
    // Rejects malformed rows, duplicate rows, non-positive or non-finite
    // sigma and observations with fewer than four rows.
    static DriftRegistry read(const std::filesystem::path& path);

    const std::map<std::size_t, ObservationDrift>& rows() const { return rows_; }
    bool operator==(const DriftRegistry& other) const;

private:
    std::map<std::size_t, ObservationDrift> rows_;
};

}  // namespace ace
