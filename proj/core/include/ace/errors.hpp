#pragma once

#include <stdexcept>
#include <string>

namespace ace {

// Malformed or inconsistent input files (dataset, registry, checkpoint).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite losses or gradients during optimisation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ace
