#pragma once

#include <stdexcept>
#include <string>

namespace wigcn {

// Bad input data: malformed files, ids out of range, shape mismatches.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values during forward, loss or gradient computation.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid command-line usage or configuration values.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wigcn
