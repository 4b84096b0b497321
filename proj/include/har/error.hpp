#pragma once

#include <stdexcept>
#include <string>

namespace har {

// Bad input data: corrupt recordings, shape mismatches, degenerate datasets.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments or configuration supplied by the caller.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace har
