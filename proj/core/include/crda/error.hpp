#pragma once

#include <stdexcept>

namespace crda {

/// A parameter is outside its documented range.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Input data is malformed or inconsistent: unreadable files, unparsable
/// cells, empty groups, dimension mismatches between a model and new data.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine cannot produce a meaningful result, e.g. a
/// rank-zero centered matrix or a covariance block that is not positive
/// definite.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace crda
