#pragma once

#include <stdexcept>
#include <string>

namespace ghostscope {

/// Malformed input: bad scene/config files, out-of-range parameters, I/O failures.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form inversion or fit hit a near-singular configuration.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad command-line usage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ghostscope
