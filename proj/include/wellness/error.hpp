#pragma once

#include <stdexcept>

namespace wellness {

/// Base class for every fault raised by the wellness libraries. Verdicts
/// (validity, completeness, protocol rejections) are values, never errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wellness
