#pragma once

#include <stdexcept>
#include <string>

namespace postlab {

/// A computation that is well posed but could not be carried out to the
/// requested accuracy (quadrature budget, truncation cap, undefined posterior).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace postlab
