#pragma once

#include <stdexcept>
#include <string>

namespace lgdp {

/// Bad input data or configuration. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draw stores that are missing, malformed, or do not line up. Exit code 3.
class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant (non-finite state, degenerate precision). Exit code 4.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lgdp
