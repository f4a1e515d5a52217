#pragma once

#include <stdexcept>
#include <string>

namespace epmp {

/// Distinguishes failure classes so callers (notably the CLI) can map them
/// onto exit codes without parsing messages.
enum class Errc {
  dimension_mismatch,
  zero_vector,
  invalid_argument,
  parse_error,
  non_square,
  non_finite,
  io_error,
  not_symmetric,
  no_convergence,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace epmp
