#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace podwind {

// Broad failure classes. Each maps onto one CLI exit code.
enum class ErrorKind { config, data_quality, numerical };

// Specific failure reasons raised by the library.
enum class Errc {
  invalid_reference,   // dynamic pressure q <= 0
  data_quality,        // NaN samples, non-uniform sampling
  configuration,       // tap layout / study config problems
  geometry,            // building geometry invalid
  degenerate_channel,  // zero-variance component in standardization
  split,               // not enough data to split records
  filter_spec,         // cutoff outside (0, Nyquist)
  shape,               // mismatched lengths or grids
  empty_spectrum,      // truncation or integration left no lines
  invalid_input,       // non-Hermitian CPSD, malformed archive
  numerical,           // eigen solver failure, residual bound violated
  argument,            // out-of-range argument (mode counts, ...)
  calibration,         // negative eigenvalue beyond clamp tolerance
  integration,         // empty grid for moments
  degenerate_target,   // zero target variance in error measures
  construction,        // synthetic spec yields an indefinite CPSD
};

ErrorKind kind_of(Errc code) noexcept;
std::string_view to_string(Errc code) noexcept;

// 0 success, 2 config error, 3 data-quality error, 4 numerical failure.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

 private:
  Errc code_;
};

}  // namespace podwind
