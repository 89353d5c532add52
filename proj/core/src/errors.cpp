#include "podwind/errors.hpp"

namespace podwind {

ErrorKind kind_of(Errc code) noexcept {
  switch (code) {
    case Errc::data_quality:
    case Errc::degenerate_channel:
    case Errc::degenerate_target:
    case Errc::invalid_input:
      return ErrorKind::data_quality;
    case Errc::numerical:
    case Errc::calibration:
    case Errc::construction:
      return ErrorKind::numerical;
    default:
      return ErrorKind::config;
  }
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_reference: return "invalid-reference";
    case Errc::data_quality: return "data-quality";
    case Errc::configuration: return "configuration";
    case Errc::geometry: return "geometry";
    case Errc::degenerate_channel: return "degenerate-channel";
    case Errc::split: return "split";
    case Errc::filter_spec: return "filter-spec";
    case Errc::shape: return "shape";
    case Errc::empty_spectrum: return "empty-spectrum";
    case Errc::invalid_input: return "invalid-input";
    case Errc::numerical: return "numerical";
    case Errc::argument: return "argument";
    case Errc::calibration: return "calibration";
    case Errc::integration: return "integration";
    case Errc::degenerate_target: return "degenerate-target";
    case Errc::construction: return "construction";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data_quality: return 3;
    case ErrorKind::numerical: return 4;
  }
  return 1;
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + " error: " + message), code_(code) {}

}  // namespace podwind
