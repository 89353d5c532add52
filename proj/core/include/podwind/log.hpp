#pragma once

#include <functional>
#include <string>

namespace podwind {

using WarningHandler = std::function<void(const std::string&)>;

// Installs a new handler and returns the previous one. The default handler
// writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace podwind
