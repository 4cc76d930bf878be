#include "vshift/errors.h"

#include <utility>

namespace vshift {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

InvalidInput::InvalidInput(const std::string& message)
    : Error("invalid_input", message) {}

IoError::IoError(const std::string& message) : Error("io", message) {}

FormatError::FormatError(const std::string& message)
    : Error("format", message) {}

DegenerateView::DegenerateView(const std::string& message)
    : Error("degenerate_view", message) {}

ManifestError::ManifestError(std::string kind, const std::string& message)
    : Error(std::move(kind), message) {}

}  // namespace vshift
