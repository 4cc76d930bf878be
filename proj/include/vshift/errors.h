#ifndef VSHIFT_ERRORS_H_
#define VSHIFT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace vshift {

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag; the CLI maps it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message);
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Precondition or invariant violated by a caller-supplied value.
class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& message);
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message);
};

// File was readable but its contents are malformed or truncated.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message);
};

// A synthetic camera sits inside a solid primitive.
class DegenerateView : public Error {
 public:
  explicit DegenerateView(const std::string& message);
};

// Scene manifest failed validation. `kind()` distinguishes the variants:
// "manifest_missing_file", "manifest_timestamps", "manifest_json",
// "manifest_quaternion", "manifest_empty", "manifest_schema".
class ManifestError : public Error {
 public:
  ManifestError(std::string kind, const std::string& message);
};

}  // namespace vshift

#endif  // VSHIFT_ERRORS_H_
