#pragma once

#include <functional>
#include <stdexcept>
#include <string>

// Error taxonomy.  Two families matter to callers: problems with what the
// user handed us (InputError, CLI exit code 1) and problems that arise while
// computing or writing results (ComputeError, CLI exit code 2).  Everything
// thrown on purpose in this library derives from one of the two.

namespace mdlm {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: malformed files, inconsistent dimensions, out-of-range options.
class InputError : public Error {
 public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

// Failures during computation or output: numerical breakdown, I/O errors.
class ComputeError : public Error {
 public:
  explicit ComputeError(const std::string& msg) : Error(msg) {}
};

// --- input family -----------------------------------------------------------

class DimensionMismatch : public InputError {
 public:
  explicit DimensionMismatch(const std::string& msg) : InputError(msg) {}
};

class NotSymmetric : public InputError {
 public:
  explicit NotSymmetric(const std::string& msg) : InputError(msg) {}
};

class DofTooSmall : public InputError {
 public:
  explicit DofTooSmall(const std::string& msg) : InputError(msg) {}
};

class IndexOutOfRange : public InputError {
 public:
  explicit IndexOutOfRange(const std::string& msg) : InputError(msg) {}
};

class EmptyGroup : public InputError {
 public:
  explicit EmptyGroup(const std::string& msg) : InputError(msg) {}
};

class BadOption : public InputError {
 public:
  explicit BadOption(const std::string& msg) : InputError(msg) {}
};

// File-format rejections.  Each message names the offending field.
class BadMagic : public InputError {
 public:
  explicit BadMagic(const std::string& msg) : InputError(msg) {}
};

class BadHeader : public InputError {
 public:
  explicit BadHeader(const std::string& msg) : InputError(msg) {}
};

class UnsupportedDatatype : public InputError {
 public:
  explicit UnsupportedDatatype(const std::string& msg) : InputError(msg) {}
};

class TruncatedFile : public InputError {
 public:
  explicit TruncatedFile(const std::string& msg) : InputError(msg) {}
};

class MissingColumn : public InputError {
 public:
  explicit MissingColumn(const std::string& msg) : InputError(msg) {}
};

class UnparsableRow : public InputError {
 public:
  explicit UnparsableRow(const std::string& msg) : InputError(msg) {}
};

// --- compute family ----------------------------------------------------------

class NotPositiveDefinite : public ComputeError {
 public:
  explicit NotPositiveDefinite(const std::string& msg) : ComputeError(msg) {}
};

class NonFinite : public ComputeError {
 public:
  explicit NonFinite(const std::string& msg) : ComputeError(msg) {}
};

class IoFailure : public ComputeError {
 public:
  explicit IoFailure(const std::string& msg) : ComputeError(msg) {}
};

// --- warnings ----------------------------------------------------------------
// Non-fatal conditions (truncated stimulus tracks, degraded normal
// approximations, discount factors outside the usual range) are routed through
// a process-wide handler so library code never writes to stderr behind the
// caller's back.  The default handler prints "warning: ..." to stderr.

using WarnHandler = std::function<void(const std::string&)>;

// Replaces the warning handler; an empty handler restores the default.
// Returns the previous handler.
WarnHandler set_warn_handler(WarnHandler handler);

void warn(const std::string& msg);

}  // namespace mdlm
