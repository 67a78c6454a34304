#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Root of every error the library throws. Callers that only need to report a
// failure can catch this; the subclasses exist so that policies (retry,
// abort, skip-and-continue) can be keyed on the kind of failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// subtitle
class MalformedTimestamp : public Error { using Error::Error; };
class TimestampOverflow : public Error { using Error::Error; };
class EncodingError : public Error { using Error::Error; };
class FatalFormat : public Error { using Error::Error; };

// audio
class UnsupportedFormat : public Error { using Error::Error; };
class CorruptFile : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class OutOfRange : public Error { using Error::Error; };

// alignment
class EmptyDocument : public Error { using Error::Error; };

class UnknownEntry : public Error {
 public:
  explicit UnknownEntry(int entry_id);
  int entry_id() const noexcept { return entry_id_; }

 private:
  int entry_id_;
};

class InvariantViolation : public Error {
 public:
  InvariantViolation(int entry_id, std::string invariant);
  int entry_id() const noexcept { return entry_id_; }
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  int entry_id_;
  std::string invariant_;
};

// Thrown by every JSON/CSV loader. location is a JSON-pointer-style path
// ("/entries/3/begin_ms") or "line N" for line-oriented formats.
class SchemaError : public Error {
 public:
  SchemaError(std::string location, const std::string& message);
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

// validation
class EmptyReference : public Error { using Error::Error; };
class BackendUnavailable : public Error { using Error::Error; };
class AuthError : public Error { using Error::Error; };
class PayloadTooLarge : public Error { using Error::Error; };

// corpus
class DuplicateFragmentId : public Error { using Error::Error; };
class ZeroSourceDuration : public Error { using Error::Error; };
class EmptyInput : public Error { using Error::Error; };

// pipeline
class ConfigError : public Error { using Error::Error; };

class CommandFailed : public Error {
 public:
  CommandFailed(const std::string& what, int exit_code, std::string stderr_text);
  int exit_code() const noexcept { return exit_code_; }
  const std::string& stderr_text() const noexcept { return stderr_; }

 private:
  int exit_code_;
  std::string stderr_;
};

class FetchFailed : public CommandFailed { using CommandFailed::CommandFailed; };
class ConvertFailed : public CommandFailed { using CommandFailed::CommandFailed; };
class MissingSubtitle : public Error { using Error::Error; };
class PortInUse : public Error { using Error::Error; };

}  // namespace forge
