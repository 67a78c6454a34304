#include "forge/error.hpp"

#include <utility>

namespace forge {

UnknownEntry::UnknownEntry(int entry_id)
    : Error("unknown sync-map entry id " + std::to_string(entry_id)), entry_id_(entry_id) {}

InvariantViolation::InvariantViolation(int entry_id, std::string invariant)
    : Error("entry " + std::to_string(entry_id) + ": " + invariant),
      entry_id_(entry_id),
      invariant_(std::move(invariant)) {}

SchemaError::SchemaError(std::string location, const std::string& message)
    : Error(location + ": " + message), location_(std::move(location)) {}

CommandFailed::CommandFailed(const std::string& what, int exit_code, std::string stderr_text)
    : Error(what + " (exit " + std::to_string(exit_code) + ")" +
            (stderr_text.empty() ? std::string() : ": " + stderr_text)),
      exit_code_(exit_code),
      stderr_(std::move(stderr_text)) {}

}  // namespace forge
