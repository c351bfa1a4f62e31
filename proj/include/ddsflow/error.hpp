#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

namespace ddsflow {

enum class Errc {
  NOT_FOUND,
  DUPLICATE_ITEM,
  KIND_MISMATCH,
  NAME_MISMATCH,
  VALIDATION_FAILED,
  PARSE_ERROR,
  ILLEGAL_TRANSITION,
  SCHEMA_VIOLATION,
  ROLE_MISMATCH,
  GUARD_ERROR,
  DELTA_CONFLICT,
  MIGRATION_INVALID,
  CORRUPT_LOG,
  DUPLICATE_ENDPOINT,
  ENDPOINT_IN_USE,
  IO_ERROR,
  CORRUPT_ARCHIVE,
  BOUND_EXCEEDED,
  USAGE,
};

const char* errc_name(Errc c);

// Domain error. `detail` optionally carries structured context
// (violation lists, migration reports) for callers that print it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, nlohmann::json detail = nullptr)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        detail_(std::move(detail)) {}

  Errc code() const { return code_; }
  const nlohmann::json& detail() const { return detail_; }

 private:
  Errc code_;
  nlohmann::json detail_;
};

}  // namespace ddsflow
