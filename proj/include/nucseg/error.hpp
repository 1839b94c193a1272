#pragma once

#include <stdexcept>
#include <string>

namespace nucseg {

enum class ErrorCode {
  missing_file,
  size_mismatch,
  unknown_elem,
  malformed_header,
  unwritable,
  invariant_violation,
  out_of_bounds,
  shape_mismatch,
  non_binary,
  invalid_argument,
  infeasible,
  bad_config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nucseg
