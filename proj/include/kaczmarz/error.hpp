#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kaczmarz {

enum class error_kind {
  invalid_argument,
  dimension_mismatch,
  rank_deficient,
  assumption_violated,
  bound_too_small,
  malformed_windows,
  rank_retry_exhausted,
  parse_error,
  io_error,
};

inline std::string_view to_string(error_kind kind) noexcept {
  switch (kind) {
    case error_kind::invalid_argument: return "InvalidArgument";
    case error_kind::dimension_mismatch: return "DimensionMismatch";
    case error_kind::rank_deficient: return "RankDeficient";
    case error_kind::assumption_violated: return "AssumptionViolated";
    case error_kind::bound_too_small: return "BoundTooSmall";
    case error_kind::malformed_windows: return "MalformedWindows";
    case error_kind::rank_retry_exhausted: return "RankRetryExhausted";
    case error_kind::parse_error: return "ParseError";
    case error_kind::io_error: return "IOError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on kind().
class error : public std::runtime_error {
public:
  error(error_kind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  error_kind kind() const noexcept { return kind_; }

private:
  error_kind kind_;
};

/// Thrown by the text readers; carries a 1-based source position.
class parse_error : public error {
public:
  parse_error(std::size_t line, std::size_t column, const std::string& what)
      : error(error_kind::parse_error,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace kaczmarz
