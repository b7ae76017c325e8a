#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace tradestats {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input row. line() is 1-based and counts the header.
class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Invalid or missing configuration (schema, metadata, scales, levels).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Data does not support the requested computation (empty, degenerate,
// too few tail points, unstable bootstrap).
class DataError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Failure inside a pipeline stage, tagged with the stage and series id.
class StageError : public Error {
public:
  StageError(std::string stage, std::string series, const std::string& what)
      : Error("[" + stage + "] " + (series.empty() ? "" : series + ": ") + what), stage_(std::move(stage)),
        series_(std::move(series)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& series() const noexcept { return series_; }

private:
  std::string stage_;
  std::string series_;
};

} // namespace tradestats
