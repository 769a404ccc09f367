#pragma once

#include <stdexcept>
#include <string>

namespace spatialmc {

// Model construction / dimensional compatibility violations.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input data (images, volumes).
struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem write failures.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Semantic failures while evaluating a formula (e.g. empty SCMP reference area).
struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Syntax errors carry a 1-based source position.
struct ParseError : std::runtime_error {
  int line;
  int column;
  ParseError(const std::string& message, int line_, int column_)
      : std::runtime_error(std::to_string(line_) + ":" + std::to_string(column_) + ": " + message),
        line(line_),
        column(column_) {}
};

}  // namespace spatialmc
