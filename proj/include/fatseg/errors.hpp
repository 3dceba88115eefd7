#pragma once

#include <stdexcept>
#include <string>

namespace fatseg {

/// File-system or format failure (missing file, size mismatch, unwritable path).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside a pipeline stage, tagged with the slice and stage that raised it.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(int slice, std::string stage, const std::string& what)
      : std::runtime_error("slice " + std::to_string(slice) + ", stage " + stage + ": " + what),
        slice_(slice),
        stage_(std::move(stage)) {}

  int slice() const { return slice_; }
  const std::string& stage() const { return stage_; }

 private:
  int slice_;
  std::string stage_;
};

/// The body outline could not be found (no foreground in the slice).
class NoSubjectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer than three non-collinear points were available for a hull.
class DegenerateHullError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fatseg
