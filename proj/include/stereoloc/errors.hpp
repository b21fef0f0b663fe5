#pragma once

#include <stdexcept>
#include <string>

namespace stereoloc {

/// Base class for all toolkit errors. Subclasses carry the name of the
/// contract they violate; messages name the offending file/field/record.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- rig configuration ---
class MissingField : public Error {
 public:
  explicit MissingField(const std::string& field)
      : Error("missing field: " + field), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class NonOrthonormalRotation : public Error {
 public:
  explicit NonOrthonormalRotation(const std::string& detail)
      : Error("rotation is not orthonormal: " + detail) {}
};

class NonPositiveBaseline : public Error {
 public:
  explicit NonPositiveBaseline(double value)
      : Error("baseline_m must be > 0, got " + std::to_string(value)) {}
};

class FieldOutOfRange : public Error {
 public:
  explicit FieldOutOfRange(const std::string& detail)
      : Error("field out of range: " + detail) {}
};

// --- images and windows ---
class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& detail)
      : Error("dimension mismatch: " + detail) {}
};

class ImageSizeMismatch : public Error {
 public:
  explicit ImageSizeMismatch(const std::string& detail)
      : Error("image size mismatch: " + detail) {}
};

class SearchRangeTooWide : public Error {
 public:
  explicit SearchRangeTooWide(const std::string& detail)
      : Error("disparity search range too wide: " + detail) {}
};

class MalformedInput : public Error {
 public:
  explicit MalformedInput(const std::string& detail)
      : Error("malformed input: " + detail) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& detail) : Error("i/o error: " + detail) {}
};

// --- patches and aggregation ---
class EmptyAfterClamp : public Error {
 public:
  explicit EmptyAfterClamp(const std::string& detail)
      : Error("rectangle empty after clamping: " + detail) {}
};

class InsufficientValidDepth : public Error {
 public:
  InsufficientValidDepth(int valid, int required)
      : Error("insufficient valid depth pixels: " + std::to_string(valid) +
              " < " + std::to_string(required)) {}
};

// --- geometry and metrics ---
class OutOfLocalRange : public Error {
 public:
  explicit OutOfLocalRange(double separation_m)
      : Error("point is " + std::to_string(separation_m) +
              " m from projection origin; local frame is limited to 10 km") {}
};

class InsufficientAnchors : public Error {
 public:
  InsufficientAnchors(int got, int required)
      : Error("need at least " + std::to_string(required) + " anchors, got " +
              std::to_string(got)) {}
};

class CollinearAnchors : public Error {
 public:
  explicit CollinearAnchors(const std::string& detail)
      : Error("anchors are (near-)collinear: " + detail) {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("sequence lengths differ: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& what_input)
      : Error("empty input: " + what_input) {}
};

// --- dv-hop simulation ---
class TooFewAnchors : public Error {
 public:
  TooFewAnchors(int got)
      : Error("dv-hop network needs >= 3 anchors, got " + std::to_string(got)) {}
};

class NoConnectedAnchorPair : public Error {
 public:
  NoConnectedAnchorPair() : Error("no pair of anchors is connected") {}
};

}  // namespace stereoloc
