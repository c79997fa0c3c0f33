#include "streamflow/errors.hpp"

namespace streamflow {

ShapeError::ShapeError(std::string dimension, std::size_t expected, std::size_t actual)
    : Error("shape mismatch in " + dimension + ": expected " + std::to_string(expected) +
            ", got " + std::to_string(actual)),
      dimension_(std::move(dimension)),
      expected_(expected),
      actual_(actual) {}

}  // namespace streamflow
