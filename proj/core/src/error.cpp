#include "dialect/error.hpp"

#include <utility>

namespace dialect {

namespace {

std::string with_line(const std::string& message, std::size_t line) {
  if (line == 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

}  // namespace

SchemaError::SchemaError(const std::string& message, std::size_t line)
    : ValidationError(with_line(message, line)), line_(line) {}

InsufficientDataError::InsufficientDataError(std::string feature_id,
                                             std::string polarity,
                                             std::size_t shortfall)
    : Error("insufficient " + polarity + " examples for feature '" +
            feature_id + "': short by " + std::to_string(shortfall)),
      feature_id_(std::move(feature_id)),
      polarity_(std::move(polarity)),
      shortfall_(shortfall) {}

}  // namespace dialect
