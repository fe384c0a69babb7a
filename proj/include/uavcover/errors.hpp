#pragma once

#include <stdexcept>
#include <string>

namespace uavcover {

// Base of every error thrown by this library. `kind()` is a stable
// machine-readable tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define UAVCOVER_DEFINE_ERROR(NAME)                                       \
  class NAME : public Error {                                             \
   public:                                                                \
    explicit NAME(const std::string& message) : Error(#NAME, message) {}  \
  }

UAVCOVER_DEFINE_ERROR(ConfigError);        // bad key, value, or combination
UAVCOVER_DEFINE_ERROR(IoError);            // file missing / unreadable / malformed
UAVCOVER_DEFINE_ERROR(InvalidRadius);      // non-positive coverage radius
UAVCOVER_DEFINE_ERROR(ZeroUnion);          // overlap ratio of an empty union
UAVCOVER_DEFINE_ERROR(EpisodeOver);        // step() after the terminal step
UAVCOVER_DEFINE_ERROR(ArityError);         // action count != agent count
UAVCOVER_DEFINE_ERROR(DimensionMismatch);  // input size != layer fan-in
UAVCOVER_DEFINE_ERROR(ShapeMismatch);      // gradient/parameter shape disagreement
UAVCOVER_DEFINE_ERROR(StaleTape);          // tape does not match the network
UAVCOVER_DEFINE_ERROR(SingleAgentComm);    // communication requires >= 2 agents
UAVCOVER_DEFINE_ERROR(EmptyBatch);         // update on an empty minibatch
UAVCOVER_DEFINE_ERROR(CheckpointMismatch); // checkpoint incompatible with scenario

#undef UAVCOVER_DEFINE_ERROR

}  // namespace uavcover
