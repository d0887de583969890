#pragma once

#include <stdexcept>
#include <string>

namespace bipstab {

struct InvalidMeasure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AllWeightsUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InstanceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnbalancedWeights : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotMonotone : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingEnvelope : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainEscape : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvidenceUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BallSupFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bipstab
