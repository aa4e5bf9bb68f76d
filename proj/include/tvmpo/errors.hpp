#ifndef TVMPO_ERRORS_HPP
#define TVMPO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tvmpo {

struct InvalidInputError : std::runtime_error {
  explicit InvalidInputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Amplitude magnitude fell below the underflow floor; the caller must resample.
struct DegenerateAmplitudeError : std::runtime_error {
  explicit DegenerateAmplitudeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateTraceError : std::runtime_error {
  explicit DegenerateTraceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateDistributionError : std::runtime_error {
  explicit DegenerateDistributionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct StalledIntegrationError : std::runtime_error {
  explicit StalledIntegrationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyBatchError : std::runtime_error {
  explicit EmptyBatchError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tvmpo

#endif
