#pragma once

#include <stdexcept>
#include <string>

namespace gnnx {

// A metric was requested on inputs where it has no defined value
// (e.g. ROC AUC without both a positive and a negative instance).
struct UndefinedMetricError : std::domain_error {
    explicit UndefinedMetricError(const std::string& what) : std::domain_error(what) {}
};

// Candidate enumeration exceeded its cap and truncation was disallowed.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// An explanation was requested for a node whose receptive field has no edges.
struct EmptyFieldError : std::domain_error {
    explicit EmptyFieldError(const std::string& what) : std::domain_error(what) {}
};

// Training produced a non-finite loss.
struct TrainingDivergedError : std::runtime_error {
    int epoch;
    TrainingDivergedError(const std::string& what, int epoch_index)
        : std::runtime_error(what), epoch(epoch_index) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gnnx
