#pragma once

#include "temsa/models/classifier.hpp"

namespace temsa::models {

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t entries_checked = 0;
};

/// Compares backpropagated gradients of the mean cross-entropy (eval mode)
/// with central differences for every trainable parameter entry. The
/// relative error of an entry is |a - n| / max(|a| + |n|, 1e-6).
/// `max_entries` > 0 checks only that many entries per parameter, spread evenly.
GradCheckResult gradient_check(Classifier& model, const std::vector<Example>& batch, double eps = 1e-4,
                               std::size_t max_entries = 0);

}  // namespace temsa::models
