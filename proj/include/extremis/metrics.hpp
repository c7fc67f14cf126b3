#pragma once

#include <cstdint>
#include <span>

namespace extremis {

/// ROC AUC of abnormality scores (higher = more abnormal) against binary
/// labels (1 = anomaly). Mann-Whitney with ties counting one half.
/// Throws MetricError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average precision over the descending-score sweep, tie groups processed
/// as one block. Throws MetricError when there is no positive.
double pr_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace extremis
