#include "extremis/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "extremis/types.hpp"

namespace extremis {

namespace {

void check_labels(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw InvalidInputError("scores/labels length mismatch");
    if (scores.empty()) throw MetricError("empty input");
}

std::vector<std::size_t> order_by_score(std::span<const double> scores, bool descending) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return descending ? scores[a] > scores[b] : scores[a] < scores[b];
    });
    return order;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_labels(scores, labels);
    std::size_t pos = 0;
    for (auto l : labels) pos += l ? 1 : 0;
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0)
        throw MetricError("ROC AUC undefined: needs both classes");

    // midrank sum of the positives
    auto order = order_by_score(scores, /*descending=*/false);
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]]) rank_sum += midrank;
        i = j;
    }
    const double p = static_cast<double>(pos);
    const double u = rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(neg));
}

double pr_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_labels(scores, labels);
    std::size_t pos = 0;
    for (auto l : labels) pos += l ? 1 : 0;
    if (pos == 0) throw MetricError("PR AUC undefined: no positive labels");

    auto order = order_by_score(scores, /*descending=*/true);
    double ap = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t block_tp = 0, block_fp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) ++block_tp;
            else ++block_fp;
            ++j;
        }
        tp += block_tp;
        fp += block_fp;
        if (block_tp > 0) {
            const double precision =
                static_cast<double>(tp) / static_cast<double>(tp + fp);
            const double recall_step = static_cast<double>(block_tp) / static_cast<double>(pos);
            ap += recall_step * precision;
        }
        i = j;
    }
    return ap;
}

}  // namespace extremis
