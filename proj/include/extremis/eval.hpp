#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extremis/damex.hpp"
#include "extremis/types.hpp"

namespace extremis {

struct LabeledDataset {
    FeatureMatrix features;
    std::vector<std::uint8_t> labels;  // 1 = anomaly

    std::size_t size() const { return labels.size(); }
    std::size_t anomaly_count() const;
};

/// 1 for rows whose standardized radius exceeds sqrt(train size).
std::vector<std::uint8_t> extreme_mask(const DamexModel& model, const FeatureMatrix& data);

enum class Recipe { shuttle, forestcover, http, SF, SA };

Recipe recipe_from_string(const std::string& s);
std::string to_string(Recipe r);

/// Build a labeled dataset from raw files following the published recipes.
/// Multiple raw files are concatenated (shuttle ships as train + test).
/// `seed` only matters for SA, which subsamples its anomalies.
LabeledDataset preprocess(Recipe recipe, const std::vector<std::string>& raw_paths,
                          std::uint64_t seed = 0);

struct EvalRun {
    std::size_t n_test = 0;
    std::size_t n_extreme = 0;
    double anomaly_rate_extreme = 0.0;
    double roc = 0.0;
    double pr = 0.0;
    bool degenerate = false;  // empty extreme region or single-class mask
    double baseline_roc = 0.0;
    double baseline_pr = 0.0;
};

struct EvalReport {
    std::size_t runs = 0;
    std::size_t degenerate_runs = 0;
    double n_test = 0.0;             // means over non-degenerate runs
    double n_extreme = 0.0;
    double anomaly_rate_extreme = 0.0;
    double roc_auc = 0.0;
    double pr_auc = 0.0;
    bool has_baseline = false;
    double baseline_roc_auc = 0.0;
    double baseline_pr_auc = 0.0;
    DamexParams params;
    std::vector<EvalRun> per_run;
    std::vector<std::string> warnings;
};

struct BenchmarkOptions {
    double train_fraction = 0.5;  // share of normal rows used for training
    // Abnormality scores per original dataset row, e.g. from an external
    // detector; evaluated on the same extreme-region mask as the model.
    std::optional<std::vector<double>> baseline_scores;
};

/// Semi-supervised protocol: train on a random half of the normal rows,
/// test on the rest plus all anomalies, evaluate AUCs on the extreme region
/// only. Deterministic given base_seed; run r uses base_seed + r.
EvalReport run_benchmark(const LabeledDataset& dataset, const DamexParams& params,
                         std::size_t runs, std::uint64_t base_seed,
                         const BenchmarkOptions& options = {});

}  // namespace extremis
