#include "extremis/eval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "extremis/csv.hpp"
#include "extremis/logistic.hpp"
#include "extremis/metrics.hpp"
#include "extremis/parallel.hpp"

namespace extremis {

std::size_t LabeledDataset::anomaly_count() const {
    std::size_t c = 0;
    for (auto l : labels) c += l ? 1 : 0;
    return c;
}

std::vector<std::uint8_t> extreme_mask(const DamexModel& model, const FeatureMatrix& data) {
    if (data.cols() != model.dimension()) throw InvalidInputError("dimension mismatch");
    const double bound = std::sqrt(static_cast<double>(model.train_size()));
    std::vector<std::uint8_t> mask(data.rows(), 0);
    const std::size_t n = data.rows();
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (!in_parallel_region())
    for (std::size_t i = 0; i < n; ++i) {
        auto v = model.ranker().standardize(data.row(i));
        double radius = 0.0;
        for (double c : v) radius = std::max(radius, c);
        mask[i] = radius > bound ? 1 : 0;
    }
    return mask;
}

Recipe recipe_from_string(const std::string& s) {
    if (s == "shuttle") return Recipe::shuttle;
    if (s == "forestcover") return Recipe::forestcover;
    if (s == "http") return Recipe::http;
    if (s == "SF" || s == "sf") return Recipe::SF;
    if (s == "SA" || s == "sa") return Recipe::SA;
    throw ParameterError("unknown recipe '" + s + "'");
}

std::string to_string(Recipe r) {
    switch (r) {
        case Recipe::shuttle: return "shuttle";
        case Recipe::forestcover: return "forestcover";
        case Recipe::http: return "http";
        case Recipe::SF: return "SF";
        case Recipe::SA: return "SA";
    }
    return "?";
}

namespace {

CsvTable read_raw(const std::vector<std::string>& paths) {
    if (paths.empty()) throw InvalidInputError("at least one raw file required");
    CsvTable merged;
    for (const auto& p : paths) {
        CsvTable t = read_delimited_file(p, /*detect_header=*/true);
        if (t.rows.empty()) throw InvalidInputError(p + ": no data rows");
        if (!merged.rows.empty() && t.rows.front().size() != merged.rows.front().size())
            throw InvalidInputError(p + ": column count differs from the previous raw file");
        merged.rows.insert(merged.rows.end(), std::make_move_iterator(t.rows.begin()),
                           std::make_move_iterator(t.rows.end()));
    }
    return merged;
}

double numeric_field(const std::vector<std::string>& row, std::size_t col, std::size_t line) {
    double v;
    if (!parse_double(row[col], v))
        throw InvalidInputError("non-numeric field '" + row[col] + "' at data row " +
                                std::to_string(line + 1) + ", column " + std::to_string(col + 1));
    return v;
}

// integer code by first appearance, deterministic in file order
class CategoryCoder {
  public:
    double code(const std::string& value) {
        auto [it, inserted] = map_.emplace(value, static_cast<double>(map_.size()));
        (void)inserted;
        return it->second;
    }

  private:
    std::unordered_map<std::string, double> map_;
};

LabeledDataset class_column_recipe(const CsvTable& raw, std::size_t expect_cols,
                                   const std::string& name, int normal_class,
                                   std::optional<int> drop_class,
                                   std::optional<int> only_anomaly_class) {
    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    const std::size_t d = expect_cols - 1;
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        const auto& row = raw.rows[i];
        if (row.size() != expect_cols)
            throw InvalidInputError(name + ": data row " + std::to_string(i + 1) + " has " +
                                    std::to_string(row.size()) + " fields, expected " +
                                    std::to_string(expect_cols));
        int cls = static_cast<int>(numeric_field(row, expect_cols - 1, i));
        if (drop_class && cls == *drop_class) continue;
        if (only_anomaly_class && cls != normal_class && cls != *only_anomaly_class) continue;
        for (std::size_t j = 0; j + 1 < expect_cols; ++j)
            values.push_back(numeric_field(row, j, i));
        labels.push_back(cls == normal_class ? 0 : 1);
    }
    if (labels.empty()) throw InvalidInputError(name + ": no rows left after filtering");
    return {FeatureMatrix(labels.size(), d, std::move(values)), std::move(labels)};
}

bool is_normal_label(const std::string& s) { return s == "normal." || s == "normal"; }

constexpr std::size_t kKddColumns = 42;  // 41 features + connection label
constexpr std::size_t kKddDuration = 0, kKddProtocol = 1, kKddService = 2, kKddFlag = 3,
                      kKddSrcBytes = 4, kKddDstBytes = 5, kKddLoggedIn = 11;

LabeledDataset kdd_sf_like(const CsvTable& raw, bool http_only) {
    CategoryCoder service_codes;
    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    const std::size_t d = http_only ? 3 : 4;
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        const auto& row = raw.rows[i];
        if (row.size() != kKddColumns)
            throw InvalidInputError("kdd: data row " + std::to_string(i + 1) + " has " +
                                    std::to_string(row.size()) + " fields, expected " +
                                    std::to_string(kKddColumns));
        if (numeric_field(row, kKddLoggedIn, i) != 1.0) continue;
        if (http_only && row[kKddService] != "http") continue;
        values.push_back(numeric_field(row, kKddDuration, i));
        if (!http_only) values.push_back(service_codes.code(row[kKddService]));
        values.push_back(numeric_field(row, kKddSrcBytes, i));
        values.push_back(numeric_field(row, kKddDstBytes, i));
        labels.push_back(is_normal_label(row.back()) ? 0 : 1);
    }
    if (labels.empty()) throw InvalidInputError("kdd: no rows left after filtering");
    return {FeatureMatrix(labels.size(), d, std::move(values)), std::move(labels)};
}

LabeledDataset kdd_sa(const CsvTable& raw, std::uint64_t seed) {
    CategoryCoder protocol_codes, service_codes, flag_codes;
    const std::size_t d = kKddColumns - 1;
    std::vector<double> values;
    std::vector<std::uint8_t> labels;
    std::vector<std::size_t> anomaly_rows;  // row index into `labels`
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
        const auto& row = raw.rows[i];
        if (row.size() != kKddColumns)
            throw InvalidInputError("kdd: data row " + std::to_string(i + 1) + " has " +
                                    std::to_string(row.size()) + " fields, expected " +
                                    std::to_string(kKddColumns));
        for (std::size_t j = 0; j < d; ++j) {
            if (j == kKddProtocol) values.push_back(protocol_codes.code(row[j]));
            else if (j == kKddService) values.push_back(service_codes.code(row[j]));
            else if (j == kKddFlag) values.push_back(flag_codes.code(row[j]));
            else values.push_back(numeric_field(row, j, i));
        }
        bool anomaly = !is_normal_label(row.back());
        if (anomaly) anomaly_rows.push_back(labels.size());
        labels.push_back(anomaly ? 1 : 0);
    }
    const std::size_t normals = labels.size() - anomaly_rows.size();
    if (normals == 0) throw InvalidInputError("kdd SA: no normal rows");
    std::size_t want = static_cast<std::size_t>(std::llround(0.01 * static_cast<double>(normals)));
    want = std::min(want, anomaly_rows.size());

    // keep all normals plus `want` anomalies drawn without replacement
    Rng rng(seed);
    for (std::size_t i = 0; i < want; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(anomaly_rows.size() - i));
        std::swap(anomaly_rows[i], anomaly_rows[j]);
    }
    std::vector<std::uint8_t> keep(labels.size(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) keep[i] = labels[i] ? 0 : 1;
    for (std::size_t i = 0; i < want; ++i) keep[anomaly_rows[i]] = 1;

    std::vector<double> kept_values;
    std::vector<std::uint8_t> kept_labels;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!keep[i]) continue;
        kept_values.insert(kept_values.end(), values.begin() + static_cast<std::ptrdiff_t>(i * d),
                           values.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        kept_labels.push_back(labels[i]);
    }
    return {FeatureMatrix(kept_labels.size(), d, std::move(kept_values)), std::move(kept_labels)};
}

}  // namespace

LabeledDataset preprocess(Recipe recipe, const std::vector<std::string>& raw_paths,
                          std::uint64_t seed) {
    CsvTable raw = read_raw(raw_paths);
    switch (recipe) {
        case Recipe::shuttle:
            // class 1 is normal; class 4 rows are left out entirely
            return class_column_recipe(raw, 10, "shuttle", 1, /*drop_class=*/4, std::nullopt);
        case Recipe::forestcover:
            // cover type 2 vs 4, everything else dropped
            return class_column_recipe(raw, 55, "forestcover", 2, std::nullopt,
                                       /*only_anomaly_class=*/4);
        case Recipe::SF: return kdd_sf_like(raw, /*http_only=*/false);
        case Recipe::http: return kdd_sf_like(raw, /*http_only=*/true);
        case Recipe::SA: return kdd_sa(raw, seed);
    }
    throw ParameterError("unhandled recipe");
}

namespace {

FeatureMatrix gather_rows(const FeatureMatrix& all, const std::vector<std::size_t>& rows) {
    const std::size_t d = all.cols();
    std::vector<double> values;
    values.reserve(rows.size() * d);
    for (auto i : rows) {
        auto r = all.row(i);
        values.insert(values.end(), r.begin(), r.end());
    }
    return FeatureMatrix(rows.size(), d, std::move(values));
}

}  // namespace

EvalReport run_benchmark(const LabeledDataset& dataset, const DamexParams& params,
                         std::size_t runs, std::uint64_t base_seed,
                         const BenchmarkOptions& options) {
    if (runs == 0) throw ParameterError("at least one run required");
    if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0))
        throw ParameterError("train fraction must lie in (0, 1)");
    if (options.baseline_scores && options.baseline_scores->size() != dataset.size())
        throw InvalidInputError("baseline scores must cover every dataset row");

    std::vector<std::size_t> normal_rows, anomaly_rows;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        (dataset.labels[i] ? anomaly_rows : normal_rows).push_back(i);
    if (normal_rows.empty() || anomaly_rows.empty())
        throw InvalidInputError("benchmark needs both normal rows and anomalies");

    EvalReport report;
    report.runs = runs;
    report.params = params;
    report.per_run.assign(runs, {});

    for (std::size_t r = 0; r < runs; ++r) {
        Rng rng(base_seed + r);
        std::vector<std::size_t> shuffled = normal_rows;
        for (std::size_t i = 0; i + 1 < shuffled.size(); ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(shuffled.size() - i));
            std::swap(shuffled[i], shuffled[j]);
        }
        const auto n_train = static_cast<std::size_t>(
            options.train_fraction * static_cast<double>(shuffled.size()));
        if (n_train == 0 || n_train >= shuffled.size())
            throw ParameterError("train fraction leaves an empty train or test side");

        std::vector<std::size_t> train_rows(shuffled.begin(),
                                            shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
        std::vector<std::size_t> test_rows(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train),
                                           shuffled.end());
        test_rows.insert(test_rows.end(), anomaly_rows.begin(), anomaly_rows.end());

        FeatureMatrix train = gather_rows(dataset.features, train_rows);
        FeatureMatrix test = gather_rows(dataset.features, test_rows);
        std::vector<std::string> fit_warnings;
        DamexModel model = fit(train, params, r == 0 ? &report.warnings : &fit_warnings);

        auto mask = extreme_mask(model, test);
        auto records = model.score_batch(test);

        std::vector<double> abnormality, baseline;
        std::vector<std::uint8_t> labels;
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            if (!mask[i]) continue;
            abnormality.push_back(-records[i].score);
            labels.push_back(dataset.labels[test_rows[i]]);
            if (options.baseline_scores) baseline.push_back((*options.baseline_scores)[test_rows[i]]);
        }

        EvalRun& run = report.per_run[r];
        run.n_test = test_rows.size();
        run.n_extreme = labels.size();
        bool both_classes = false;
        std::size_t positives = 0;
        for (auto l : labels) positives += l ? 1 : 0;
        both_classes = positives > 0 && positives < labels.size();
        if (labels.empty() || !both_classes) {
            run.degenerate = true;
            ++report.degenerate_runs;
            report.warnings.push_back("run " + std::to_string(r) +
                                      ": degenerate extreme region (empty or single class), "
                                      "excluded from averages");
            continue;
        }
        run.anomaly_rate_extreme =
            static_cast<double>(positives) / static_cast<double>(labels.size());
        run.roc = roc_auc(abnormality, labels);
        run.pr = pr_auc(abnormality, labels);
        if (options.baseline_scores) {
            run.baseline_roc = roc_auc(baseline, labels);
            run.baseline_pr = pr_auc(baseline, labels);
        }
    }

    std::size_t valid = 0;
    for (const auto& run : report.per_run) {
        if (run.degenerate) continue;
        ++valid;
        report.n_test += static_cast<double>(run.n_test);
        report.n_extreme += static_cast<double>(run.n_extreme);
        report.anomaly_rate_extreme += run.anomaly_rate_extreme;
        report.roc_auc += run.roc;
        report.pr_auc += run.pr;
        report.baseline_roc_auc += run.baseline_roc;
        report.baseline_pr_auc += run.baseline_pr;
    }
    if (valid > 0) {
        const auto dv = static_cast<double>(valid);
        report.n_test /= dv;
        report.n_extreme /= dv;
        report.anomaly_rate_extreme /= dv;
        report.roc_auc /= dv;
        report.pr_auc /= dv;
        report.baseline_roc_auc /= dv;
        report.baseline_pr_auc /= dv;
    }
    report.has_baseline = options.baseline_scores.has_value();
    return report;
}

}  // namespace extremis
