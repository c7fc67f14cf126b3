#include "extremis/rank_transform.hpp"

#include <algorithm>

#include "extremis/parallel.hpp"

namespace extremis {

double MarginalRanker::empirical_cdf(std::size_t j, double x) const {
    return static_cast<double>(count_below(j, x)) / static_cast<double>(n_);
}

std::size_t MarginalRanker::count_below(std::size_t j, double x) const {
    if (j >= d_) throw InvalidInputError("feature index out of range");
    auto col = sorted_column(j);
    return static_cast<std::size_t>(std::lower_bound(col.begin(), col.end(), x) - col.begin());
}

void MarginalRanker::standardize_into(std::span<const double> x, std::span<double> out) const {
    if (x.size() != d_) throw InvalidInputError("point dimension does not match training data");
    for (std::size_t j = 0; j < d_; ++j) {
        std::size_t below = count_below(j, x[j]);
        out[j] = below == n_ ? cap()
                             : static_cast<double>(n_) / static_cast<double>(n_ - below);
    }
}

std::vector<double> MarginalRanker::standardize(std::span<const double> x) const {
    std::vector<double> out(d_);
    standardize_into(x, out);
    return out;
}

MarginalRanker MarginalRanker::from_sorted_columns(std::vector<std::vector<double>> cols) {
    MarginalRanker r;
    if (cols.empty() || cols.front().empty())
        throw InvalidInputError("ranker needs at least one nonempty column");
    r.d_ = cols.size();
    r.n_ = cols.front().size();
    r.columns_.reserve(r.d_ * r.n_);
    for (const auto& col : cols) {
        if (col.size() != r.n_) throw InvalidInputError("ranker columns have unequal lengths");
        if (!std::is_sorted(col.begin(), col.end()))
            throw InvalidInputError("ranker column is not sorted");
        r.columns_.insert(r.columns_.end(), col.begin(), col.end());
    }
    return r;
}

std::vector<std::vector<double>> MarginalRanker::sorted_columns() const {
    std::vector<std::vector<double>> out(d_);
    for (std::size_t j = 0; j < d_; ++j) {
        auto col = sorted_column(j);
        out[j].assign(col.begin(), col.end());
    }
    return out;
}

MarginalRanker fit_margins(const FeatureMatrix& data) {
    MarginalRanker r;
    r.n_ = data.rows();
    r.d_ = data.cols();
    r.columns_.resize(r.n_ * r.d_);
    const std::size_t d = r.d_, n = r.n_;
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (!in_parallel_region())
    for (std::size_t j = 0; j < d; ++j) {
        double* col = r.columns_.data() + j * n;
        for (std::size_t i = 0; i < n; ++i) col[i] = data(i, j);
        std::sort(col, col + n);
    }
    return r;
}

std::vector<double> standardize_training(const FeatureMatrix& data, const MarginalRanker& ranker) {
    const std::size_t n = data.rows(), d = data.cols();
    if (ranker.dimension() != d || ranker.train_size() != n)
        throw InvalidInputError("ranker shape does not match data");
    std::vector<double> v(n * d);
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (!in_parallel_region())
    for (std::size_t i = 0; i < n; ++i)
        ranker.standardize_into(data.row(i), {v.data() + i * d, d});
    return v;
}

std::vector<double> standardize_training(const FeatureMatrix& data) {
    return standardize_training(data, fit_margins(data));
}

namespace reference {

std::vector<double> standardize_training(const FeatureMatrix& data, const MarginalRanker& ranker) {
    const std::size_t n = data.rows(), d = data.cols();
    std::vector<double> v(n * d);
    for (std::size_t i = 0; i < n; ++i)
        ranker.standardize_into(data.row(i), {v.data() + i * d, d});
    return v;
}

}  // namespace reference

}  // namespace extremis
