#pragma once

#include <span>
#include <vector>

#include "extremis/types.hpp"

namespace extremis {

/// Per-feature empirical CDFs on the standard-Pareto scale.
///
/// Stores one sorted copy of each training column. The CDF uses the
/// strict count F(x) = #{values < x}/n, so ties in the training data are
/// handled by the same rule for training and test points. Transformed
/// coordinates live in [1, 2n]: a point at or below the column minimum maps
/// to 1, a point above the column maximum maps to the cap 2n (one notch more
/// extreme than the training maximum, which maps to n).
class MarginalRanker {
  public:
    MarginalRanker() = default;

    std::size_t train_size() const { return n_; }
    std::size_t dimension() const { return d_; }
    double cap() const { return 2.0 * static_cast<double>(n_); }

    /// F(x) = #{training values in column j strictly below x} / n.
    double empirical_cdf(std::size_t j, double x) const;

    /// Count version of the CDF; exact integer, used by the transform.
    std::size_t count_below(std::size_t j, double x) const;

    /// Map one observation to the standardized scale, clamping at the cap.
    std::vector<double> standardize(std::span<const double> x) const;
    void standardize_into(std::span<const double> x, std::span<double> out) const;

    std::span<const double> sorted_column(std::size_t j) const {
        return {columns_.data() + j * n_, n_};
    }

    friend MarginalRanker fit_margins(const FeatureMatrix& data);
    friend bool operator==(const MarginalRanker& a, const MarginalRanker& b) = default;

    // Serialization hook: rebuild from already-sorted columns (model load).
    static MarginalRanker from_sorted_columns(std::vector<std::vector<double>> cols);
    std::vector<std::vector<double>> sorted_columns() const;

  private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> columns_;  // d blocks of n sorted values
};

/// Sort each training column. O(d n log n).
MarginalRanker fit_margins(const FeatureMatrix& data);

/// Standardize every training row with the CDFs fitted on the same data.
/// Returns a row-major n x d matrix of values in [1, 2n].
std::vector<double> standardize_training(const FeatureMatrix& data);
std::vector<double> standardize_training(const FeatureMatrix& data, const MarginalRanker& ranker);

namespace reference {
// Serial counterpart kept for parity tests and benchmarks.
std::vector<double> standardize_training(const FeatureMatrix& data, const MarginalRanker& ranker);
}  // namespace reference

}  // namespace extremis
