#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace extremis {

// Error taxonomy shared by the library and the CLI (exit codes 2/3/4).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidInputError : Error {
    using Error::Error;
};
struct ParameterError : Error {
    using Error::Error;
};
struct MetricError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};

/// Dense row-major n x d matrix of finite reals. Rejects NaN/inf on construction.
class FeatureMatrix {
  public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (rows_ == 0 || cols_ == 0)
            throw InvalidInputError("feature matrix must have at least one row and one column");
        if (values_.size() != rows_ * cols_)
            throw InvalidInputError("feature matrix storage does not match its shape");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw InvalidInputError("non-finite value at row " + std::to_string(i / cols_) +
                                        ", column " + std::to_string(i % cols_));
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Nonempty subset of features {1..d}, d <= 64, packed into one machine word.
/// Wider dimensions would need a multi-word bitset; nothing here assumes more.
struct FeatureSubset {
    std::uint64_t bits = 0;

    static constexpr std::size_t max_dimension = 64;

    bool empty() const { return bits == 0; }
    bool contains(std::size_t j) const { return (bits >> j) & 1u; }
    void insert(std::size_t j) { bits |= std::uint64_t{1} << j; }
    int size() const { return __builtin_popcountll(bits); }

    // Sorted 1-based feature indices, the external representation everywhere.
    std::vector<int> indices() const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(size()));
        for (std::size_t j = 0; j < 64; ++j)
            if (contains(j)) out.push_back(static_cast<int>(j) + 1);
        return out;
    }

    static FeatureSubset from_indices(const std::vector<int>& one_based, std::size_t d) {
        FeatureSubset s;
        for (int idx : one_based) {
            if (idx < 1 || static_cast<std::size_t>(idx) > d)
                throw InvalidInputError("feature index " + std::to_string(idx) +
                                        " outside 1.." + std::to_string(d));
            s.insert(static_cast<std::size_t>(idx) - 1);
        }
        if (s.empty()) throw InvalidInputError("feature subset must be nonempty");
        return s;
    }

    friend bool operator==(FeatureSubset a, FeatureSubset b) { return a.bits == b.bits; }
    friend auto operator<=>(FeatureSubset a, FeatureSubset b) { return a.bits <=> b.bits; }
};

}  // namespace extremis
