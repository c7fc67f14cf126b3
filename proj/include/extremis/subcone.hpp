#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "extremis/types.hpp"

namespace extremis {

/// Read-only view of a row-major standardized matrix.
struct StandardizedView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
};

/// Sparse map from feature subsets to empirical mass, plus the estimation
/// metadata needed to interpret it. Only strictly positive masses are stored.
struct SparseAngularRepresentation {
    std::unordered_map<std::uint64_t, double> masses;
    std::size_t n = 0;
    std::size_t k = 0;
    double epsilon = 0.0;
    double p = 0.0;
    bool thresholded = false;

    double total_mass() const;
    double mass(FeatureSubset a) const {
        auto it = masses.find(a.bits);
        return it == masses.end() ? 0.0 : it->second;
    }
    // Deterministic (subset-ascending) listing for serialization and reports.
    std::vector<std::pair<FeatureSubset, double>> sorted_entries() const;
};

enum class AssignMode {
    FixedScaleRectangle,  // coordinate tolerance at eps * n/k
    SelfScaledCone,       // coordinate tolerance at eps * ||v||_inf
};

/// Subset of coordinates above the tolerance, for points above the radial
/// threshold n/k; nullopt for non-extreme points. The argmax coordinate is
/// always above the tolerance, so the result is nonempty.
std::optional<FeatureSubset> assign_rectangle(std::span<const double> v, std::size_t n,
                                              std::size_t k, double epsilon);

std::optional<FeatureSubset> assign_subset(std::span<const double> v, std::size_t n, std::size_t k,
                                           double epsilon, AssignMode mode);

/// Empirical mass per subset: count of extreme rows assigned to each subset,
/// divided by k. Warns (if a sink is given) when eps <= k/n, where every
/// coordinate clears the tolerance and only the full subset can be charged.
SparseAngularRepresentation estimate_masses(const StandardizedView& v, std::size_t k,
                                            double epsilon,
                                            std::vector<std::string>* warnings = nullptr);
SparseAngularRepresentation estimate_masses(const StandardizedView& v, std::size_t k,
                                            double epsilon, AssignMode mode,
                                            std::vector<std::string>* warnings = nullptr);

/// Remove masses below p * (average mass over charged subsets). Strictly
/// smaller entries go; ties with the threshold stay. Re-applying to an
/// already-thresholded representation is a no-op.
SparseAngularRepresentation apply_threshold(SparseAngularRepresentation rep, double p);

/// Same pruning rule, re-applied with a re-averaged threshold until the
/// surviving set is stable.
SparseAngularRepresentation apply_threshold_fixed_point(SparseAngularRepresentation rep, double p);

/// Empirical stable tail dependence function via per-column order statistics.
/// A coordinate with floor(k*x_j) == 0 imposes no constraint; x = 0 gives 0.
double empirical_stdf(const FeatureMatrix& data, std::size_t k, std::span<const double> x);

/// Empirical rectangle functional. Rows counted satisfy
///   X_ij >= column j's floor(k*x_j)-th largest value   for j in alpha,
///   X_ij <  column j's floor(k*z_j)-th largest value   for j in beta.
/// An alpha coordinate with floor(k*x_j) == 0 empties the event; a beta
/// coordinate with floor(k*z_j) == 0 drops its constraint.
double empirical_g(const FeatureMatrix& data, std::size_t k, std::span<const double> x,
                   std::span<const double> z, FeatureSubset alpha, FeatureSubset beta);

/// Bucket masses by subset cardinality.
std::map<int, double> dimension_histogram(const SparseAngularRepresentation& rep);

bool degenerate_epsilon(std::size_t n, std::size_t k, double epsilon);

namespace reference {
SparseAngularRepresentation estimate_masses(const StandardizedView& v, std::size_t k,
                                            double epsilon, AssignMode mode);
}  // namespace reference

}  // namespace extremis
