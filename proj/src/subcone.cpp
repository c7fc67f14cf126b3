#include "extremis/subcone.hpp"

#include <algorithm>
#include <cmath>

#include "extremis/parallel.hpp"

namespace extremis {

double SparseAngularRepresentation::total_mass() const {
    double sum = 0.0;
    for (const auto& [_, m] : masses) sum += m;
    return sum;
}

std::vector<std::pair<FeatureSubset, double>> SparseAngularRepresentation::sorted_entries() const {
    std::vector<std::pair<FeatureSubset, double>> out;
    out.reserve(masses.size());
    for (const auto& [bits, m] : masses) out.push_back({FeatureSubset{bits}, m});
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first.bits < b.first.bits; });
    return out;
}

bool degenerate_epsilon(std::size_t n, std::size_t k, double epsilon) {
    return epsilon * static_cast<double>(n) <= static_cast<double>(k);
}

std::optional<FeatureSubset> assign_subset(std::span<const double> v, std::size_t n, std::size_t k,
                                           double epsilon, AssignMode mode) {
    const double radial = static_cast<double>(n) / static_cast<double>(k);
    double radius = 0.0;
    for (double c : v) radius = std::max(radius, c);
    if (radius < radial) return std::nullopt;
    const double tol =
        epsilon * (mode == AssignMode::FixedScaleRectangle ? radial : radius);
    FeatureSubset s;
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] > tol) s.insert(j);
    return s;
}

std::optional<FeatureSubset> assign_rectangle(std::span<const double> v, std::size_t n,
                                              std::size_t k, double epsilon) {
    return assign_subset(v, n, k, epsilon, AssignMode::FixedScaleRectangle);
}

namespace {

void check_k(std::size_t n, std::size_t k) {
    if (k == 0 || k > n)
        throw ParameterError("k must satisfy 1 <= k <= n (k=" + std::to_string(k) +
                             ", n=" + std::to_string(n) + ")");
}

void check_mass_params(std::size_t n, std::size_t k, double epsilon) {
    check_k(n, k);
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw ParameterError("epsilon must lie in (0, 1)");
}

SparseAngularRepresentation count_masses(const StandardizedView& v, std::size_t k, double epsilon,
                                         AssignMode mode, bool parallel) {
    const std::size_t n = v.rows;
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    if (parallel) {
        const int workers = worker_count();
        std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> local(
            static_cast<std::size_t>(workers));
#pragma omp parallel num_threads(workers) if (!in_parallel_region())
        {
#ifdef _OPENMP
            auto& mine = local[static_cast<std::size_t>(omp_get_thread_num())];
#else
            auto& mine = local[0];
#endif
#pragma omp for schedule(static)
            for (std::size_t i = 0; i < n; ++i) {
                auto s = assign_subset(v.row(i), n, k, epsilon, mode);
                if (s) ++mine[s->bits];
            }
        }
        for (const auto& part : local)
            for (const auto& [bits, c] : part) counts[bits] += c;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            auto s = assign_subset(v.row(i), n, k, epsilon, mode);
            if (s) ++counts[s->bits];
        }
    }
    SparseAngularRepresentation rep;
    rep.n = n;
    rep.k = k;
    rep.epsilon = epsilon;
    rep.masses.reserve(counts.size());
    for (const auto& [bits, c] : counts)
        rep.masses.emplace(bits, static_cast<double>(c) / static_cast<double>(k));
    return rep;
}

}  // namespace

SparseAngularRepresentation estimate_masses(const StandardizedView& v, std::size_t k,
                                            double epsilon, AssignMode mode,
                                            std::vector<std::string>* warnings) {
    check_mass_params(v.rows, k, epsilon);
    if (warnings && degenerate_epsilon(v.rows, k, epsilon))
        warnings->push_back(
            "epsilon <= k/n: the tolerance falls below the standardized minimum, only the full "
            "feature set can be charged");
    return count_masses(v, k, epsilon, mode, /*parallel=*/true);
}

SparseAngularRepresentation estimate_masses(const StandardizedView& v, std::size_t k,
                                            double epsilon, std::vector<std::string>* warnings) {
    return estimate_masses(v, k, epsilon, AssignMode::FixedScaleRectangle, warnings);
}

namespace {

// One pruning pass; returns whether anything was removed.
bool threshold_pass(std::unordered_map<std::uint64_t, double>& masses, double p) {
    if (masses.empty() || p <= 0.0) return false;
    double mean = 0.0;
    for (const auto& [_, m] : masses) mean += m;
    mean /= static_cast<double>(masses.size());
    const double threshold = p * mean;
    bool removed = false;
    for (auto it = masses.begin(); it != masses.end();) {
        if (it->second < threshold) {
            it = masses.erase(it);
            removed = true;
        } else {
            ++it;
        }
    }
    return removed;
}

}  // namespace

SparseAngularRepresentation apply_threshold(SparseAngularRepresentation rep, double p) {
    if (p < 0.0) throw ParameterError("threshold proportion p must be >= 0");
    if (rep.thresholded) return rep;
    threshold_pass(rep.masses, p);
    rep.p = p;
    rep.thresholded = true;
    return rep;
}

SparseAngularRepresentation apply_threshold_fixed_point(SparseAngularRepresentation rep, double p) {
    if (p < 0.0) throw ParameterError("threshold proportion p must be >= 0");
    if (rep.thresholded) return rep;
    while (threshold_pass(rep.masses, p)) {
    }
    rep.p = p;
    rep.thresholded = true;
    return rep;
}

namespace {

// Per-column descending order-statistic thresholds. m = floor(k*x_j); the
// m-th largest training value, or nullopt when m == 0 (no constraint).
std::vector<std::optional<double>> order_thresholds(const std::vector<std::vector<double>>& sorted,
                                                    std::size_t k, std::span<const double> x) {
    const std::size_t n = sorted.front().size();
    std::vector<std::optional<double>> thr(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < 0.0) throw ParameterError("coordinates must be nonnegative");
        double m_real = std::floor(static_cast<double>(k) * x[j]);
        if (m_real > static_cast<double>(n))
            throw ParameterError("floor(k*x_j) exceeds n for coordinate " + std::to_string(j + 1));
        auto m = static_cast<std::size_t>(m_real);
        if (m >= 1) thr[j] = sorted[j][n - m];
    }
    return thr;
}

std::vector<std::vector<double>> sorted_columns_of(const FeatureMatrix& data) {
    std::vector<std::vector<double>> cols(data.cols(), std::vector<double>(data.rows()));
    for (std::size_t j = 0; j < data.cols(); ++j) {
        for (std::size_t i = 0; i < data.rows(); ++i) cols[j][i] = data(i, j);
        std::sort(cols[j].begin(), cols[j].end());
    }
    return cols;
}

}  // namespace

double empirical_stdf(const FeatureMatrix& data, std::size_t k, std::span<const double> x) {
    if (x.size() != data.cols()) throw InvalidInputError("x dimension does not match data");
    check_k(data.rows(), k);
    auto cols = sorted_columns_of(data);
    auto thr = order_thresholds(cols, k, x);
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (thr[j] && data(i, j) >= *thr[j]) {
                ++count;
                break;
            }
        }
    }
    return static_cast<double>(count) / static_cast<double>(k);
}

double empirical_g(const FeatureMatrix& data, std::size_t k, std::span<const double> x,
                   std::span<const double> z, FeatureSubset alpha, FeatureSubset beta) {
    if (x.size() != data.cols() || z.size() != data.cols())
        throw InvalidInputError("x/z dimension does not match data");
    if (alpha.empty()) throw InvalidInputError("alpha must be nonempty");
    check_k(data.rows(), k);
    auto cols = sorted_columns_of(data);
    auto xthr = order_thresholds(cols, k, x);
    auto zthr = order_thresholds(cols, k, z);
    const std::size_t d = data.cols();
    // An undefined alpha threshold makes the intersection empty.
    for (std::size_t j = 0; j < d; ++j)
        if (alpha.contains(j) && !xthr[j]) return 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        bool in = true;
        for (std::size_t j = 0; j < d && in; ++j) {
            if (alpha.contains(j) && !(data(i, j) >= *xthr[j])) in = false;
            if (beta.contains(j) && zthr[j] && !(data(i, j) < *zthr[j])) in = false;
        }
        if (in) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(k);
}

std::map<int, double> dimension_histogram(const SparseAngularRepresentation& rep) {
    std::map<int, double> hist;
    for (const auto& [bits, m] : rep.masses) hist[FeatureSubset{bits}.size()] += m;
    return hist;
}

namespace reference {

SparseAngularRepresentation estimate_masses(const StandardizedView& v, std::size_t k,
                                            double epsilon, AssignMode mode) {
    check_mass_params(v.rows, k, epsilon);
    return count_masses(v, k, epsilon, mode, /*parallel=*/false);
}

}  // namespace reference

}  // namespace extremis
