#include "extremis/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "extremis/parallel.hpp"

namespace extremis {

double Rng::exponential() { return -std::log(uniform_open()); }

std::uint64_t Rng::below(std::uint64_t bound) {
    // rejection keeps the draw unbiased for any bound
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % bound;
}

void LogisticSpec::validate() const {
    if (d == 0 || d > FeatureSubset::max_dimension)
        throw ParameterError("dimension must lie in 1..64");
    if (subsets.empty()) throw ParameterError("at least one subset required");
    if (subsets.size() != weights.size())
        throw ParameterError("one dependence weight per subset required");
    std::uint64_t covered = 0;
    std::unordered_set<std::uint64_t> seen;
    const std::uint64_t all = d == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1;
    for (std::size_t m = 0; m < subsets.size(); ++m) {
        if (subsets[m].empty()) throw ParameterError("subsets must be nonempty");
        if (subsets[m].bits & ~all) throw ParameterError("subset uses a feature beyond d");
        if (!seen.insert(subsets[m].bits).second) throw ParameterError("subsets must be distinct");
        if (!(weights[m] > 0.0) || !(weights[m] <= 1.0))
            throw ParameterError("dependence weights must lie in (0, 1]");
        covered |= subsets[m].bits;
    }
    if (covered != all) throw ParameterError("every feature must belong to some subset");
}

std::vector<int> LogisticSpec::membership_counts() const {
    std::vector<int> counts(d, 0);
    for (const auto& s : subsets)
        for (std::size_t j = 0; j < d; ++j)
            if (s.contains(j)) ++counts[j];
    return counts;
}

LogisticSpec random_support(std::size_t d, std::size_t K, Rng& rng, double w) {
    if (d == 0 || d > FeatureSubset::max_dimension)
        throw ParameterError("dimension must lie in 1..64");
    const std::uint64_t total = d == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << d) - 1;
    if (K == 0 || K > total)
        throw ParameterError("K must lie in 1..2^d-1");

    std::vector<std::uint64_t> picked;
    if (total <= 4096) {
        // small universes: partial Fisher-Yates over all nonempty masks
        std::vector<std::uint64_t> all(total);
        for (std::uint64_t m = 0; m < total; ++m) all[m] = m + 1;
        for (std::size_t i = 0; i < K; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
            std::swap(all[i], all[j]);
        }
        picked.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(K));
    } else {
        std::unordered_set<std::uint64_t> seen;
        while (seen.size() < K) {
            std::uint64_t m = 1 + rng.below(total);
            if (seen.insert(m).second) picked.push_back(m);
        }
    }
    std::sort(picked.begin(), picked.end());

    // Coverage repair: each uncovered feature joins one existing subset.
    // No duplicate can arise, since no other subset contains that feature.
    std::uint64_t covered = 0;
    for (auto m : picked) covered |= m;
    for (std::size_t j = 0; j < d; ++j) {
        if (!((covered >> j) & 1u)) {
            std::size_t idx = static_cast<std::size_t>(rng.below(picked.size()));
            picked[idx] |= std::uint64_t{1} << j;
        }
    }

    LogisticSpec spec;
    spec.d = d;
    for (auto m : picked) spec.subsets.push_back(FeatureSubset{m});
    spec.weights.assign(K, w);
    spec.validate();
    return spec;
}

double positive_stable(double w, Rng& rng) {
    if (!(w > 0.0) || !(w < 1.0)) throw ParameterError("stable exponent must lie in (0, 1)");
    const double theta = std::numbers::pi * rng.uniform_open();
    const double denom = rng.exponential();
    const double a = std::sin((1.0 - w) * theta) *
                     std::pow(std::sin(w * theta), w / (1.0 - w)) /
                     std::pow(std::sin(theta), 1.0 / (1.0 - w));
    return std::pow(a / denom, (1.0 - w) / w);
}

namespace {

void sample_row(const LogisticSpec& spec, const std::vector<int>& counts, Rng& rng, double* out) {
    const std::size_t d = spec.d;
    for (std::size_t j = 0; j < d; ++j) out[j] = 0.0;
    for (std::size_t m = 0; m < spec.subsets.size(); ++m) {
        const double w = spec.weights[m];
        const double stable = w < 1.0 ? positive_stable(w, rng) : 1.0;
        const FeatureSubset& s = spec.subsets[m];
        for (std::size_t j = 0; j < d; ++j) {
            if (!s.contains(j)) continue;
            const double z = std::pow(stable / rng.exponential(), w);
            out[j] = std::max(out[j], z / counts[j]);
        }
    }
}

FeatureMatrix sample_impl(const LogisticSpec& spec, std::size_t n, std::uint64_t seed,
                          bool parallel) {
    spec.validate();
    if (n == 0) throw ParameterError("sample size must be positive");
    const auto counts = spec.membership_counts();
    std::vector<double> values(n * spec.d);
    // one decorrelated stream per row, so the draw order never depends on
    // the thread schedule
    std::uint64_t base = seed;
    const std::uint64_t stream0 = splitmix64(base);
#pragma omp parallel for schedule(static) num_threads(worker_count()) \
    if (parallel && !in_parallel_region())
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(stream0 + i);
        sample_row(spec, counts, rng, values.data() + i * spec.d);
    }
    return FeatureMatrix(n, spec.d, std::move(values));
}

}  // namespace

FeatureMatrix sample(const LogisticSpec& spec, std::size_t n, std::uint64_t seed) {
    return sample_impl(spec, n, seed, /*parallel=*/true);
}

double glog_cdf(const LogisticSpec& spec, std::span<const double> x) {
    spec.validate();
    if (x.size() != spec.d) throw InvalidInputError("point dimension does not match the model");
    for (double c : x)
        if (!(c > 0.0)) throw ParameterError("glog_cdf requires strictly positive coordinates");
    const auto counts = spec.membership_counts();
    double exponent = 0.0;
    for (std::size_t m = 0; m < spec.subsets.size(); ++m) {
        const double w = spec.weights[m];
        double inner = 0.0;
        for (std::size_t j = 0; j < spec.d; ++j)
            if (spec.subsets[m].contains(j)) inner += std::pow(counts[j] * x[j], -1.0 / w);
        exponent += std::pow(inner, w);
    }
    return std::exp(-exponent);
}

double true_subcone_mass(const LogisticSpec& spec, std::size_t m) {
    const auto counts = spec.membership_counts();
    const double w = spec.weights[m];
    double inner = 0.0;
    for (std::size_t j = 0; j < spec.d; ++j)
        if (spec.subsets[m].contains(j)) inner += std::pow(static_cast<double>(counts[j]), -1.0 / w);
    return std::pow(inner, w);
}

RecoveryReport support_recovery(std::size_t d, std::size_t K, std::size_t n, std::size_t runs,
                                const DamexParams& params, std::uint64_t base_seed, double w) {
    if (runs == 0) throw ParameterError("at least one run required");
    // validate everything before entering the parallel region; exceptions
    // must not escape a worker thread
    {
        Rng probe(base_seed);
        (void)random_support(d, K, probe, w);
        (void)params.resolve_k(n);
        if (!(params.epsilon > 0.0) || !(params.epsilon < 1.0))
            throw ParameterError("epsilon must lie in (0, 1)");
        if (params.p < 0.0) throw ParameterError("threshold proportion p must be >= 0");
    }
    RecoveryReport report;
    report.d = d;
    report.K = K;
    report.n = n;
    report.runs = runs;
    report.seed = base_seed;
    report.params = params;
    report.errors.assign(runs, 0);

    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(worker_count()) if (!in_parallel_region())
    for (std::size_t r = 0; r < runs; ++r) {
        try {
            std::uint64_t run_state = base_seed + r;
            const std::uint64_t spec_seed = splitmix64(run_state);
            const std::uint64_t data_seed = splitmix64(run_state);
            Rng rng(spec_seed);
            LogisticSpec spec = random_support(d, K, rng, w);
            FeatureMatrix data = sample(spec, n, data_seed);
            DamexModel model = fit(data, params);
            std::unordered_set<std::uint64_t> truth;
            for (const auto& s : spec.subsets) truth.insert(s.bits);
            int errors = 0;
            for (const auto& [bits, _] : model.representation().masses)
                if (!truth.count(bits)) ++errors;
            for (auto bits : truth)
                if (!model.representation().masses.count(bits)) ++errors;
            report.errors[r] = errors;
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    double sum = 0.0;
    for (int e : report.errors) sum += e;
    report.mean_errors = sum / static_cast<double>(runs);
    return report;
}

namespace reference {

FeatureMatrix sample(const LogisticSpec& spec, std::size_t n, std::uint64_t seed) {
    return sample_impl(spec, n, seed, /*parallel=*/false);
}

}  // namespace reference

}  // namespace extremis
