#pragma once

#include <cstdint>
#include <vector>

#include "extremis/damex.hpp"
#include "extremis/types.hpp"

namespace extremis {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++; seeded via splitmix64 so streams derived from nearby seeds
/// are decorrelated. Bit-exact across platforms, cheap to construct per row.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential();
    std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound), rejection

  private:
    std::uint64_t s_[4];
};

/// Ground-truth dependence structure for the asymmetric logistic model:
/// the charged subsets, one dependence weight per subset, and the implied
/// per-feature membership counts.
struct LogisticSpec {
    std::size_t d = 0;
    std::vector<FeatureSubset> subsets;
    std::vector<double> weights;  // in (0, 1], one per subset

    void validate() const;
    std::vector<int> membership_counts() const;  // |{m : j in subset_m}| per feature
};

/// K distinct nonempty subsets drawn uniformly; features left uncovered are
/// appended to a uniformly chosen subset so every feature carries mass.
LogisticSpec random_support(std::size_t d, std::size_t K, Rng& rng, double w = 0.1);

/// Positive w-stable draw, Laplace transform exp(-t^w). Kanter construction.
double positive_stable(double w, Rng& rng);

/// n i.i.d. draws from the asymmetric logistic max-stable law with unit
/// Frechet margins. Deterministic given the seed, independent of threading.
FeatureMatrix sample(const LogisticSpec& spec, std::size_t n, std::uint64_t seed);

/// Joint CDF of the model at a positive point.
double glog_cdf(const LogisticSpec& spec, std::span<const double> x);

/// True sub-cone mass of each charged subset (closed form); zero elsewhere.
double true_subcone_mass(const LogisticSpec& spec, std::size_t m);

struct RecoveryReport {
    std::size_t d = 0;
    std::size_t K = 0;
    std::size_t n = 0;
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    DamexParams params;
    std::vector<int> errors;  // |D xor D_hat| per run
    double mean_errors = 0.0;
};

/// Draw a support, sample, fit, compare charged subsets; averaged over runs.
/// Run r uses seed base_seed + r, so runs are reproducible and independent
/// of scheduling.
RecoveryReport support_recovery(std::size_t d, std::size_t K, std::size_t n, std::size_t runs,
                                const DamexParams& params, std::uint64_t base_seed,
                                double w = 0.1);

namespace reference {
FeatureMatrix sample(const LogisticSpec& spec, std::size_t n, std::uint64_t seed);
}  // namespace reference

}  // namespace extremis
