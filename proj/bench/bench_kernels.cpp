// Times the OpenMP kernels against their serial references and reports the
// fit-time scaling when n doubles at fixed d.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "extremis/damex.hpp"
#include "extremis/logistic.hpp"
#include "extremis/parallel.hpp"
#include "extremis/rank_transform.hpp"
#include "extremis/subcone.hpp"

using namespace extremis;

namespace {


template <class F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

void report(const std::string& name, double serial, double parallel) {
    std::printf("%-26s serial %8.4fs   openmp %8.4fs   speedup %5.2fx\n", name.c_str(), serial,
                parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 200000, d = 10, K = 10;
    if (argc > 1) n = std::stoull(argv[1]);
    if (argc > 2) d = std::stoull(argv[2]);
    std::printf("kernel timings: n=%zu d=%zu K=%zu workers=%d\n", n, d, K, worker_count());

    Rng rng(7);
    LogisticSpec spec = random_support(d, K, rng, 0.1);

    double t_sample_ser = time_best_of(3, [&] { (void)reference::sample(spec, n, 42); });
    double t_sample_par = time_best_of(3, [&] { (void)sample(spec, n, 42); });
    report("sample", t_sample_ser, t_sample_par);

    FeatureMatrix data = sample(spec, n, 42);
    MarginalRanker ranker = fit_margins(data);

    double t_std_ser =
        time_best_of(3, [&] { (void)reference::standardize_training(data, ranker); });
    double t_std_par = time_best_of(3, [&] { (void)standardize_training(data, ranker); });
    report("standardize_training", t_std_ser, t_std_par);

    std::vector<double> v = standardize_training(data, ranker);
    StandardizedView view{v.data(), n, d};
    const std::size_t k = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));

    double t_mass_ser = time_best_of(
        3, [&] { (void)reference::estimate_masses(view, k, 0.1, AssignMode::SelfScaledCone); });
    double t_mass_par =
        time_best_of(3, [&] { (void)estimate_masses(view, k, 0.1, AssignMode::SelfScaledCone); });
    report("estimate_masses", t_mass_ser, t_mass_par);

    DamexParams params;
    params.epsilon = 0.1;
    DamexModel model = fit(data, params);
    double t_score_ser = time_best_of(3, [&] { (void)reference::score_batch(model, data); });
    double t_score_par = time_best_of(3, [&] { (void)model.score_batch(data); });
    report("score_batch", t_score_ser, t_score_par);

    // fit cost vs n at fixed d; the ratio should track n log n, not n^2
    std::printf("\nfit scaling at d=%zu:\n", d);
    double prev = 0.0;
    for (std::size_t size : {n / 4, n / 2, n}) {
        FeatureMatrix sub = sample(spec, size, 43);
        double t = time_best_of(3, [&] { (void)fit(sub, params); });
        if (prev > 0.0)
            std::printf("  n=%8zu fit %8.4fs   ratio vs n/2 %5.2fx\n", size, t, t / prev);
        else
            std::printf("  n=%8zu fit %8.4fs\n", size, t);
        prev = t;
    }
    return 0;
}
