#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "extremis/damex.hpp"
#include "extremis/logistic.hpp"
#include "oracles.hpp"

using namespace extremis;

namespace {

FeatureMatrix comonotone(std::size_t n, std::size_t d, std::uint64_t seed) {
    extremis::Rng rng(seed);
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.uniform_open();
        for (std::size_t j = 0; j < d; ++j) values.push_back(u);
    }
    return FeatureMatrix(n, d, std::move(values));
}

std::string rep_fingerprint(const SparseAngularRepresentation& rep) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& [s, m] : rep.sorted_entries()) out << s.bits << ':' << m << ';';
    return out.str();
}

}  // namespace

TEST_CASE("k resolution and validation") {
    DamexParams params;
    CHECK(params.resolve_k(400) == 20);
    CHECK(params.resolve_k(50000) == 223);
    params.k = 500;
    CHECK_THROWS_AS(params.resolve_k(400), ParameterError);
    params.k = 0;
    CHECK_THROWS_AS(params.resolve_k(400), ParameterError);
}

TEST_CASE("fit on comonotone data concentrates on the full subset") {
    DamexParams params;
    params.epsilon = 0.2;
    for (auto mode : {MembershipMode::SelfScaledCone, MembershipMode::FixedScaleRectangle}) {
        params.membership = mode;
        auto model = fit(comonotone(400, 3, 1), params);
        CHECK(model.k() == 20);
        CHECK(model.representation().masses.size() == 1);
        CHECK(model.representation().mass(FeatureSubset{0b111}) == 1.0);
    }
}

TEST_CASE("fit on the countermonotone six rows recovers the two axes") {
    FeatureMatrix data(6, 2, {1, 6, 2, 5, 3, 4, 4, 3, 5, 2, 6, 1});
    DamexParams params;
    params.k = 2;
    params.epsilon = 0.9;
    params.p = 0.0;
    for (auto mode : {MembershipMode::SelfScaledCone, MembershipMode::FixedScaleRectangle}) {
        params.membership = mode;
        auto model = fit(data, params);
        CHECK(model.representation().masses.size() == 2);
        CHECK(model.representation().mass(FeatureSubset{0b01}) == 1.0);
        CHECK(model.representation().mass(FeatureSubset{0b10}) == 1.0);
    }
}

TEST_CASE("fit warns in the degenerate epsilon regime") {
    DamexParams params;
    params.epsilon = 0.01;
    params.k = 20;  // eps <= k/n at n=100
    std::vector<std::string> warnings;
    (void)fit(comonotone(100, 2, 2), params, &warnings);
    CHECK(warnings.size() == 1);
}

TEST_CASE("scoring: unknown direction scores zero, radius divides the mass") {
    auto train = comonotone(400, 2, 3);
    DamexParams params;
    params.epsilon = 0.2;
    auto model = fit(train, params);

    // comonotone point above every training value: full subset, radius 2n
    std::vector<double> far{10.0, 10.0};
    auto rec = model.score(far);
    CHECK(rec.subset.bits == 0b11);
    CHECK(rec.radius == 800.0);
    CHECK(rec.score == 1.0 / 800.0);

    // a direction never charged: axis point
    std::vector<double> axis{10.0, -10.0};
    auto rec_axis = model.score(axis);
    CHECK(rec_axis.score == 0.0);

    // same subset, larger radius => strictly smaller score
    std::vector<double> near{0.5, 0.5};
    auto rec_near = model.score(near);
    REQUIRE(rec_near.subset.bits == rec.subset.bits);
    CHECK(rec_near.radius < rec.radius);
    CHECK(rec_near.score > rec.score);
}

TEST_CASE("rectangle-mode scoring zeroes points below the radial level") {
    auto train = comonotone(400, 2, 4);
    DamexParams params;
    params.epsilon = 0.2;
    params.membership = MembershipMode::FixedScaleRectangle;
    auto model = fit(train, params);
    std::vector<double> mild{0.01, 0.01};
    auto rec = model.score(mild);
    CHECK(rec.subset.empty());
    CHECK(rec.score == 0.0);
    CHECK(rec.radius >= 1.0);
}

TEST_CASE("cone-mode subsets are never empty and scores stay in range") {
    auto data = oracles::random_matrix(500, 4, 5);
    DamexParams params;
    params.epsilon = 0.1;
    auto model = fit(data, params);
    const double total = model.representation().total_mass();
    auto records = model.score_batch(data);
    for (const auto& rec : records) {
        CHECK(!rec.subset.empty());
        CHECK(rec.score >= 0.0);
        CHECK(rec.score <= total);
        CHECK(rec.score <= total / rec.radius + 1e-15);
        CHECK(rec.radius >= 1.0);
        CHECK(rec.radius <= 1000.0);
    }
}

TEST_CASE("score_batch is elementwise and handles the empty batch") {
    auto data = oracles::random_matrix(60, 3, 6);
    DamexParams params;
    params.epsilon = 0.15;
    auto model = fit(data, params);

    CHECK(model.score_batch(std::span<const double>{}, 0).empty());

    auto probes = oracles::random_matrix(40, 3, 7);
    auto records = model.score_batch(probes);
    REQUIRE(records.size() == 40);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].index == i);
        auto single = model.score(probes.row(i));
        CHECK(records[i].score == single.score);
        CHECK(records[i].radius == single.radius);
    }

    // permuted batch gives permuted records
    std::vector<double> reversed;
    for (std::size_t i = probes.rows(); i-- > 0;) {
        auto r = probes.row(i);
        reversed.insert(reversed.end(), r.begin(), r.end());
    }
    auto rev_records = model.score_batch(FeatureMatrix(probes.rows(), 3, std::move(reversed)));
    for (std::size_t i = 0; i < records.size(); ++i)
        CHECK(rev_records[records.size() - 1 - i].score == records[i].score);

    std::vector<double> wrong{1.0, 2.0};
    CHECK_THROWS_AS(model.score(wrong), InvalidInputError);
}

TEST_CASE("scale invariance: monotone transforms change nothing") {
    auto train = oracles::random_matrix(300, 3, 8);
    auto probes = oracles::random_matrix(50, 3, 9);
    DamexParams params;
    params.epsilon = 0.1;

    auto transform = [](const FeatureMatrix& m, auto&& f) {
        std::vector<double> values;
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) values.push_back(f(m(i, j)));
        return FeatureMatrix(m.rows(), m.cols(), std::move(values));
    };

    for (auto mode : {MembershipMode::SelfScaledCone, MembershipMode::FixedScaleRectangle}) {
        params.membership = mode;
        auto base_model = fit(train, params);
        auto base_scores = base_model.score_batch(probes);

        auto check_same = [&](auto&& f) {
            auto model = fit(transform(train, f), params);
            CHECK(rep_fingerprint(model.representation()) ==
                  rep_fingerprint(base_model.representation()));
            auto scores = model.score_batch(transform(probes, f));
            REQUIRE(scores.size() == base_scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i) {
                CHECK(scores[i].score == base_scores[i].score);
                CHECK(scores[i].radius == base_scores[i].radius);
                CHECK(scores[i].subset.bits == base_scores[i].subset.bits);
            }
        };
        check_same([](double x) { return std::exp(x); });
        check_same([](double x) { return x * x * x; });
        check_same([](double x) { return 3.5 * x + 11.0; });
    }
}

TEST_CASE("persistence round-trips scoring bit-exactly") {
    Rng rng(11);
    auto spec = random_support(5, 3, rng, 0.1);
    auto train = sample(spec, 2000, 12);
    auto probes = sample(spec, 100, 13);

    for (auto mode : {MembershipMode::SelfScaledCone, MembershipMode::FixedScaleRectangle}) {
        DamexParams params;
        params.epsilon = 0.1;
        params.membership = mode;
        auto model = fit(train, params);

        std::stringstream buffer;
        model.save(buffer);
        auto loaded = DamexModel::load(buffer);

        CHECK(loaded.train_size() == model.train_size());
        CHECK(loaded.k() == model.k());
        CHECK(rep_fingerprint(loaded.representation()) ==
              rep_fingerprint(model.representation()));
        auto before = model.score_batch(probes);
        auto after = loaded.score_batch(probes);
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].score == after[i].score);
            CHECK(before[i].radius == after[i].radius);
            CHECK(before[i].subset.bits == after[i].subset.bits);
        }
    }
}

TEST_CASE("load rejects truncated, malformed and mis-versioned documents") {
    DamexParams roundtrip_params;
    roundtrip_params.epsilon = 0.2;
    auto model = fit(comonotone(50, 2, 14), roundtrip_params);
    std::stringstream buffer;
    model.save(buffer);
    std::string text = buffer.str();

    std::stringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(DamexModel::load(truncated), ParseError);

    std::stringstream garbage("not json at all {{{");
    CHECK_THROWS_AS(DamexModel::load(garbage), ParseError);

    std::string versioned = text;
    versioned.replace(versioned.find("\"version\": 1"), 12, "\"version\": 9");
    std::stringstream wrong_version(versioned);
    CHECK_THROWS_WITH_AS(DamexModel::load(wrong_version),
                         doctest::Contains("version"), ParseError);

    std::stringstream missing("{\"version\": 1}");
    CHECK_THROWS_AS(DamexModel::load(missing), ParseError);
}

TEST_CASE("fit rejects unusable parameters") {
    auto data = comonotone(100, 2, 15);
    DamexParams params;
    params.epsilon = 1.5;
    CHECK_THROWS_AS(fit(data, params), ParameterError);
    params.epsilon = 0.1;
    params.p = -1.0;
    CHECK_THROWS_AS(fit(data, params), ParameterError);
    params.p = 0.1;
    params.k = 101;
    CHECK_THROWS_AS(fit(data, params), ParameterError);
}
