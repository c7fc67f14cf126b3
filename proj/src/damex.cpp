#include "extremis/damex.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "extremis/parallel.hpp"

namespace extremis {

std::string to_string(MembershipMode mode) {
    return mode == MembershipMode::SelfScaledCone ? "self-scaled-cone" : "fixed-scale-rectangle";
}

MembershipMode membership_mode_from_string(const std::string& s) {
    if (s == "self-scaled-cone" || s == "cone") return MembershipMode::SelfScaledCone;
    if (s == "fixed-scale-rectangle" || s == "rectangle")
        return MembershipMode::FixedScaleRectangle;
    throw ParameterError("unknown membership mode '" + s + "'");
}

std::size_t DamexParams::resolve_k(std::size_t n) const {
    std::size_t resolved =
        k ? *k : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    if (resolved == 0 || resolved > n)
        throw ParameterError("k must satisfy 1 <= k <= n (k=" + std::to_string(resolved) +
                             ", n=" + std::to_string(n) + ")");
    return resolved;
}

DamexModel::DamexModel(MarginalRanker ranker, SparseAngularRepresentation rep, DamexParams params,
                       std::size_t resolved_k)
    : ranker_(std::move(ranker)),
      representation_(std::move(rep)),
      params_(params),
      k_(resolved_k) {
    if (representation_.n != ranker_.train_size())
        throw InvalidInputError("representation sample size does not match the ranker");
}

DamexModel fit(const FeatureMatrix& data, const DamexParams& params,
               std::vector<std::string>* warnings) {
    if (data.cols() > FeatureSubset::max_dimension)
        throw InvalidInputError("dimension above 64 is not supported by the subset encoding");
    const std::size_t k = params.resolve_k(data.rows());
    if (!(params.epsilon > 0.0) || !(params.epsilon < 1.0))
        throw ParameterError("epsilon must lie in (0, 1)");
    if (params.p < 0.0) throw ParameterError("threshold proportion p must be >= 0");

    MarginalRanker ranker = fit_margins(data);
    std::vector<double> v = standardize_training(data, ranker);
    StandardizedView view{v.data(), data.rows(), data.cols()};
    const AssignMode mode = params.membership == MembershipMode::SelfScaledCone
                                ? AssignMode::SelfScaledCone
                                : AssignMode::FixedScaleRectangle;
    SparseAngularRepresentation rep = estimate_masses(view, k, params.epsilon, mode, warnings);
    rep = params.threshold_refinement ? apply_threshold_fixed_point(std::move(rep), params.p)
                                      : apply_threshold(std::move(rep), params.p);
    return DamexModel(std::move(ranker), std::move(rep), params, k);
}

ScoreRecord DamexModel::score(std::span<const double> x) const {
    ScoreRecord rec;
    std::vector<double> v = ranker_.standardize(x);
    double radius = 0.0;
    for (double c : v) radius = std::max(radius, c);
    rec.radius = radius;
    if (params_.membership == MembershipMode::SelfScaledCone) {
        const double tol = params_.epsilon * radius;
        for (std::size_t j = 0; j < v.size(); ++j)
            if (v[j] > tol) rec.subset.insert(j);
    } else {
        auto s = assign_rectangle(v, ranker_.train_size(), k_, params_.epsilon);
        if (!s) return rec;  // below the training radial threshold: score 0
        rec.subset = *s;
    }
    rec.score = representation_.mass(rec.subset) / radius;
    return rec;
}

std::vector<ScoreRecord> DamexModel::score_batch(std::span<const double> values,
                                                 std::size_t rows) const {
    const std::size_t d = dimension();
    if (values.size() != rows * d) throw InvalidInputError("batch dimension mismatch");
    std::vector<ScoreRecord> out(rows);
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (!in_parallel_region())
    for (std::size_t i = 0; i < rows; ++i) {
        out[i] = score(values.subspan(i * d, d));
        out[i].index = i;
    }
    return out;
}

std::vector<ScoreRecord> DamexModel::score_batch(const FeatureMatrix& data) const {
    if (data.cols() != dimension()) throw InvalidInputError("batch dimension mismatch");
    return score_batch(std::span<const double>(data.values()), data.rows());
}

namespace {

using nlohmann::json;

json representation_to_json(const SparseAngularRepresentation& rep) {
    json masses = json::array();
    for (const auto& [subset, mass] : rep.sorted_entries())
        masses.push_back({{"subset", subset.indices()}, {"mass", mass}});
    return json{{"n", rep.n},         {"k", rep.k},
                {"epsilon", rep.epsilon}, {"p", rep.p},
                {"thresholded", rep.thresholded}, {"masses", std::move(masses)}};
}

SparseAngularRepresentation representation_from_json(const json& j, std::size_t d) {
    SparseAngularRepresentation rep;
    rep.n = j.at("n").get<std::size_t>();
    rep.k = j.at("k").get<std::size_t>();
    rep.epsilon = j.at("epsilon").get<double>();
    rep.p = j.at("p").get<double>();
    rep.thresholded = j.value("thresholded", true);
    for (const auto& entry : j.at("masses")) {
        auto subset = FeatureSubset::from_indices(entry.at("subset").get<std::vector<int>>(), d);
        double mass = entry.at("mass").get<double>();
        if (!(mass > 0.0)) throw ParseError("masses must be strictly positive");
        rep.masses[subset.bits] = mass;
    }
    return rep;
}

constexpr int kModelVersion = 1;

}  // namespace

void DamexModel::save(std::ostream& out) const {
    json params{{"k", k_},
                {"k_mode", params_.k ? "fixed" : "auto"},
                {"epsilon", params_.epsilon},
                {"p", params_.p},
                {"membership_mode", to_string(params_.membership)},
                {"threshold_refinement", params_.threshold_refinement}};
    json doc{{"version", kModelVersion},
             {"n_train", ranker_.train_size()},
             {"params", std::move(params)},
             {"ranker", json{{"sorted_columns", ranker_.sorted_columns()}}},
             {"representation", representation_to_json(representation_)}};
    out << doc.dump(2) << '\n';
}

void DamexModel::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot open " + path + " for writing");
    save(out);
    if (!out) throw InvalidInputError("failed writing " + path);
}

DamexModel DamexModel::load(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model parse error: ") + e.what());
    }
    try {
        int version = doc.at("version").get<int>();
        if (version != kModelVersion)
            throw ParseError("unsupported model version " + std::to_string(version) +
                             " (expected " + std::to_string(kModelVersion) + ")");
        const auto& jp = doc.at("params");
        DamexParams params;
        params.k = jp.at("k").get<std::size_t>();
        params.epsilon = jp.at("epsilon").get<double>();
        params.p = jp.at("p").get<double>();
        params.membership = membership_mode_from_string(jp.at("membership_mode").get<std::string>());
        params.threshold_refinement = jp.value("threshold_refinement", false);
        auto ranker = MarginalRanker::from_sorted_columns(
            doc.at("ranker").at("sorted_columns").get<std::vector<std::vector<double>>>());
        auto rep = representation_from_json(doc.at("representation"), ranker.dimension());
        std::size_t n_train = doc.at("n_train").get<std::size_t>();
        if (n_train != ranker.train_size())
            throw ParseError("n_train does not match the stored columns");
        return DamexModel(std::move(ranker), std::move(rep), params, *params.k);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
}

DamexModel DamexModel::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    return load(in);
}

namespace reference {

std::vector<ScoreRecord> score_batch(const DamexModel& model, const FeatureMatrix& data) {
    std::vector<ScoreRecord> out(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        out[i] = model.score(data.row(i));
        out[i].index = i;
    }
    return out;
}

}  // namespace reference

}  // namespace extremis
