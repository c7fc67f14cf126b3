#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "extremis/rank_transform.hpp"
#include "extremis/subcone.hpp"
#include "extremis/types.hpp"

namespace extremis {

enum class MembershipMode {
    SelfScaledCone,       // subset of x resolved at the point's own radius
    FixedScaleRectangle,  // subset resolved at the training scale n/k
};

std::string to_string(MembershipMode mode);
MembershipMode membership_mode_from_string(const std::string& s);

struct DamexParams {
    std::optional<std::size_t> k;  // empty = floor(sqrt(n)) at fit time
    double epsilon = 0.01;
    double p = 0.1;
    MembershipMode membership = MembershipMode::SelfScaledCone;
    // Re-apply the mass threshold with a re-averaged mean until stable.
    // Off by default; the support-recovery experiment turns it on.
    bool threshold_refinement = false;

    std::size_t resolve_k(std::size_t n) const;
};

struct ScoreRecord {
    std::size_t index = 0;
    double score = 0.0;
    double radius = 0.0;
    FeatureSubset subset{};  // empty when a rectangle-mode point is non-extreme
};

/// Fitted model: marginal CDFs + thresholded sparse mass representation.
/// Immutable after fit; scoring is read-only.
class DamexModel {
  public:
    DamexModel() = default;
    DamexModel(MarginalRanker ranker, SparseAngularRepresentation rep, DamexParams params,
               std::size_t resolved_k);

    const MarginalRanker& ranker() const { return ranker_; }
    const SparseAngularRepresentation& representation() const { return representation_; }
    const DamexParams& params() const { return params_; }
    std::size_t train_size() const { return ranker_.train_size(); }
    std::size_t dimension() const { return ranker_.dimension(); }
    std::size_t k() const { return k_; }

    ScoreRecord score(std::span<const double> x) const;
    std::vector<ScoreRecord> score_batch(const FeatureMatrix& data) const;
    // Row-major flat variant; accepts zero rows.
    std::vector<ScoreRecord> score_batch(std::span<const double> values, std::size_t rows) const;

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static DamexModel load(std::istream& in);
    static DamexModel load_file(const std::string& path);

  private:
    MarginalRanker ranker_;
    SparseAngularRepresentation representation_;
    DamexParams params_;
    std::size_t k_ = 0;
};

DamexModel fit(const FeatureMatrix& data, const DamexParams& params,
               std::vector<std::string>* warnings = nullptr);

namespace reference {
std::vector<ScoreRecord> score_batch(const DamexModel& model, const FeatureMatrix& data);
}  // namespace reference

}  // namespace extremis
