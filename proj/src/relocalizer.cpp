#include "increloc/relocalizer.hpp"

#include <string>

namespace increloc {

Relocalizer::Relocalizer(const GlobalMap& gm, SchemeConfig config, SensorParams sensor, std::uint64_t seed)
    : gm_(&gm),
      config_(config),
      lm_(sensor),
      scheduler_(config.scheme, config.preemption),
      // Generation does not depend on scores, so every scheme sees the same
      // hypotheses for a given seed.
      generation_rng_(make_stream(seed, "hypotheses")),
      order_rng_(make_stream(seed, "order/" + std::string(to_string(config.scheme)))) {}

StepReport Relocalizer::step(const OdometryMeasurement& odo, const std::vector<Observation>& obs) {
    StepReport report;
    report.viewpoint = ++viewpoint_;
    lm_.update(odo, obs);

    const auto& fresh = lm_.new_feature_ids();
    report.new_features = fresh.size();
    std::vector<HypothesisId> born;
    for (FeatureId f : fresh) {
        auto hs = generate_hypotheses(lm_, *gm_, f, config_.generation,
                                      static_cast<HypothesisId>(hypotheses_.size()), viewpoint_,
                                      generation_rng_);
        for (Hypothesis& h : hs) {
            born.push_back(h.id);
            hypotheses_.push_back(h);
        }
    }
    report.new_hypotheses = born.size();

    for (Hypothesis& h : hypotheses_) {
        if (!h.retired && should_retire(h, config_.preemption)) h.retired = true;
    }

    scheduler_.begin_viewpoint(fresh, born, order_rng_);
    if (!lm_.empty() && !hypotheses_.empty()) {
        const double gate = config_.generation.gate;
        for (std::size_t k = 0; k < config_.preemption.budget; ++k) {
            const SchedulerContext ctx{lm_, *gm_, hypotheses_, config_.q_min};
            const auto pair = scheduler_.next_pair(ctx, order_rng_);
            if (pair) score_pair(hypotheses_[pair->hypothesis], lm_.feature(pair->feature).pos, *gm_, gate);
        }
    }
    report.pairs = scheduler_.stats();
    return report;
}

std::optional<Estimate> Relocalizer::estimate() const {
    const auto best = best_hypothesis(hypotheses_, config_.q_min);
    if (!best) return std::nullopt;
    const Hypothesis& h = hypotheses_[*best];
    return Estimate{compose(h.psi, lm_.robot_pose()), h.ratio(), h.id};
}

}  // namespace increloc
