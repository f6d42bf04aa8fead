#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "increloc/environment.hpp"
#include "increloc/global_map.hpp"
#include "increloc/hypothesis.hpp"
#include "increloc/local_mapper.hpp"
#include "increloc/preemption.hpp"
#include "increloc/rng.hpp"

namespace increloc {

struct SchemeConfig {
    Scheme scheme = Scheme::hybrid;
    PreemptionParams preemption;
    GenerationParams generation;
    std::uint32_t q_min = 10;
};

struct Estimate {
    Pose2 global_pose;
    double confidence = 0.0;  ///< s/q of the selected hypothesis
    HypothesisId hypothesis = 0;
};

struct StepReport {
    std::uint32_t viewpoint = 0;
    std::size_t new_features = 0;
    std::size_t new_hypotheses = 0;
    ViewpointStats pairs;
};

/// Online relocation for one trial: the local map is updated from the raw
/// measurements, hypotheses are generated for every new feature, and the
/// configured order rule spends a fixed pair budget on scoring.
///
/// Hypotheses are stored by id and never removed; the local map never sees
/// scoring results.
class Relocalizer {
public:
    Relocalizer(const GlobalMap& gm, SchemeConfig config, SensorParams sensor, std::uint64_t seed);

    StepReport step(const OdometryMeasurement& odo, const std::vector<Observation>& obs);

    std::optional<Estimate> estimate() const;

    const LocalMap& local_map() const { return lm_; }
    const std::vector<Hypothesis>& hypotheses() const { return hypotheses_; }
    const Scheduler& scheduler() const { return scheduler_; }
    const SchemeConfig& config() const { return config_; }
    std::uint32_t viewpoint() const { return viewpoint_; }

private:
    const GlobalMap* gm_;
    SchemeConfig config_;
    LocalMap lm_;
    std::vector<Hypothesis> hypotheses_;
    Scheduler scheduler_;
    Rng generation_rng_;
    Rng order_rng_;
    std::uint32_t viewpoint_ = 0;
};

}  // namespace increloc
