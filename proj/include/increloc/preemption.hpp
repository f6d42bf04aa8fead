#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "increloc/global_map.hpp"
#include "increloc/hypothesis.hpp"
#include "increloc/local_mapper.hpp"
#include "increloc/rng.hpp"

namespace increloc {

enum class Scheme { depth, breadth, hybrid };

std::string_view to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);

struct PreemptionParams {
    std::size_t budget = 1000;       ///< pairs consumed per viewpoint (N_p)
    int groups = 10;                 ///< preference groups (k_g)
    double exponent = 1.0;           ///< m in the group weight 2^(m i)
    double priming_fraction = 0.2;   ///< share of the budget reserved for unscored items
    int resample_retries = 3;        ///< feature resamples before a duplicate pair is skipped
    /// Draw feature-selection locations only where the mapped region overlaps
    /// the hypothesis' footprint of the local map.
    bool clip_to_footprint = true;
    /// When positive, a location whose nearest feature is farther than this is
    /// redrawn (up to `selection_attempts` times).
    double selection_radius = 0.0;
    int selection_attempts = 8;
    /// Breadth-first feature order: newest arrivals first, or a fresh random
    /// permutation of the unfinished features at every viewpoint.
    bool breadth_newest_first = false;
    bool retirement = true;
    std::uint32_t retire_min_q = 50;
    double retire_max_ratio = 0.2;
};

/// Preference group of a hypothesis: floor(k_g * s / q), s == q maps to
/// k_g - 1, and never-scored hypotheses go to group 0.
int classify(const Hypothesis& h, int k_g);
int classify_ratio(double r, int k_g);

/// Whether h is frozen out of group sampling under `p`.
bool should_retire(const Hypothesis& h, const PreemptionParams& p);

struct Allocation {
    std::vector<std::size_t> counts;
    /// False when the budget is smaller than the number of nonempty groups;
    /// counts then follow n(i) 2^(m i) by largest remainders and some
    /// nonempty groups receive nothing.
    bool feasible = true;
};

/// Splits `budget` draws over groups as ceil(alpha n(i) 2^(m i)), with alpha
/// found by bisection so the counts sum to exactly `budget`. Any surplus from
/// the ceilings is taken off the largest allocation.
Allocation allocate(std::span<const std::size_t> group_sizes, std::size_t budget, double exponent);

struct GroupTable {
    std::vector<std::vector<HypothesisId>> members;
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> allocation;
};

/// Groups every non-retired hypothesis.
GroupTable build_groups(std::span<const Hypothesis> hs, int k_g);

struct ScoringPair {
    FeatureId feature;
    HypothesisId hypothesis;
    friend bool operator==(const ScoringPair&, const ScoringPair&) = default;
};

struct SchedulerContext {
    const LocalMap& lm;
    const GlobalMap& gm;
    std::span<const Hypothesis> hypotheses;
    std::uint32_t q_min = 10;
};

struct ViewpointStats {
    std::size_t consumed = 0;
    std::size_t scored = 0;
    std::size_t skipped = 0;
    std::size_t primed = 0;
    std::size_t max_pair_memory = 0;
    std::vector<std::size_t> group_sizes;
    std::vector<std::size_t> allocation;
};

/// Order rule state for one trial.
///
/// Each viewpoint starts with begin_viewpoint(); every next_pair() call then
/// consumes one unit of budget and returns the pair to score, or nullopt when
/// the unit is spent without scoring. Feature and hypothesis ids are dense.
class Scheduler {
public:
    Scheduler(Scheme scheme, PreemptionParams params);

    Scheme scheme() const { return scheme_; }
    const PreemptionParams& params() const { return params_; }

    void begin_viewpoint(std::span<const FeatureId> new_features,
                         std::span<const HypothesisId> new_hypotheses, Rng& rng);

    std::optional<ScoringPair> next_pair(const SchedulerContext& ctx, Rng& rng);

    /// Arrived but never scored (S_o / S_h), in current order.
    std::vector<FeatureId> pending_features() const;
    std::vector<HypothesisId> pending_hypotheses() const;

    std::size_t pair_memory_size() const { return pair_memory_.size(); }
    const ViewpointStats& stats() const { return stats_; }

private:
    std::optional<ScoringPair> next_pair_depth();
    std::optional<ScoringPair> next_pair_breadth();
    std::optional<ScoringPair> next_pair_hybrid(const SchedulerContext& ctx, Rng& rng);

    std::optional<FeatureId> select_feature(const SchedulerContext& ctx, HypothesisId h, Rng& rng) const;
    bool remembered(ScoringPair p) const;
    std::optional<ScoringPair> emit(ScoringPair p);
    void start_allocation(const SchedulerContext& ctx, Rng& rng);

    Scheme scheme_;
    PreemptionParams params_;

    std::vector<FeatureId> s_o_;
    std::vector<HypothesisId> s_h_;
    std::vector<char> in_s_o_;
    std::vector<char> in_s_h_;
    std::unordered_set<std::uint64_t> pair_memory_;
    ViewpointStats stats_;

    // depth: current hypothesis sweeps feature_seq_ from its cursor.
    std::vector<FeatureId> feature_seq_;
    std::vector<std::uint32_t> hyp_cursor_;
    std::optional<HypothesisId> current_h_;
    std::size_t s_h_scan_ = 0;
    std::deque<HypothesisId> depth_queue_;
    std::deque<HypothesisId> depth_done_;

    // breadth: current feature sweeps hyp_seq_ from its cursor.
    std::vector<HypothesisId> hyp_seq_;
    std::vector<std::uint32_t> feat_cursor_;
    std::optional<FeatureId> current_f_;
    std::deque<FeatureId> breadth_queue_;
    std::vector<FeatureId> breadth_done_;

    // hybrid
    struct Priming {
        bool is_hypothesis;
        std::uint32_t id;
    };
    std::vector<Priming> priming_;
    std::size_t priming_pos_ = 0;
    std::optional<HypothesisId> priming_best_;
    bool priming_best_ready_ = false;
    bool allocation_ready_ = false;
    std::vector<HypothesisId> draws_;
    std::size_t draw_pos_ = 0;
};

}  // namespace increloc
