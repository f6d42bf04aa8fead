#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "increloc/geometry.hpp"
#include "increloc/global_map.hpp"
#include "increloc/local_mapper.hpp"
#include "increloc/rng.hpp"

namespace increloc {

using HypothesisId = std::uint32_t;

/// A candidate local-to-global transform and its scoring history.
struct Hypothesis {
    HypothesisId id = 0;
    Pose2 psi;
    std::uint32_t s = 0;  ///< inlier count
    std::uint32_t q = 0;  ///< times scored
    std::uint32_t born_at = 0;
    /// Distance of the verification feature to its landmark at generation.
    double residual = 0.0;
    bool retired = false;

    double ratio() const { return q == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(q); }
};

struct GenerationParams {
    std::size_t max_new = 8;       ///< hypotheses kept per new feature
    std::size_t max_triples = 4;   ///< covisible triples tried before giving up
    double gate = 0.5;             ///< verification gate, meters
    double pair_tolerance = 0.05;  ///< congruent pair separation tolerance, meters
    std::size_t max_candidates = 4096;
};

/// Hypotheses for one newly arrived feature.
///
/// A covisible triple anchored at `new_id` is drawn; its widest pair is
/// matched against congruent landmark pairs and the remaining feature must
/// land within the gate of a third landmark. Verified transforms are ranked
/// by that residual and the best `max_new` are returned with fresh ids
/// starting at `next_id`. Further triples are tried only when none verify.
std::vector<Hypothesis> generate_hypotheses(const LocalMap& lm, const GlobalMap& gm, FeatureId new_id,
                                            const GenerationParams& params, HypothesisId next_id,
                                            std::uint32_t viewpoint, Rng& rng);

/// Scores feature `o` (local frame) against h. q always increments; s
/// increments iff the transformed feature is within `gate` of a landmark.
bool score_pair(Hypothesis& h, Point2 o, const GlobalMap& gm, double gate);

/// Argmax of s/q over hypotheses with q >= q_min; ties go to larger q, then
/// smaller id. Falls back to argmax s when no hypothesis reaches q_min.
/// Returns an index into `hs`.
std::optional<std::size_t> best_hypothesis(std::span<const Hypothesis> hs, std::uint32_t q_min);

}  // namespace increloc
