#include "increloc/hypothesis.hpp"

#include <algorithm>

namespace increloc {

namespace {

struct Verified {
    Pose2 psi;
    double residual;
    std::size_t order;
};

}  // namespace

std::vector<Hypothesis> generate_hypotheses(const LocalMap& lm, const GlobalMap& gm, FeatureId new_id,
                                            const GenerationParams& params, HypothesisId next_id,
                                            std::uint32_t viewpoint, Rng& rng) {
    std::vector<Hypothesis> out;
    if (gm.empty()) return out;

    for (std::size_t attempt = 0; attempt < params.max_triples; ++attempt) {
        const auto triple = covisible_triple(lm, new_id, rng);
        if (!triple) return out;

        const std::array<Point2, 3> f{lm.feature((*triple)[0]).pos, lm.feature((*triple)[1]).pos,
                                      lm.feature((*triple)[2]).pos};
        // Widest pair (a, b); the leftover feature c verifies.
        int a = 0, b = 1, c = 2;
        double widest = squared_distance(f[0], f[1]);
        if (const double d = squared_distance(f[0], f[2]); d > widest) { widest = d; a = 0; b = 2; c = 1; }
        if (const double d = squared_distance(f[1], f[2]); d > widest) { widest = d; a = 1; b = 2; c = 0; }
        const double sep = std::sqrt(widest);
        if (sep < kMinPairSeparation) continue;

        std::vector<Verified> verified;
        const auto candidates = gm.congruent_pairs(sep, params.pair_tolerance, params.max_candidates, rng);
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const LandmarkPair& cand = candidates[k];
            const Pose2 psi = transform_from_two_correspondences(f[a], f[b], cand.first_pos, cand.second_pos);
            const auto hit = gm.nearest_landmark(apply(psi, f[c]));
            if (!hit || hit->dist > params.gate) continue;
            if (hit->id == cand.first || hit->id == cand.second) continue;
            verified.push_back({psi, hit->dist, k});
        }
        if (verified.empty()) continue;

        std::sort(verified.begin(), verified.end(), [](const Verified& x, const Verified& y) {
            return x.residual < y.residual || (x.residual == y.residual && x.order < y.order);
        });
        const std::size_t keep = std::min(verified.size(), params.max_new);
        for (std::size_t k = 0; k < keep; ++k) {
            Hypothesis h;
            h.id = next_id++;
            h.psi = verified[k].psi;
            h.born_at = viewpoint;
            h.residual = verified[k].residual;
            out.push_back(h);
        }
        return out;
    }
    return out;
}

bool score_pair(Hypothesis& h, Point2 o, const GlobalMap& gm, double gate) {
    ++h.q;
    const auto hit = gm.nearest_landmark(apply(h.psi, o));
    const bool inlier = hit && hit->dist <= gate;
    if (inlier) ++h.s;
    return inlier;
}

std::optional<std::size_t> best_hypothesis(std::span<const Hypothesis> hs, std::uint32_t q_min) {
    if (hs.empty()) return std::nullopt;

    // Exact ratio comparison: s1/q1 > s2/q2  <=>  s1*q2 > s2*q1.
    const auto prefer_ratio = [](const Hypothesis& x, const Hypothesis& y) {
        const std::uint64_t lhs = std::uint64_t{x.s} * y.q;
        const std::uint64_t rhs = std::uint64_t{y.s} * x.q;
        if (lhs != rhs) return lhs > rhs;
        if (x.q != y.q) return x.q > y.q;
        return x.id < y.id;
    };
    const auto prefer_score = [](const Hypothesis& x, const Hypothesis& y) {
        if (x.s != y.s) return x.s > y.s;
        if (x.q != y.q) return x.q > y.q;
        return x.id < y.id;
    };

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (hs[i].q < q_min || hs[i].q == 0) continue;
        if (!best || prefer_ratio(hs[i], hs[*best])) best = i;
    }
    if (best) return best;
    best = 0;
    for (std::size_t i = 1; i < hs.size(); ++i) {
        if (prefer_score(hs[i], hs[*best])) best = i;
    }
    return best;
}

}  // namespace increloc
