#include "increloc/preemption.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace increloc {

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::depth: return "depth";
        case Scheme::breadth: return "breadth";
        case Scheme::hybrid: return "hybrid";
    }
    return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
    if (name == "depth") return Scheme::depth;
    if (name == "breadth") return Scheme::breadth;
    if (name == "hybrid") return Scheme::hybrid;
    return std::nullopt;
}

int classify(const Hypothesis& h, int k_g) {
    if (h.q == 0) return 0;
    if (h.s >= h.q) return k_g - 1;
    return static_cast<int>((std::uint64_t{h.s} * static_cast<std::uint64_t>(k_g)) / h.q);
}

int classify_ratio(double r, int k_g) {
    if (r >= 1.0) return k_g - 1;
    if (!(r > 0.0)) return 0;
    return std::min(k_g - 1, static_cast<int>(std::floor(static_cast<double>(k_g) * r)));
}

bool should_retire(const Hypothesis& h, const PreemptionParams& p) {
    return p.retirement && h.q >= p.retire_min_q && h.ratio() < p.retire_max_ratio;
}

namespace {

std::size_t ceil_sum(const std::vector<double>& w, double alpha) {
    std::size_t total = 0;
    for (double x : w) {
        if (x > 0.0) total += static_cast<std::size_t>(std::ceil(alpha * x));
    }
    return total;
}

/// Proportional split by largest remainders; used when not every nonempty
/// group can get a draw.
std::vector<std::size_t> largest_remainders(const std::vector<double>& w, std::size_t budget) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<std::size_t> counts(w.size(), 0);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double exact = static_cast<double>(budget) * w[i] / total;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        used += counts[i];
        rem.emplace_back(exact - std::floor(exact), i);
    }
    // Larger remainder first; higher group wins ties.
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second > b.second);
    });
    for (std::size_t k = 0; used < budget && k < rem.size(); ++k, ++used) ++counts[rem[k].second];
    return counts;
}

}  // namespace

Allocation allocate(std::span<const std::size_t> group_sizes, std::size_t budget, double exponent) {
    Allocation result;
    result.counts.assign(group_sizes.size(), 0);
    std::vector<double> w(group_sizes.size(), 0.0);
    std::size_t nonempty = 0;
    for (std::size_t i = 0; i < group_sizes.size(); ++i) {
        w[i] = static_cast<double>(group_sizes[i]) * std::exp2(exponent * static_cast<double>(i));
        if (group_sizes[i] > 0) ++nonempty;
    }
    if (nonempty == 0 || budget == 0) {
        result.feasible = budget == 0 || nonempty > 0;
        return result;
    }
    if (budget < nonempty) {
        result.feasible = false;
        result.counts = largest_remainders(w, budget);
        return result;
    }

    // Smallest alpha whose ceiling sum reaches the budget. At alpha = budget
    // every nonempty group alone contributes >= budget.
    double lo = 0.0;
    double hi = static_cast<double>(budget);
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ceil_sum(w, mid) >= budget) hi = mid; else lo = mid;
    }
    // Evaluate just right of the threshold so groups sharing a breakpoint all
    // step up together instead of depending on rounding of hi * w[i].
    const double alpha = hi * (1.0 + 1e-12);
    std::size_t total = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] > 0.0) result.counts[i] = static_cast<std::size_t>(std::ceil(alpha * w[i]));
        total += result.counts[i];
    }
    // Trim the ceiling surplus from the largest allocation (highest group on ties).
    while (total > budget) {
        std::size_t big = 0;
        for (std::size_t i = 1; i < result.counts.size(); ++i) {
            if (result.counts[i] >= result.counts[big]) big = i;
        }
        const std::size_t take = std::min(total - budget, result.counts[big] - 1);
        result.counts[big] -= take;
        total -= take;
        if (take == 0) break;
    }
    return result;
}

GroupTable build_groups(std::span<const Hypothesis> hs, int k_g) {
    GroupTable t;
    t.members.assign(static_cast<std::size_t>(k_g), {});
    for (const Hypothesis& h : hs) {
        if (h.retired) continue;
        t.members[static_cast<std::size_t>(classify(h, k_g))].push_back(h.id);
    }
    for (const auto& g : t.members) t.sizes.push_back(g.size());
    return t;
}

namespace {

std::uint64_t pair_key(ScoringPair p) { return (std::uint64_t{p.feature} << 32) | p.hypothesis; }

template <typename T>
void grow_flags(std::vector<T>& v, std::size_t id) {
    if (v.size() <= id) v.resize(id + 1, T{});
}

}  // namespace

Scheduler::Scheduler(Scheme scheme, PreemptionParams params) : scheme_(scheme), params_(params) {}

std::vector<FeatureId> Scheduler::pending_features() const {
    std::vector<FeatureId> out;
    for (auto id : s_o_) if (in_s_o_[id]) out.push_back(id);
    return out;
}

std::vector<HypothesisId> Scheduler::pending_hypotheses() const {
    std::vector<HypothesisId> out;
    for (auto id : s_h_) if (in_s_h_[id]) out.push_back(id);
    return out;
}

void Scheduler::begin_viewpoint(std::span<const FeatureId> new_features,
                                std::span<const HypothesisId> new_hypotheses, Rng& rng) {
    pair_memory_.clear();
    stats_ = ViewpointStats{};

    // S_o / S_h: drop eliminated members, add arrivals, permute.
    std::erase_if(s_o_, [&](FeatureId id) { return !in_s_o_[id]; });
    std::erase_if(s_h_, [&](HypothesisId id) { return !in_s_h_[id]; });
    for (auto id : new_features) {
        grow_flags(in_s_o_, id);
        if (!in_s_o_[id]) { in_s_o_[id] = 1; s_o_.push_back(id); }
    }
    std::shuffle(s_o_.begin(), s_o_.end(), rng);
    for (auto id : new_hypotheses) {
        grow_flags(in_s_h_, id);
        if (!in_s_h_[id]) { in_s_h_[id] = 1; s_h_.push_back(id); }
    }
    std::shuffle(s_h_.begin(), s_h_.end(), rng);

    std::vector<FeatureId> fresh_f(new_features.begin(), new_features.end());
    std::shuffle(fresh_f.begin(), fresh_f.end(), rng);
    std::vector<HypothesisId> fresh_h(new_hypotheses.begin(), new_hypotheses.end());
    std::shuffle(fresh_h.begin(), fresh_h.end(), rng);

    switch (scheme_) {
        case Scheme::depth: {
            feature_seq_.insert(feature_seq_.end(), fresh_f.begin(), fresh_f.end());
            for (auto id : fresh_h) grow_flags(hyp_cursor_, id);
            // Unscored hypotheses come from S_h; finished ones rejoin the
            // revisit queue once there are features they have not seen.
            s_h_scan_ = 0;
            if (!fresh_f.empty()) {
                for (auto id : depth_done_) depth_queue_.push_back(id);
                depth_done_.clear();
            }
            break;
        }
        case Scheme::breadth: {
            hyp_seq_.insert(hyp_seq_.end(), fresh_h.begin(), fresh_h.end());
            for (auto id : fresh_f) grow_flags(feat_cursor_, id);
            // Newest features first: this viewpoint's arrivals, then the
            // older queue, then finished features that have unseen hypotheses.
            std::deque<FeatureId> queue;
            if (params_.breadth_newest_first) {
                queue.assign(fresh_f.begin(), fresh_f.end());
                for (auto id : breadth_queue_) queue.push_back(id);
                if (!fresh_h.empty()) {
                    std::sort(breadth_done_.begin(), breadth_done_.end(), std::greater<>());
                    for (auto id : breadth_done_) queue.push_back(id);
                    breadth_done_.clear();
                }
            } else {
                std::vector<FeatureId> open(breadth_queue_.begin(), breadth_queue_.end());
                open.insert(open.end(), fresh_f.begin(), fresh_f.end());
                if (!fresh_h.empty()) {
                    open.insert(open.end(), breadth_done_.begin(), breadth_done_.end());
                    breadth_done_.clear();
                }
                std::shuffle(open.begin(), open.end(), rng);
                queue.assign(open.begin(), open.end());
            }
            breadth_queue_ = std::move(queue);
            break;
        }
        case Scheme::hybrid: {
            priming_.clear();
            priming_pos_ = 0;
            const auto cap = static_cast<std::size_t>(params_.priming_fraction * static_cast<double>(params_.budget));
            for (auto id : s_h_) {
                if (priming_.size() >= cap) break;
                priming_.push_back({true, id});
            }
            for (auto id : s_o_) {
                if (priming_.size() >= cap) break;
                priming_.push_back({false, id});
            }
            priming_best_.reset();
            priming_best_ready_ = false;
            allocation_ready_ = false;
            draws_.clear();
            draw_pos_ = 0;
            break;
        }
    }
}

bool Scheduler::remembered(ScoringPair p) const { return pair_memory_.contains(pair_key(p)); }

std::optional<ScoringPair> Scheduler::emit(ScoringPair p) {
    pair_memory_.insert(pair_key(p));
    if (p.feature < in_s_o_.size()) in_s_o_[p.feature] = 0;
    if (p.hypothesis < in_s_h_.size()) in_s_h_[p.hypothesis] = 0;
    stats_.max_pair_memory = std::max(stats_.max_pair_memory, pair_memory_.size());
    return p;
}

std::optional<ScoringPair> Scheduler::next_pair(const SchedulerContext& ctx, Rng& rng) {
    ++stats_.consumed;
    std::optional<ScoringPair> p;
    if (!ctx.lm.empty() && !ctx.hypotheses.empty()) {
        switch (scheme_) {
            case Scheme::depth: p = next_pair_depth(); break;
            case Scheme::breadth: p = next_pair_breadth(); break;
            case Scheme::hybrid: p = next_pair_hybrid(ctx, rng); break;
        }
    }
    if (p) ++stats_.scored; else ++stats_.skipped;
    return p;
}

std::optional<ScoringPair> Scheduler::next_pair_depth() {
    while (true) {
        if (current_h_) {
            auto& cursor = hyp_cursor_[*current_h_];
            if (cursor < feature_seq_.size()) {
                const FeatureId f = feature_seq_[cursor++];
                return emit({f, *current_h_});
            }
            depth_done_.push_back(*current_h_);
            current_h_.reset();
        }
        std::optional<HypothesisId> next;
        while (s_h_scan_ < s_h_.size() && !next) {
            const HypothesisId id = s_h_[s_h_scan_++];
            if (in_s_h_[id]) next = id;
        }
        if (!next) {
            if (depth_queue_.empty()) return std::nullopt;
            next = depth_queue_.front();
            depth_queue_.pop_front();
        }
        if (hyp_cursor_[*next] < feature_seq_.size()) current_h_ = next;
        else depth_done_.push_back(*next);
    }
}

std::optional<ScoringPair> Scheduler::next_pair_breadth() {
    while (true) {
        if (current_f_) {
            auto& cursor = feat_cursor_[*current_f_];
            if (cursor < hyp_seq_.size()) {
                const HypothesisId h = hyp_seq_[cursor++];
                return emit({*current_f_, h});
            }
            breadth_done_.push_back(*current_f_);
            current_f_.reset();
        }
        if (breadth_queue_.empty()) return std::nullopt;
        const FeatureId next = breadth_queue_.front();
        breadth_queue_.pop_front();
        if (feat_cursor_[next] < hyp_seq_.size()) current_f_ = next;
        else breadth_done_.push_back(next);
    }
}

std::optional<FeatureId> Scheduler::select_feature(const SchedulerContext& ctx, HypothesisId h,
                                                   Rng& rng) const {
    const Pose2& psi = ctx.hypotheses[h].psi;
    const Pose2 to_local = inverse(psi);

    // Sampling area: the mapped region, clipped to the bounding box of the
    // local map as placed by this hypothesis when the two overlap.
    Rect area = ctx.gm.mapped_region();
    if (params_.clip_to_footprint) {
        const Rect& e = ctx.lm.extent();
        const std::array<Point2, 4> corners{apply(psi, e.min), apply(psi, {e.max.x, e.min.y}),
                                            apply(psi, e.max), apply(psi, {e.min.x, e.max.y})};
        Rect box{corners[0], corners[0]};
        for (const Point2& c : corners) {
            box.min.x = std::min(box.min.x, c.x);
            box.min.y = std::min(box.min.y, c.y);
            box.max.x = std::max(box.max.x, c.x);
            box.max.y = std::max(box.max.y, c.y);
        }
        const Rect clipped{{std::max(area.min.x, box.min.x), std::max(area.min.y, box.min.y)},
                           {std::min(area.max.x, box.max.x), std::min(area.max.y, box.max.y)}};
        if (!clipped.degenerate()) area = clipped;
    }

    const auto draw = [&]() -> std::optional<QuadTree::Hit> {
        std::optional<QuadTree::Hit> hit;
        const int attempts = params_.selection_radius > 0.0 ? std::max(1, params_.selection_attempts) : 1;
        for (int k = 0; k < attempts; ++k) {
            const Point2 l{uniform(rng, area.min.x, area.max.x), uniform(rng, area.min.y, area.max.y)};
            hit = ctx.lm.nearest_feature(apply(to_local, l));
            if (!hit || params_.selection_radius <= 0.0 || hit->dist <= params_.selection_radius) break;
        }
        return hit;
    };

    for (int attempt = 0; attempt <= params_.resample_retries; ++attempt) {
        const auto hit = draw();
        if (!hit) return std::nullopt;
        if (!remembered({hit->id, h})) return hit->id;
    }
    return std::nullopt;
}

void Scheduler::start_allocation(const SchedulerContext& ctx, Rng& rng) {
    allocation_ready_ = true;
    GroupTable table = build_groups(ctx.hypotheses, params_.groups);
    const std::size_t remaining = params_.budget > stats_.consumed - 1 ? params_.budget - (stats_.consumed - 1) : 0;
    const Allocation alloc = allocate(table.sizes, remaining, params_.exponent);
    stats_.group_sizes = table.sizes;
    stats_.allocation = alloc.counts;
    draws_.clear();
    for (std::size_t g = 0; g < table.members.size(); ++g) {
        const auto& members = table.members[g];
        for (std::size_t k = 0; k < alloc.counts[g] && !members.empty(); ++k) {
            draws_.push_back(members[uniform_index(rng, members.size())]);
        }
    }
    std::shuffle(draws_.begin(), draws_.end(), rng);
    draw_pos_ = 0;
}

std::optional<ScoringPair> Scheduler::next_pair_hybrid(const SchedulerContext& ctx, Rng& rng) {
    if (priming_pos_ < priming_.size()) {
        const Priming item = priming_[priming_pos_++];
        ++stats_.primed;
        if (item.is_hypothesis) {
            const auto f = select_feature(ctx, item.id, rng);
            if (!f) return std::nullopt;
            return emit({*f, item.id});
        }
        if (!priming_best_ready_) {
            priming_best_ready_ = true;
            if (const auto b = best_hypothesis(ctx.hypotheses, ctx.q_min)) {
                priming_best_ = ctx.hypotheses[*b].id;
            }
        }
        if (!priming_best_ || remembered({item.id, *priming_best_})) return std::nullopt;
        return emit({item.id, *priming_best_});
    }
    if (!allocation_ready_) start_allocation(ctx, rng);
    if (draw_pos_ >= draws_.size()) return std::nullopt;
    const HypothesisId h = draws_[draw_pos_++];
    const auto f = select_feature(ctx, h, rng);
    if (!f) return std::nullopt;
    return emit({*f, h});
}

}  // namespace increloc
