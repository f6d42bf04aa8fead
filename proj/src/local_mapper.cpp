#include "increloc/local_mapper.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace increloc {

namespace {

void insert_sorted(std::vector<FeatureId>& v, FeatureId x) {
    const auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

LocalMap::LocalMap(SensorParams sensor)
    : sensor_(sensor), index_(Rect{{-16.0, -16.0}, {16.0, 16.0}}) {}

namespace {

void extend(Rect& r, Point2 p, bool first) {
    if (first) {
        r = Rect{p, p};
        return;
    }
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
}

}  // namespace

void LocalMap::update(const OdometryMeasurement& odo, const std::vector<Observation>& obs) {
    new_ids_.clear();
    observed_ids_.clear();
    robot_pose_ = advance(robot_pose_, odo);
    ++viewpoints_;

    const double var_r = sensor_.sigma_range * sensor_.sigma_range;
    const double var_b = sensor_.sigma_bearing * sensor_.sigma_bearing;
    for (const Observation& o : obs) {
        const Point2 body{o.range * std::cos(o.bearing), o.range * std::sin(o.bearing)};
        const Point2 p = apply(robot_pose_, body);
        // Inverse trace of the linearised range/bearing covariance; the floor
        // keeps noise-free sensing well defined.
        const double w = 1.0 / (var_r + o.range * o.range * var_b + 1e-12);

        const auto known = by_track_.find(o.track_id);
        if (known == by_track_.end()) {
            const auto id = static_cast<FeatureId>(features_.size());
            extend(extent_, p, features_.empty());
            features_.push_back(Feature{id, o.track_id, p, 1, w, static_cast<std::uint32_t>(viewpoints_)});
            covis_.emplace_back();
            by_track_.emplace(o.track_id, id);
            index_.insert(p, id);
            new_ids_.push_back(id);
            observed_ids_.push_back(id);
            continue;
        }
        Feature& f = features_[known->second];
        const Point2 old = f.pos;
        const double total = f.weight_sum + w;
        f.pos = (f.weight_sum / total) * f.pos + (w / total) * p;
        f.weight_sum = total;
        ++f.obs_count;
        if (!(f.pos == old)) {
            index_.update(f.id, old, f.pos);
            extend(extent_, f.pos, false);
        }
        observed_ids_.push_back(f.id);
    }

    for (std::size_t i = 0; i < observed_ids_.size(); ++i) {
        for (std::size_t j = i + 1; j < observed_ids_.size(); ++j) {
            insert_sorted(covis_[observed_ids_[i]], observed_ids_[j]);
            insert_sorted(covis_[observed_ids_[j]], observed_ids_[i]);
        }
    }
}

std::optional<FeatureId> LocalMap::feature_for_track(std::uint32_t track_id) const {
    const auto it = by_track_.find(track_id);
    if (it == by_track_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::array<FeatureId, 3>> covisible_triple(const LocalMap& lm, FeatureId anchor, Rng& rng) {
    const auto& partners = lm.covisible(anchor);
    if (partners.size() < 2) return std::nullopt;
    const std::size_t i = uniform_index(rng, partners.size());
    std::size_t j = uniform_index(rng, partners.size() - 1);
    if (j >= i) ++j;
    return std::array<FeatureId, 3>{anchor, partners[i], partners[j]};
}

void write_local_map(std::ostream& out, const LocalMap& lm) {
    const auto precision = out.precision();
    out << std::setprecision(17);
    out << "# increloc-world v1\n";
    out << "# local map, viewpoint " << lm.viewpoints() << ", robot " << lm.robot_pose().translation().x
        << ' ' << lm.robot_pose().translation().y << ' ' << lm.robot_pose().theta() << '\n';
    out << "landmarks " << lm.size() << '\n';
    for (const Feature& f : lm.features()) {
        out << f.id << ' ' << f.pos.x << ' ' << f.pos.y << ' ' << f.pos.x << ' ' << f.pos.y << '\n';
    }
    out.precision(precision);
}

}  // namespace increloc
