#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "increloc/environment.hpp"
#include "increloc/geometry.hpp"
#include "increloc/quadtree.hpp"
#include "increloc/rng.hpp"

namespace increloc {

using FeatureId = std::uint32_t;

struct Feature {
    FeatureId id = 0;
    std::uint32_t track_id = 0;
    Point2 pos;
    std::uint32_t obs_count = 0;
    double weight_sum = 0.0;
    std::uint32_t first_seen = 0;  ///< viewpoint index of the first observation
};

/// Incrementally built feature map in the robot's own frame.
///
/// The robot pose is dead-reckoned from odometry. Each feature position is
/// the inverse-trace weighted mean of its back-projected observations, with
/// data association taken from the sensor track ids. Feature ids are dense,
/// assigned in order of first sight and never reused.
class LocalMap {
public:
    explicit LocalMap(SensorParams sensor = {});

    void update(const OdometryMeasurement& odo, const std::vector<Observation>& obs);

    const Pose2& robot_pose() const { return robot_pose_; }
    const std::vector<Feature>& features() const { return features_; }
    const Feature& feature(FeatureId id) const { return features_.at(id); }
    std::size_t size() const { return features_.size(); }
    bool empty() const { return features_.empty(); }

    /// Features first seen in the most recent update.
    const std::vector<FeatureId>& new_feature_ids() const { return new_ids_; }
    /// Features observed in the most recent update.
    const std::vector<FeatureId>& observed_ids() const { return observed_ids_; }

    /// Sorted ids sharing at least one viewpoint with `id` (excluding itself).
    const std::vector<FeatureId>& covisible(FeatureId id) const { return covis_.at(id); }

    std::optional<FeatureId> feature_for_track(std::uint32_t track_id) const;

    /// Nearest feature to a local-frame location, via the feature quadtree.
    std::optional<QuadTree::Hit> nearest_feature(Point2 p) const { return index_.nearest(p); }

    std::size_t viewpoints() const { return viewpoints_; }

    /// Box containing every position any feature has taken; empty map gives a
    /// zero box at the origin.
    const Rect& extent() const { return extent_; }

private:
    SensorParams sensor_;
    Pose2 robot_pose_{};
    std::vector<Feature> features_;
    std::vector<std::vector<FeatureId>> covis_;
    std::unordered_map<std::uint32_t, FeatureId> by_track_;
    std::vector<FeatureId> new_ids_;
    std::vector<FeatureId> observed_ids_;
    QuadTree index_;
    Rect extent_{};
    std::size_t viewpoints_ = 0;
};

/// The anchor plus two distinct partners drawn uniformly from its
/// covisibility set; nullopt when it has fewer than two partners.
std::optional<std::array<FeatureId, 3>> covisible_triple(const LocalMap& lm, FeatureId anchor, Rng& rng);

/// Dumps features (local frame) in the world text format, prior == true.
void write_local_map(std::ostream& out, const LocalMap& lm);

}  // namespace increloc
