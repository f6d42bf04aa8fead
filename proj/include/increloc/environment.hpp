#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "increloc/geometry.hpp"
#include "increloc/quadtree.hpp"
#include "increloc/rng.hpp"

namespace increloc {

class InvalidParams : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Landmark {
    std::uint32_t id = 0;
    Point2 pos;
    friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct WorldParams {
    Rect bounds{{-400.0, -100.0}, {400.0, 100.0}};
    Rect mapped_region{{-400.0, -20.0}, {400.0, 20.0}};
    std::int64_t landmark_count = 20000;
    double change_ratio = 0.0;

    void validate() const;
};

struct SensorParams {
    double max_range = 10.0;
    double sigma_range = 0.01;
    double sigma_bearing = 0.5 * std::numbers::pi / 180.0;
};

struct MotionParams {
    /// Odometry noise standard deviation as a fraction of the commanded magnitude.
    double sigma_fraction = 0.01;
};

struct Observation {
    std::uint32_t track_id = 0;
    double range = 0.0;
    double bearing = 0.0;
};

struct MotionCommand {
    double d_trans = 0.0;
    double d_rot = 0.0;
    friend bool operator==(const MotionCommand&, const MotionCommand&) = default;
};

using OdometryMeasurement = MotionCommand;

/// Ground truth after landmark changes plus the pre-change snapshot.
///
/// Landmarks keep their id when relocated, so `landmarks_true[i].id ==
/// landmarks_prior[i].id` for every i.
class World {
public:
    World() = default;
    World(Rect bounds, Rect mapped_region, double change_ratio, std::uint64_t seed,
          std::vector<Landmark> prior, std::vector<Landmark> truth);

    const Rect& bounds() const { return bounds_; }
    const Rect& mapped_region() const { return mapped_region_; }
    double change_ratio() const { return change_ratio_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Landmark>& landmarks_prior() const { return prior_; }
    const std::vector<Landmark>& landmarks_true() const { return truth_; }

    std::size_t moved_count() const;

    /// Indices into landmarks_true() within `radius` of `center`, ascending.
    std::vector<std::size_t> true_landmarks_within(Point2 center, double radius) const;

    friend bool operator==(const World& a, const World& b) {
        return a.bounds_ == b.bounds_ && a.mapped_region_ == b.mapped_region_ &&
               a.change_ratio_ == b.change_ratio_ && a.seed_ == b.seed_ && a.prior_ == b.prior_ &&
               a.truth_ == b.truth_;
    }

private:
    void build_grid();

    Rect bounds_{};
    Rect mapped_region_{};
    double change_ratio_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<Landmark> prior_;
    std::vector<Landmark> truth_;

    // Uniform bucket grid over landmarks_true for range queries.
    double cell_ = 10.0;
    Point2 grid_origin_{};
    int grid_nx_ = 0;
    int grid_ny_ = 0;
    std::vector<std::vector<std::uint32_t>> grid_;
};

World generate_world(std::uint64_t seed, const WorldParams& params);

/// One observation per true landmark within max_range of the true pose.
/// Visibility uses the noise-free range; range and bearing are then perturbed.
std::vector<Observation> sense(const World& world, const Pose2& true_pose,
                               const SensorParams& sensor, Rng& rng);

/// Applies a command (rotate by d_rot, then advance d_trans along the new
/// heading). The returned odometry is the command with multiplicative noise.
struct StepResult {
    Pose2 pose;
    OdometryMeasurement odometry;
};
StepResult step_robot(const Pose2& true_pose, MotionCommand command, const MotionParams& motion,
                      Rng& rng);

/// Pose after executing `command` exactly.
Pose2 advance(const Pose2& pose, MotionCommand command);

struct TrajectoryParams {
    Point2 start{0.0, -100.0};
    Point2 goal{0.0, 100.0};
    double initial_heading = 0.0;
    double step_length = 0.5;
};

/// Straight-line drive from start to goal: one in-place heading alignment
/// (omitted when already aligned), then step_length moves, the last one
/// shortened if the distance is not a whole number of steps.
std::vector<MotionCommand> trajectory(const TrajectoryParams& params);

inline Pose2 start_pose(const TrajectoryParams& params) {
    return Pose2(params.initial_heading, params.start);
}

/// Line-oriented world format; see docs/formats.md.
void write_world(std::ostream& out, const World& world);
World read_world(std::istream& in);
void save_world(const std::string& path, const World& world);
World load_world(const std::string& path);

}  // namespace increloc
