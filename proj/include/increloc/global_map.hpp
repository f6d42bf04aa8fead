#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "increloc/environment.hpp"
#include "increloc/geometry.hpp"
#include "increloc/quadtree.hpp"
#include "increloc/rng.hpp"

namespace increloc {

/// Unordered landmark pair (a < b) with its separation.
struct PairEntry {
    std::uint32_t a;
    std::uint32_t b;
    double dist;
    friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

/// Oriented correspondence candidate: first -> second.
struct LandmarkPair {
    std::uint32_t first;
    std::uint32_t second;
    Point2 first_pos;
    Point2 second_pos;
};

struct PairIndexParams {
    double bucket_width = 0.25;
    double max_separation = 10.0;
    double min_separation = kMinPairSeparation;
};

/// The a-priori landmark map of the mapped region.
///
/// Immutable after construction. Nearest queries go through a quadtree; pairs
/// of landmarks closer than the sensor range are bucketed by separation so
/// that congruent pairs for a feature pair can be found without a scan.
class GlobalMap {
public:
    GlobalMap(std::vector<Point2> landmarks, Rect mapped_region, PairIndexParams pair_params = {});

    /// Prior landmark positions restricted to the world's mapped region.
    static GlobalMap from_world(const World& world, PairIndexParams pair_params = {});

    const std::vector<Point2>& landmarks() const { return landmarks_; }
    const Rect& mapped_region() const { return mapped_region_; }
    std::size_t size() const { return landmarks_.size(); }
    bool empty() const { return landmarks_.empty(); }

    std::optional<QuadTree::Hit> nearest_landmark(Point2 p) const { return index_.nearest(p); }

    /// Uniform location in the mapped region. Throws InvalidParams for a
    /// zero-area region.
    Point2 sample_mapped_location(Rng& rng) const;

    /// Oriented landmark pairs with separation in [d - tol, d + tol]. When
    /// more than `max_out` qualify, a uniform sample without replacement is
    /// returned; otherwise all of them, in bucket order.
    std::vector<LandmarkPair> congruent_pairs(double d, double tol, std::size_t max_out,
                                              Rng& rng) const;

    const std::vector<std::vector<PairEntry>>& pair_buckets() const { return buckets_; }
    std::size_t pair_count() const;
    const PairIndexParams& pair_params() const { return pair_params_; }

private:
    std::vector<Point2> landmarks_;
    Rect mapped_region_;
    QuadTree index_;
    PairIndexParams pair_params_;
    std::vector<std::vector<PairEntry>> buckets_;
};

/// All pairs with separation in (min_separation, max_separation], sorted by
/// (a, b). The parallel variant splits the outer loop over landmarks across
/// OpenMP threads and merges in landmark order, so both return the same list.
std::vector<PairEntry> build_pairs_serial(const std::vector<Point2>& pts, const PairIndexParams& p);
std::vector<PairEntry> build_pairs_parallel(const std::vector<Point2>& pts, const PairIndexParams& p);

}  // namespace increloc
