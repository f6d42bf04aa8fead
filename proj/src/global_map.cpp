#include "increloc/global_map.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace increloc {

namespace {

Rect bounding_box(const std::vector<Point2>& pts, const Rect& fallback) {
    if (pts.empty()) return fallback;
    Rect r{pts.front(), pts.front()};
    for (const Point2& p : pts) {
        r.min.x = std::min(r.min.x, p.x);
        r.min.y = std::min(r.min.y, p.y);
        r.max.x = std::max(r.max.x, p.x);
        r.max.y = std::max(r.max.y, p.y);
    }
    return r;
}

/// Bucket grid with cell size equal to the pair radius; neighbours of a point
/// live in the 3x3 block around its cell.
class CellGrid {
public:
    CellGrid(const std::vector<Point2>& pts, double cell) : cell_(cell) {
        const Rect box = bounding_box(pts, Rect{{0, 0}, {1, 1}});
        origin_ = box.min;
        nx_ = std::max(1, static_cast<int>(std::floor(box.width() / cell_)) + 1);
        ny_ = std::max(1, static_cast<int>(std::floor(box.height() / cell_)) + 1);
        cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cells_[cell_index(pts[i])].push_back(static_cast<std::uint32_t>(i));
        }
    }

    template <typename Fn>
    void for_each_near(Point2 p, Fn&& fn) const {
        const int cx = col(p.x);
        const int cy = row(p.y);
        for (int y = std::max(0, cy - 1); y <= std::min(ny_ - 1, cy + 1); ++y) {
            for (int x = std::max(0, cx - 1); x <= std::min(nx_ - 1, cx + 1); ++x) {
                for (auto j : cells_[static_cast<std::size_t>(y) * nx_ + x]) fn(j);
            }
        }
    }

private:
    int col(double x) const { return std::clamp(static_cast<int>((x - origin_.x) / cell_), 0, nx_ - 1); }
    int row(double y) const { return std::clamp(static_cast<int>((y - origin_.y) / cell_), 0, ny_ - 1); }
    std::size_t cell_index(Point2 p) const { return static_cast<std::size_t>(row(p.y)) * nx_ + col(p.x); }

    double cell_;
    Point2 origin_{};
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::vector<std::uint32_t>> cells_;
};

void pairs_of(std::uint32_t i, const std::vector<Point2>& pts, const CellGrid& grid,
              const PairIndexParams& p, std::vector<PairEntry>& out) {
    const std::size_t first = out.size();
    grid.for_each_near(pts[i], [&](std::uint32_t j) {
        if (j <= i) return;
        const double d = distance(pts[i], pts[j]);
        if (d > p.min_separation && d <= p.max_separation) out.push_back({i, j, d});
    });
    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
              [](const PairEntry& x, const PairEntry& y) { return x.b < y.b; });
}

}  // namespace

std::vector<PairEntry> build_pairs_serial(const std::vector<Point2>& pts, const PairIndexParams& p) {
    std::vector<PairEntry> out;
    if (pts.empty()) return out;
    const CellGrid grid(pts, p.max_separation);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        pairs_of(static_cast<std::uint32_t>(i), pts, grid, p, out);
    }
    return out;
}

std::vector<PairEntry> build_pairs_parallel(const std::vector<Point2>& pts, const PairIndexParams& p) {
    std::vector<PairEntry> out;
    if (pts.empty()) return out;
    const CellGrid grid(pts, p.max_separation);
    const auto n = static_cast<std::int64_t>(pts.size());
    std::vector<std::vector<PairEntry>> per_point(pts.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) {
        pairs_of(static_cast<std::uint32_t>(i), pts, grid, p, per_point[static_cast<std::size_t>(i)]);
    }
    std::size_t total = 0;
    for (const auto& v : per_point) total += v.size();
    out.reserve(total);
    for (const auto& v : per_point) out.insert(out.end(), v.begin(), v.end());
    return out;
}

GlobalMap::GlobalMap(std::vector<Point2> landmarks, Rect mapped_region, PairIndexParams pair_params)
    : landmarks_(std::move(landmarks)),
      mapped_region_(mapped_region),
      index_(bounding_box(landmarks_, mapped_region)),
      pair_params_(pair_params) {
    for (std::size_t i = 0; i < landmarks_.size(); ++i) {
        index_.insert(landmarks_[i], static_cast<std::uint32_t>(i));
    }
    const auto nb = static_cast<std::size_t>(std::ceil(pair_params_.max_separation / pair_params_.bucket_width));
    buckets_.assign(std::max<std::size_t>(nb, 1), {});
    for (const PairEntry& e : build_pairs_parallel(landmarks_, pair_params_)) {
        const auto b = std::min(buckets_.size() - 1, static_cast<std::size_t>(e.dist / pair_params_.bucket_width));
        buckets_[b].push_back(e);
    }
}

GlobalMap GlobalMap::from_world(const World& world, PairIndexParams pair_params) {
    std::vector<Point2> pts;
    for (const Landmark& lm : world.landmarks_prior()) {
        if (world.mapped_region().contains(lm.pos)) pts.push_back(lm.pos);
    }
    return GlobalMap(std::move(pts), world.mapped_region(), pair_params);
}

std::size_t GlobalMap::pair_count() const {
    std::size_t n = 0;
    for (const auto& b : buckets_) n += b.size();
    return n;
}

Point2 GlobalMap::sample_mapped_location(Rng& rng) const {
    if (mapped_region_.degenerate()) throw InvalidParams("mapped region has zero area");
    const double x = uniform(rng, mapped_region_.min.x, mapped_region_.max.x);
    const double y = uniform(rng, mapped_region_.min.y, mapped_region_.max.y);
    return {x, y};
}

std::vector<LandmarkPair> GlobalMap::congruent_pairs(double d, double tol, std::size_t max_out,
                                                     Rng& rng) const {
    std::vector<LandmarkPair> out;
    const double lo = d - tol;
    const double hi = d + tol;
    if (hi <= 0.0 || max_out == 0) return out;
    const auto first = static_cast<std::size_t>(std::max(0.0, lo) / pair_params_.bucket_width);
    const auto last = std::min(buckets_.size() - 1, static_cast<std::size_t>(hi / pair_params_.bucket_width));
    for (std::size_t b = first; b <= last && b < buckets_.size(); ++b) {
        for (const PairEntry& e : buckets_[b]) {
            if (e.dist < lo || e.dist > hi) continue;
            out.push_back({e.a, e.b, landmarks_[e.a], landmarks_[e.b]});
            out.push_back({e.b, e.a, landmarks_[e.b], landmarks_[e.a]});
        }
    }
    if (out.size() > max_out) {
        // Partial Fisher-Yates: the first max_out slots become a uniform sample.
        for (std::size_t i = 0; i < max_out; ++i) {
            const std::size_t j = i + uniform_index(rng, out.size() - i);
            std::swap(out[i], out[j]);
        }
        out.resize(max_out);
    }
    return out;
}

}  // namespace increloc
