#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "increloc/geometry.hpp"

namespace increloc {

struct Rect {
    Point2 min;
    Point2 max;

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    bool contains(Point2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    bool contains(const Rect& r) const { return contains(r.min) && contains(r.max); }
    bool degenerate() const { return !(width() > 0.0) || !(height() > 0.0); }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Squared distance from p to the closest point of r (zero inside).
double squared_distance(const Rect& r, Point2 p);

/** Point quadtree for nearest-neighbour queries.
 *
 *  Leaves split once they exceed `leaf_capacity` points, until `max_depth`
 *  is reached. Inserting a point outside the current root box grows the root
 *  (the old root becomes one quadrant of a box twice its size), so the tree
 *  can index an incrementally discovered point set.
 *
 *  Ties in distance are resolved towards the smaller id, which makes the
 *  result identical to a linear scan with the same rule.
 */
class QuadTree {
public:
    struct Hit {
        std::uint32_t id;
        Point2 pos;
        double dist;
    };

    static constexpr std::size_t kDefaultLeafCapacity = 16;
    static constexpr int kDefaultMaxDepth = 12;

    explicit QuadTree(Rect bounds, std::size_t leaf_capacity = kDefaultLeafCapacity,
                      int max_depth = kDefaultMaxDepth);

    void insert(Point2 p, std::uint32_t id);

    /// Moves an already inserted point. `old_pos` must be its current position.
    void update(std::uint32_t id, Point2 old_pos, Point2 new_pos);

    std::optional<Hit> nearest(Point2 query) const;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    const Rect& bounds() const { return nodes_[root_].box; }

private:
    struct Entry {
        Point2 pos;
        std::uint32_t id;
    };
    struct Node {
        Rect box;
        int depth = 0;
        std::array<std::int32_t, 4> child{-1, -1, -1, -1};
        std::vector<Entry> entries;
        bool leaf() const { return child[0] < 0; }
    };

    static int quadrant(const Rect& box, Point2 p);
    static Rect quadrant_box(const Rect& box, int q);
    void grow_to(Point2 p);
    void insert_at(std::int32_t node, Entry e);
    void split(std::int32_t node);
    void shift_depth(std::int32_t node);
    bool remove(std::uint32_t id, Point2 pos);

    std::vector<Node> nodes_;
    std::int32_t root_ = 0;
    std::size_t leaf_capacity_;
    int max_depth_;
    std::size_t size_ = 0;
};

/// Reference nearest search over a flat list, same tie rule as QuadTree.
std::optional<QuadTree::Hit> linear_nearest(const std::vector<Point2>& points, Point2 query);

}  // namespace increloc
