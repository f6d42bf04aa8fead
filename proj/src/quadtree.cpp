#include "increloc/quadtree.hpp"

#include <algorithm>
#include <cassert>

namespace increloc {

double squared_distance(const Rect& r, Point2 p) {
    const double dx = std::max({r.min.x - p.x, 0.0, p.x - r.max.x});
    const double dy = std::max({r.min.y - p.y, 0.0, p.y - r.max.y});
    return dx * dx + dy * dy;
}

QuadTree::QuadTree(Rect bounds, std::size_t leaf_capacity, int max_depth)
    : leaf_capacity_(std::max<std::size_t>(leaf_capacity, 1)), max_depth_(max_depth) {
    if (!(bounds.width() > 0.0)) bounds.max.x = bounds.min.x + 1.0;
    if (!(bounds.height() > 0.0)) bounds.max.y = bounds.min.y + 1.0;
    nodes_.push_back(Node{bounds, 0, {-1, -1, -1, -1}, {}});
}

int QuadTree::quadrant(const Rect& box, Point2 p) {
    const double cx = 0.5 * (box.min.x + box.max.x);
    const double cy = 0.5 * (box.min.y + box.max.y);
    return (p.x >= cx ? 1 : 0) | (p.y >= cy ? 2 : 0);
}

Rect QuadTree::quadrant_box(const Rect& box, int q) {
    const double cx = 0.5 * (box.min.x + box.max.x);
    const double cy = 0.5 * (box.min.y + box.max.y);
    Rect r = box;
    if (q & 1) r.min.x = cx; else r.max.x = cx;
    if (q & 2) r.min.y = cy; else r.max.y = cy;
    return r;
}

void QuadTree::shift_depth(std::int32_t node) {
    nodes_[node].depth += 1;
    if (!nodes_[node].leaf()) {
        for (auto c : nodes_[node].child) shift_depth(c);
    }
}

void QuadTree::grow_to(Point2 p) {
    while (!nodes_[root_].box.contains(p)) {
        const Rect old = nodes_[root_].box;
        const double w = old.width();
        const double h = old.height();
        // Extend towards p; the old root becomes the opposite quadrant.
        Rect grown = old;
        int old_quadrant = 0;
        if (p.x < old.min.x) { grown.min.x -= w; old_quadrant |= 1; } else { grown.max.x += w; }
        if (p.y < old.min.y) { grown.min.y -= h; old_quadrant |= 2; } else { grown.max.y += h; }

        if (nodes_[root_].leaf()) {
            // A leaf root just widens; its entries stay put.
            nodes_[root_].box = grown;
            continue;
        }
        shift_depth(root_);
        Node parent{grown, 0, {-1, -1, -1, -1}, {}};
        const auto parent_idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(parent);
        for (int q = 0; q < 4; ++q) {
            if (q == old_quadrant) {
                nodes_[parent_idx].child[q] = root_;
            } else {
                const auto idx = static_cast<std::int32_t>(nodes_.size());
                nodes_.push_back(Node{quadrant_box(grown, q), 1, {-1, -1, -1, -1}, {}});
                nodes_[parent_idx].child[q] = idx;
            }
        }
        root_ = parent_idx;
    }
}

void QuadTree::split(std::int32_t node) {
    std::vector<Entry> moved = std::move(nodes_[node].entries);
    nodes_[node].entries.clear();
    const Rect box = nodes_[node].box;
    const int depth = nodes_[node].depth;
    for (int q = 0; q < 4; ++q) {
        const auto idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(Node{quadrant_box(box, q), depth + 1, {-1, -1, -1, -1}, {}});
        nodes_[node].child[q] = idx;
    }
    for (const Entry& e : moved) insert_at(node, e);
}

void QuadTree::insert_at(std::int32_t node, Entry e) {
    while (!nodes_[node].leaf()) {
        node = nodes_[node].child[quadrant(nodes_[node].box, e.pos)];
    }
    nodes_[node].entries.push_back(e);
    if (nodes_[node].entries.size() > leaf_capacity_ && nodes_[node].depth < max_depth_) {
        split(node);
    }
}

void QuadTree::insert(Point2 p, std::uint32_t id) {
    grow_to(p);
    insert_at(root_, Entry{p, id});
    ++size_;
}

bool QuadTree::remove(std::uint32_t id, Point2 pos) {
    std::int32_t node = root_;
    while (!nodes_[node].leaf()) {
        node = nodes_[node].child[quadrant(nodes_[node].box, pos)];
    }
    auto& entries = nodes_[node].entries;
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const Entry& e) { return e.id == id; });
    if (it == entries.end()) return false;
    entries.erase(it);
    --size_;
    return true;
}

void QuadTree::update(std::uint32_t id, Point2 old_pos, Point2 new_pos) {
    [[maybe_unused]] const bool found = remove(id, old_pos);
    assert(found);
    insert(new_pos, id);
}

namespace {

bool better(double d2, std::uint32_t id, double best_d2, std::uint32_t best_id) {
    return d2 < best_d2 || (d2 == best_d2 && id < best_id);
}

}  // namespace

std::optional<QuadTree::Hit> QuadTree::nearest(Point2 query) const {
    if (size_ == 0) return std::nullopt;
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();
    Point2 best_pos{};

    struct Item {
        std::int32_t node;
        double d2;
    };
    std::vector<Item> stack;
    stack.reserve(64);
    stack.push_back({root_, squared_distance(nodes_[root_].box, query)});
    while (!stack.empty()) {
        const Item item = stack.back();
        stack.pop_back();
        // `<=` keeps equal-distance boxes alive for the id tie-break.
        if (item.d2 > best_d2) continue;
        const Node& n = nodes_[item.node];
        if (n.leaf()) {
            for (const Entry& e : n.entries) {
                const double d2 = squared_distance(e.pos, query);
                if (better(d2, e.id, best_d2, best_id)) {
                    best_d2 = d2;
                    best_id = e.id;
                    best_pos = e.pos;
                }
            }
            continue;
        }
        std::array<Item, 4> kids{};
        for (int q = 0; q < 4; ++q) {
            kids[q] = {n.child[q], squared_distance(nodes_[n.child[q]].box, query)};
        }
        // Push farthest first so the nearest box is explored next.
        std::sort(kids.begin(), kids.end(), [](const Item& a, const Item& b) { return a.d2 > b.d2; });
        for (const Item& k : kids) {
            if (k.d2 <= best_d2) stack.push_back(k);
        }
    }
    return Hit{best_id, best_pos, std::sqrt(best_d2)};
}

std::optional<QuadTree::Hit> linear_nearest(const std::vector<Point2>& points, Point2 query) {
    if (points.empty()) return std::nullopt;
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double d2 = squared_distance(points[i], query);
        if (better(d2, static_cast<std::uint32_t>(i), best_d2, best_id)) {
            best_d2 = d2;
            best_id = static_cast<std::uint32_t>(i);
        }
    }
    return QuadTree::Hit{best_id, points[best_id], std::sqrt(best_d2)};
}

}  // namespace increloc
