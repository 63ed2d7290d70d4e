#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "v2v/geometry.hpp"

namespace v2v {

using ObjectId = std::int64_t;

/// Axis-aligned bounding rectangle.
struct Rect {
    double minX = 0.0;
    double minY = 0.0;
    double maxX = 0.0;
    double maxY = 0.0;

    static Rect around(std::span<const Point2> points);
    static Rect around(const Polygon2& poly) { return around(poly.vertices()); }

    Point2 center() const { return {0.5 * (minX + maxX), 0.5 * (minY + maxY)}; }
    double width() const { return maxX - minX; }
    double height() const { return maxY - minY; }

    bool contains(const Rect& other) const
    {
        return other.minX >= minX && other.maxX <= maxX && other.minY >= minY && other.maxY <= maxY;
    }
    bool intersects(const Rect& other) const
    {
        return minX <= other.maxX && other.minX <= maxX && minY <= other.maxY && other.minY <= maxY;
    }
    bool intersects(const Segment2& seg) const;

    void expand(const Rect& other);

    friend bool operator==(const Rect&, const Rect&) = default;
};

struct RTreeEntry {
    ObjectId id;
    Rect rect;
};

/**
 * Static binary R-tree built top-down: every node splits its objects in half
 * after sorting by rectangle center along the node's longer axis (ties broken
 * by ascending id). Nodes holding at most kLeafCapacity objects become leaves.
 *
 * The tree is immutable after construction and safe for concurrent queries.
 */
class RTree {
public:
    static constexpr std::size_t kLeafCapacity = 4;

    struct Node {
        Rect rect;
        // internal nodes: child indices; leaves: [first, first + count) into entries
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t first = 0;
        std::uint32_t count = 0;

        bool isLeaf() const { return left < 0; }
    };

    RTree() = default;

    /// Throws std::invalid_argument on duplicate ids or malformed rects.
    static RTree build(std::vector<RTreeEntry> objects);

    bool empty() const { return nodes_.empty(); }
    std::size_t size() const { return entries_.size(); }

    /// Number of edges on the longest root-to-leaf path (0 for a single leaf).
    std::size_t height() const;

    std::vector<ObjectId> querySegment(const Segment2& seg) const;
    std::vector<ObjectId> queryRegion(const Rect& region) const;

    template <typename Visit>
    void visitSegment(const Segment2& seg, Visit&& visit) const
    {
        visit_([&](const Rect& r) { return r.intersects(seg); }, visit);
    }

    template <typename Visit>
    void visitRegion(const Rect& region, Visit&& visit) const
    {
        visit_([&](const Rect& r) { return r.intersects(region); }, visit);
    }

    std::span<const Node> nodes() const { return nodes_; }
    std::span<const RTreeEntry> entries() const { return entries_; }

private:
    template <typename Pred, typename Visit>
    void visit_(Pred&& pred, Visit&& visit) const
    {
        if (nodes_.empty()) {
            return;
        }
        std::int32_t stack[128];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& n = nodes_[static_cast<std::size_t>(stack[--top])];
            if (!pred(n.rect)) {
                continue;
            }
            if (n.isLeaf()) {
                for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
                    if (pred(entries_[i].rect)) {
                        visit(entries_[i].id);
                    }
                }
            } else {
                stack[top++] = n.right;
                stack[top++] = n.left;
            }
        }
    }

    std::int32_t buildNode(std::size_t first, std::size_t last, std::size_t depth);

    std::vector<Node> nodes_;
    std::vector<RTreeEntry> entries_;
};

}  // namespace v2v
