#include "v2v/rtree.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace v2v {

Rect Rect::around(std::span<const Point2> points)
{
    Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : points) {
        r.minX = std::min(r.minX, p.x);
        r.minY = std::min(r.minY, p.y);
        r.maxX = std::max(r.maxX, p.x);
        r.maxY = std::max(r.maxY, p.y);
    }
    return r;
}

void Rect::expand(const Rect& o)
{
    minX = std::min(minX, o.minX);
    minY = std::min(minY, o.minY);
    maxX = std::max(maxX, o.maxX);
    maxY = std::max(maxY, o.maxY);
}

bool Rect::intersects(const Segment2& seg) const
{
    // Liang-Barsky clip of the segment against the rectangle
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = seg.b.x - seg.a.x;
    const double dy = seg.b.y - seg.a.y;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {seg.a.x - minX, maxX - seg.a.x, seg.a.y - minY, maxY - seg.a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) {
                return false;
            }
            continue;
        }
        const double t = q[i] / p[i];
        if (p[i] < 0.0) {
            t0 = std::max(t0, t);
        } else {
            t1 = std::min(t1, t);
        }
        if (t0 > t1) {
            return false;
        }
    }
    return true;
}

RTree RTree::build(std::vector<RTreeEntry> objects)
{
    std::unordered_set<ObjectId> seen;
    seen.reserve(objects.size());
    for (const auto& o : objects) {
        if (!seen.insert(o.id).second) {
            throw std::invalid_argument("RTree::build: duplicate object id " + std::to_string(o.id));
        }
        if (!(o.rect.minX <= o.rect.maxX) || !(o.rect.minY <= o.rect.maxY)) {
            throw std::invalid_argument("RTree::build: malformed rectangle for id " + std::to_string(o.id));
        }
    }
    RTree tree;
    if (objects.empty()) {
        return tree;
    }
    tree.entries_ = std::move(objects);
    tree.nodes_.reserve(2 * (tree.entries_.size() / kLeafCapacity + 1));
    tree.buildNode(0, tree.entries_.size(), 0);
    return tree;
}

std::int32_t RTree::buildNode(std::size_t first, std::size_t last, std::size_t depth)
{
    Rect bounds = entries_[first].rect;
    for (std::size_t i = first + 1; i < last; ++i) {
        bounds.expand(entries_[i].rect);
    }
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{bounds});

    const std::size_t n = last - first;
    if (n <= kLeafCapacity) {
        nodes_[static_cast<std::size_t>(index)].first = static_cast<std::uint32_t>(first);
        nodes_[static_cast<std::size_t>(index)].count = static_cast<std::uint32_t>(n);
        return index;
    }

    const bool splitX = bounds.width() >= bounds.height();
    auto less = [splitX](const RTreeEntry& a, const RTreeEntry& b) {
        const double ca = splitX ? a.rect.minX + a.rect.maxX : a.rect.minY + a.rect.maxY;
        const double cb = splitX ? b.rect.minX + b.rect.maxX : b.rect.minY + b.rect.maxY;
        return ca < cb || (ca == cb && a.id < b.id);
    };
    const std::size_t mid = first + (n + 1) / 2;
    auto begin = entries_.begin();
    std::nth_element(begin + static_cast<std::ptrdiff_t>(first), begin + static_cast<std::ptrdiff_t>(mid),
                     begin + static_cast<std::ptrdiff_t>(last), less);

    const std::int32_t left = buildNode(first, mid, depth + 1);
    const std::int32_t right = buildNode(mid, last, depth + 1);
    nodes_[static_cast<std::size_t>(index)].left = left;
    nodes_[static_cast<std::size_t>(index)].right = right;
    return index;
}

std::size_t RTree::height() const
{
    if (nodes_.empty()) {
        return 0;
    }
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, depth] = stack.back();
        stack.pop_back();
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.isLeaf()) {
            best = std::max(best, depth);
        } else {
            stack.emplace_back(n.left, depth + 1);
            stack.emplace_back(n.right, depth + 1);
        }
    }
    return best;
}

std::vector<ObjectId> RTree::querySegment(const Segment2& seg) const
{
    std::vector<ObjectId> out;
    visitSegment(seg, [&](ObjectId id) { out.push_back(id); });
    return out;
}

std::vector<ObjectId> RTree::queryRegion(const Rect& region) const
{
    std::vector<ObjectId> out;
    visitRegion(region, [&](ObjectId id) { out.push_back(id); });
    return out;
}

}  // namespace v2v
