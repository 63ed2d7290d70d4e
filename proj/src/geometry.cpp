#include "v2v/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace v2v {

namespace {

double signedArea(std::span<const Point2> v)
{
    double acc = 0.0;
    for (std::size_t i = 0, n = v.size(); i < n; ++i) {
        acc += cross(v[i], v[(i + 1) % n]);
    }
    return 0.5 * acc;
}

double pointSegmentDistance(Point2 p, const Segment2& s)
{
    const Point2 d = s.b - s.a;
    const double len2 = dot(d, d);
    if (len2 == 0.0) {
        return distance(p, s.a);
    }
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(p, s.at(t));
}

bool segmentsTouch(const Segment2& s, const Segment2& t)
{
    if (segmentIntersectionParam(s, t)) {
        return true;
    }
    return pointSegmentDistance(s.a, t) <= kGeomTol || pointSegmentDistance(s.b, t) <= kGeomTol ||
           pointSegmentDistance(t.a, s) <= kGeomTol || pointSegmentDistance(t.b, s) <= kGeomTol;
}

}  // namespace

Polygon2::Polygon2(std::vector<Point2> vertices)
{
    for (const auto& p : vertices) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw GeometryError("non-finite polygon vertex");
        }
    }
    // drop repeated vertices, including the closing duplicate
    std::vector<Point2> ring;
    ring.reserve(vertices.size());
    for (const auto& p : vertices) {
        if (ring.empty() || distance(ring.back(), p) > kGeomTol) {
            ring.push_back(p);
        }
    }
    while (ring.size() > 1 && distance(ring.front(), ring.back()) <= kGeomTol) {
        ring.pop_back();
    }
    if (ring.size() < 3) {
        throw GeometryError("degenerate polygon: fewer than 3 distinct vertices");
    }
    double a = signedArea(ring);
    if (std::abs(a) <= kGeomTol) {
        throw GeometryError("degenerate polygon: zero area");
    }
    if (a < 0.0) {
        std::reverse(ring.begin(), ring.end());
        a = -a;
    }

    const std::size_t n = ring.size();
    auto edgeAt = [&](std::size_t i) { return Segment2{ring[i], ring[(i + 1) % n]}; };
    for (std::size_t i = 0; i < n; ++i) {
        // adjacent edges folding back onto each other
        const Point2 prev = ring[(i + n - 1) % n];
        const Point2 next = ring[(i + 1) % n];
        if (std::abs(orient(prev, ring[i], next)) <= kGeomTol && dot(ring[i] - prev, next - ring[i]) < 0.0) {
            throw GeometryError("self-intersecting polygon: spike at vertex");
        }
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) {
                continue;
            }
            if (segmentsTouch(edgeAt(i), edgeAt(j))) {
                throw GeometryError("self-intersecting polygon");
            }
        }
    }

    double cx = 0.0;
    double cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = ring[i];
        const Point2 q = ring[(i + 1) % n];
        const double w = cross(p, q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    centroid_ = {cx / (6.0 * a), cy / (6.0 * a)};
    area_ = a;
    vertices_ = std::move(ring);
}

Polygon2 Polygon2::orientedRectangle(Point2 center, double heading, double length, double width)
{
    if (!(length > 0.0) || !(width > 0.0)) {
        throw GeometryError("rectangle dimensions must be positive");
    }
    const Point2 along{std::cos(heading), std::sin(heading)};
    const Point2 left{-along.y, along.x};
    const double hl = 0.5 * length;
    const double hw = 0.5 * width;
    return Polygon2({center + (-hl) * along + (-hw) * left, center + hl * along + (-hw) * left,
                     center + hl * along + hw * left, center + (-hl) * along + hw * left});
}

Ellipse2::Ellipse2(Point2 a, Point2 b, double r) : focusA(a), focusB(b), majorDiameter(r)
{
    if (!(r >= distance(a, b))) {
        throw GeometryError("ellipse major diameter shorter than focal distance");
    }
}

double Ellipse2::minorDiameter() const
{
    const double d = focalDistance();
    return std::sqrt(std::max(0.0, majorDiameter * majorDiameter - d * d));
}

double Ellipse2::area() const
{
    return std::numbers::pi * 0.25 * majorDiameter * minorDiameter();
}

std::optional<double> segmentIntersectionParam(const Segment2& s, const Segment2& t)
{
    const Point2 d = s.b - s.a;
    const Point2 e = t.b - t.a;
    const double denom = cross(d, e);
    const Point2 w = t.a - s.a;
    const double ld = norm(d);
    const double le = norm(e);
    if (std::abs(denom) <= kGeomTol * std::max(1.0, ld * le)) {
        return std::nullopt;
    }
    const double u = cross(w, d) / denom;
    const double v = cross(w, e) / denom;
    const double tolS = ld > 0.0 ? kGeomTol / ld : 0.0;
    const double tolT = le > 0.0 ? kGeomTol / le : 0.0;
    if (v < -tolS || v > 1.0 + tolS || u < -tolT || u > 1.0 + tolT) {
        return std::nullopt;
    }
    return std::clamp(v, 0.0, 1.0);
}

bool pointInPolygonInterior(Point2 p, const Polygon2& poly)
{
    const auto v = poly.vertices();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (pointSegmentDistance(p, poly.edge(i)) <= kGeomTol) {
            return false;
        }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i].y > p.y) != (v[j].y > p.y)) {
            const double xCross = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (p.x < xCross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

std::vector<std::pair<double, double>> segmentPolygonIntervals(const Segment2& seg, const Polygon2& poly)
{
    std::vector<std::pair<double, double>> out;
    const double len = seg.length();
    if (len <= kGeomTol) {
        return out;
    }
    const Point2 d = seg.b - seg.a;
    std::vector<double> params{0.0, 1.0};
    params.reserve(2 + 2 * poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Segment2 e = poly.edge(i);
        const Point2 ed = e.b - e.a;
        if (std::abs(cross(d, ed)) <= kGeomTol * len * norm(ed)) {
            // parallel: only collinear overlap contributes breakpoints
            if (std::abs(cross(d, e.a - seg.a)) <= kGeomTol * len) {
                for (const Point2 q : {e.a, e.b}) {
                    params.push_back(std::clamp(dot(q - seg.a, d) / (len * len), 0.0, 1.0));
                }
            }
            continue;
        }
        if (auto t = segmentIntersectionParam(seg, e)) {
            params.push_back(*t);
        }
    }
    std::sort(params.begin(), params.end());

    for (std::size_t i = 0; i + 1 < params.size(); ++i) {
        const double t0 = params[i];
        const double t1 = params[i + 1];
        if ((t1 - t0) * len <= kGeomTol) {
            continue;
        }
        if (pointInPolygonInterior(seg.at(0.5 * (t0 + t1)), poly)) {
            if (!out.empty() && out.back().second >= t0) {
                out.back().second = t1;
            } else {
                out.emplace_back(t0, t1);
            }
        }
    }
    return out;
}

SegmentPolygonHit segmentPolygonIntersection(const Segment2& seg, const Polygon2& poly)
{
    const double len = seg.length();
    double inside = 0.0;
    for (const auto& [t0, t1] : segmentPolygonIntervals(seg, poly)) {
        inside += (t1 - t0) * len;
    }
    inside = std::min(inside, len);
    return {inside > kGeomTol, inside > kGeomTol ? inside : 0.0};
}

bool ellipseContains(const Ellipse2& e, Point2 p)
{
    return distance(p, e.focusA) + distance(p, e.focusB) <= e.majorDiameter + kGeomTol;
}

double fresnelRadius(double d1, double d2, double lambda)
{
    const double total = d1 + d2;
    if (total <= 0.0) {
        return 0.0;
    }
    return std::sqrt(lambda * d1 * d2 / total);
}

Point2 mirrorPoint(Point2 p, const Segment2& wall)
{
    const Point2 d = wall.b - wall.a;
    const double t = dot(p - wall.a, d) / dot(d, d);
    const Point2 foot = wall.a + t * d;
    return 2.0 * foot - p;
}

std::optional<Point2> specularReflectionPoint(Point2 tx, Point2 rx, const Segment2& wall)
{
    const double len = wall.length();
    if (len <= kGeomTol) {
        return std::nullopt;
    }
    const double sTx = orient(wall.a, wall.b, tx) / len;
    const double sRx = orient(wall.a, wall.b, rx) / len;
    if (std::abs(sTx) <= kGeomTol || std::abs(sRx) <= kGeomTol || (sTx > 0.0) != (sRx > 0.0)) {
        return std::nullopt;
    }
    const Point2 image = mirrorPoint(tx, wall);
    // image and rx lie on opposite sides, so the crossing with the wall line exists
    const double hImage = orient(wall.a, wall.b, image);
    const double hRx = orient(wall.a, wall.b, rx);
    const double t = hImage / (hImage - hRx);
    const Point2 hit = image + t * (rx - image);
    const double u = dot(hit - wall.a, wall.b - wall.a) / (len * len);
    const double tolU = kGeomTol / len;
    if (u < -tolU || u > 1.0 + tolU) {
        return std::nullopt;
    }
    return wall.at(std::clamp(u, 0.0, 1.0));
}

double polygonArea(const Polygon2& poly)
{
    return poly.area();
}

}  // namespace v2v
