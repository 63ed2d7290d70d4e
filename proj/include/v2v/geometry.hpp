#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <stdexcept>
#include <vector>

namespace v2v {

/// Absolute tolerance (meters) used by every geometric predicate.
inline constexpr double kGeomTol = 1e-9;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point2, Point2) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

struct Segment2 {
    Point2 a;
    Point2 b;

    double length() const { return distance(a, b); }
    Point2 at(double t) const { return a + t * (b - a); }
};

class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Simple closed polygon. Vertices are stored counterclockwise without the
 * closing duplicate; construction rejects rings with fewer than three
 * distinct vertices, zero area, or self-intersections.
 */
class Polygon2 {
public:
    explicit Polygon2(std::vector<Point2> vertices);

    /// Oriented rectangle of the given length (along heading) and width.
    static Polygon2 orientedRectangle(Point2 center, double heading, double length, double width);

    std::span<const Point2> vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    Segment2 edge(std::size_t i) const { return {vertices_[i], vertices_[(i + 1) % vertices_.size()]}; }

    double area() const { return area_; }
    Point2 centroid() const { return centroid_; }

private:
    std::vector<Point2> vertices_;
    double area_ = 0.0;
    Point2 centroid_;
};

/// Ellipse with foci at the two link endpoints and major diameter r.
struct Ellipse2 {
    Ellipse2(Point2 focusA, Point2 focusB, double majorDiameter);

    Point2 focusA;
    Point2 focusB;
    double majorDiameter;

    double focalDistance() const { return distance(focusA, focusB); }
    double minorDiameter() const;
    double area() const;
    Point2 center() const { return 0.5 * (focusA + focusB); }
};

struct SegmentPolygonHit {
    bool intersects = false;
    double insideLength = 0.0;
};

SegmentPolygonHit segmentPolygonIntersection(const Segment2& seg, const Polygon2& poly);

/// Parameter intervals [t0, t1] of `seg` lying in the polygon interior, ascending.
std::vector<std::pair<double, double>> segmentPolygonIntervals(const Segment2& seg, const Polygon2& poly);

/// Strict interior test; points within kGeomTol of the boundary are outside.
bool pointInPolygonInterior(Point2 p, const Polygon2& poly);

bool ellipseContains(const Ellipse2& e, Point2 p);

double fresnelRadius(double d1, double d2, double lambda);

Point2 mirrorPoint(Point2 p, const Segment2& wall);

std::optional<Point2> specularReflectionPoint(Point2 tx, Point2 rx, const Segment2& wall);

double polygonArea(const Polygon2& poly);

/// Signed twice-area of the triangle (a, b, c); positive for a left turn.
inline double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

/// Proper or touching intersection parameter along `s` with `t`, if any.
std::optional<double> segmentIntersectionParam(const Segment2& s, const Segment2& t);

}  // namespace v2v
