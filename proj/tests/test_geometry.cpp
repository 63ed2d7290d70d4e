#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "v2v/geometry.hpp"

using namespace v2v;

namespace {

Polygon2 unitSquare()
{
    return Polygon2({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
}

}  // namespace

TEST_CASE("polygon construction normalizes and validates")
{
    const Polygon2 cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}});
    CHECK(cw.size() == 4);
    CHECK(cw.area() == doctest::Approx(1.0));
    const auto v = cw.vertices();
    double signed2 = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        signed2 += cross(v[i], v[(i + 1) % v.size()]);
    }
    CHECK(signed2 > 0.0);
    CHECK(cw.centroid().x == doctest::Approx(0.5));
    CHECK(cw.centroid().y == doctest::Approx(0.5));

    CHECK_THROWS_AS(Polygon2({{0, 0}, {1, 0}}), GeometryError);
    CHECK_THROWS_WITH(Polygon2({{0, 0}, {1, 0}}), doctest::Contains("degenerate polygon"));
    CHECK_THROWS_AS(Polygon2({{0, 0}, {1, 1}, {2, 2}}), GeometryError);
    CHECK_THROWS_AS(Polygon2({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), GeometryError);  // bow tie
    CHECK_THROWS_AS(Polygon2({{0, 0}, {1, 0}, {1, NAN}}), GeometryError);
}

TEST_CASE("polygon area")
{
    CHECK(polygonArea(unitSquare()) == 1.0);
    CHECK(polygonArea(Polygon2({{0, 0}, {4, 0}, {0, 3}})) == doctest::Approx(6.0));

    // convex 20-gon against a Monte-Carlo estimate
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> angles;
    for (int i = 0; i < 20; ++i) {
        angles.push_back(2 * std::numbers::pi * u(gen));
    }
    std::sort(angles.begin(), angles.end());
    std::vector<Point2> ring;
    for (double a : angles) {
        ring.push_back({10 * std::cos(a), 7 * std::sin(a)});
    }
    const Polygon2 poly(ring);
    int hits = 0;
    constexpr int samples = 2000000;
    for (int i = 0; i < samples; ++i) {
        hits += oracle::insideRing({-10 + 20 * u(gen), -7 + 14 * u(gen)}, ring) ? 1 : 0;
    }
    const double estimate = 280.0 * hits / samples;
    CHECK(std::abs(polygonArea(poly) - estimate) / estimate < 0.005);
}

TEST_CASE("segment against polygon")
{
    const auto chord = segmentPolygonIntersection({{-1, 0.5}, {2, 0.5}}, unitSquare());
    CHECK(chord.intersects);
    CHECK(chord.insideLength == doctest::Approx(1.0).epsilon(1e-12));

    const auto apart = segmentPolygonIntersection({{5, 5}, {6, 6}}, unitSquare());
    CHECK_FALSE(apart.intersects);
    CHECK(apart.insideLength == 0.0);

    // grazing contact along an edge or at a vertex is not blockage
    CHECK_FALSE(segmentPolygonIntersection({{-1, 0}, {2, 0}}, unitSquare()).intersects);
    CHECK_FALSE(segmentPolygonIntersection({{0, 2}, {2, 0}}, unitSquare()).intersects);
    CHECK_FALSE(segmentPolygonIntersection({{-1, -1}, {0, 0}}, unitSquare()).intersects);

    const Polygon2 tri({{2, 0}, {8, 0}, {5, 9}});
    const auto hit = segmentPolygonIntersection({{0, 0}, {10, 10}}, tri);
    const auto ref = oracle::sampleChord({0, 0}, {10, 10}, oracle::ringOf(tri), 1000000);
    CHECK(hit.intersects);
    CHECK(std::abs(hit.insideLength - ref.length) < 1e-3);
}

TEST_CASE("inside length stays within the segment and matches sampling")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    const Polygon2 concave({{-10, -10}, {10, -10}, {10, 10}, {0, 0}, {-10, 10}});
    const auto ring = oracle::ringOf(concave);
    for (int i = 0; i < 200; ++i) {
        const Segment2 s{{u(gen), u(gen)}, {u(gen), u(gen)}};
        const auto hit = segmentPolygonIntersection(s, concave);
        CHECK(hit.insideLength >= 0.0);
        CHECK(hit.insideLength <= s.length() + 1e-12);
        const auto ref = oracle::sampleChord(s.a, s.b, ring, 20000);
        CHECK(std::abs(hit.insideLength - ref.length) <= 2.0 * s.length() / 20000 + 1e-9);
    }
}

TEST_CASE("ellipse membership and area")
{
    const Ellipse2 e({0, 0}, {100, 0}, 300);
    CHECK(ellipseContains(e, {50, 0}));
    CHECK_FALSE(ellipseContains(e, {0, 150}));
    CHECK(e.minorDiameter() == doctest::Approx(std::sqrt(300.0 * 300.0 - 100.0 * 100.0)));

    const Ellipse2 flat({0, 0}, {100, 0}, 100);
    CHECK(ellipseContains(flat, {30, 0}));
    CHECK_FALSE(ellipseContains(flat, {30, 0.5}));
    CHECK(flat.area() == 0.0);
    CHECK_THROWS_AS(Ellipse2({0, 0}, {100, 0}, 99), GeometryError);

    // monotone in r
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-200.0, 300.0);
    for (int i = 0; i < 1000; ++i) {
        const Point2 p{u(gen), u(gen)};
        if (ellipseContains(e, p)) {
            CHECK(ellipseContains(Ellipse2({0, 0}, {100, 0}, 350), p));
        }
    }

    // area against Monte Carlo over the bounding box
    int hits = 0;
    constexpr int samples = 1000000;
    std::uniform_real_distribution<double> ux(-100.0, 200.0);
    std::uniform_real_distribution<double> uy(-150.0, 150.0);
    for (int i = 0; i < samples; ++i) {
        hits += ellipseContains(e, {ux(gen), uy(gen)}) ? 1 : 0;
    }
    CHECK(std::abs(e.area() - 90000.0 * hits / samples) / e.area() < 0.01);
}

TEST_CASE("fresnel radius")
{
    const double lambda = 299792458.0 / 5.9e9;
    CHECK(fresnelRadius(0, 100, lambda) == 0.0);
    CHECK(fresnelRadius(50, 50, lambda) == doctest::Approx(1.127).epsilon(1e-3));
    CHECK(0.6 * fresnelRadius(50, 50, lambda) == doctest::Approx(0.676).epsilon(1e-3));
    CHECK(fresnelRadius(30, 70, lambda) == fresnelRadius(70, 30, lambda));
}

TEST_CASE("mirror point")
{
    const Point2 a = mirrorPoint({1, 1}, {{0, 0}, {5, 0}});
    CHECK(a.x == doctest::Approx(1.0));
    CHECK(a.y == doctest::Approx(-1.0));
    const Point2 b = mirrorPoint({2, 0}, {{0, 0}, {1, 1}});
    CHECK(b.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.y == doctest::Approx(2.0));

    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const Point2 p{u(gen), u(gen)};
        const Segment2 w{{u(gen), u(gen)}, {u(gen), u(gen)}};
        const Point2 back = mirrorPoint(mirrorPoint(p, w), w);
        CHECK(distance(back, p) < 1e-9);
    }
}

TEST_CASE("specular reflection point")
{
    const auto mid = specularReflectionPoint({0, 1}, {2, 1}, {{0, 0}, {2, 0}});
    REQUIRE(mid);
    CHECK(mid->x == doctest::Approx(1.0));
    CHECK(mid->y == doctest::Approx(0.0));
    CHECK_FALSE(specularReflectionPoint({0, 1}, {10, 1}, {{0, 0}, {1, 0}}));
    CHECK_FALSE(specularReflectionPoint({0, 1}, {2, -1}, {{0, 0}, {2, 0}}));

    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    int found = 0;
    for (int i = 0; i < 2000; ++i) {
        const Segment2 w{{u(gen), u(gen)}, {u(gen), u(gen)}};
        const Point2 tx{u(gen), u(gen)};
        const Point2 rx{u(gen), u(gen)};
        const auto pt = specularReflectionPoint(tx, rx, w);
        if (!pt) {
            continue;
        }
        ++found;
        const Point2 dir = (1.0 / w.length()) * (w.b - w.a);
        // on the wall
        CHECK(std::abs(cross(dir, *pt - w.a)) < 1e-9);
        // equal angles against the wall direction
        const double in = std::atan2(std::abs(cross(dir, tx - *pt)), std::abs(dot(dir, tx - *pt)));
        const double out = std::atan2(std::abs(cross(dir, rx - *pt)), std::abs(dot(dir, rx - *pt)));
        CHECK(std::abs(in - out) < 1e-6);
        // Fermat: no sampled wall point gives a shorter bent path
        const double best = distance(tx, *pt) + distance(*pt, rx);
        for (int k = 0; k <= 200; ++k) {
            const Point2 q = w.at(k / 200.0);
            CHECK(distance(tx, q) + distance(q, rx) >= best - 1e-9);
        }
    }
    CHECK(found > 100);
}
