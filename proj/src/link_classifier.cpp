#include "v2v/link_classifier.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace v2v {

const char* toString(LinkType type)
{
    switch (type) {
    case LinkType::LOS:
        return "LOS";
    case LinkType::NLOSv:
        return "NLOSv";
    case LinkType::NLOSb:
        return "NLOSb";
    }
    return "?";
}

std::vector<VehicleObstruction> obstructingVehicles(const WorldState& state, const Segment2& leg, double legOffset,
                                                    double pathLength, double hStart, double hEnd,
                                                    std::span<const ObjectId> exclude, double lambda)
{
    std::vector<VehicleObstruction> out;
    const double legLength = leg.length();
    if (legLength <= kGeomTol || pathLength <= kGeomTol) {
        return out;
    }
    state.vehicleTree().visitSegment(leg, [&](ObjectId id) {
        if (std::find(exclude.begin(), exclude.end(), id) != exclude.end()) {
            return;
        }
        const Vehicle& v = state.vehicle(id);
        const auto chords = segmentPolygonIntervals(leg, v.outline());
        if (chords.empty()) {
            return;
        }
        const double tMid = 0.5 * (chords.front().first + chords.back().second);
        const double along = legOffset + tMid * legLength;
        const double lineHeight = hStart + (hEnd - hStart) * along / pathLength;
        const double clearance = 0.6 * fresnelRadius(along, pathLength - along, lambda);
        if (v.height() > lineHeight - clearance) {
            out.push_back({id, along});
        }
    });
    std::sort(out.begin(), out.end(), [](const VehicleObstruction& a, const VehicleObstruction& b) {
        return a.along < b.along || (a.along == b.along && a.id < b.id);
    });
    return out;
}

StaticBlockage staticBlockage(const StaticScene& scene, const Segment2& seg)
{
    StaticBlockage out;
    scene.tree().visitSegment(seg, [&](ObjectId id) {
        const StaticObject& o = scene.byId(id);
        const auto hit = segmentPolygonIntersection(seg, o.outline);
        if (!hit.intersects) {
            return;
        }
        if (o.kind == StaticKind::Building) {
            out.building = true;
        } else {
            out.foliage = true;
            out.foliageLength += hit.insideLength;
        }
    });
    return out;
}

std::vector<std::pair<ObjectId, ObjectId>> enumeratePairs(const WorldState& state, const RadioConfig& cfg)
{
    const double r = cfg.maxRadius();
    std::vector<std::pair<ObjectId, ObjectId>> pairs;
    for (const Vehicle& a : state.vehicles()) {
        const Point2 c = a.antenna();
        const Rect region{c.x - r, c.y - r, c.x + r, c.y + r};
        state.vehicleTree().visitRegion(region, [&](ObjectId id) {
            if (id <= a.id()) {
                return;
            }
            const Vehicle& b = state.vehicle(id);
            if (distance(c, b.antenna()) > r) {
                return;
            }
            if (a.canTransmit && b.canReceive) {
                pairs.emplace_back(a.id(), b.id());
            } else if (b.canTransmit && a.canReceive) {
                pairs.emplace_back(b.id(), a.id());
            }
        });
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

Classification classifyObstruction(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg)
{
    if (tx == rx) {
        throw std::invalid_argument(fmt::format("cannot classify a link from vehicle {} to itself", tx));
    }
    // evaluate in canonical id order so the result is exactly symmetric
    const bool swapped = rx < tx;
    const Vehicle& a = state.vehicle(swapped ? rx : tx);
    const Vehicle& b = state.vehicle(swapped ? tx : rx);
    const Segment2 seg{a.antenna(), b.antenna()};
    const double d = seg.length();
    if (d <= kGeomTol) {
        throw std::invalid_argument(fmt::format("vehicles {} and {} share an antenna position", tx, rx));
    }

    Classification out;
    const StaticBlockage blockage = staticBlockage(state.scene(), seg);
    if (blockage.building || blockage.foliage) {
        out.type = LinkType::NLOSb;
        out.cause = blockage.building ? NlosbCause::Building : NlosbCause::FoliageOnly;
        out.foliageTraversal = blockage.foliageLength;
        return out;
    }

    const ObjectId endpoints[] = {a.id(), b.id()};
    const auto blockers = obstructingVehicles(state, seg, 0.0, d, a.antennaHeight(), b.antennaHeight(), endpoints,
                                              cfg.wavelength());
    if (!blockers.empty()) {
        out.type = LinkType::NLOSv;
        for (const auto& o : blockers) {
            out.obstructingVehicles.push_back(o.id);
        }
        if (swapped) {
            std::reverse(out.obstructingVehicles.begin(), out.obstructingVehicles.end());
        }
    }
    return out;
}

double radiusFor(LinkType type, const RadioConfig& cfg)
{
    switch (type) {
    case LinkType::LOS:
        return cfg.losRadius();
    case LinkType::NLOSv:
        return cfg.rNLOSv;
    case LinkType::NLOSb:
        return cfg.rNLOSb;
    }
    return 0.0;
}

std::optional<Classification> classify(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg)
{
    Classification c = classifyObstruction(state, tx, rx, cfg);
    const double d = distance(state.vehicle(tx).antenna(), state.vehicle(rx).antenna());
    // at d == r the search ellipse collapses, so the boundary itself is out of range
    if (d >= radiusFor(c.type, cfg)) {
        return std::nullopt;
    }
    return c;
}

Rect ellipseBounds(const Ellipse2& e)
{
    const Point2 c = e.center();
    const Point2 axis = e.focusB - e.focusA;
    const double len = norm(axis);
    const double cosT = len > 0.0 ? axis.x / len : 1.0;
    const double sinT = len > 0.0 ? axis.y / len : 0.0;
    const double a = 0.5 * e.majorDiameter;
    const double b = 0.5 * e.minorDiameter();
    const double ex = std::sqrt(a * a * cosT * cosT + b * b * sinT * sinT);
    const double ey = std::sqrt(a * a * sinT * sinT + b * b * cosT * cosT);
    return {c.x - ex, c.y - ey, c.x + ex, c.y + ey};
}

Neighborhood neighborhoodStats(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg,
                               LinkType type)
{
    const Vehicle& a = state.vehicle(tx);
    const Vehicle& b = state.vehicle(rx);
    const double r = radiusFor(type, cfg);
    if (distance(a.antenna(), b.antenna()) >= r) {
        throw GeometryError(fmt::format("degenerate ellipse for link {}-{}: distance >= {} m", tx, rx, r));
    }
    Neighborhood out{Ellipse2(a.antenna(), b.antenna(), r)};
    const Rect bounds = ellipseBounds(out.ellipse);
    const double area = out.ellipse.area();

    std::size_t vehicles = 0;
    state.vehicleTree().visitRegion(bounds, [&](ObjectId id) {
        if (id != tx && id != rx && ellipseContains(out.ellipse, state.vehicle(id).center())) {
            ++vehicles;
        }
    });
    double builtArea = 0.0;
    state.staticTree().visitRegion(bounds, [&](ObjectId id) {
        const StaticObject& o = state.scene().byId(id);
        if (ellipseContains(out.ellipse, o.outline.centroid())) {
            builtArea += o.outline.area();
        }
    });
    out.nv = static_cast<double>(vehicles) / area * 1e6;
    out.as = builtArea / area;
    return out;
}

std::optional<LinkRecord> makeLinkRecord(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg)
{
    auto c = classify(state, tx, rx, cfg);
    if (!c) {
        return std::nullopt;
    }
    const Vehicle& a = state.vehicle(tx);
    const Vehicle& b = state.vehicle(rx);
    LinkRecord rec;
    rec.time = state.time();
    rec.txId = tx;
    rec.rxId = rx;
    rec.distance2D = distance(a.antenna(), b.antenna());
    rec.distance3D = std::hypot(rec.distance2D, a.antennaHeight() - b.antennaHeight());
    rec.neighborhood = neighborhoodStats(state, tx, rx, cfg, c->type);
    rec.classification = std::move(*c);
    return rec;
}

}  // namespace v2v
