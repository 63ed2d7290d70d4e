#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "v2v/geometry.hpp"
#include "v2v/scenario.hpp"

namespace v2v {

enum class LinkType { LOS, NLOSv, NLOSb };
enum class NlosbCause { Building, FoliageOnly };

const char* toString(LinkType type);

struct Classification {
    LinkType type = LinkType::LOS;
    NlosbCause cause = NlosbCause::Building;  // meaningful for NLOSb only
    std::vector<ObjectId> obstructingVehicles;  // ordered from tx to rx
    double foliageTraversal = 0.0;              // meters
};

struct Neighborhood {
    Ellipse2 ellipse{{}, {}, 0.0};
    double nv = 0.0;  // vehicles per km^2, endpoints excluded
    double as = 0.0;  // built-area fraction
};

struct LinkRecord {
    double time = 0.0;
    ObjectId txId = 0;
    ObjectId rxId = 0;
    double distance2D = 0.0;
    double distance3D = 0.0;
    Classification classification;
    Neighborhood neighborhood;

    LinkType linkType() const { return classification.type; }
};

/// A vehicle whose outline cuts a path leg and rises above the 60% first-Fresnel clearance line.
struct VehicleObstruction {
    ObjectId id;
    double along;  // distance from the path start to the middle of the crossed chord
};

/**
 * Vehicles blocking one leg of a (possibly folded) path. `legOffset` is the
 * path length before the leg starts; antenna line height varies linearly from
 * `hStart` to `hEnd` over `pathLength`. Result is ordered along the leg.
 */
std::vector<VehicleObstruction> obstructingVehicles(const WorldState& state, const Segment2& leg, double legOffset,
                                                    double pathLength, double hStart, double hEnd,
                                                    std::span<const ObjectId> exclude, double lambda);

struct StaticBlockage {
    bool building = false;
    bool foliage = false;
    double foliageLength = 0.0;
};

StaticBlockage staticBlockage(const StaticScene& scene, const Segment2& seg);

/// Unordered in-range vehicle pairs; the first id transmits. Sorted by (tx, rx).
std::vector<std::pair<ObjectId, ObjectId>> enumeratePairs(const WorldState& state, const RadioConfig& cfg);

/// Obstruction analysis without the per-type range gate. Throws on tx == rx.
Classification classifyObstruction(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg);

double radiusFor(LinkType type, const RadioConfig& cfg);

/// Classification followed by the per-type range gate; nullopt when out of range.
std::optional<Classification> classify(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg);

Neighborhood neighborhoodStats(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg,
                               LinkType type);

/// Bounding rectangle of an ellipse given by its foci and major diameter.
Rect ellipseBounds(const Ellipse2& e);

/// Classify, gate, and collect neighborhood statistics for one pair.
std::optional<LinkRecord> makeLinkRecord(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg);

}  // namespace v2v
