#include "v2v/propagation.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace v2v {

namespace {

constexpr double kPi = std::numbers::pi;

double gainsDb(const RadioConfig& cfg)
{
    return cfg.antennaGainTx + cfg.antennaGainRx;
}

double txReferenceField(const RadioConfig& cfg)
{
    return referenceField(dbmToWatts(cfg.txPower));
}

std::complex<double> phasor(double amplitude, double pathLength, double lambda)
{
    return std::polar(amplitude, -2.0 * kPi * pathLength / lambda);
}

/// Upper hull of lateral protrusions between the path endpoints at (0, 0) and (length, 0).
std::vector<KnifeEdge> tautStringEdges(std::vector<KnifeEdge> pts, double length)
{
    std::sort(pts.begin(), pts.end(), [](const KnifeEdge& a, const KnifeEdge& b) {
        return a.position < b.position || (a.position == b.position && a.height > b.height);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const KnifeEdge& a, const KnifeEdge& b) { return a.position == b.position; }),
              pts.end());
    std::vector<KnifeEdge> hull{{0.0, 0.0}};
    auto turn = [](const KnifeEdge& o, const KnifeEdge& a, const KnifeEdge& b) {
        return (a.position - o.position) * (b.height - o.height) - (a.height - o.height) * (b.position - o.position);
    };
    pts.push_back({length, 0.0});
    for (const auto& p : pts) {
        while (hull.size() >= 2 && turn(hull[hull.size() - 2], hull.back(), p) >= 0.0) {
            hull.pop_back();
        }
        hull.push_back(p);
    }
    return {hull.begin() + 1, hull.end() - 1};
}

double chordMidpoint(const Segment2& seg, const Polygon2& outline, Point2 fallback)
{
    const auto chords = segmentPolygonIntervals(seg, outline);
    const double len = seg.length();
    if (chords.empty()) {
        return std::clamp(dot(fallback - seg.a, seg.b - seg.a) / len, 0.0, len);
    }
    return 0.5 * (chords.front().first + chords.back().second) * len;
}

}  // namespace

const char* toString(RayKind kind)
{
    switch (kind) {
    case RayKind::LOS:
        return "LOS";
    case RayKind::GroundReflection:
        return "groundReflection";
    case RayKind::WallReflection:
        return "wallReflection";
    case RayKind::VehicleReflection:
        return "vehicleReflection";
    case RayKind::BuildingDiffraction:
        return "buildingDiffraction";
    case RayKind::VehicleDiffractionTop:
        return "vehicleDiffractionTop";
    case RayKind::VehicleDiffractionSide:
        return "vehicleDiffractionSide";
    }
    return "?";
}

const char* toString(PowerModel model)
{
    switch (model) {
    case PowerModel::TwoRay:
        return "twoRay";
    case PowerModel::KnifeEdgeNLOSv:
        return "knifeEdgeNLOSv";
    case PowerModel::RaysNLOSb:
        return "raysNLOSb";
    case PowerModel::LogDistance:
        return "logDistance";
    case PowerModel::FoliageAugmented:
        return "foliageAugmented";
    }
    return "?";
}

std::optional<PowerModel> powerModelFromString(std::string_view s)
{
    for (auto m : {PowerModel::TwoRay, PowerModel::KnifeEdgeNLOSv, PowerModel::RaysNLOSb, PowerModel::LogDistance,
                   PowerModel::FoliageAugmented}) {
        if (s == toString(m)) {
            return m;
        }
    }
    return std::nullopt;
}

double referenceField(double txPowerW)
{
    if (!(txPowerW > 0.0)) {
        throw std::invalid_argument("transmit power must be positive");
    }
    return std::sqrt(30.0 * txPowerW);
}

double reflectionCoefficientPerpendicular(double epsilonR, double grazing)
{
    const double s = std::sin(grazing);
    const double c = std::cos(grazing);
    const double root = std::sqrt(std::max(0.0, epsilonR - c * c));
    const double denom = s + root;
    if (denom <= 0.0) {
        return -1.0;
    }
    return std::clamp((s - root) / denom, -1.0, 1.0);
}

double reflectionCoefficientParallel(double epsilonR, double grazing)
{
    const double s = std::sin(grazing);
    const double c = std::cos(grazing);
    const double root = std::sqrt(std::max(0.0, epsilonR - c * c));
    const double denom = epsilonR * s + root;
    if (denom <= 0.0) {
        return 1.0;
    }
    return std::clamp((-epsilonR * s + root) / denom, -1.0, 1.0);
}

double fieldToPower(double fieldMagnitude, double lambda)
{
    return fieldMagnitude * fieldMagnitude * lambda * lambda / (480.0 * kPi * kPi);
}

double combineEField(std::span<const Ray> rays, const RadioConfig& cfg)
{
    if (rays.empty()) {
        throw std::invalid_argument("combineEField: empty ray list");
    }
    const double e0d0 = txReferenceField(cfg);
    const double lambda = cfg.wavelength();
    std::complex<double> total;
    for (const Ray& r : rays) {
        total += phasor(r.coefficient * e0d0 / r.pathLength, r.pathLength, lambda);
    }
    return std::abs(total);
}

std::complex<double> twoRayPhasor(double directLength, double hTx, double hRx, const RadioConfig& cfg,
                                  const TwoRayOptions& opts)
{
    const double dh = hTx - hRx;
    const double ground2D = std::sqrt(std::max(0.0, directLength * directLength - dh * dh));
    const double groundLength = std::hypot(ground2D, hTx + hRx);
    const double grazing = std::asin(std::clamp((hTx + hRx) / groundLength, 0.0, 1.0));
    const double r = opts.groundCoefficient.value_or(reflectionCoefficientPerpendicular(cfg.epsilonRGround, grazing));
    const double e0d0 = txReferenceField(cfg);
    const double lambda = cfg.wavelength();
    return phasor(e0d0 / directLength, directLength, lambda) + phasor(r * e0d0 / groundLength, groundLength, lambda);
}

PowerResult twoRayPower(double distance2D, double hTx, double hRx, const RadioConfig& cfg, const TwoRayOptions& opts)
{
    const double direct = std::hypot(distance2D, hTx - hRx);
    const double ground = std::hypot(distance2D, hTx + hRx);
    const double grazing = std::asin(std::clamp((hTx + hRx) / ground, 0.0, 1.0));
    const double r = opts.groundCoefficient.value_or(reflectionCoefficientPerpendicular(cfg.epsilonRGround, grazing));
    const double field = std::abs(twoRayPhasor(direct, hTx, hRx, cfg, TwoRayOptions{r}));

    PowerResult out;
    out.model = PowerModel::TwoRay;
    out.rays.push_back(Ray{RayKind::LOS, direct, 1.0});
    out.rays.push_back(Ray{RayKind::GroundReflection, ground, r});
    const double watts = fieldToPower(field, cfg.wavelength());
    // exact cancellation leaves no finite dBm; floor at a negligible field
    out.powerDbm = wattsToDbm(std::max(watts, 1e-30)) + gainsDb(cfg);
    return out;
}

double knifeEdgeLoss(double v)
{
    if (v <= -0.78) {
        return 0.0;
    }
    const double x = v - 0.1;
    return 6.9 + 20.0 * std::log10(std::sqrt(x * x + 1.0) + x);
}

double fresnelParameter(double h, double d1, double d2, double lambda)
{
    return h * std::sqrt(2.0 * (d1 + d2) / (lambda * d1 * d2));
}

double multipleKnifeEdgeLoss(const KnifeEdgeProfile& profile, double lambda)
{
    constexpr double minSpacing = 1e-3;
    const auto& e = profile.edges;
    double loss = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const KnifeEdge prev = i == 0 ? KnifeEdge{0.0, profile.startHeight} : e[i - 1];
        const KnifeEdge next = i + 1 == e.size() ? KnifeEdge{profile.length, profile.endHeight} : e[i + 1];
        const double d1 = std::max(e[i].position - prev.position, minSpacing);
        const double d2 = std::max(next.position - e[i].position, minSpacing);
        const double lineHeight = prev.height + (next.height - prev.height) * d1 / (d1 + d2);
        loss += knifeEdgeLoss(fresnelParameter(e[i].height - lineHeight, d1, d2, lambda));
    }
    return loss;
}

double profilePathLength(const KnifeEdgeProfile& profile)
{
    double len = 0.0;
    KnifeEdge prev{0.0, profile.startHeight};
    for (const auto& e : profile.edges) {
        len += std::hypot(e.position - prev.position, e.height - prev.height);
        prev = e;
    }
    return len + std::hypot(profile.length - prev.position, profile.endHeight - prev.height);
}

double foliageLossPerMeter(double frequencyHz)
{
    return 0.79 * std::pow(frequencyHz / 1e9, 0.61);
}

double logDistancePower(double distance, const RadioConfig& cfg)
{
    constexpr double d0 = 1.0;
    if (distance < d0) {
        spdlog::warn("log-distance evaluated at {} m, clamped to the 1 m reference distance", distance);
        distance = d0;
    }
    return cfg.txPower - cfg.referencePathLoss() - 10.0 * cfg.gammaNLOSb * std::log10(distance / d0) + gainsDb(cfg);
}

PowerResult nlosvPower(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg)
{
    const auto& blockers = link.classification.obstructingVehicles;
    if (blockers.empty()) {
        throw std::invalid_argument("nlosvPower: link has no obstructing vehicles");
    }
    const Vehicle& tx = state.vehicle(link.txId);
    const Vehicle& rx = state.vehicle(link.rxId);
    const double hTx = tx.antennaHeight();
    const double hRx = rx.antennaHeight();
    const Segment2 seg{tx.antenna(), rx.antenna()};
    const double length = seg.length();
    const Point2 dir = (1.0 / length) * (seg.b - seg.a);
    const double lambda = cfg.wavelength();

    PowerResult out;
    out.model = PowerModel::KnifeEdgeNLOSv;
    std::complex<double> field;
    auto addPath = [&](RayKind kind, double pathLength, double lossDb) {
        const double amplitude = std::pow(10.0, -lossDb / 20.0);
        field += amplitude * twoRayPhasor(pathLength, hTx, hRx, cfg);
        out.rays.push_back(Ray{kind, pathLength, amplitude});
    };

    // vertical plane: over the roofs
    KnifeEdgeProfile roof{length, hTx, hRx, {}};
    for (ObjectId id : blockers) {
        const Vehicle& v = state.vehicle(id);
        roof.edges.push_back({chordMidpoint(seg, v.outline(), v.center()), v.height()});
    }
    std::stable_sort(roof.edges.begin(), roof.edges.end(),
                     [](const KnifeEdge& a, const KnifeEdge& b) { return a.position < b.position; });
    addPath(RayKind::VehicleDiffractionTop, profilePathLength(roof), multipleKnifeEdgeLoss(roof, lambda));

    // horizontal plane: around either side, lateral protrusion of outline corners
    for (const double side : {1.0, -1.0}) {
        std::vector<KnifeEdge> corners;
        for (ObjectId id : blockers) {
            for (const Point2 c : state.vehicle(id).outline().vertices()) {
                const double s = dot(c - seg.a, dir);
                const double u = side * cross(dir, c - seg.a);
                if (s > kGeomTol && s < length - kGeomTol && u > kGeomTol) {
                    corners.push_back({s, u});
                }
            }
        }
        if (corners.empty()) {
            continue;
        }
        KnifeEdgeProfile lateral{length, 0.0, 0.0, tautStringEdges(std::move(corners), length)};
        const double horizontal = profilePathLength(lateral);
        addPath(RayKind::VehicleDiffractionSide, std::hypot(horizontal, hTx - hRx),
                multipleKnifeEdgeLoss(lateral, lambda));
    }

    const double watts = fieldToPower(std::abs(field), lambda);
    out.powerDbm = wattsToDbm(std::max(watts, 1e-30)) + gainsDb(cfg);
    return out;
}

std::vector<Ray> nlosbRays(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg)
{
    std::vector<Ray> rays;
    const Vehicle& tx = state.vehicle(link.txId);
    const Vehicle& rx = state.vehicle(link.rxId);
    const Point2 a = tx.antenna();
    const Point2 b = rx.antenna();
    const double hTx = tx.antennaHeight();
    const double hRx = rx.antennaHeight();
    const double dh = hTx - hRx;
    const double direct = distance(a, b);
    if (direct >= cfg.rNLOSb || direct <= kGeomTol) {
        return rays;
    }
    const Ellipse2 ellipse(a, b, cfg.rNLOSb);
    const Rect bounds = ellipseBounds(ellipse);
    const double lambda = cfg.wavelength();

    auto pathClear = [&](Point2 via, std::span<const ObjectId> exclude) {
        const double total = distance(a, via) + distance(via, b);
        double offset = 0.0;
        for (const Segment2 leg : {Segment2{a, via}, Segment2{via, b}}) {
            const StaticBlockage s = staticBlockage(state.scene(), leg);
            if (s.building || s.foliage) {
                return false;
            }
            if (!obstructingVehicles(state, leg, offset, total, hTx, hRx, exclude, lambda).empty()) {
                return false;
            }
            offset += leg.length();
        }
        return true;
    };

    auto reflect = [&](const Segment2& wall, RayKind kind, ObjectId owner, std::size_t edge,
                       std::span<const ObjectId> exclude) {
        // CCW outlines: the exterior lies to the right of each edge
        const double wallLen = wall.length();
        if (orient(wall.a, wall.b, a) >= -kGeomTol * wallLen || orient(wall.a, wall.b, b) >= -kGeomTol * wallLen) {
            return;
        }
        const auto hit = specularReflectionPoint(a, b, wall);
        if (!hit || !ellipseContains(ellipse, *hit) || !pathClear(*hit, exclude)) {
            return;
        }
        const double d1 = distance(a, *hit);
        const double total = d1 + distance(*hit, b);
        const double incoming3D = std::hypot(d1, dh * d1 / total);
        const Point2 wallDir = (1.0 / wallLen) * (wall.b - wall.a);
        const double sinGrazing = std::clamp(std::abs(cross(wallDir, *hit - a)) / incoming3D, 0.0, 1.0);
        const double coeff = reflectionCoefficientPerpendicular(cfg.epsilonRWall, std::asin(sinGrazing));
        rays.push_back(Ray{kind, std::hypot(total, dh), coeff, owner, edge, {a, *hit, b}});
    };

    std::vector<ObjectId> statics = state.staticTree().queryRegion(bounds);
    std::sort(statics.begin(), statics.end());
    const ObjectId endpoints[] = {link.txId, link.rxId};
    for (ObjectId id : statics) {
        const StaticObject& o = state.scene().byId(id);
        if (o.kind != StaticKind::Building) {
            continue;
        }
        const auto v = o.outline.vertices();
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < n; ++i) {
            reflect(o.outline.edge(i), RayKind::WallReflection, id, i, endpoints);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 corner = v[i];
            if (orient(v[(i + n - 1) % n], corner, v[(i + 1) % n]) <= kGeomTol) {
                continue;  // reflex or flat vertex
            }
            if (!ellipseContains(ellipse, corner) || !pathClear(corner, endpoints)) {
                continue;
            }
            const double d1 = distance(a, corner);
            const double d2 = distance(corner, b);
            if (d1 <= kGeomTol || d2 <= kGeomTol) {
                continue;
            }
            const double offset = std::abs(orient(a, b, corner)) / direct;
            const double loss = knifeEdgeLoss(fresnelParameter(offset, d1, d2, lambda));
            rays.push_back(Ray{RayKind::BuildingDiffraction, std::hypot(d1 + d2, dh), std::pow(10.0, -loss / 20.0),
                               id, i, {a, corner, b}});
        }
    }

    std::vector<ObjectId> vehicles = state.vehicleTree().queryRegion(bounds);
    std::sort(vehicles.begin(), vehicles.end());
    const double tallerThan = std::max(hTx, hRx);
    for (ObjectId id : vehicles) {
        if (id == link.txId || id == link.rxId) {
            continue;
        }
        const Vehicle& v = state.vehicle(id);
        if (!(v.height() > tallerThan)) {
            continue;
        }
        const ObjectId exclude[] = {link.txId, link.rxId, id};
        const Polygon2& outline = v.outline();
        // long faces of the rectangle
        const std::size_t first = outline.edge(0).length() >= outline.edge(1).length() ? 0 : 1;
        for (std::size_t i : {first, first + 2}) {
            reflect(outline.edge(i), RayKind::VehicleReflection, id, i, exclude);
        }
    }
    return rays;
}

PowerResult nlosbPower(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg)
{
    const double logPower = logDistancePower(link.distance3D, cfg);
    PowerResult out{logPower, {}, PowerModel::LogDistance};
    if (!cfg.nlosbRays) {
        return out;
    }
    if (link.classification.cause == NlosbCause::FoliageOnly) {
        const Vehicle& tx = state.vehicle(link.txId);
        const Vehicle& rx = state.vehicle(link.rxId);
        PowerResult los = twoRayPower(link.distance2D, tx.antennaHeight(), rx.antennaHeight(), cfg);
        const double foliage = los.powerDbm - foliageLossPerMeter(cfg.frequency) * link.classification.foliageTraversal;
        if (foliage >= logPower) {
            return {foliage, std::move(los.rays), PowerModel::FoliageAugmented};
        }
        return out;
    }
    out.rays = nlosbRays(link, state, cfg);
    if (out.rays.empty()) {
        return out;
    }
    const double watts = fieldToPower(combineEField(out.rays, cfg), cfg.wavelength());
    if (watts > 0.0) {
        const double rayPower = wattsToDbm(watts) + gainsDb(cfg);
        if (rayPower >= logPower) {
            out.powerDbm = rayPower;
            out.model = PowerModel::RaysNLOSb;
        }
    }
    return out;
}

PowerResult largeScalePower(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg)
{
    switch (link.linkType()) {
    case LinkType::LOS: {
        const Vehicle& tx = state.vehicle(link.txId);
        const Vehicle& rx = state.vehicle(link.rxId);
        return twoRayPower(link.distance2D, tx.antennaHeight(), rx.antennaHeight(), cfg);
    }
    case LinkType::NLOSv:
        return nlosvPower(link, state, cfg);
    case LinkType::NLOSb:
        return nlosbPower(link, state, cfg);
    }
    throw std::logic_error("unknown link type");
}

}  // namespace v2v
