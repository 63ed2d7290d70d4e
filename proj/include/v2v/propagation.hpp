#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "v2v/link_classifier.hpp"
#include "v2v/scenario.hpp"

namespace v2v {

enum class RayKind {
    LOS,
    GroundReflection,
    WallReflection,
    VehicleReflection,
    BuildingDiffraction,
    VehicleDiffractionTop,
    VehicleDiffractionSide,
};

enum class PowerModel { TwoRay, KnifeEdgeNLOSv, RaysNLOSb, LogDistance, FoliageAugmented };

const char* toString(RayKind kind);
const char* toString(PowerModel model);
std::optional<PowerModel> powerModelFromString(std::string_view s);

struct Ray {
    RayKind kind;
    double pathLength;   // meters, 3D
    double coefficient;  // reflection coefficient or diffraction amplitude factor, in [-1, 1]
    ObjectId objectId = -1;       // reflector/diffractor, -1 when none
    std::size_t feature = 0;      // wall edge or corner vertex index on the object
    std::vector<Point2> waypoints = {};  // 2D polyline tx -> interaction point(s) -> rx
};

struct PowerResult {
    double powerDbm = 0.0;  // large-scale received power including antenna gains
    std::vector<Ray> rays;
    PowerModel model = PowerModel::TwoRay;
};

inline double dbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double wattsToDbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// E0*d0 (V) of an isotropic radiator at d0 = 1 m; throws for non-positive power.
double referenceField(double txPowerW);

/// Fresnel reflection coefficient, E-field perpendicular to the plane of incidence.
/// `grazing` is the angle between the incident ray and the surface.
double reflectionCoefficientPerpendicular(double epsilonR, double grazing);
/// Same, E-field in the plane of incidence.
double reflectionCoefficientParallel(double epsilonR, double grazing);

/// |E| -> received power (W) with unit gains.
double fieldToPower(double fieldMagnitude, double lambda);

/// Envelope phasor sum of the given rays; throws on an empty list.
double combineEField(std::span<const Ray> rays, const RadioConfig& cfg);

struct TwoRayOptions {
    std::optional<double> groundCoefficient;  // overrides the Fresnel value when set
};

/// Complex two-ray field for a direct path of length `directLength` (3D) between antennas at the given heights.
std::complex<double> twoRayPhasor(double directLength, double hTx, double hRx, const RadioConfig& cfg,
                                  const TwoRayOptions& opts = {});

PowerResult twoRayPower(double distance2D, double hTx, double hRx, const RadioConfig& cfg,
                        const TwoRayOptions& opts = {});

/// Single knife-edge loss J(v) in dB; zero for v <= -0.78.
double knifeEdgeLoss(double v);

/// Fresnel-Kirchhoff diffraction parameter for an edge h above the line, at d1/d2 from the ends.
double fresnelParameter(double h, double d1, double d2, double lambda);

struct KnifeEdge {
    double position;  // distance along the path from its start
    double height;    // edge height in the same frame as the endpoint heights
};

struct KnifeEdgeProfile {
    double length = 0.0;  // distance between the endpoints along the path
    double startHeight = 0.0;
    double endHeight = 0.0;
    std::vector<KnifeEdge> edges;  // ordered by position, strictly inside (0, length)
};

/// Epstein-Peterson cascade: each edge is evaluated against the line joining its neighbours.
double multipleKnifeEdgeLoss(const KnifeEdgeProfile& profile, double lambda);

/// Length of the polyline through the endpoints and every edge.
double profilePathLength(const KnifeEdgeProfile& profile);

/// Mean excess loss of foliage in dB per meter at `frequencyHz`.
double foliageLossPerMeter(double frequencyHz);

double logDistancePower(double distance, const RadioConfig& cfg);

PowerResult nlosvPower(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg);

std::vector<Ray> nlosbRays(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg);

PowerResult nlosbPower(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg);

PowerResult largeScalePower(const LinkRecord& link, const WorldState& state, const RadioConfig& cfg);

}  // namespace v2v
