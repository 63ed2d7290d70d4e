#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "v2v/geometry.hpp"
#include "v2v/rtree.hpp"

namespace v2v {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class StaticKind { Building, Foliage };
enum class Environment { Urban, Open };

const char* toString(StaticKind kind);
const char* toString(Environment env);

struct StaticObject {
    ObjectId id;
    StaticKind kind;
    Polygon2 outline;
    std::optional<double> height;
};

/// Default vehicle dimensions, a compact sedan.
struct DefaultVehicleSize {
    static constexpr double height = 1.466;
    static constexpr double width = 1.762;
    static constexpr double length = 4.539;
    static constexpr double antennaOffset = 0.01;
};

/**
 * A vehicle at one instant: oriented rectangle outline plus antenna height.
 * The antenna sits at the outline centroid.
 */
class Vehicle {
public:
    Vehicle(ObjectId id, Point2 center, double heading, double length, double width, double height,
            std::optional<double> antennaHeight = std::nullopt);

    ObjectId id() const { return id_; }
    Point2 center() const { return center_; }
    double heading() const { return heading_; }
    double length() const { return length_; }
    double width() const { return width_; }
    double height() const { return height_; }
    double antennaHeight() const { return antennaHeight_; }
    Point2 antenna() const { return center_; }
    const Polygon2& outline() const { return outline_; }

    bool canTransmit = true;
    bool canReceive = true;

private:
    ObjectId id_;
    Point2 center_;
    double heading_;
    double length_;
    double width_;
    double height_;
    double antennaHeight_;
    Polygon2 outline_;
};

struct SigmaRange {
    double min;
    double max;
};

/// Radio parameters and model constants. Every field is overridable from a config file.
struct RadioConfig {
    double frequency = 5.9e9;           // Hz
    double txPower = 10.0;              // dBm
    double antennaGainTx = 0.0;         // dBi
    double antennaGainRx = 0.0;         // dBi
    double receptionThreshold = -92.0;  // dBm
    double epsilonRGround = 1.003;
    double epsilonRWall = 4.5;
    double gammaNLOSb = 2.9;
    std::optional<double> plD0;  // dB at 1 m; free space when unset

    double rLOSurban = 500.0;
    double rLOSopen = 1000.0;
    double rNLOSv = 400.0;
    double rNLOSb = 300.0;

    SigmaRange sigmaLOS{3.3, 5.2};
    SigmaRange sigmaNLOSv{3.8, 5.3};
    SigmaRange sigmaNLOSbRays{0.0, 6.8};
    SigmaRange sigmaNLOSbNoRays{4.1, 6.8};

    std::optional<double> nvMax;  // vehicles per km^2
    std::optional<double> asMax;  // built-area fraction
    Environment environment = Environment::Urban;
    bool nlosbRays = true;
    double tallVehicleHeightThreshold = 2.0;

    // ingestion
    std::optional<double> originLat;
    std::optional<double> originLon;
    bool geographicInput = false;
    std::string staticObjectsPath;
    std::string tracePath;
    std::uint64_t seed = 0;

    double wavelength() const { return kSpeedOfLight / frequency; }
    double referencePathLoss() const;
    double losRadius() const { return environment == Environment::Urban ? rLOSurban : rLOSopen; }
    double maxRadius() const;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-record ingestion failure; what() lists every bad record with its line number.
class ScenarioError : public std::runtime_error {
public:
    struct Record {
        std::size_t line;
        std::string message;
    };
    ScenarioError(std::string source, std::vector<Record> records);
    const std::vector<Record>& records() const { return records_; }

private:
    std::vector<Record> records_;
};

/// Parses flat key=value lines on top of `base`. Relative input paths resolve against `baseDir`.
RadioConfig parseConfig(std::istream& in, RadioConfig base = {}, const std::filesystem::path& baseDir = {});
RadioConfig loadConfig(const std::filesystem::path& path);
/// Applies one key=value override; throws ConfigError on unknown keys or bad values.
void setConfigValue(RadioConfig& cfg, const std::string& key, const std::string& value);
/// Resolved-parameter dump in the same key=value syntax parseConfig reads.
void writeConfigEcho(std::ostream& out, const RadioConfig& cfg);

/// Equirectangular projection around a fixed origin (lon/lat degrees <-> local meters).
struct Projection {
    double originLat = 0.0;
    double originLon = 0.0;

    Point2 toPlanar(double lon, double lat) const;
    std::pair<double, double> toLonLat(Point2 p) const;
};

std::optional<Projection> projectionFor(const RadioConfig& cfg);

std::vector<StaticObject> loadStaticObjects(std::istream& in, const std::optional<Projection>& proj = std::nullopt,
                                            const std::string& sourceName = "static objects");
std::vector<StaticObject> loadStaticObjects(const std::filesystem::path& path,
                                            const std::optional<Projection>& proj = std::nullopt);
void writeStaticObjects(std::ostream& out, const std::vector<StaticObject>& objects);

/// Vehicle snapshots keyed by time, quantized to milliseconds.
class Trace {
public:
    using TimeKey = std::int64_t;

    static TimeKey keyFor(double seconds);

    void add(double time, Vehicle v);
    const std::map<TimeKey, std::vector<Vehicle>>& steps() const { return steps_; }
    std::vector<double> times() const;
    const std::vector<Vehicle>& at(double time) const;
    bool empty() const { return steps_.empty(); }

private:
    std::map<TimeKey, std::vector<Vehicle>> steps_;
};

Trace loadTrace(std::istream& in, const std::optional<Projection>& proj = std::nullopt,
                const std::string& sourceName = "trace");
Trace loadTrace(const std::filesystem::path& path, const std::optional<Projection>& proj = std::nullopt);
void writeTrace(std::ostream& out, const Trace& trace);

/// Static objects and their tree, built once per scenario.
class StaticScene {
public:
    explicit StaticScene(std::vector<StaticObject> objects);

    const std::vector<StaticObject>& objects() const { return objects_; }
    const RTree& tree() const { return tree_; }
    const StaticObject& byId(ObjectId id) const { return objects_[index_.at(id)]; }

private:
    std::vector<StaticObject> objects_;
    std::unordered_map<ObjectId, std::size_t> index_;
    RTree tree_;
};

/// Immutable snapshot handed to link workers.
class WorldState {
public:
    WorldState(double time, std::vector<Vehicle> vehicles, std::shared_ptr<const StaticScene> scene);

    double time() const { return time_; }
    const std::vector<Vehicle>& vehicles() const { return vehicles_; }
    const Vehicle& vehicle(ObjectId id) const { return vehicles_[index_.at(id)]; }
    const RTree& vehicleTree() const { return vehicleTree_; }
    const StaticScene& scene() const { return *scene_; }
    const RTree& staticTree() const { return scene_->tree(); }

private:
    double time_;
    std::vector<Vehicle> vehicles_;
    std::unordered_map<ObjectId, std::size_t> index_;
    RTree vehicleTree_;
    std::shared_ptr<const StaticScene> scene_;
};

struct DensityReferences {
    double nvMax;  // vehicles per km^2
    double asMax;  // built-area fraction
};

/// Maximum vehicle count and built-area fraction over 1 km^2 grid cells.
DensityReferences deriveDensityReferences(const StaticScene& scene, const Trace& trace);

/// A fully loaded scenario: configuration, static scene, and trace.
class Scenario {
public:
    Scenario(RadioConfig cfg, std::vector<StaticObject> statics, Trace trace);

    static Scenario load(const RadioConfig& cfg);

    const RadioConfig& config() const { return cfg_; }
    const std::shared_ptr<const StaticScene>& scene() const { return scene_; }
    const Trace& trace() const { return trace_; }

    /// Throws std::out_of_range for an unknown time.
    WorldState stepState(double time) const;

private:
    RadioConfig cfg_;
    std::shared_ptr<const StaticScene> scene_;
    Trace trace_;
};

}  // namespace v2v
