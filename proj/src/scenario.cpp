#include "v2v/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

namespace v2v {

namespace {

constexpr double kEarthRadius = 6371008.8;

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> splitFields(std::string_view line, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double parseDouble(const std::string& s, const char* what)
{
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(fmt::format("invalid {} '{}'", what, s));
    }
    if (!std::isfinite(v)) {
        throw std::invalid_argument(fmt::format("non-finite {} '{}'", what, s));
    }
    return v;
}

ObjectId parseId(const std::string& s)
{
    ObjectId v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(fmt::format("invalid id '{}'", s));
    }
    return v;
}

bool parseBool(const std::string& s)
{
    if (s == "on" || s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "off" || s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw std::invalid_argument(fmt::format("invalid flag '{}'", s));
}

bool isSkippable(const std::string& line)
{
    return line.empty() || line.front() == '#';
}

Point2 readPoint(double a, double b, const std::optional<Projection>& proj)
{
    return proj ? proj->toPlanar(a, b) : Point2{a, b};
}

}  // namespace

const char* toString(StaticKind kind)
{
    return kind == StaticKind::Building ? "building" : "foliage";
}

const char* toString(Environment env)
{
    return env == Environment::Urban ? "urban" : "open";
}

Vehicle::Vehicle(ObjectId id, Point2 center, double heading, double length, double width, double height,
                 std::optional<double> antennaHeight)
    : id_(id),
      center_(center),
      heading_(heading),
      length_(length),
      width_(width),
      height_(height),
      antennaHeight_(antennaHeight.value_or(height + DefaultVehicleSize::antennaOffset)),
      outline_(Polygon2::orientedRectangle(center, heading, length, width))
{
    if (!(height > 0.0)) {
        throw GeometryError("vehicle height must be positive");
    }
    if (!(antennaHeight_ > 0.0)) {
        throw GeometryError("antenna height must be positive");
    }
    if (!std::isfinite(heading)) {
        throw GeometryError("non-finite heading");
    }
}

double RadioConfig::referencePathLoss() const
{
    if (plD0) {
        return *plD0;
    }
    return 20.0 * std::log10(4.0 * std::numbers::pi / wavelength());
}

double RadioConfig::maxRadius() const
{
    return std::max({losRadius(), rNLOSv, rNLOSb});
}

void RadioConfig::validate() const
{
    if (!(frequency > 0.0)) {
        throw ConfigError("frequency must be positive");
    }
    for (double r : {rLOSurban, rLOSopen, rNLOSv, rNLOSb}) {
        if (!(r > 0.0)) {
            throw ConfigError("communication radii must be positive");
        }
    }
    for (const SigmaRange& s : {sigmaLOS, sigmaNLOSv, sigmaNLOSbRays, sigmaNLOSbNoRays}) {
        if (!(s.min >= 0.0) || !(s.min <= s.max)) {
            throw ConfigError("sigma ranges must satisfy 0 <= min <= max");
        }
    }
    if (nvMax && !(*nvMax > 0.0)) {
        throw ConfigError("NVmax must be positive");
    }
    if (asMax && !(*asMax > 0.0)) {
        throw ConfigError("ASmax must be positive");
    }
    if (geographicInput && !(originLat && originLon)) {
        throw ConfigError("geographic coordinates require originLat and originLon");
    }
}

void setConfigValue(RadioConfig& cfg, const std::string& key, const std::string& value)
{
    static const std::unordered_map<std::string, std::function<void(RadioConfig&, const std::string&)>> setters = {
        {"frequency", [](auto& c, auto& v) { c.frequency = parseDouble(v, "frequency"); }},
        {"txPower", [](auto& c, auto& v) { c.txPower = parseDouble(v, "txPower"); }},
        {"antennaGainTx", [](auto& c, auto& v) { c.antennaGainTx = parseDouble(v, "antennaGainTx"); }},
        {"antennaGainRx", [](auto& c, auto& v) { c.antennaGainRx = parseDouble(v, "antennaGainRx"); }},
        {"receptionThreshold", [](auto& c, auto& v) { c.receptionThreshold = parseDouble(v, "receptionThreshold"); }},
        {"epsilonRGround", [](auto& c, auto& v) { c.epsilonRGround = parseDouble(v, "epsilonRGround"); }},
        {"epsilonRWall", [](auto& c, auto& v) { c.epsilonRWall = parseDouble(v, "epsilonRWall"); }},
        {"gammaNLOSb", [](auto& c, auto& v) { c.gammaNLOSb = parseDouble(v, "gammaNLOSb"); }},
        {"PLd0", [](auto& c, auto& v) { c.plD0 = parseDouble(v, "PLd0"); }},
        {"rLOSurban", [](auto& c, auto& v) { c.rLOSurban = parseDouble(v, "rLOSurban"); }},
        {"rLOSopen", [](auto& c, auto& v) { c.rLOSopen = parseDouble(v, "rLOSopen"); }},
        {"rNLOSv", [](auto& c, auto& v) { c.rNLOSv = parseDouble(v, "rNLOSv"); }},
        {"rNLOSb", [](auto& c, auto& v) { c.rNLOSb = parseDouble(v, "rNLOSb"); }},
        {"sigmaLOSmin", [](auto& c, auto& v) { c.sigmaLOS.min = parseDouble(v, "sigmaLOSmin"); }},
        {"sigmaLOSmax", [](auto& c, auto& v) { c.sigmaLOS.max = parseDouble(v, "sigmaLOSmax"); }},
        {"sigmaNLOSvmin", [](auto& c, auto& v) { c.sigmaNLOSv.min = parseDouble(v, "sigmaNLOSvmin"); }},
        {"sigmaNLOSvmax", [](auto& c, auto& v) { c.sigmaNLOSv.max = parseDouble(v, "sigmaNLOSvmax"); }},
        {"sigmaNLOSbminRays", [](auto& c, auto& v) { c.sigmaNLOSbRays.min = parseDouble(v, "sigmaNLOSbminRays"); }},
        {"sigmaNLOSbminNoRays",
         [](auto& c, auto& v) { c.sigmaNLOSbNoRays.min = parseDouble(v, "sigmaNLOSbminNoRays"); }},
        {"sigmaNLOSbmax",
         [](auto& c, auto& v) { c.sigmaNLOSbRays.max = c.sigmaNLOSbNoRays.max = parseDouble(v, "sigmaNLOSbmax"); }},
        {"NVmax", [](auto& c, auto& v) { c.nvMax = parseDouble(v, "NVmax"); }},
        {"ASmax", [](auto& c, auto& v) { c.asMax = parseDouble(v, "ASmax"); }},
        {"environment",
         [](auto& c, auto& v) {
             if (v == "urban") {
                 c.environment = Environment::Urban;
             } else if (v == "open") {
                 c.environment = Environment::Open;
             } else {
                 throw std::invalid_argument(fmt::format("invalid environment '{}'", v));
             }
         }},
        {"nlosbRays", [](auto& c, auto& v) { c.nlosbRays = parseBool(v); }},
        {"tallVehicleHeightThreshold",
         [](auto& c, auto& v) { c.tallVehicleHeightThreshold = parseDouble(v, "tallVehicleHeightThreshold"); }},
        {"originLat", [](auto& c, auto& v) { c.originLat = parseDouble(v, "originLat"); }},
        {"originLon", [](auto& c, auto& v) { c.originLon = parseDouble(v, "originLon"); }},
        {"coordinates",
         [](auto& c, auto& v) {
             if (v != "planar" && v != "geographic") {
                 throw std::invalid_argument(fmt::format("invalid coordinates '{}'", v));
             }
             c.geographicInput = v == "geographic";
         }},
        {"staticObjects", [](auto& c, auto& v) { c.staticObjectsPath = v; }},
        {"trace", [](auto& c, auto& v) { c.tracePath = v; }},
        {"seed",
         [](auto& c, auto& v) {
             std::uint64_t s = 0;
             auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
             if (ec != std::errc{} || p != v.data() + v.size()) {
                 throw std::invalid_argument(fmt::format("invalid seed '{}'", v));
             }
             c.seed = s;
         }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
    try {
        it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

RadioConfig parseConfig(std::istream& in, RadioConfig cfg, const std::filesystem::path& baseDir)
{
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (isSkippable(t)) {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("config line {}: expected key=value", lineNo));
        }
        try {
            setConfigValue(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("config line {}: {}", lineNo, e.what()));
        }
    }
    for (std::string* p : {&cfg.staticObjectsPath, &cfg.tracePath}) {
        if (!p->empty() && std::filesystem::path(*p).is_relative() && !baseDir.empty()) {
            *p = (baseDir / *p).string();
        }
    }
    cfg.validate();
    return cfg;
}

RadioConfig loadConfig(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    }
    return parseConfig(in, RadioConfig{}, path.parent_path());
}

void writeConfigEcho(std::ostream& out, const RadioConfig& c)
{
    auto line = [&](std::string_view k, const auto& v) { out << fmt::format("{}={}\n", k, v); };
    line("frequency", c.frequency);
    line("txPower", c.txPower);
    line("antennaGainTx", c.antennaGainTx);
    line("antennaGainRx", c.antennaGainRx);
    line("receptionThreshold", c.receptionThreshold);
    line("epsilonRGround", c.epsilonRGround);
    line("epsilonRWall", c.epsilonRWall);
    line("gammaNLOSb", c.gammaNLOSb);
    line("PLd0", c.referencePathLoss());
    line("rLOSurban", c.rLOSurban);
    line("rLOSopen", c.rLOSopen);
    line("rNLOSv", c.rNLOSv);
    line("rNLOSb", c.rNLOSb);
    line("sigmaLOSmin", c.sigmaLOS.min);
    line("sigmaLOSmax", c.sigmaLOS.max);
    line("sigmaNLOSvmin", c.sigmaNLOSv.min);
    line("sigmaNLOSvmax", c.sigmaNLOSv.max);
    line("sigmaNLOSbminRays", c.sigmaNLOSbRays.min);
    line("sigmaNLOSbminNoRays", c.sigmaNLOSbNoRays.min);
    line("sigmaNLOSbmax", c.sigmaNLOSbRays.max);
    if (c.nvMax) {
        line("NVmax", *c.nvMax);
    }
    if (c.asMax) {
        line("ASmax", *c.asMax);
    }
    line("environment", toString(c.environment));
    line("nlosbRays", c.nlosbRays ? "on" : "off");
    line("tallVehicleHeightThreshold", c.tallVehicleHeightThreshold);
    if (c.originLat) {
        line("originLat", *c.originLat);
    }
    if (c.originLon) {
        line("originLon", *c.originLon);
    }
    line("coordinates", c.geographicInput ? "geographic" : "planar");
    if (!c.staticObjectsPath.empty()) {
        line("staticObjects", c.staticObjectsPath);
    }
    if (!c.tracePath.empty()) {
        line("trace", c.tracePath);
    }
    line("seed", c.seed);
}

Point2 Projection::toPlanar(double lon, double lat) const
{
    constexpr double deg = std::numbers::pi / 180.0;
    return {kEarthRadius * (lon - originLon) * deg * std::cos(originLat * deg),
            kEarthRadius * (lat - originLat) * deg};
}

std::pair<double, double> Projection::toLonLat(Point2 p) const
{
    constexpr double deg = std::numbers::pi / 180.0;
    return {originLon + p.x / (kEarthRadius * std::cos(originLat * deg)) / deg, originLat + p.y / kEarthRadius / deg};
}

std::optional<Projection> projectionFor(const RadioConfig& cfg)
{
    if (!cfg.geographicInput) {
        return std::nullopt;
    }
    return Projection{*cfg.originLat, *cfg.originLon};
}

ScenarioError::ScenarioError(std::string source, std::vector<Record> records)
    : std::runtime_error([&] {
          std::string msg = fmt::format("{}: {} bad record(s)", source, records.size());
          for (const auto& r : records) {
              msg += fmt::format("\n  line {}: {}", r.line, r.message);
          }
          return msg;
      }()),
      records_(std::move(records))
{
}

std::vector<StaticObject> loadStaticObjects(std::istream& in, const std::optional<Projection>& proj,
                                            const std::string& sourceName)
{
    std::vector<StaticObject> out;
    std::vector<ScenarioError::Record> errors;
    std::unordered_set<ObjectId> ids;
    std::string line;
    std::size_t lineNo = 0;
    bool headerSeen = false;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (isSkippable(t)) {
            continue;
        }
        if (!headerSeen) {
            headerSeen = true;
            if (t.rfind("id", 0) == 0) {
                continue;
            }
        }
        try {
            const auto f = splitFields(t, ',');
            if (f.size() != 4) {
                throw std::invalid_argument(fmt::format("expected 4 fields, got {}", f.size()));
            }
            const ObjectId id = parseId(f[0]);
            StaticKind kind;
            if (f[1] == "building") {
                kind = StaticKind::Building;
            } else if (f[1] == "foliage") {
                kind = StaticKind::Foliage;
            } else {
                throw std::invalid_argument(fmt::format("unknown kind '{}'", f[1]));
            }
            std::optional<double> height;
            if (!f[2].empty()) {
                height = parseDouble(f[2], "height");
            }
            std::istringstream coords(f[3]);
            std::vector<double> values;
            std::string tok;
            while (coords >> tok) {
                values.push_back(parseDouble(tok, "coordinate"));
            }
            if (values.size() % 2 != 0) {
                throw std::invalid_argument("odd number of coordinates");
            }
            std::vector<Point2> ring;
            for (std::size_t i = 0; i < values.size(); i += 2) {
                ring.push_back(readPoint(values[i], values[i + 1], proj));
            }
            Polygon2 poly(std::move(ring));
            if (!ids.insert(id).second) {
                throw std::invalid_argument(fmt::format("duplicate id {}", id));
            }
            out.push_back(StaticObject{id, kind, std::move(poly), height});
        } catch (const std::invalid_argument& e) {
            errors.push_back({lineNo, e.what()});
        }
    }
    if (!errors.empty()) {
        throw ScenarioError(sourceName, std::move(errors));
    }
    return out;
}

std::vector<StaticObject> loadStaticObjects(const std::filesystem::path& path, const std::optional<Projection>& proj)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(path.string(), {{0, "cannot open file"}});
    }
    return loadStaticObjects(in, proj, path.string());
}

void writeStaticObjects(std::ostream& out, const std::vector<StaticObject>& objects)
{
    out << "id,kind,height,coordinates\n";
    for (const auto& o : objects) {
        out << fmt::format("{},{},", o.id, toString(o.kind));
        if (o.height) {
            out << fmt::format("{}", *o.height);
        }
        out << ',';
        const auto v = o.outline.vertices();
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << fmt::format("{}{} {}", i ? " " : "", v[i].x, v[i].y);
        }
        out << '\n';
    }
}

Trace::TimeKey Trace::keyFor(double seconds)
{
    return static_cast<TimeKey>(std::llround(seconds * 1000.0));
}

void Trace::add(double time, Vehicle v)
{
    auto& step = steps_[keyFor(time)];
    for (const auto& existing : step) {
        if (existing.id() == v.id()) {
            throw std::invalid_argument(fmt::format("duplicate (time, id) = ({}, {})", time, v.id()));
        }
    }
    step.push_back(std::move(v));
}

std::vector<double> Trace::times() const
{
    std::vector<double> out;
    out.reserve(steps_.size());
    for (const auto& [k, _] : steps_) {
        out.push_back(static_cast<double>(k) / 1000.0);
    }
    return out;
}

const std::vector<Vehicle>& Trace::at(double time) const
{
    const auto it = steps_.find(keyFor(time));
    if (it == steps_.end()) {
        throw std::out_of_range(fmt::format("no trace timestep at t={}", time));
    }
    return it->second;
}

Trace loadTrace(std::istream& in, const std::optional<Projection>& proj, const std::string& sourceName)
{
    Trace trace;
    std::vector<ScenarioError::Record> errors;
    std::string line;
    std::size_t lineNo = 0;
    bool headerSeen = false;
    while (std::getline(in, line)) {
        ++lineNo;
        const std::string t = trim(line);
        if (isSkippable(t)) {
            continue;
        }
        if (!headerSeen) {
            headerSeen = true;
            if (t.rfind("time", 0) == 0) {
                continue;
            }
        }
        try {
            auto f = splitFields(t, ',');
            if (f.size() < 4 || f.size() > 9) {
                throw std::invalid_argument(fmt::format("expected 4..9 fields, got {}", f.size()));
            }
            f.resize(9);
            const double time = parseDouble(f[0], "time");
            const ObjectId id = parseId(f[1]);
            const Point2 c = readPoint(parseDouble(f[2], "x"), parseDouble(f[3], "y"), proj);
            auto opt = [&](std::size_t i, const char* what) {
                return f[i].empty() ? std::nullopt : std::optional<double>(parseDouble(f[i], what));
            };
            const double heading = opt(4, "heading").value_or(0.0);
            const double length = opt(5, "length").value_or(DefaultVehicleSize::length);
            const double width = opt(6, "width").value_or(DefaultVehicleSize::width);
            const double height = opt(7, "height").value_or(DefaultVehicleSize::height);
            trace.add(time, Vehicle(id, c, heading, length, width, height, opt(8, "antennaHeight")));
        } catch (const std::invalid_argument& e) {
            errors.push_back({lineNo, e.what()});
        }
    }
    if (!errors.empty()) {
        throw ScenarioError(sourceName, std::move(errors));
    }
    return trace;
}

Trace loadTrace(const std::filesystem::path& path, const std::optional<Projection>& proj)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(path.string(), {{0, "cannot open file"}});
    }
    return loadTrace(in, proj, path.string());
}

void writeTrace(std::ostream& out, const Trace& trace)
{
    out << "time,id,x,y,heading,length,width,height,antennaHeight\n";
    for (const auto& [key, vehicles] : trace.steps()) {
        for (const auto& v : vehicles) {
            out << fmt::format("{},{},{},{},{},{},{},{},{}\n", static_cast<double>(key) / 1000.0, v.id(),
                               v.center().x, v.center().y, v.heading(), v.length(), v.width(), v.height(),
                               v.antennaHeight());
        }
    }
}

StaticScene::StaticScene(std::vector<StaticObject> objects) : objects_(std::move(objects))
{
    std::vector<RTreeEntry> entries;
    entries.reserve(objects_.size());
    for (std::size_t i = 0; i < objects_.size(); ++i) {
        index_.emplace(objects_[i].id, i);
        entries.push_back({objects_[i].id, Rect::around(objects_[i].outline)});
    }
    tree_ = RTree::build(std::move(entries));
}

WorldState::WorldState(double time, std::vector<Vehicle> vehicles, std::shared_ptr<const StaticScene> scene)
    : time_(time), vehicles_(std::move(vehicles)), scene_(std::move(scene))
{
    std::vector<RTreeEntry> entries;
    entries.reserve(vehicles_.size());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        if (!index_.emplace(vehicles_[i].id(), i).second) {
            throw std::invalid_argument(fmt::format("duplicate vehicle id {}", vehicles_[i].id()));
        }
        entries.push_back({vehicles_[i].id(), Rect::around(vehicles_[i].outline())});
    }
    vehicleTree_ = RTree::build(std::move(entries));
}

DensityReferences deriveDensityReferences(const StaticScene& scene, const Trace& trace)
{
    constexpr double cell = 1000.0;
    auto cellOf = [](Point2 p) {
        return std::pair{static_cast<std::int64_t>(std::floor(p.x / cell)),
                         static_cast<std::int64_t>(std::floor(p.y / cell))};
    };
    std::size_t maxCount = 0;
    for (const auto& [_, vehicles] : trace.steps()) {
        std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> counts;
        for (const auto& v : vehicles) {
            maxCount = std::max(maxCount, ++counts[cellOf(v.center())]);
        }
    }
    std::map<std::pair<std::int64_t, std::int64_t>, double> areas;
    double maxArea = 0.0;
    for (const auto& o : scene.objects()) {
        maxArea = std::max(maxArea, areas[cellOf(o.outline.centroid())] += o.outline.area());
    }
    // floors keep the references positive for scenes without vehicles or static objects
    return {std::max(1.0, static_cast<double>(maxCount)), std::max(1e-6, maxArea / (cell * cell))};
}

Scenario::Scenario(RadioConfig cfg, std::vector<StaticObject> statics, Trace trace)
    : cfg_(std::move(cfg)),
      scene_(std::make_shared<const StaticScene>(std::move(statics))),
      trace_(std::move(trace))
{
    if (!cfg_.nvMax || !cfg_.asMax) {
        const auto refs = deriveDensityReferences(*scene_, trace_);
        if (!cfg_.nvMax) {
            cfg_.nvMax = refs.nvMax;
        }
        if (!cfg_.asMax) {
            cfg_.asMax = refs.asMax;
        }
    }
    cfg_.validate();
}

Scenario Scenario::load(const RadioConfig& cfg)
{
    const auto proj = projectionFor(cfg);
    std::vector<StaticObject> statics;
    if (!cfg.staticObjectsPath.empty()) {
        statics = loadStaticObjects(std::filesystem::path(cfg.staticObjectsPath), proj);
    }
    if (cfg.tracePath.empty()) {
        throw ConfigError("config does not name a trace file");
    }
    Trace trace = loadTrace(std::filesystem::path(cfg.tracePath), proj);
    return Scenario(cfg, std::move(statics), std::move(trace));
}

WorldState Scenario::stepState(double time) const
{
    return WorldState(static_cast<double>(Trace::keyFor(time)) / 1000.0, trace_.at(time), scene_);
}

}  // namespace v2v
