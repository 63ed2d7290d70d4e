#include "v2v/output.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace v2v {

namespace {

constexpr const char* kRecordHeader =
    "time,txId,rxId,distance,linkType,modelUsed,largeScalePower,sigma,sampledPower,belowThreshold";

template <class T>
bool parseNumber(std::string_view s, T& out)
{
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> splitFields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

std::string xmlEscape(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        case '\'':
            out += "&apos;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

// KML colors are aabbggrr; cold blue for weak links through to red for strong ones
std::string powerColor(double dbm)
{
    const double t = std::clamp((dbm + 100.0) / 60.0, 0.0, 1.0);
    const auto r = static_cast<int>(std::lround(255.0 * t));
    const auto b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    const auto g = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(2.0 * t - 1.0))));
    return fmt::format("ff{:02x}{:02x}{:02x}", b, g, r);
}

double powerAltitude(double dbm)
{
    return std::clamp(dbm + 110.0, 0.0, 100.0);
}

void writeRing(std::ostream& out, const Polygon2& poly, const Projection& proj, double altitude)
{
    out << "<Polygon>";
    if (altitude > 0.0) {
        out << "<extrude>1</extrude><altitudeMode>relativeToGround</altitudeMode>";
    }
    out << "<outerBoundaryIs><LinearRing><coordinates>";
    const auto v = poly.vertices();
    for (std::size_t i = 0; i <= v.size(); ++i) {
        const auto [lon, lat] = proj.toLonLat(v[i % v.size()]);
        fmt::print(out, "{:.8f},{:.8f},{} ", lon, lat, altitude);
    }
    out << "</coordinates></LinearRing></outerBoundaryIs></Polygon>";
}

}  // namespace

OutputRecord toOutputRecord(const LinkResult& r)
{
    return {r.link.time,       r.link.txId,  r.link.rxId,     r.link.distance2D, r.link.linkType(),
            r.power.model,     r.power.powerDbm, r.sigma,     r.sampledPower,    r.belowThreshold};
}

RecordWriter::RecordWriter(std::ostream& out) : out_(out)
{
    out_ << kRecordHeader << '\n';
}

void RecordWriter::write(const OutputRecord& r)
{
    fmt::print(out_, "{},{},{},{},{},{},{},{},{},{}\n", r.time, r.txId, r.rxId, r.distance, toString(r.linkType),
               toString(r.modelUsed), r.largeScalePower, r.sigma, r.sampledPower, r.belowThreshold ? 1 : 0);
}

std::optional<LinkType> linkTypeFromString(std::string_view s)
{
    for (auto t : {LinkType::LOS, LinkType::NLOSv, LinkType::NLOSb}) {
        if (s == toString(t)) {
            return t;
        }
    }
    return std::nullopt;
}

std::vector<OutputRecord> parseRecords(std::istream& in, const std::string& sourceName)
{
    std::vector<OutputRecord> out;
    std::vector<ScenarioError::Record> errors;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || (lineNo == 1 && line == kRecordHeader)) {
            continue;
        }
        const auto f = splitFields(line);
        if (f.size() != 10) {
            errors.push_back({lineNo, fmt::format("expected 10 fields, found {}", f.size())});
            continue;
        }
        OutputRecord r;
        const auto type = linkTypeFromString(f[4]);
        const auto model = powerModelFromString(f[5]);
        int below = 0;
        if (!parseNumber(f[0], r.time) || !parseNumber(f[1], r.txId) || !parseNumber(f[2], r.rxId) ||
            !parseNumber(f[3], r.distance) || !type || !model || !parseNumber(f[6], r.largeScalePower) ||
            !parseNumber(f[7], r.sigma) || !parseNumber(f[8], r.sampledPower) || !parseNumber(f[9], below) ||
            (below != 0 && below != 1)) {
            errors.push_back({lineNo, "malformed field"});
            continue;
        }
        r.linkType = *type;
        r.modelUsed = *model;
        r.belowThreshold = below == 1;
        out.push_back(r);
    }
    if (!errors.empty()) {
        throw ScenarioError(sourceName, std::move(errors));
    }
    return out;
}

void writeRunReport(std::ostream& out, const RunReport& report)
{
    out << "time,links,LOS,NLOSv,NLOSb,belowThreshold,failedLinks,treeBuild,classification,largeScale,smallScale,"
           "total\n";
    for (const auto& s : report.steps) {
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{}\n", s.time, s.links, s.byType[0], s.byType[1],
                   s.byType[2], s.belowThreshold, s.failedLinks, s.timings.treeBuild, s.timings.classification,
                   s.timings.largeScale, s.timings.smallScale, s.timings.total);
    }
}

void writeBenchReport(std::ostream& out, const std::vector<BenchRow>& rows)
{
    out << "objects,links,LOS,NLOSv,NLOSb,belowThreshold,treeBuild,classification,largeScale,smallScale,total\n";
    for (const auto& r : rows) {
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{}\n", r.objects, r.links, r.byType[0], r.byType[1],
                   r.byType[2], r.belowThreshold, r.timings.treeBuild, r.timings.classification,
                   r.timings.largeScale, r.timings.smallScale, r.timings.total);
    }
}

void writeOverlay(std::ostream& out, const std::vector<StaticObject>& statics, const std::vector<OverlayFrame>& frames,
                  const Projection& projection)
{
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<kml xmlns=\"http://www.opengis.net/kml/2.2\">\n<Document>\n<name>received power</name>\n"
           "<Style id=\"building\"><LineStyle><color>ff404040</color></LineStyle>"
           "<PolyStyle><color>99b0b0b0</color></PolyStyle></Style>\n"
           "<Style id=\"foliage\"><PolyStyle><color>9900a000</color></PolyStyle></Style>\n"
           "<Style id=\"vehicle\"><PolyStyle><color>ffffffff</color></PolyStyle></Style>\n";

    out << "<Folder><name>static objects</name>\n";
    for (const auto& s : statics) {
        fmt::print(out, "<Placemark><name>{} {}</name><styleUrl>#{}</styleUrl>", toString(s.kind), s.id,
                   s.kind == StaticKind::Building ? "building" : "foliage");
        writeRing(out, s.outline, projection, s.height.value_or(0.0));
        out << "</Placemark>\n";
    }
    out << "</Folder>\n";

    for (const auto& frame : frames) {
        fmt::print(out, "<Folder><name>t={}</name>\n", frame.time);
        for (const auto& v : frame.vehicles) {
            fmt::print(out, "<Placemark><name>vehicle {}</name><styleUrl>#vehicle</styleUrl>", v.id());
            writeRing(out, v.outline(), projection, 0.0);
            out << "</Placemark>\n";
        }
        for (const auto& l : frame.links) {
            const auto& r = l.record;
            const auto [lon0, lat0] = projection.toLonLat(l.tx);
            const auto [lon1, lat1] = projection.toLonLat(l.rx);
            const std::string description = xmlEscape(
                fmt::format("{} -> {}: {} via {}, sampled power {:.2f} dBm (large-scale {:.2f} dBm, sigma {:.2f} dB)",
                            r.txId, r.rxId, toString(r.linkType), toString(r.modelUsed), r.sampledPower,
                            r.largeScalePower, r.sigma));
            fmt::print(out,
                       "<Placemark><name>{}-{}</name><description>{}</description>"
                       "<Style><LineStyle><color>{}</color><width>2</width></LineStyle></Style>"
                       "<LineString><altitudeMode>relativeToGround</altitudeMode><coordinates>"
                       "{:.8f},{:.8f},0 {:.8f},{:.8f},{:.2f}</coordinates></LineString></Placemark>\n",
                       r.txId, r.rxId, description, powerColor(r.sampledPower), lon0, lat0, lon1, lat1,
                       powerAltitude(r.sampledPower));
        }
        out << "</Folder>\n";
    }
    out << "</Document>\n</kml>\n";
}

}  // namespace v2v
