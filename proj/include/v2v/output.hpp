#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "v2v/engine.hpp"

namespace v2v {

/// One emitted line per link per timestep.
struct OutputRecord {
    double time = 0.0;
    ObjectId txId = 0;
    ObjectId rxId = 0;
    double distance = 0.0;  // 2D, meters
    LinkType linkType = LinkType::LOS;
    PowerModel modelUsed = PowerModel::TwoRay;
    double largeScalePower = 0.0;  // dBm
    double sigma = 0.0;            // dB
    double sampledPower = 0.0;     // dBm
    bool belowThreshold = false;

    friend bool operator==(const OutputRecord&, const OutputRecord&) = default;
};

OutputRecord toOutputRecord(const LinkResult& r);

class RecordWriter {
public:
    explicit RecordWriter(std::ostream& out);
    void write(const OutputRecord& r);

private:
    std::ostream& out_;
};

/// Parses a records file written by RecordWriter; throws ScenarioError listing malformed lines.
std::vector<OutputRecord> parseRecords(std::istream& in, const std::string& sourceName = "records");

std::optional<LinkType> linkTypeFromString(std::string_view s);

void writeRunReport(std::ostream& out, const RunReport& report);
void writeBenchReport(std::ostream& out, const std::vector<BenchRow>& rows);

struct OverlayLink {
    OutputRecord record;
    Point2 tx;
    Point2 rx;
};

struct OverlayFrame {
    double time = 0.0;
    std::vector<Vehicle> vehicles;
    std::vector<OverlayLink> links;
};

/// KML document with static outlines plus, per frame, vehicle outlines and one line per link.
/// Line color and receiver-end altitude grow with sampled power.
void writeOverlay(std::ostream& out, const std::vector<StaticObject>& statics, const std::vector<OverlayFrame>& frames,
                  const Projection& projection);

}  // namespace v2v
