#include <doctest.h>

#include <random>
#include <sstream>

#include "v2v/output.hpp"

using namespace v2v;

namespace {

std::size_t countOf(const std::string& haystack, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("records round-trip exactly")
{
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<OutputRecord> records;
    const PowerModel models[] = {PowerModel::TwoRay, PowerModel::KnifeEdgeNLOSv, PowerModel::RaysNLOSb,
                                 PowerModel::LogDistance, PowerModel::FoliageAugmented};
    for (int i = 0; i < 500; ++i) {
        OutputRecord r;
        r.time = std::abs(u(gen)) * 1e3;
        r.txId = i;
        r.rxId = 1000000 + i;
        r.distance = std::abs(u(gen)) * 500;
        r.linkType = static_cast<LinkType>(i % 3);
        r.modelUsed = models[i % 5];
        r.largeScalePower = -60 + 40 * u(gen);
        r.sigma = 3 + u(gen);
        r.sampledPower = r.largeScalePower + 1e-7 * u(gen);
        r.belowThreshold = i % 2 == 0;
        records.push_back(r);
    }
    std::stringstream buf;
    RecordWriter w(buf);
    for (const auto& r : records) {
        w.write(r);
    }
    CHECK(buf.str().rfind("time,txId,rxId,distance,linkType,modelUsed,largeScalePower,sigma,sampledPower,belowThreshold\n",
                          0) == 0);
    CHECK(parseRecords(buf) == records);

    std::istringstream bad("time,txId,rxId,distance,linkType,modelUsed,largeScalePower,sigma,sampledPower,belowThreshold\n"
                           "0,1,2,10,LOS,twoRay,-60,3,-61,0\n"
                           "0,1,2,10,LOSS,twoRay,-60,3,-61,0\n"
                           "0,1,2\n");
    try {
        parseRecords(bad);
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        REQUIRE(e.records().size() == 2);
        CHECK(e.records()[0].line == 3);
        CHECK(e.records()[1].line == 4);
    }
    CHECK((linkTypeFromString("NLOSv") == LinkType::NLOSv));
    CHECK_FALSE(linkTypeFromString("nlosv"));
}

TEST_CASE("run and bench reports")
{
    RunReport report;
    StepReport s;
    s.time = 0.5;
    s.links = 3;
    s.byType = {1, 1, 1};
    report.steps.push_back(s);
    std::ostringstream out;
    writeRunReport(out, report);
    CHECK(out.str().rfind("time,links,LOS,NLOSv,NLOSb,belowThreshold,failedLinks,", 0) == 0);
    CHECK(countOf(out.str(), "\n") == 2);
    CHECK(out.str().find("\n0.5,3,1,1,1,0,0,") != std::string::npos);

    std::ostringstream bench;
    writeBenchReport(bench, {BenchRow{}, BenchRow{}});
    CHECK(countOf(bench.str(), "\n") == 3);
}

TEST_CASE("overlay document")
{
    const Projection proj{41.15, -8.61};
    const std::vector<StaticObject> statics{
        {1, StaticKind::Building, Polygon2({{0, 0}, {10, 0}, {10, 10}, {0, 10}}), 12.0}};

    std::ostringstream empty;
    writeOverlay(empty, statics, {}, proj);
    const std::string e = empty.str();
    CHECK(e.rfind("<?xml", 0) == 0);
    CHECK(e.find("</kml>") != std::string::npos);
    CHECK(countOf(e, "<Polygon>") == 1);
    CHECK(countOf(e, "<LineString>") == 0);

    OverlayFrame frame;
    frame.time = 2.0;
    frame.vehicles = {Vehicle(1, {20, 0}, 0, 4.5, 1.8, 1.5), Vehicle(2, {80, 0}, 0, 4.5, 1.8, 1.5)};
    OutputRecord r;
    r.time = 2.0;
    r.txId = 1;
    r.rxId = 2;
    r.distance = 60;
    r.largeScalePower = -70.0;
    r.sampledPower = -71.25;
    frame.links.push_back({r, {20, 0}, {80, 0}});
    std::ostringstream one;
    writeOverlay(one, statics, {frame}, proj);
    const std::string o = one.str();
    CHECK(countOf(o, "<LineString>") == 1);
    CHECK(countOf(o, "<Polygon>") == 3);
    CHECK(o.find("-71.25 dBm") != std::string::npos);
    CHECK(o.find("-&gt;") != std::string::npos);
    CHECK(o.find(" -> ") == std::string::npos);
}
