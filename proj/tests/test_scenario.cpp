#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "v2v/scenario.hpp"

using namespace v2v;

TEST_CASE("static objects load, validate, and report bad records")
{
    std::istringstream one("id,kind,height,coordinates\n1,building,12,0 0 1 0 1 1 0 1\n");
    const auto objs = loadStaticObjects(one);
    REQUIRE(objs.size() == 1);
    CHECK((objs[0].kind == StaticKind::Building));
    CHECK(objs[0].outline.area() == doctest::Approx(1.0));
    CHECK(*objs[0].height == 12.0);

    std::istringstream bad("1,building,,0 0 1 0\n2,shrub,,0 0 1 0 1 1\n3,foliage,,0 0 4 4 4 0 0 2\n4,foliage,,0 0 5 0 5 5\n");
    try {
        loadStaticObjects(bad, std::nullopt, "objects.csv");
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        REQUIRE(e.records().size() == 3);
        CHECK(e.records()[0].line == 1);
        CHECK(e.records()[0].message.find("degenerate polygon") != std::string::npos);
        CHECK(e.records()[1].message.find("unknown kind") != std::string::npos);
        CHECK(e.records()[2].message.find("self-intersecting") != std::string::npos);
        CHECK(std::string(e.what()).find("objects.csv") != std::string::npos);
    }
}

TEST_CASE("static objects round-trip")
{
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::vector<StaticObject> objs;
    for (int i = 0; i < 50; ++i) {
        const double x = u(gen);
        const double y = u(gen);
        objs.push_back({i, i % 3 ? StaticKind::Building : StaticKind::Foliage,
                        Polygon2({{x, y}, {x + 10.123456, y}, {x + 3.3, y + 7.77}}),
                        i % 2 ? std::optional<double>(u(gen)) : std::nullopt});
    }
    std::stringstream buf;
    writeStaticObjects(buf, objs);
    const auto back = loadStaticObjects(buf);
    REQUIRE(back.size() == objs.size());
    for (std::size_t i = 0; i < objs.size(); ++i) {
        CHECK(back[i].id == objs[i].id);
        CHECK((back[i].kind == objs[i].kind));
        CHECK(back[i].height == objs[i].height);
        for (std::size_t k = 0; k < objs[i].outline.size(); ++k) {
            CHECK(distance(back[i].outline.vertices()[k], objs[i].outline.vertices()[k]) <= 1e-6);
        }
    }
}

TEST_CASE("trace loading, defaults, and errors")
{
    std::istringstream in("time,id,x,y,heading,length,width,height,antennaHeight\n"
                          "0,1,0,0\n"
                          "0,2,50,0,0,6,2,2,\n"
                          "0.5,1,10,0\n");
    const Trace trace = loadTrace(in);
    CHECK(trace.times() == std::vector<double>{0.0, 0.5});
    const auto& first = trace.at(0.0);
    REQUIRE(first.size() == 2);
    CHECK(first[0].length() == DefaultVehicleSize::length);
    CHECK(first[0].width() == DefaultVehicleSize::width);
    CHECK(first[0].height() == DefaultVehicleSize::height);
    CHECK(first[0].antennaHeight() == doctest::Approx(DefaultVehicleSize::height + 0.01));
    CHECK(first[1].height() == 2.0);
    // vehicle 2 is absent at t = 0.5
    CHECK(trace.at(0.5).size() == 1);
    CHECK_THROWS_AS(trace.at(0.25), std::out_of_range);

    std::istringstream dup("0,1,0,0\n0,1,5,5\n0,2,nan,0\n");
    try {
        loadTrace(dup);
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK(e.records().size() == 2);
        CHECK(e.records()[0].line == 2);
    }
}

TEST_CASE("trace round-trip")
{
    Trace trace;
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int t = 0; t < 3; ++t) {
        for (int id = 0; id < 10; ++id) {
            trace.add(t * 0.1, Vehicle(id, {u(gen), u(gen)}, u(gen) / 30, 4 + u(gen) / 50, 1.5 + u(gen) / 100,
                                       1 + u(gen) / 50));
        }
    }
    std::stringstream buf;
    writeTrace(buf, trace);
    const Trace back = loadTrace(buf);
    CHECK(back.times() == trace.times());
    for (double t : trace.times()) {
        const auto& a = trace.at(t);
        const auto& b = back.at(t);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(distance(a[i].center(), b[i].center()) <= 1e-6);
            CHECK(a[i].heading() == b[i].heading());
            CHECK(a[i].antennaHeight() == b[i].antennaHeight());
        }
    }
}

TEST_CASE("config parsing, overrides, and echo")
{
    std::istringstream in("# comment\nfrequency = 5.9e9\ntxPower=20\nenvironment=open\nnlosbRays=off\nNVmax=150\n");
    const RadioConfig cfg = parseConfig(in);
    CHECK(cfg.txPower == 20.0);
    CHECK((cfg.environment == Environment::Open));
    CHECK(cfg.losRadius() == 1000.0);
    CHECK_FALSE(cfg.nlosbRays);
    CHECK(*cfg.nvMax == 150.0);
    CHECK(cfg.referencePathLoss() == doctest::Approx(47.8648).epsilon(1e-5));

    std::ostringstream echo;
    writeConfigEcho(echo, cfg);
    std::istringstream again(echo.str());
    const RadioConfig back = parseConfig(again);
    CHECK(back.txPower == cfg.txPower);
    CHECK((back.environment == cfg.environment));
    CHECK(back.nlosbRays == cfg.nlosbRays);
    CHECK(*back.plD0 == cfg.referencePathLoss());

    std::istringstream unknown("bogus=1\n");
    CHECK_THROWS_AS(parseConfig(unknown), ConfigError);
    std::istringstream badValue("txPower=loud\n");
    CHECK_THROWS_AS(parseConfig(badValue), ConfigError);
    std::istringstream badSigma("sigmaLOSmin=6\n");
    CHECK_THROWS_AS(parseConfig(badSigma), ConfigError);
    std::istringstream badRadius("rNLOSb=0\n");
    CHECK_THROWS_AS(parseConfig(badRadius), ConfigError);
}

TEST_CASE("geographic projection round-trip")
{
    const Projection p{41.15, -8.61};
    const Point2 q = p.toPlanar(-8.60, 41.16);
    CHECK(q.x == doctest::Approx(838.).epsilon(0.01));
    CHECK(q.y == doctest::Approx(1112.).epsilon(0.01));
    const auto [lon, lat] = p.toLonLat(q);
    CHECK(lon == doctest::Approx(-8.60).epsilon(1e-12));
    CHECK(lat == doctest::Approx(41.16).epsilon(1e-12));
}

TEST_CASE("world state per timestep")
{
    std::vector<StaticObject> statics;
    for (int i = 0; i < 20; ++i) {
        statics.push_back({i, StaticKind::Building, Polygon2::orientedRectangle({i * 50.0, 0}, 0, 20, 20), 10.0});
    }
    Trace trace;
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 1000.0);
    std::vector<Vehicle> fleet;
    for (int id = 0; id < 200; ++id) {
        fleet.emplace_back(id, Point2{u(gen), u(gen)}, 0.0, 4.5, 1.8, 1.5);
    }
    for (const auto& v : fleet) {
        trace.add(0.0, v);
        trace.add(1.0, v);
    }
    const Scenario scenario(RadioConfig{}, statics, trace);
    CHECK(scenario.config().nvMax.has_value());
    CHECK(scenario.config().asMax.has_value());

    const WorldState s0 = scenario.stepState(0.0);
    const WorldState s1 = scenario.stepState(1.0);
    CHECK(s0.staticTree().size() == statics.size());
    CHECK(&s0.staticTree() == &s1.staticTree());
    REQUIRE(s0.vehicleTree().entries().size() == s1.vehicleTree().entries().size());
    for (std::size_t i = 0; i < s0.vehicleTree().entries().size(); ++i) {
        CHECK(s0.vehicleTree().entries()[i].id == s1.vehicleTree().entries()[i].id);
        CHECK(s0.vehicleTree().entries()[i].rect == s1.vehicleTree().entries()[i].rect);
    }
    CHECK_THROWS_AS(scenario.stepState(2.0), std::out_of_range);

    std::vector<RTreeEntry> entries;
    for (const auto& v : fleet) {
        entries.push_back({v.id(), Rect::around(v.outline())});
    }
    for (int q = 0; q < 30; ++q) {
        const Point2 a{u(gen), u(gen)};
        const Point2 b{u(gen), u(gen)};
        const auto got = s0.vehicleTree().querySegment({a, b});
        CHECK(std::set<ObjectId>(got.begin(), got.end()) == oracle::scanSegment(entries, a, b));
    }
}

TEST_CASE("density references from a 1 km grid")
{
    std::vector<StaticObject> statics{
        {1, StaticKind::Building, Polygon2::orientedRectangle({100, 100}, 0, 100, 100), 10.0},
        {2, StaticKind::Building, Polygon2::orientedRectangle({300, 300}, 0, 100, 100), 10.0},
        {3, StaticKind::Building, Polygon2::orientedRectangle({1500, 100}, 0, 100, 100), 10.0}};
    Trace trace;
    for (int i = 0; i < 5; ++i) {
        trace.add(0.0, Vehicle(i, {10.0 * i + 5, 5}, 0, 4, 1.8, 1.5));
    }
    trace.add(1.0, Vehicle(9, {1200, 5}, 0, 4, 1.8, 1.5));
    const auto refs = deriveDensityReferences(StaticScene(statics), trace);
    CHECK(refs.nvMax == 5.0);
    CHECK(refs.asMax == doctest::Approx(0.02));

    const auto empty = deriveDensityReferences(StaticScene({}), Trace{});
    CHECK(empty.nvMax > 0.0);
    CHECK(empty.asMax > 0.0);
}

TEST_CASE("large synthetic inputs load and index")
{
    std::ostringstream objs;
    for (int i = 0; i < 17346; ++i) {
        const double x = (i % 150) * 40.0;
        const double y = (i / 150) * 40.0;
        objs << i << ",building,10," << x << ' ' << y << ' ' << x + 20 << ' ' << y << ' ' << x + 20 << ' ' << y + 20
             << ' ' << x << ' ' << y + 20 << '\n';
    }
    std::istringstream objIn(objs.str());
    const StaticScene scene(loadStaticObjects(objIn));
    CHECK(scene.tree().size() == 17346);

    std::ostringstream tr;
    for (int i = 0; i < 10566; ++i) {
        tr << "0," << i << ',' << (i % 100) * 30.0 + 5 << ',' << (i / 100) * 30.0 + 5 << '\n';
    }
    std::istringstream trIn(tr.str());
    const Trace trace = loadTrace(trIn);
    const WorldState state(0.0, trace.at(0.0), std::make_shared<const StaticScene>(scene));
    CHECK(state.vehicleTree().size() == 10566);
}
