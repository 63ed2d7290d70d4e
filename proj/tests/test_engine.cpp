#include <doctest.h>

#include <cstdlib>
#include <random>

#include "support.hpp"
#include "v2v/engine.hpp"

using namespace v2v;
using namespace testing_support;

namespace {

RadioConfig engineConfig()
{
    RadioConfig cfg;
    cfg.nvMax = 300.0;
    cfg.asMax = 0.5;
    cfg.seed = 42;
    return cfg;
}

std::shared_ptr<const StaticScene> blockScene()
{
    std::vector<StaticObject> statics;
    int id = 0;
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            statics.push_back(box(id++, (i + j) % 5 ? StaticKind::Building : StaticKind::Foliage, i * 65.0, j * 65.0,
                                  i * 65.0 + 45, j * 65.0 + 45));
        }
    }
    return sceneOf(statics);
}

std::vector<Vehicle> streetTraffic(int n, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> along(0.0, 390.0);
    std::uniform_int_distribution<int> street(0, 5);
    std::vector<Vehicle> vs;
    for (int i = 0; i < n; ++i) {
        const double s = along(gen);
        const double c = street(gen) * 65.0 - 10.0;
        if (i % 2) {
            vs.push_back(Vehicle(i, {s, c}, 0.0, i % 7 ? 4.5 : 12.0, 1.8, i % 7 ? 1.5 : 3.0));
        } else {
            vs.push_back(Vehicle(i, {c, s}, std::numbers::pi / 2, 4.5, 1.8, 1.5));
        }
    }
    return vs;
}

bool sameResults(const StepOutput& a, const StepOutput& b)
{
    if (a.results.size() != b.results.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        const auto& x = a.results[i];
        const auto& y = b.results[i];
        if (x.link.txId != y.link.txId || x.link.rxId != y.link.rxId || x.power.powerDbm != y.power.powerDbm ||
            x.sigma != y.sigma || x.sampledPower != y.sampledPower || x.power.model != y.power.model) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("empty and minimal timesteps")
{
    const RadioConfig cfg = engineConfig();
    const auto empty = runTimestep(0.0, {}, sceneOf({}), cfg, 2);
    CHECK(empty.results.empty());
    CHECK(empty.report.links == 0);

    const auto one = runTimestep(0.0, {car(1, {0, 0})}, sceneOf({}), cfg, 2);
    CHECK(one.results.empty());

    const auto two = runTimestep(1.5, {car(1, {0, 0}), car(2, {80, 0})}, sceneOf({}), cfg, 2);
    REQUIRE(two.results.size() == 1);
    CHECK(two.report.links == 1);
    CHECK(two.report.byType[0] == 1);
    CHECK(two.report.time == 1.5);
    const auto& r = two.results[0];
    CHECK(r.link.txId == 1);
    CHECK(r.link.rxId == 2);
    CHECK((r.power.model == PowerModel::TwoRay));
    CHECK(r.sigma == doctest::Approx(3.3));
    CHECK(std::isfinite(r.sampledPower));
}

TEST_CASE("below-threshold links are kept and flagged")
{
    RadioConfig cfg = engineConfig();
    cfg.receptionThreshold = 100.0;
    const auto out = runTimestep(0.0, {car(1, {0, 0}), car(2, {80, 0}), car(3, {160, 5})}, sceneOf({}), cfg, 1);
    CHECK(out.results.size() == 3);
    CHECK(out.report.belowThreshold == 3);
    for (const auto& r : out.results) {
        CHECK(r.belowThreshold);
    }
}

TEST_CASE("results do not depend on worker count")
{
    const RadioConfig cfg = engineConfig();
    const auto scene = blockScene();
    const auto vs = streetTraffic(150, 4);
    const auto serial = runTimestep(0.0, vs, scene, cfg, 1);
    const auto parallel = runTimestep(0.0, vs, scene, cfg, 8);
    CHECK(serial.results.size() > 100);
    CHECK(sameResults(serial, parallel));
    CHECK(serial.report.byType == parallel.report.byType);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(serial.report.byType[t] > 0);
    }
    for (std::size_t i = 1; i < serial.results.size(); ++i) {
        const auto& p = serial.results[i - 1].link;
        const auto& q = serial.results[i].link;
        CHECK(std::pair(p.txId, p.rxId) < std::pair(q.txId, q.rxId));
    }

    auto shuffled = vs;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
    CHECK(sameResults(serial, runTimestep(0.0, shuffled, scene, cfg, 3)));
}

TEST_CASE("disabling NLOSb rays leaves other link types untouched")
{
    RadioConfig on = engineConfig();
    RadioConfig off = on;
    off.nlosbRays = false;
    const auto scene = blockScene();
    const auto vs = streetTraffic(120, 11);
    const auto a = runTimestep(0.0, vs, scene, on, 2);
    const auto b = runTimestep(0.0, vs, scene, off, 2);
    REQUIRE(a.results.size() == b.results.size());
    std::size_t nlosb = 0;
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        const auto& x = a.results[i];
        const auto& y = b.results[i];
        REQUIRE((x.link.linkType() == y.link.linkType()));
        if (x.link.linkType() == LinkType::NLOSb) {
            ++nlosb;
            CHECK((y.power.model == PowerModel::LogDistance));
            CHECK(y.power.powerDbm <= x.power.powerDbm);
        } else {
            CHECK(x.power.powerDbm == y.power.powerDbm);
            CHECK(x.sampledPower == y.sampledPower);
        }
    }
    CHECK(nlosb > 0);
}

TEST_CASE("timings and report totals")
{
    const RadioConfig cfg = engineConfig();
    const auto out = runTimestep(0.0, streetTraffic(100, 2), blockScene(), cfg, 2);
    const auto& t = out.report.timings;
    CHECK(t.treeBuild >= 0.0);
    CHECK(t.treeBuild + t.classification + t.largeScale + t.smallScale <= t.total + 1e-9);
    CHECK(out.report.byType[0] + out.report.byType[1] + out.report.byType[2] == out.report.links);

    Trace trace;
    for (const auto& v : streetTraffic(60, 3)) {
        trace.add(0.0, v);
        trace.add(0.1, v);
    }
    trace.add(0.2, car(1, {0, 0}));
    const Scenario scenario(cfg, blockScene()->objects(), trace);
    std::vector<double> seen;
    const RunReport report = run(scenario, 2, [&](const StepOutput& s) { seen.push_back(s.report.time); });
    CHECK(seen == std::vector<double>{0.0, 0.1, 0.2});
    REQUIRE(report.steps.size() == 3);
    CHECK(report.steps[2].links == 0);
    CHECK(report.totals().links == report.steps[0].links + report.steps[1].links);
}

TEST_CASE("parallel helpers")
{
    std::vector<int> hits(1000, 0);
    parallelFor(hits.size(), 4, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
    for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i] == static_cast<int>(i));
    }
    parallelFor(0, 4, [](std::size_t) { FAIL("no work expected"); });

    CHECK(workerCount(3) >= 1);
    setenv("GEMV_WORKERS", "2", 1);
    CHECK(workerCount(8) == 2);
    CHECK(workerCount(1) == 1);
    setenv("GEMV_WORKERS", "zero", 1);
    CHECK(workerCount(5) == 5);
    unsetenv("GEMV_WORKERS");
}

TEST_CASE("benchmark harness")
{
    const auto city = makeSyntheticCity(1000, 1);
    CHECK(city.statics.size() + city.vehicles.size() == 1000);
    CHECK(city.statics.size() == doctest::Approx(600).epsilon(0.05));

    BenchOptions opts;
    opts.linksPerSize = 300;
    opts.minSampleSeconds = 0.001;
    opts.trials = 1;
    const auto rows = benchmarkSizes({250, 500, 1000}, RadioConfig{}, opts);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.links > 0);
        CHECK(r.byType[0] + r.byType[1] + r.byType[2] <= r.links);
        CHECK(r.byType[0] + r.byType[1] + r.byType[2] > 0);
        CHECK(r.timings.classification > 0.0);
    }
    const auto strict = checkDoublingTrend(rows, 1e-3);
    REQUIRE_FALSE(strict.empty());
    for (const auto& c : strict) {
        CHECK_FALSE(c.pass);
        CHECK(c.to == 2 * c.from);
    }
    for (const auto& c : checkDoublingTrend(rows, 1e6)) {
        CHECK(c.pass);
    }

    const auto fit = fitLine({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
}
