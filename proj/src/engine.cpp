#include "v2v/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "v2v/small_scale.hpp"

namespace v2v {

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Candidate {
    std::optional<LinkRecord> link;
    bool failed = false;
};

std::optional<LinkRecord> gatedRecord(const WorldState& state, ObjectId tx, ObjectId rx, const RadioConfig& cfg)
{
    auto c = classify(state, tx, rx, cfg);
    if (!c) {
        return std::nullopt;
    }
    const Vehicle& a = state.vehicle(tx);
    const Vehicle& b = state.vehicle(rx);
    LinkRecord rec;
    rec.time = state.time();
    rec.txId = tx;
    rec.rxId = rx;
    rec.distance2D = distance(a.antenna(), b.antenna());
    rec.distance3D = std::hypot(rec.distance2D, a.antennaHeight() - b.antennaHeight());
    rec.classification = std::move(*c);
    return rec;
}

void logLinkFailure(const WorldState& state, ObjectId tx, ObjectId rx, const char* phase, const std::exception& e)
{
    spdlog::warn("t={} link {}->{} dropped during {}: {}", state.time(), tx, rx, phase, e.what());
}

/// Classification, large-scale, and small-scale phases for an explicit pair list.
StepOutput processPairs(const WorldState& state, const std::vector<std::pair<ObjectId, ObjectId>>& pairs,
                        const RadioConfig& cfg, std::size_t workers, PhaseTimings& timings)
{
    auto start = Clock::now();
    std::vector<Candidate> candidates(pairs.size());
    parallelFor(pairs.size(), workers, [&](std::size_t i) {
        const auto [tx, rx] = pairs[i];
        try {
            candidates[i].link = gatedRecord(state, tx, rx, cfg);
        } catch (const std::exception& e) {
            logLinkFailure(state, tx, rx, "classification", e);
            candidates[i].failed = true;
        }
    });
    StepOutput out;
    out.report.time = state.time();
    for (auto& c : candidates) {
        out.report.failedLinks += c.failed ? 1 : 0;
        if (c.link) {
            out.results.push_back(LinkResult{std::move(*c.link), {}, 0.0, 0.0, false});
        }
    }
    timings.classification += secondsSince(start);

    std::vector<char> ok(out.results.size(), 1);
    start = Clock::now();
    parallelFor(out.results.size(), workers, [&](std::size_t i) {
        LinkResult& r = out.results[i];
        try {
            r.power = largeScalePower(r.link, state, cfg);
        } catch (const std::exception& e) {
            logLinkFailure(state, r.link.txId, r.link.rxId, "large-scale evaluation", e);
            ok[i] = 0;
        }
    });
    timings.largeScale += secondsSince(start);

    start = Clock::now();
    parallelFor(out.results.size(), workers, [&](std::size_t i) {
        if (!ok[i]) {
            return;
        }
        LinkResult& r = out.results[i];
        try {
            r.link.neighborhood = neighborhoodStats(state, r.link.txId, r.link.rxId, cfg, r.link.linkType());
            r.sigma = sigmaFor(r.link, cfg);
            r.sampledPower = samplePower(r.power.powerDbm, r.sigma,
                                         linkStreamSeed(cfg.seed, state.time(), r.link.txId, r.link.rxId));
            r.belowThreshold = r.sampledPower < cfg.receptionThreshold;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            logLinkFailure(state, r.link.txId, r.link.rxId, "small-scale evaluation", e);
            ok[i] = 0;
        }
    });
    timings.smallScale += secondsSince(start);

    std::size_t kept = 0;
    for (std::size_t i = 0; i < out.results.size(); ++i) {
        if (ok[i]) {
            if (kept != i) {
                out.results[kept] = std::move(out.results[i]);
            }
            ++kept;
        } else {
            ++out.report.failedLinks;
        }
    }
    out.results.resize(kept);

    for (const auto& r : out.results) {
        ++out.report.byType[static_cast<std::size_t>(r.link.linkType())];
        out.report.belowThreshold += r.belowThreshold ? 1 : 0;
    }
    out.report.links = out.results.size();
    return out;
}

/// Mean seconds per call of fn, repeated until `minSeconds` accumulate; minimum over `trials`.
template <class Fn>
double timeIt(Fn&& fn, double minSeconds, int trials)
{
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < std::max(trials, 1); ++t) {
        std::size_t reps = 0;
        const auto start = Clock::now();
        double elapsed = 0.0;
        do {
            fn();
            ++reps;
            elapsed = secondsSince(start);
        } while (elapsed < minSeconds);
        best = std::min(best, elapsed / static_cast<double>(reps));
    }
    return best;
}

/// Fills unset density references from the scene itself.
RadioConfig withDensityReferences(RadioConfig cfg, const StaticScene& scene, const std::vector<Vehicle>& vehicles)
{
    if (!cfg.nvMax || !cfg.asMax) {
        Trace trace;
        for (const auto& v : vehicles) {
            trace.add(0.0, v);
        }
        const auto refs = deriveDensityReferences(scene, trace);
        cfg.nvMax = cfg.nvMax.value_or(refs.nvMax);
        cfg.asMax = cfg.asMax.value_or(refs.asMax);
    }
    return cfg;
}

std::vector<std::pair<ObjectId, ObjectId>> samplePairs(const WorldState& state, const RadioConfig& cfg,
                                                       std::size_t count, std::uint64_t seed)
{
    auto pairs = enumeratePairs(state, cfg);
    std::mt19937_64 gen(seed);
    std::shuffle(pairs.begin(), pairs.end(), gen);
    if (pairs.size() > count) {
        pairs.resize(count);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace

PhaseTimings& PhaseTimings::operator+=(const PhaseTimings& o)
{
    treeBuild += o.treeBuild;
    classification += o.classification;
    largeScale += o.largeScale;
    smallScale += o.smallScale;
    total += o.total;
    return *this;
}

StepReport RunReport::totals() const
{
    StepReport t;
    for (const auto& s : steps) {
        t.links += s.links;
        for (std::size_t i = 0; i < t.byType.size(); ++i) {
            t.byType[i] += s.byType[i];
        }
        t.belowThreshold += s.belowThreshold;
        t.failedLinks += s.failedLinks;
        t.timings += s.timings;
    }
    return t;
}

std::size_t workerCount(std::optional<std::size_t> requested)
{
    std::size_t n = requested.value_or(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("GEMV_WORKERS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && cap > 0) {
            n = std::min(n, static_cast<std::size_t>(cap));
        } else {
            spdlog::warn("ignoring GEMV_WORKERS='{}': expected a positive integer", env);
        }
    }
    return std::max<std::size_t>(n, 1);
}

void parallelFor(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn)
{
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    constexpr std::size_t chunk = 64;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex errorMutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                try {
                    for (std::size_t begin = next.fetch_add(chunk); begin < n; begin = next.fetch_add(chunk)) {
                        for (std::size_t i = begin, end = std::min(n, begin + chunk); i < end; ++i) {
                            fn(i);
                        }
                    }
                } catch (...) {
                    std::lock_guard lock(errorMutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next.store(n);
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

StepOutput runTimestep(const WorldState& state, const RadioConfig& cfg, std::size_t workers)
{
    const auto start = Clock::now();
    PhaseTimings timings;
    auto t0 = Clock::now();
    const auto pairs = enumeratePairs(state, cfg);
    timings.classification += secondsSince(t0);
    StepOutput out = processPairs(state, pairs, cfg, workers, timings);
    timings.total = secondsSince(start);
    out.report.timings = timings;
    return out;
}

StepOutput runTimestep(double time, std::vector<Vehicle> vehicles, std::shared_ptr<const StaticScene> scene,
                       const RadioConfig& cfg, std::size_t workers)
{
    const auto start = Clock::now();
    const WorldState state(time, std::move(vehicles), std::move(scene));
    const double build = secondsSince(start);
    StepOutput out = runTimestep(state, cfg, workers);
    out.report.timings.treeBuild = build;
    out.report.timings.total = secondsSince(start);
    return out;
}

RunReport run(const Scenario& scenario, std::size_t workers, const StepSink& sink)
{
    RunReport report;
    for (const auto& [key, vehicles] : scenario.trace().steps()) {
        const double time = static_cast<double>(key) / 1000.0;
        StepOutput out = runTimestep(time, vehicles, scenario.scene(), scenario.config(), workers);
        spdlog::debug("t={} links={} ({:.3f} s)", time, out.report.links, out.report.timings.total);
        if (sink) {
            sink(out);
        }
        report.steps.push_back(out.report);
    }
    return report;
}

SyntheticCity makeSyntheticCity(std::size_t objects, std::uint64_t seed)
{
    constexpr double pitch = 65.0;
    constexpr double street = 20.0;
    SyntheticCity city;
    const std::size_t buildings = (objects * 3 + 2) / 5;
    const std::size_t vehicles = objects - buildings;
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(std::max<std::size_t>(buildings, 1)))));
    const double extent = static_cast<double>(side) * pitch;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    city.statics.reserve(buildings);
    for (std::size_t k = 0; k < buildings; ++k) {
        const double cx = (static_cast<double>(k % side) + 0.5) * pitch;
        const double cy = (static_cast<double>(k / side) + 0.5) * pitch;
        const double maxHalf = 0.5 * (pitch - street);
        const double hx = maxHalf * (0.6 + 0.4 * unit(gen));
        const double hy = maxHalf * (0.6 + 0.4 * unit(gen));
        Polygon2 outline({{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy}, {cx - hx, cy + hy}});
        city.statics.push_back(StaticObject{static_cast<ObjectId>(k), StaticKind::Building, std::move(outline),
                                            10.0 + 20.0 * unit(gen)});
    }

    city.vehicles.reserve(vehicles);
    for (std::size_t k = 0; k < vehicles; ++k) {
        const bool horizontal = unit(gen) < 0.5;
        const double line = static_cast<double>(static_cast<std::size_t>(unit(gen) * static_cast<double>(side + 1))) * pitch;
        const double along = unit(gen) * extent;
        const double lane = unit(gen) < 0.5 ? -3.0 : 3.0;
        const double kind = unit(gen);
        double length = DefaultVehicleSize::length;
        double width = DefaultVehicleSize::width;
        double height = DefaultVehicleSize::height;
        if (kind > 0.95) {
            length = 12.0, width = 2.5, height = 3.0;
        } else if (kind > 0.8) {
            length = 6.0, width = 2.0, height = 2.0;
        }
        const Point2 c = horizontal ? Point2{along, line + lane} : Point2{line + lane, along};
        const double heading = horizontal ? (lane > 0 ? std::numbers::pi : 0.0) : (lane > 0 ? -0.5 : 0.5) * std::numbers::pi;
        city.vehicles.emplace_back(static_cast<ObjectId>(k), c, heading, length, width, height);
    }
    return city;
}

std::vector<BenchRow> benchmarkSizes(const std::vector<std::size_t>& sizes, const RadioConfig& baseCfg,
                                     const BenchOptions& opts)
{
    std::vector<BenchRow> rows;
    for (const std::size_t n : sizes) {
        SyntheticCity city = makeSyntheticCity(n, opts.seed);
        std::vector<RTreeEntry> entries;
        for (const auto& s : city.statics) {
            entries.push_back({s.id, Rect::around(s.outline)});
        }
        for (const auto& v : city.vehicles) {
            entries.push_back({v.id() + static_cast<ObjectId>(city.statics.size()), Rect::around(v.outline())});
        }

        BenchRow row;
        row.objects = n;
        row.timings.treeBuild = timeIt([&] { RTree::build(entries); }, opts.minSampleSeconds, opts.trials);

        auto scene = std::make_shared<const StaticScene>(std::move(city.statics));
        const RadioConfig cfg = withDensityReferences(baseCfg, *scene, city.vehicles);
        const WorldState state(0.0, std::move(city.vehicles), scene);
        const auto pairs = samplePairs(state, cfg, opts.linksPerSize, opts.seed);
        row.links = pairs.size();

        // one untimed pass for the counts, then the repeated timings
        PhaseTimings once;
        const StepOutput out = processPairs(state, pairs, cfg, opts.workers, once);
        row.byType = out.report.byType;
        row.belowThreshold = out.report.belowThreshold;
        auto best = [&](double PhaseTimings::*field) {
            double m = std::numeric_limits<double>::infinity();
            for (int t = 0; t < std::max(opts.trials, 1); ++t) {
                PhaseTimings pt;
                std::size_t reps = 0;
                const auto start = Clock::now();
                do {
                    processPairs(state, pairs, cfg, opts.workers, pt);
                    ++reps;
                } while (secondsSince(start) < opts.minSampleSeconds);
                m = std::min(m, pt.*field / static_cast<double>(reps));
            }
            return m;
        };
        row.timings.classification = best(&PhaseTimings::classification);
        row.timings.largeScale = best(&PhaseTimings::largeScale);
        row.timings.smallScale = best(&PhaseTimings::smallScale);
        row.timings.total = row.timings.treeBuild + row.timings.classification + row.timings.largeScale +
                            row.timings.smallScale;
        spdlog::info("bench n={} links={} build={:.4f}s classify={:.4f}s", n, row.links, row.timings.treeBuild,
                     row.timings.classification);
        rows.push_back(row);
    }
    return rows;
}

std::vector<LinkScalingRow> benchmarkLinkScaling(std::size_t objects, const std::vector<std::size_t>& linkCounts,
                                                 const RadioConfig& cfg, const BenchOptions& opts)
{
    SyntheticCity city = makeSyntheticCity(objects, opts.seed);
    auto scene = std::make_shared<const StaticScene>(std::move(city.statics));
    const WorldState state(0.0, std::move(city.vehicles), scene);
    const std::size_t most = linkCounts.empty() ? 0 : *std::max_element(linkCounts.begin(), linkCounts.end());
    auto all = enumeratePairs(state, cfg);
    std::mt19937_64 gen(opts.seed);
    std::shuffle(all.begin(), all.end(), gen);
    if (all.size() < most) {
        throw std::invalid_argument(
            fmt::format("synthetic city of {} objects has only {} pairs, {} requested", objects, all.size(), most));
    }

    std::vector<LinkScalingRow> rows;
    for (const std::size_t count : linkCounts) {
        std::vector<std::pair<ObjectId, ObjectId>> pairs(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
        std::sort(pairs.begin(), pairs.end());
        std::vector<Candidate> sink(pairs.size());
        const double t = timeIt(
            [&] {
                parallelFor(pairs.size(), opts.workers, [&](std::size_t i) {
                    sink[i].link = gatedRecord(state, pairs[i].first, pairs[i].second, cfg);
                });
            },
            opts.minSampleSeconds, opts.trials);
        rows.push_back({count, t});
    }
    return rows;
}

std::vector<TrendCheck> checkDoublingTrend(const std::vector<BenchRow>& rows, double maxRatio)
{
    std::vector<TrendCheck> checks;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const BenchRow& a = rows[i - 1];
        const BenchRow& b = rows[i];
        auto add = [&](const char* metric, double from, double to) {
            // normalise to a doubling step when sizes are not exactly doubled
            const double steps = std::log2(static_cast<double>(b.objects) / static_cast<double>(a.objects));
            const double ratio = from > 0.0 ? std::pow(to / from, steps > 0.0 ? 1.0 / steps : 1.0) : 1.0;
            checks.push_back({metric, a.objects, b.objects, ratio, maxRatio, ratio <= maxRatio});
        };
        add("treeBuild", a.timings.treeBuild, b.timings.treeBuild);
        add("classification", a.timings.classification, b.timings.classification);
        add("linkProcessing", a.timings.classification + a.timings.largeScale + a.timings.smallScale,
            b.timings.classification + b.timings.largeScale + b.timings.smallScale);
    }
    return checks;
}

LinearFit fitLine(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fitLine needs at least two paired samples");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    f.r2 = (sxx > 0.0 && syy > 0.0) ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

}  // namespace v2v
