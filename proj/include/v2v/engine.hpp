#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "v2v/link_classifier.hpp"
#include "v2v/propagation.hpp"
#include "v2v/scenario.hpp"

namespace v2v {

struct LinkResult {
    LinkRecord link;
    PowerResult power;
    double sigma = 0.0;
    double sampledPower = 0.0;
    bool belowThreshold = false;
};

/// Wall-clock seconds per pipeline phase.
struct PhaseTimings {
    double treeBuild = 0.0;
    double classification = 0.0;
    double largeScale = 0.0;
    double smallScale = 0.0;
    double total = 0.0;

    PhaseTimings& operator+=(const PhaseTimings& o);
};

struct StepReport {
    double time = 0.0;
    std::size_t links = 0;
    std::array<std::size_t, 3> byType{};  // indexed by LinkType
    std::size_t belowThreshold = 0;
    std::size_t failedLinks = 0;
    PhaseTimings timings;
};

struct RunReport {
    std::vector<StepReport> steps;

    StepReport totals() const;
};

struct StepOutput {
    std::vector<LinkResult> results;  // sorted by (txId, rxId)
    StepReport report;
};

/// Worker count: `requested` (or hardware concurrency) capped by GEMV_WORKERS when set.
std::size_t workerCount(std::optional<std::size_t> requested = std::nullopt);

/// Runs fn(i) for i in [0, n) over `workers` threads; fn must only touch slot i of shared output.
void parallelFor(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Full per-link pipeline on a prepared snapshot (tree build time is not measured here).
StepOutput runTimestep(const WorldState& state, const RadioConfig& cfg, std::size_t workers);

/// Builds the vehicle tree for `vehicles`, then runs the pipeline.
StepOutput runTimestep(double time, std::vector<Vehicle> vehicles, std::shared_ptr<const StaticScene> scene,
                       const RadioConfig& cfg, std::size_t workers);

using StepSink = std::function<void(const StepOutput&)>;

/// Runs every timestep of the scenario in time order, handing each step's output to `sink`.
RunReport run(const Scenario& scenario, std::size_t workers, const StepSink& sink = {});

// ---- benchmark harness ----

struct SyntheticCity {
    std::vector<StaticObject> statics;
    std::vector<Vehicle> vehicles;
};

/// Street grid with roughly 60% building and 40% vehicle objects at constant density; area grows with n.
SyntheticCity makeSyntheticCity(std::size_t objects, std::uint64_t seed);

struct BenchRow {
    std::size_t objects = 0;
    std::size_t links = 0;
    std::array<std::size_t, 3> byType{};
    std::size_t belowThreshold = 0;
    PhaseTimings timings;
};

struct BenchOptions {
    std::size_t linksPerSize = 10000;
    std::size_t workers = 1;
    std::uint64_t seed = 1;
    double minSampleSeconds = 0.05;  // each timing repeats until this much time accumulates
    int trials = 3;                  // the minimum over trials is kept
};

/// Times tree build and a fixed-size link workload on synthetic cities of the given sizes.
std::vector<BenchRow> benchmarkSizes(const std::vector<std::size_t>& sizes, const RadioConfig& cfg,
                                     const BenchOptions& opts);

struct LinkScalingRow {
    std::size_t links = 0;
    double classification = 0.0;  // seconds
};

/// Classification time against link count on one fixed synthetic city.
std::vector<LinkScalingRow> benchmarkLinkScaling(std::size_t objects, const std::vector<std::size_t>& linkCounts,
                                                 const RadioConfig& cfg, const BenchOptions& opts);

struct TrendCheck {
    std::string metric;
    std::size_t from = 0;
    std::size_t to = 0;
    double ratio = 0.0;
    double limit = 0.0;
    bool pass = false;
};

/// Growth ratio of each timed phase between consecutive doubled sizes.
std::vector<TrendCheck> checkDoublingTrend(const std::vector<BenchRow>& rows, double maxRatio);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

LinearFit fitLine(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace v2v
