// Command-line front end: simulate a scenario, write per-link records, reports, and overlays.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include "v2v/engine.hpp"
#include "v2v/output.hpp"
#include "v2v/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitTrend = 2;

std::ofstream openOutput(const fs::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    }
    return out;
}

int runBench(const v2v::RadioConfig& cfg, const std::vector<std::size_t>& sizes, std::size_t links, double maxRatio,
             std::size_t workers, const fs::path& outDir)
{
    v2v::BenchOptions opts;
    opts.linksPerSize = links;
    opts.workers = workers;
    opts.seed = cfg.seed;
    const auto rows = v2v::benchmarkSizes(sizes, cfg, opts);
    auto out = openOutput(outDir / "bench.csv");
    v2v::writeBenchReport(out, rows);

    bool ok = true;
    for (const auto& c : v2v::checkDoublingTrend(rows, maxRatio)) {
        fmt::print("{} {} {}->{}: ratio {:.3f} (limit {})\n", c.pass ? "PASS" : "FAIL", c.metric, c.from, c.to,
                   c.ratio, c.limit);
        ok = ok && c.pass;
    }
    return ok ? kExitOk : kExitTrend;
}

int runSimulation(const v2v::RadioConfig& cfg, std::size_t workers, bool overlay, const fs::path& outDir)
{
    const v2v::Scenario scenario = v2v::Scenario::load(cfg);
    {
        auto echo = openOutput(outDir / "config_resolved.txt");
        v2v::writeConfigEcho(echo, scenario.config());
    }

    auto records = openOutput(outDir / "records.csv");
    v2v::RecordWriter writer(records);
    std::vector<v2v::OverlayFrame> frames;
    const auto report = v2v::run(scenario, workers, [&](const v2v::StepOutput& step) {
        v2v::OverlayFrame frame;
        for (const auto& r : step.results) {
            const auto rec = v2v::toOutputRecord(r);
            writer.write(rec);
            if (overlay) {
                // vehicles are looked up again below, so keep only what the overlay needs
                frame.links.push_back({rec, {}, {}});
            }
        }
        if (overlay) {
            frame.time = step.report.time;
            frames.push_back(std::move(frame));
        }
    });
    {
        auto out = openOutput(outDir / "report.csv");
        v2v::writeRunReport(out, report);
    }

    if (overlay) {
        for (auto& frame : frames) {
            frame.vehicles = scenario.trace().at(frame.time);
            const v2v::WorldState state = scenario.stepState(frame.time);
            for (auto& l : frame.links) {
                l.tx = state.vehicle(l.record.txId).antenna();
                l.rx = state.vehicle(l.record.rxId).antenna();
            }
        }
        auto projection = v2v::projectionFor(scenario.config());
        if (!projection) {
            spdlog::warn("planar input without a geographic origin; overlay placed around lon/lat 0,0");
            projection = v2v::Projection{scenario.config().originLat.value_or(0.0),
                                         scenario.config().originLon.value_or(0.0)};
        }
        auto out = openOutput(outDir / "overlay.kml");
        v2v::writeOverlay(out, scenario.scene()->objects(), frames, *projection);
    }

    const auto totals = report.totals();
    fmt::print("{} timesteps, {} links (LOS {}, NLOSv {}, NLOSb {}), {} below threshold, {:.3f} s\n",
               report.steps.size(), totals.links, totals.byType[0], totals.byType[1], totals.byType[2],
               totals.belowThreshold, totals.timings.total);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Geometry-based vehicle-to-vehicle propagation simulator"};
    std::string configPath;
    std::optional<std::uint64_t> seed;
    std::string nlosbRays;
    std::string environment;
    std::string outDir = "out";
    bool bench = false;
    bool overlay = false;
    std::optional<std::size_t> workers;
    std::vector<std::size_t> sizes{2000, 4000, 8000, 16000};
    std::size_t benchLinks = 10000;
    double maxRatio = 2.5;
    std::string logLevel = "warn";

    app.add_option("--config", configPath, "Scenario configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Random seed for small-scale sampling");
    app.add_option("--nlosb-rays", nlosbRays, "Reflection/diffraction rays for NLOSb links")
        ->check(CLI::IsMember({"on", "off"}));
    app.add_option("--environment", environment, "LOS range class")->check(CLI::IsMember({"urban", "open"}));
    app.add_option("--out", outDir, "Output directory")->capture_default_str();
    app.add_flag("--bench", bench, "Run the scalability benchmark on synthetic cities");
    app.add_flag("--overlay", overlay, "Also write a KML overlay of the run");
    app.add_option("--workers", workers, "Worker threads (capped by GEMV_WORKERS)")->check(CLI::PositiveNumber);
    app.add_option("--sizes", sizes, "Benchmark object counts")->delimiter(',')->capture_default_str();
    app.add_option("--bench-links", benchLinks, "Links evaluated per benchmark size")->capture_default_str();
    app.add_option("--max-ratio", maxRatio, "Largest allowed time growth per doubling")->capture_default_str();
    app.add_option("--log-level", logLevel, "trace|debug|info|warn|error|off")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }
    spdlog::set_level(spdlog::level::from_str(logLevel));
    spdlog::set_default_logger(spdlog::default_logger()->clone("v2vsim"));

    try {
        if (configPath.empty() && !bench) {
            throw v2v::ConfigError("--config is required unless --bench is given");
        }
        v2v::RadioConfig cfg = configPath.empty() ? v2v::RadioConfig{} : v2v::loadConfig(configPath);
        if (seed) {
            cfg.seed = *seed;
        }
        if (!nlosbRays.empty()) {
            cfg.nlosbRays = nlosbRays == "on";
        }
        if (!environment.empty()) {
            v2v::setConfigValue(cfg, "environment", environment);
        }
        cfg.validate();
        fs::create_directories(outDir);
        const std::size_t nWorkers = v2v::workerCount(workers);
        if (bench) {
            return runBench(cfg, sizes, benchLinks, maxRatio, nWorkers, outDir);
        }
        return runSimulation(cfg, nWorkers, overlay, outDir);
    } catch (const std::exception& e) {
        fmt::print(std::cerr, "error: {}\n", e.what());
        return kExitInput;
    }
}
