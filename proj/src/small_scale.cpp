#include "v2v/small_scale.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace v2v {

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double densityRatio(double value, double reference, const char* what)
{
    if (value > reference) {
        // one warning per process, the rest at debug level so dense scenes do not flood the log
        static std::atomic<bool> warned{false};
        const auto level = warned.exchange(true) ? spdlog::level::debug : spdlog::level::warn;
        spdlog::log(level, "{} {} exceeds the reference maximum {}, clamped", what, value, reference);
        return 1.0;
    }
    return std::max(value, 0.0) / reference;
}

}  // namespace

SigmaTable SigmaTable::fromConfig(const RadioConfig& cfg)
{
    return {cfg.sigmaLOS, cfg.sigmaNLOSv, cfg.sigmaNLOSbRays, cfg.sigmaNLOSbNoRays};
}

SigmaRange SigmaTable::rangeFor(LinkType type, bool nlosbRaysEnabled) const
{
    switch (type) {
    case LinkType::LOS:
        return los;
    case LinkType::NLOSv:
        return nlosv;
    case LinkType::NLOSb:
        return nlosbRaysEnabled ? nlosbRays : nlosbNoRays;
    }
    return los;
}

double sigmaFor(LinkType type, double nv, double as, const RadioConfig& cfg)
{
    if (!cfg.nvMax || !(*cfg.nvMax > 0.0)) {
        throw ConfigError("NVmax must be set and positive");
    }
    if (!cfg.asMax || !(*cfg.asMax > 0.0)) {
        throw ConfigError("ASmax must be set and positive");
    }
    const SigmaRange r = SigmaTable::fromConfig(cfg).rangeFor(type, cfg.nlosbRays);
    const double nvRatio = densityRatio(nv, *cfg.nvMax, "vehicle density");
    const double asRatio = densityRatio(as, *cfg.asMax, "built-area fraction");
    return r.min + 0.5 * (r.max - r.min) * (std::sqrt(nvRatio) + std::sqrt(asRatio));
}

double sigmaFor(const LinkRecord& link, const RadioConfig& cfg)
{
    return sigmaFor(link.linkType(), link.neighborhood.nv, link.neighborhood.as, cfg);
}

std::uint64_t linkStreamSeed(std::uint64_t runSeed, double time, ObjectId tx, ObjectId rx)
{
    std::uint64_t h = splitmix(runSeed);
    h = splitmix(h ^ static_cast<std::uint64_t>(Trace::keyFor(time)));
    h = splitmix(h ^ static_cast<std::uint64_t>(tx));
    return splitmix(h ^ static_cast<std::uint64_t>(rx));
}

double samplePower(double largeScaleDbm, double sigma, std::uint64_t streamSeed)
{
    if (sigma < 0.0) {
        throw std::invalid_argument(fmt::format("negative sigma {}", sigma));
    }
    if (sigma == 0.0) {
        return largeScaleDbm;
    }
    std::mt19937_64 gen(streamSeed);
    std::normal_distribution<double> dist(0.0, sigma);
    return largeScaleDbm + dist(gen);
}

}  // namespace v2v
