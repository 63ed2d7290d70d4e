#pragma once

#include <cstdint>

#include "v2v/link_classifier.hpp"
#include "v2v/scenario.hpp"

namespace v2v {

struct SigmaTable {
    SigmaRange los;
    SigmaRange nlosv;
    SigmaRange nlosbRays;
    SigmaRange nlosbNoRays;

    static SigmaTable fromConfig(const RadioConfig& cfg);
    SigmaRange rangeFor(LinkType type, bool nlosbRays) const;
};

/// Standard deviation (dB) of the small-scale term for a link with the given neighbourhood densities.
/// Densities above the reference maxima are clamped to them.
double sigmaFor(LinkType type, double nv, double as, const RadioConfig& cfg);
double sigmaFor(const LinkRecord& link, const RadioConfig& cfg);

/// Seed of the random stream owned by one (run, time, link) tuple.
std::uint64_t linkStreamSeed(std::uint64_t runSeed, double time, ObjectId tx, ObjectId rx);

/// Large-scale power plus one N(0, sigma) draw from the stream `streamSeed`.
double samplePower(double largeScaleDbm, double sigma, std::uint64_t streamSeed);

}  // namespace v2v
