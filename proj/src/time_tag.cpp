#include "qtwtt/time_tag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qtwtt {

const char* channel_name(Channel c)
{
    switch (c) {
    case Channel::D1: return "D1";
    case Channel::D2: return "D2";
    case Channel::D3: return "D3";
    case Channel::D4: return "D4";
    }
    return "?";
}

Channel channel_from_name(const std::string& name)
{
    if (name == "D1") return Channel::D1;
    if (name == "D2") return Channel::D2;
    if (name == "D3") return Channel::D3;
    if (name == "D4") return Channel::D4;
    throw ConfigError("unknown detector channel: " + name);
}

std::int64_t quantize(double t_seconds)
{
    if (!(t_seconds >= 0.0))
        throw SimulationError("quantize: time must be >= 0");
    // 2^63 - 1 ps expressed in seconds; long double keeps ps resolution
    // out to ~2e5 s spans and beyond.
    constexpr double kMaxSeconds = 9223372.036854775;
    if (t_seconds > kMaxSeconds)
        throw SimulationError("quantize: time exceeds 2^63 ps range");
    long double ps = static_cast<long double>(t_seconds) * 1e12L;
    // a decimal like 2.5e-12 s lands a fraction of an ulp off the half-grid
    // boundary in binary; snap within the representation error so the
    // half-away-from-zero rule sees the intended value
    const long double boundary = roundl(ps * 2.0L) / 2.0L;
    if (fabsl(ps - boundary) <= fabsl(ps) * 1e-15L) ps = boundary;
    return static_cast<std::int64_t>(llroundl(ps)); // half away from zero
}

bool is_sorted_stream(const TagStream& s)
{
    return std::is_sorted(s.t_ps.begin(), s.t_ps.end()) &&
           (s.t_ps.empty() || s.t_ps.front() >= 0);
}

void validate_stream(const TagStream& s)
{
    if (!is_sorted_stream(s))
        throw SimulationError(std::string("tag stream ") + channel_name(s.channel) +
                              " violates the sorted/non-negative invariant");
}

} // namespace qtwtt
