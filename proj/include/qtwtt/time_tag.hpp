#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qtwtt/errors.hpp"

namespace qtwtt {

// Detector roles. D1/D2 see the counter-propagated signal photons,
// D3/D4 the idler photons behind the compensation module.
enum class Channel : std::uint8_t { D1 = 1, D2 = 2, D3 = 3, D4 = 4 };

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

struct TimeTag {
    Channel channel;
    std::int64_t t_ps; // picoseconds since scenario epoch, >= 0
};

// One detector's timestamps, non-decreasing, 1 ps grid.
struct TagStream {
    Channel channel = Channel::D1;
    std::vector<std::int64_t> t_ps;

    std::size_t size() const { return t_ps.size(); }
    bool empty() const { return t_ps.empty(); }
};

// Tagger quantization: seconds -> integer picoseconds,
// rounding half away from zero. Throws on negative or overflowing input.
std::int64_t quantize(double t_seconds);

// Asserts the sort invariant every stream in the system must satisfy.
bool is_sorted_stream(const TagStream& s);
void validate_stream(const TagStream& s);

} // namespace qtwtt
