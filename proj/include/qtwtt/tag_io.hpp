#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include "qtwtt/time_tag.hpp"

namespace qtwtt {

// Binary record stream: per tag, 1 byte channel id (1..4) then the time as an
// 8-byte little-endian unsigned picosecond count. A text sidecar describes the
// layout. The plain text form is one "channel,t_ps" line per tag.
void write_tags_binary(std::ostream& out, const std::array<TagStream, 4>& streams);
std::array<TagStream, 4> read_tags_binary(std::istream& in);

void write_tags_text(std::ostream& out, const std::array<TagStream, 4>& streams);
std::array<TagStream, 4> read_tags_text(std::istream& in);

std::string tags_sidecar_text(const std::array<TagStream, 4>& streams);

} // namespace qtwtt
