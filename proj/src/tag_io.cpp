#include "qtwtt/tag_io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "qtwtt/errors.hpp"

namespace qtwtt {

namespace {

struct Record {
    std::uint8_t channel;
    std::uint64_t t_ps;
};

// merged, time-ordered view over the four streams
std::vector<Record> interleave(const std::array<TagStream, 4>& streams)
{
    std::vector<Record> recs;
    std::size_t total = 0;
    for (const auto& s : streams) total += s.size();
    recs.reserve(total);
    for (std::size_t c = 0; c < 4; ++c)
        for (const std::int64_t t : streams[c].t_ps)
            recs.push_back({static_cast<std::uint8_t>(c + 1), static_cast<std::uint64_t>(t)});
    std::stable_sort(recs.begin(), recs.end(), [](const Record& a, const Record& b) {
        return a.t_ps != b.t_ps ? a.t_ps < b.t_ps : a.channel < b.channel;
    });
    return recs;
}

std::array<TagStream, 4> empty_streams()
{
    std::array<TagStream, 4> out;
    for (std::size_t c = 0; c < 4; ++c)
        out[c].channel = static_cast<Channel>(c + 1);
    return out;
}

} // namespace

void write_tags_binary(std::ostream& out, const std::array<TagStream, 4>& streams)
{
    for (const Record& r : interleave(streams)) {
        char buf[9];
        buf[0] = static_cast<char>(r.channel);
        for (int i = 0; i < 8; ++i)
            buf[1 + i] = static_cast<char>((r.t_ps >> (8 * i)) & 0xff);
        out.write(buf, 9);
    }
}

std::array<TagStream, 4> read_tags_binary(std::istream& in)
{
    auto out = empty_streams();
    char buf[9];
    while (in.read(buf, 9)) {
        const auto ch = static_cast<std::uint8_t>(buf[0]);
        if (ch < 1 || ch > 4) throw SimulationError("tag record with bad channel id");
        std::uint64_t t = 0;
        for (int i = 0; i < 8; ++i)
            t |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[1 + i])) << (8 * i);
        out[ch - 1].t_ps.push_back(static_cast<std::int64_t>(t));
    }
    if (in.gcount() != 0) throw SimulationError("truncated binary tag record");
    return out;
}

void write_tags_text(std::ostream& out, const std::array<TagStream, 4>& streams)
{
    char buf[48];
    for (const Record& r : interleave(streams)) {
        std::snprintf(buf, sizeof buf, "D%u,%llu\n", static_cast<unsigned>(r.channel),
                      static_cast<unsigned long long>(r.t_ps));
        out << buf;
    }
}

std::array<TagStream, 4> read_tags_text(std::istream& in)
{
    auto out = empty_streams();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw SimulationError("bad text tag line: " + line);
        const Channel ch = channel_from_name(line.substr(0, comma));
        const std::uint64_t t = std::stoull(line.substr(comma + 1));
        out[static_cast<std::size_t>(ch) - 1].t_ps.push_back(static_cast<std::int64_t>(t));
    }
    return out;
}

std::string tags_sidecar_text(const std::array<TagStream, 4>& streams)
{
    std::ostringstream out;
    out << "format = tags-binary-v1\n";
    out << "record = channel:u8, t_ps:u64le\n";
    out << "time_unit = ps\n";
    for (const auto& s : streams)
        out << "count." << channel_name(s.channel) << " = " << s.size() << "\n";
    return out.str();
}

} // namespace qtwtt
