#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "manetid/errors.hpp"

// Reader/writer for the NS-2 "new wireless" trace line, one event per line:
//
//   s -t 2.556838879 -Hs 1 -Hd 2 -Ni 1 -Nx 342.47 -Ny 4.35 -Nz 0.00
//     -Ne -1.000000 -NI RTR -Nw --- -Ma 0 -Md 0 -Ms 0 -Mt 0
//
// Field order is fixed. The level tag appears in the wild both as -Nl and
// as -NI; the parser accepts either and remembers which it saw so a file
// round-trips byte for byte.
namespace manetid::trace {

enum class Event : char { Send = 's', Receive = 'r', Drop = 'd', Forward = 'f' };

enum class LevelTag { Nl, NI };

struct TraceRecord {
    Event event = Event::Send;
    double time = 0.0;  // -t, printed with 9 decimals
    int hop_src = 0;    // -Hs
    int hop_dst = 0;    // -Hd, -1/-2 sentinels mean broadcast / none
    int node = 0;       // -Ni, the node this event is logged at
    double x = 0.0;     // -Nx, 2 decimals
    double y = 0.0;     // -Ny
    double z = 0.0;     // -Nz, always 0.00 in a 2-D run
    double energy = -1.0;  // -Ne, 6 decimals, -1.000000 = untracked
    LevelTag level_tag = LevelTag::Nl;
    std::string level = "RTR";        // RTR / AGT / ...
    std::string drop_reason = "---";  // -Nw, "---" when not a drop
    std::string ma = "0";
    std::string md = "0";
    std::string ms = "0";
    std::string mt = "0";

    bool operator==(const TraceRecord&) const = default;
};

struct MalformedLine : Error {
    MalformedLine(std::size_t pos, const std::string& expected_field)
        : Error("MalformedLine",
                "at column " + std::to_string(pos) + ", expected " + expected_field),
          position(pos),
          expected(expected_field) {}

    std::size_t position;
    std::string expected;
};

// Round a value to the wire precision (decimals = digits after the point)
// so that emitting, formatting and re-parsing a record is lossless.
inline double quantize(double v, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return std::round(v * scale) / scale;
}

inline std::string format_record(const TraceRecord& r) {
    char buf[512];
    const int n = std::snprintf(
        buf, sizeof buf,
        "%c -t %.9f -Hs %d -Hd %d -Ni %d -Nx %.2f -Ny %.2f -Nz %.2f -Ne %.6f -%s %s -Nw %s "
        "-Ma %s -Md %s -Ms %s -Mt %s",
        static_cast<char>(r.event), r.time, r.hop_src, r.hop_dst, r.node, r.x, r.y, r.z, r.energy,
        r.level_tag == LevelTag::Nl ? "Nl" : "NI", r.level.c_str(), r.drop_reason.c_str(),
        r.ma.c_str(), r.md.c_str(), r.ms.c_str(), r.mt.c_str());
    if (n < 0 || n >= static_cast<int>(sizeof buf))
        throw Error("FormatOverflow", "trace record too long");
    return std::string(buf, static_cast<std::size_t>(n));
}

namespace detail {

class LineScanner {
public:
    explicit LineScanner(std::string_view line) : line_(line) {}

    void skip_ws() {
        while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
    }

    char event_letter() {
        skip_ws();
        if (pos_ >= line_.size()) fail("event letter (s/r/d/f)");
        const char c = line_[pos_];
        if (c != 's' && c != 'r' && c != 'd' && c != 'f') fail("event letter (s/r/d/f)");
        ++pos_;
        return c;
    }

    void tag(std::string_view name) {
        skip_ws();
        if (line_.substr(pos_, name.size()) != name) fail(std::string(name));
        pos_ += name.size();
    }

    // Returns which of the two accepted level tags was present.
    LevelTag level_tag() {
        skip_ws();
        if (line_.substr(pos_, 3) == "-Nl") {
            pos_ += 3;
            return LevelTag::Nl;
        }
        if (line_.substr(pos_, 3) == "-NI") {
            pos_ += 3;
            return LevelTag::NI;
        }
        fail("-Nl or -NI");
    }

    std::string token(std::string_view what) {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') ++pos_;
        if (pos_ == start) fail(std::string(what));
        return std::string(line_.substr(start, pos_ - start));
    }

    int integer(std::string_view what) {
        skip_ws();
        int value = 0;
        const char* begin = line_.data() + pos_;
        const char* end = line_.data() + line_.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr == begin) fail(std::string(what));
        pos_ = static_cast<std::size_t>(ptr - line_.data());
        return value;
    }

    double real(std::string_view what) {
        skip_ws();
        double value = 0.0;
        const char* begin = line_.data() + pos_;
        const char* end = line_.data() + line_.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr == begin) fail(std::string(what));
        pos_ = static_cast<std::size_t>(ptr - line_.data());
        return value;
    }

    void expect_end() {
        skip_ws();
        if (pos_ != line_.size()) fail("end of line");
    }

    [[noreturn]] void fail(const std::string& expected) const {
        throw MalformedLine(pos_, expected);
    }

private:
    std::string_view line_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline TraceRecord parse_record(std::string_view line) {
    detail::LineScanner in(line);
    TraceRecord r;
    r.event = static_cast<Event>(in.event_letter());
    in.tag("-t");
    r.time = in.real("time");
    in.tag("-Hs");
    r.hop_src = in.integer("hop source id");
    in.tag("-Hd");
    r.hop_dst = in.integer("hop dest id");
    in.tag("-Ni");
    r.node = in.integer("node id");
    in.tag("-Nx");
    r.x = in.real("x coordinate");
    in.tag("-Ny");
    r.y = in.real("y coordinate");
    in.tag("-Nz");
    r.z = in.real("z coordinate");
    in.tag("-Ne");
    r.energy = in.real("energy");
    r.level_tag = in.level_tag();
    r.level = in.token("trace level");
    in.tag("-Nw");
    r.drop_reason = in.token("drop reason");
    in.tag("-Ma");
    r.ma = in.token("Ma field");
    in.tag("-Md");
    r.md = in.token("Md field");
    in.tag("-Ms");
    r.ms = in.token("Ms field");
    in.tag("-Mt");
    r.mt = in.token("Mt field");
    in.expect_end();
    return r;
}

struct ParseIssue {
    std::size_t line_number;  // 1-based
    std::size_t position;
    std::string expected;
};

// Streams records out of an open text stream, one parse per line; memory
// use is independent of file size. In lenient mode malformed lines are
// reported through on_error and skipped; strict mode rethrows.
template <typename RecordFn, typename ErrorFn>
std::size_t parse_file(std::istream& in, RecordFn&& on_record, ErrorFn&& on_error,
                       bool strict = false) {
    std::string line;
    std::size_t line_number = 0;
    std::size_t parsed = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        try {
            on_record(parse_record(line));
            ++parsed;
        } catch (const MalformedLine& e) {
            if (strict) throw;
            on_error(ParseIssue{line_number, e.position, e.expected});
        }
    }
    return parsed;
}

template <typename RecordFn>
std::size_t parse_file(std::istream& in, RecordFn&& on_record, bool strict = false) {
    return parse_file(in, std::forward<RecordFn>(on_record), [](const ParseIssue&) {}, strict);
}

}  // namespace manetid::trace
