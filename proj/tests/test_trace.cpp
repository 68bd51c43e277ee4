#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <vector>

#include "manetid/trace.hpp"
#include "test_support.hpp"

using namespace manetid;
using namespace manetid::trace;

static const char* kSampleLine =
    "s -t 2.556838879 -Hs 1 -Hd 2 -Ni 1 -Nx 342.47 -Ny 4.35 -Nz 0.00 -Ne -1.000000 "
    "-NI RTR -Nw --- -Ma 0 -Md 0 -Ms 0 -Mt 0";

TEST_CASE("the reference sample line round-trips byte for byte", "[trace]") {
    const TraceRecord r = parse_record(kSampleLine);
    CHECK(r.event == Event::Send);
    CHECK(r.time == 2.556838879);
    CHECK(r.hop_src == 1);
    CHECK(r.hop_dst == 2);
    CHECK(r.node == 1);
    CHECK(r.x == 342.47);
    CHECK(r.y == 4.35);
    CHECK(r.z == 0.0);
    CHECK(r.energy == -1.0);
    CHECK(r.level_tag == LevelTag::NI);
    CHECK(r.level == "RTR");
    CHECK(r.drop_reason == "---");
    CHECK(format_record(r) == kSampleLine);
}

TEST_CASE("time zero formats with nine decimals", "[trace]") {
    TraceRecord r;
    r.time = 0.0;
    CHECK(format_record(r).find("-t 0.000000000") != std::string::npos);
}

TEST_CASE("the -Nl tag variant is accepted and preserved", "[trace]") {
    std::string line = kSampleLine;
    line.replace(line.find("-NI"), 3, "-Nl");
    const TraceRecord r = parse_record(line);
    CHECK(r.level_tag == LevelTag::Nl);
    CHECK(format_record(r) == line);
    // same payload either way
    TraceRecord ni = parse_record(kSampleLine);
    ni.level_tag = LevelTag::Nl;
    CHECK(ni == r);
}

TEST_CASE("extra whitespace between fields is tolerated", "[trace]") {
    const TraceRecord a = parse_record(kSampleLine);
    const TraceRecord b = parse_record(
        "s   -t  2.556838879  -Hs 1 -Hd 2 -Ni 1 -Nx 342.47   -Ny 4.35 -Nz 0.00 -Ne -1.000000 "
        "-NI RTR  -Nw ---  -Ma 0 -Md 0 -Ms 0 -Mt 0  ");
    CHECK(a == b);
}

TEST_CASE("malformed lines are rejected with a position and field name", "[trace]") {
    CHECK_THROWS_AS(parse_record(""), MalformedLine);
    CHECK_THROWS_AS(parse_record("x -t 1.0"), MalformedLine);
    try {
        parse_record("s -t nonsense");
        FAIL("expected MalformedLine");
    } catch (const MalformedLine& e) {
        CHECK(e.expected == "time");
        CHECK(e.position >= 5);
    }
    try {
        parse_record("s -t 1.000000000 -Hd 2");
        FAIL("expected MalformedLine");
    } catch (const MalformedLine& e) {
        CHECK(e.expected == "-Hs");
    }
}

TEST_CASE("parse inverts format over randomized records", "[trace]") {
    Rng rng(123);
    for (int i = 0; i < 2000; ++i) {
        const TraceRecord r = testsupport::random_record(rng);
        const std::string line = format_record(r);
        const TraceRecord back = parse_record(line);
        REQUIRE(back == r);
        REQUIRE(format_record(back) == line);
    }
}

TEST_CASE("parse_file streams records and recovers from bad lines", "[trace]") {
    Rng rng(5);
    const TraceRecord a = testsupport::random_record(rng);
    const TraceRecord b = testsupport::random_record(rng);
    const TraceRecord c = testsupport::random_record(rng);

    SECTION("all valid") {
        std::istringstream in(format_record(a) + "\n" + format_record(b) + "\n" +
                              format_record(c) + "\n");
        std::vector<TraceRecord> got;
        std::size_t n = parse_file(in, [&](const TraceRecord& r) { got.push_back(r); });
        CHECK(n == 3);
        REQUIRE(got.size() == 3);
        CHECK(got[0] == a);
        CHECK(got[1] == b);
        CHECK(got[2] == c);
    }

    SECTION("lenient mode reports the bad line and keeps going") {
        std::istringstream in(format_record(a) + "\nthis is not a record\n" + format_record(c) +
                              "\n");
        std::vector<TraceRecord> got;
        std::vector<ParseIssue> issues;
        std::size_t n = parse_file(
            in, [&](const TraceRecord& r) { got.push_back(r); },
            [&](const ParseIssue& issue) { issues.push_back(issue); });
        CHECK(n == 2);
        REQUIRE(issues.size() == 1);
        CHECK(issues[0].line_number == 2);
    }

    SECTION("strict mode aborts on the bad line") {
        std::istringstream in(format_record(a) + "\ngarbage\n" + format_record(c) + "\n");
        CHECK_THROWS_AS(parse_file(
                            in, [](const TraceRecord&) {}, true),
                        MalformedLine);
    }

    SECTION("one parse per line, order preserved") {
        std::string blob;
        std::vector<TraceRecord> original;
        for (int i = 0; i < 500; ++i) {
            original.push_back(testsupport::random_record(rng));
            blob += format_record(original.back()) + "\n";
        }
        std::istringstream in(blob);
        std::size_t count = 0;
        parse_file(in, [&](const TraceRecord& r) {
            REQUIRE(r == original[count]);
            ++count;
        });
        CHECK(count == 500);
    }
}
