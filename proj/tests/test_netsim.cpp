#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "manetid/netsim.hpp"
#include "test_support.hpp"

using namespace manetid;
using namespace manetid::sim;
using trace::Event;

namespace {

ScenarioConfig small_scenario() {
    ScenarioConfig cfg;
    cfg.reference_mode = false;
    cfg.node_count = 8;
    cfg.duration = 40.0;
    cfg.seed = 11;
    cfg.flows = {CbrFlow{0, 5, 4.0, 2.0, 35.0}, CbrFlow{1, 6, 4.0, 2.0, 35.0}};
    cfg.attackers = {AttackerSpec{7, DosFlood{8, 10.0, 10.0, 30.0}}};
    return cfg;
}

long count_records(const std::vector<trace::TraceRecord>& records, int node, Event kind) {
    long n = 0;
    for (const auto& r : records)
        if (r.node == node && r.event == kind) ++n;
    return n;
}

}  // namespace

TEST_CASE("unit-disk adjacency is inclusive at the boundary", "[netsim]") {
    std::vector<rwp::Vec2> at{{0.0, 0.0}, {250.0, 0.0}};
    auto adj = neighbors(at, 250.0);
    CHECK(adj[0] == std::vector<int>{1});
    CHECK(adj[1] == std::vector<int>{0});
    at[1].x = 250.01;
    adj = neighbors(at, 250.0);
    CHECK(adj[0].empty());
    CHECK(adj[1].empty());
}

TEST_CASE("adjacency equals the brute-force pairwise check on random layouts", "[netsim]") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<rwp::Vec2> pos;
        for (int i = 0; i < 15; ++i)
            pos.push_back({rng.uniform(0.0, 500.0), rng.uniform(0.0, 500.0)});
        const double range = rng.uniform(100.0, 300.0);
        const auto adj = neighbors(pos, range);
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 15; ++j) {
                const bool listed =
                    std::find(adj[static_cast<std::size_t>(i)].begin(),
                              adj[static_cast<std::size_t>(i)].end(), j) !=
                    adj[static_cast<std::size_t>(i)].end();
                const bool expected = i != j && rwp::distance(pos[static_cast<std::size_t>(i)],
                                                              pos[static_cast<std::size_t>(j)]) <=
                                                    range;
                REQUIRE(listed == expected);
            }
    }
}

TEST_CASE("no traffic, no records", "[netsim]") {
    ScenarioConfig cfg;
    cfg.reference_mode = false;
    cfg.node_count = 5;
    cfg.duration = 10.0;
    Simulator s(cfg);
    CHECK(s.run().empty());
}

TEST_CASE("two static in-range nodes deliver every CBR packet", "[netsim]") {
    ScenarioConfig cfg;
    cfg.reference_mode = false;
    cfg.node_count = 2;
    cfg.duration = 12.0;
    cfg.rwp.pause_time = 100.0;  // never moves
    cfg.initial_positions = {{100.0, 100.0}, {200.0, 100.0}};
    cfg.flows = {CbrFlow{0, 1, 4.0, 0.0, 10.0}};
    Simulator s(cfg);
    const auto& records = s.run();
    const auto& flow = s.summary().flow[0];
    CHECK(flow.originated == 40);
    CHECK(flow.delivered == 40);
    CHECK(flow.dropped == 0);
    long data_rx = 0;
    for (const auto& r : records)
        if (r.node == 1 && r.event == Event::Receive && r.mt == "cbr") ++data_rx;
    CHECK(data_rx == 40);
}

TEST_CASE("same seed runs are identical, trace files byte for byte", "[netsim]") {
    const ScenarioConfig cfg = small_scenario();
    Simulator a(cfg), b(cfg);
    a.run();
    b.run();
    REQUIRE(a.records().size() == b.records().size());
    REQUIRE(a.records() == b.records());
    std::ostringstream fa, fb;
    for (const auto& r : a.records()) fa << trace::format_record(r) << '\n';
    for (const auto& r : b.records()) fb << trace::format_record(r) << '\n';
    CHECK(fa.str() == fb.str());
}

TEST_CASE("record times never decrease", "[netsim]") {
    Simulator s(small_scenario());
    double last = 0.0;
    for (const auto& r : s.run()) {
        REQUIRE(r.time >= last);
        last = r.time;
    }
}

TEST_CASE("per-flow conservation: originated = delivered + dropped + in flight", "[netsim]") {
    Simulator s(small_scenario());
    s.run();
    long outstanding = 0;
    for (const auto& f : s.summary().flow) {
        REQUIRE(f.originated >= f.delivered + f.dropped);
        outstanding += f.originated - f.delivered - f.dropped;
    }
    CHECK(outstanding == s.summary().in_flight_data);
}

TEST_CASE("energy conservation is exact in integer microjoules", "[netsim]") {
    const ScenarioConfig cfg = small_scenario();
    Simulator s(cfg);
    s.run();
    const auto tx = static_cast<std::int64_t>(std::llround(cfg.energy.tx_cost * 1e6));
    const auto rx = static_cast<std::int64_t>(std::llround(cfg.energy.rx_cost * 1e6));
    const auto initial = static_cast<std::int64_t>(std::llround(cfg.energy.initial * 1e6));
    for (int node = 0; node < cfg.node_count; ++node) {
        const auto& c = s.summary().node[static_cast<std::size_t>(node)];
        const auto remaining =
            static_cast<std::int64_t>(std::llround(s.node_energy(node) * 1e6));
        CHECK(initial - remaining == c.energy_used_uj);
        CHECK(c.energy_used_uj == tx * (c.sends + c.forwards) + rx * c.receives);
    }
}

TEST_CASE("per-node counters equal the matching record counts", "[netsim]") {
    Simulator s(small_scenario());
    const auto& records = s.run();
    for (int node = 0; node < s.config().node_count; ++node) {
        const auto& c = s.summary().node[static_cast<std::size_t>(node)];
        CHECK(c.sends == count_records(records, node, Event::Send));
        CHECK(c.receives == count_records(records, node, Event::Receive));
        CHECK(c.forwards == count_records(records, node, Event::Forward));
        CHECK(c.drops == count_records(records, node, Event::Drop));
    }
}

TEST_CASE("the flooder emits exactly rate x window RREQ sends", "[netsim]") {
    Simulator s(small_scenario());
    const auto& records = s.run();
    long attacker_rreq_sends = 0;
    for (const auto& r : records)
        if (r.node == 7 && r.event == Event::Send && r.mt == "rreq") ++attacker_rreq_sends;
    CHECK(attacker_rreq_sends == 200);  // 10/s over [10, 30)
}

TEST_CASE("flood on vs off: more RREQ receives, never better delivery", "[netsim]") {
    ScenarioConfig attack_cfg = small_scenario();
    ScenarioConfig base_cfg = attack_cfg;
    base_cfg.attackers.clear();
    Simulator attack(attack_cfg), base(base_cfg);
    attack.run();
    base.run();
    CHECK(attack.summary().rreq_receive_events > base.summary().rreq_receive_events);
    for (std::size_t f = 0; f < attack_cfg.flows.size(); ++f) {
        const auto& fa = attack.summary().flow[f];
        const auto& fb = base.summary().flow[f];
        REQUIRE(fa.originated == fb.originated);
        const double pdr_attack =
            static_cast<double>(fa.delivered) / static_cast<double>(fa.originated);
        const double pdr_base =
            static_cast<double>(fb.delivered) / static_cast<double>(fb.originated);
        CHECK(pdr_attack <= pdr_base + 1e-12);
    }
}

TEST_CASE("a packet dropper kills transit traffic but still receives its own", "[netsim]") {
    // 0 -- 1 -- 2 static line; node 1 drops in [5, 10)
    ScenarioConfig cfg;
    cfg.reference_mode = false;
    cfg.node_count = 3;
    cfg.duration = 12.0;
    cfg.rwp.pause_time = 100.0;
    cfg.radio_range = 120.0;
    cfg.initial_positions = {{0.0, 0.0}, {100.0, 0.0}, {200.0, 0.0}};
    cfg.flows = {CbrFlow{0, 2, 4.0, 1.0, 11.0}};
    cfg.attackers = {AttackerSpec{1, PacketDropper{5.0, 10.0}}};
    Simulator s(cfg);
    const auto& records = s.run();
    bool delivered_in_window = false;
    long dropper_drops = 0;
    for (const auto& r : records) {
        if (r.node == 2 && r.event == Event::Receive && r.mt == "cbr" && r.time >= 5.0 &&
            r.time < 10.0)
            delivered_in_window = true;
        if (r.node == 1 && r.event == Event::Drop && r.drop_reason == "dropper") ++dropper_drops;
    }
    CHECK_FALSE(delivered_in_window);
    CHECK(dropper_drops > 0);
    CHECK(s.summary().flow[0].delivered > 0);  // traffic flows outside the window

    // traffic addressed to the dropper itself still gets through
    ScenarioConfig cfg2 = cfg;
    cfg2.flows = {CbrFlow{0, 1, 4.0, 6.0, 9.0}};
    Simulator s2(cfg2);
    s2.run();
    CHECK(s2.summary().flow[0].delivered > 0);
}

TEST_CASE("a DoS target inside the live node set is rejected", "[netsim]") {
    ScenarioConfig cfg = small_scenario();
    cfg.attackers = {AttackerSpec{7, DosFlood{3, 10.0, 10.0, 30.0}}};
    CHECK_THROWS_AS(Simulator(cfg), ConfigError);
}

TEST_CASE("reference mode requires 2 to 10 flows", "[netsim]") {
    ScenarioConfig cfg;
    cfg.node_count = 15;
    cfg.reference_mode = true;
    cfg.flows.clear();
    CHECK_THROWS_AS(Simulator(cfg), ConfigError);
    cfg.reference_mode = false;
    CHECK_NOTHROW(Simulator(cfg));
}

TEST_CASE("queue overflow and failed discovery produce the named drop reasons", "[netsim]") {
    // two nodes forever out of range
    ScenarioConfig cfg;
    cfg.reference_mode = false;
    cfg.node_count = 2;
    cfg.duration = 10.0;
    cfg.rwp.pause_time = 100.0;
    cfg.radio_range = 50.0;
    cfg.initial_positions = {{0.0, 0.0}, {400.0, 0.0}};
    cfg.flows = {CbrFlow{0, 1, 40.0, 0.0, 10.0}};
    Simulator s(cfg);
    const auto& records = s.run();
    std::set<std::string> reasons;
    for (const auto& r : records)
        if (r.event == Event::Drop) reasons.insert(r.drop_reason);
    CHECK(reasons.count("queue-full") == 1);
    CHECK(reasons.count("no-route") == 1);
    CHECK(s.summary().flow[0].delivered == 0);
}

TEST_CASE("a full trace reparses to the exact emitted record sequence", "[netsim]") {
    Simulator s(small_scenario());
    const auto& records = s.run();
    std::ostringstream file;
    for (const auto& r : records) file << trace::format_record(r) << '\n';
    std::istringstream in(file.str());
    std::vector<trace::TraceRecord> parsed;
    trace::parse_file(
        in, [&](const trace::TraceRecord& r) { parsed.push_back(r); }, true);
    REQUIRE(parsed.size() == records.size());
    REQUIRE(parsed == records);
}

TEST_CASE("every logged position stays inside the area", "[netsim]") {
    Simulator s(small_scenario());
    for (const auto& r : s.run()) {
        REQUIRE(r.x >= 0.0);
        REQUIRE(r.x <= 500.0);
        REQUIRE(r.y >= 0.0);
        REQUIRE(r.y <= 500.0);
        REQUIRE(r.z == 0.0);
    }
}
