#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "manetid/aodv.hpp"
#include "manetid/errors.hpp"
#include "manetid/mobility.hpp"
#include "manetid/rng.hpp"

namespace manetid::sim {

struct CbrFlow {
    aodv::NodeId src = 0;
    aodv::NodeId dst = 1;
    double rate = 4.0;  // packets/second
    double start = 10.0;
    double stop = 190.0;
};

struct DosFlood {
    aodv::NodeId target_addr = 0;  // expired address, >= node_count
    double rate = 20.0;            // RREQs/second
    double start = 50.0;
    double stop = 150.0;
};

struct PacketDropper {
    double start = 50.0;
    double stop = 150.0;
};

struct AttackerSpec {
    aodv::NodeId node = 0;
    std::variant<DosFlood, PacketDropper> kind;
};

struct EnergyModel {
    double initial = 100.0;   // joules
    double tx_cost = 0.002;   // joules/packet
    double rx_cost = 0.001;   // joules/packet
};

struct ScenarioConfig {
    int node_count = 15;
    rwp::Bounds bounds{500.0, 500.0};
    double duration = 200.0;
    rwp::RwpParams rwp{0.0, 20.0, 2.0};
    double radio_range = 250.0;
    int packet_size = 512;
    double per_hop_latency = 0.002;
    double mobility_tick = 0.1;
    int queue_capacity = 64;          // data packets queued per destination
    double rreq_retry_interval = 1.0;
    int rreq_retries = 2;
    std::vector<CbrFlow> flows;
    std::vector<AttackerSpec> attackers;
    EnergyModel energy;
    std::uint64_t seed = 1;
    int address_range = 0;  // 0 = node_count + 8; expired addrs live above node_count
    bool reference_mode = true;
    // Optional pinned initial positions (index = node id); drawn from the
    // per-node stream when absent.
    std::vector<rwp::Vec2> initial_positions;

    int effective_address_range() const {
        return address_range > 0 ? address_range : node_count + 8;
    }
};

inline void validate(const ScenarioConfig& c) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (c.node_count < 2) fail("node_count must be >= 2");
    if (c.bounds.width <= 0 || c.bounds.height <= 0) fail("bounds must be positive");
    if (c.duration <= 0) fail("duration must be > 0");
    if (c.rwp.min_speed < 0 || c.rwp.min_speed >= c.rwp.max_speed)
        fail("speeds must satisfy 0 <= min_speed < max_speed");
    if (c.rwp.pause_time < 0) fail("pause_time must be >= 0");
    if (c.radio_range <= 0) fail("radio_range must be > 0");
    if (c.packet_size <= 0) fail("packet_size must be > 0");
    if (c.per_hop_latency < 0) fail("per_hop_latency must be >= 0");
    if (c.mobility_tick <= 0) fail("mobility_tick must be > 0");
    if (c.queue_capacity < 1) fail("queue_capacity must be >= 1");
    if (c.energy.initial < 0 || c.energy.tx_cost < 0 || c.energy.rx_cost < 0)
        fail("energy values must be >= 0");
    if (c.reference_mode && (c.flows.size() < 2 || c.flows.size() > 10))
        fail("reference scenarios need between 2 and 10 CBR flows");
    const int addr_range = c.effective_address_range();
    if (addr_range <= c.node_count) fail("address_range must exceed node_count");
    for (const auto& f : c.flows) {
        if (f.src == f.dst) fail("flow src equals dst");
        if (f.src < 0 || f.src >= c.node_count || f.dst < 0 || f.dst >= c.node_count)
            fail("flow endpoint outside node set");
        if (f.rate <= 0) fail("flow rate must be > 0");
        if (!(f.start < f.stop && f.stop <= c.duration))
            fail("flow must satisfy start < stop <= duration");
    }
    for (const auto& a : c.attackers) {
        if (a.node < 0 || a.node >= c.node_count) fail("attacker node outside node set");
        if (const auto* dos = std::get_if<DosFlood>(&a.kind)) {
            if (dos->target_addr < c.node_count || dos->target_addr >= addr_range)
                fail("DoS target_addr must be an expired address inside the address range");
            if (dos->rate <= 0) fail("DoS rate must be > 0");
            if (!(dos->start < dos->stop && dos->stop <= c.duration))
                fail("DoS window must satisfy start < stop <= duration");
        } else if (const auto* drop = std::get_if<PacketDropper>(&a.kind)) {
            if (!(drop->start < drop->stop && drop->stop <= c.duration))
                fail("dropper window must satisfy start < stop <= duration");
        }
    }
}

// Deterministic flow generation for "connections = N" configs: endpoints
// drawn from the scenario seed, attackers never act as CBR endpoints.
inline std::vector<CbrFlow> generate_flows(int node_count, int connections, double rate,
                                           double start, double stop,
                                           const std::vector<aodv::NodeId>& excluded,
                                           std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x1f10u));
    auto is_excluded = [&](aodv::NodeId id) {
        for (auto e : excluded)
            if (e == id) return true;
        return false;
    };
    std::vector<CbrFlow> flows;
    std::set<std::pair<int, int>> used;
    int guard = 0;
    while (static_cast<int>(flows.size()) < connections && guard++ < 100000) {
        int src = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(node_count)));
        int dst = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(node_count)));
        if (src == dst || is_excluded(src) || is_excluded(dst)) continue;
        if (!used.insert({src, dst}).second) continue;
        flows.push_back(CbrFlow{src, dst, rate, start, stop});
    }
    if (static_cast<int>(flows.size()) < connections)
        throw ConfigError("cannot generate requested number of distinct flows");
    return flows;
}

// The default experiment scenario: 15 nodes in 500x500 m for 200 s, RWP up
// to 20 m/s, 512-byte CBR flows, one RREQ flooder active over [50, 150).
inline ScenarioConfig reference_scenario(int connections = 5, std::uint64_t seed = 1,
                                             bool with_attacker = true) {
    ScenarioConfig c;
    c.seed = seed;
    const aodv::NodeId attacker = c.node_count - 1;
    if (with_attacker)
        c.attackers.push_back(AttackerSpec{attacker, DosFlood{c.node_count, 20.0, 50.0, 150.0}});
    c.flows = generate_flows(c.node_count, connections, 4.0, 10.0, 190.0, {attacker}, seed);
    return c;
}

// ---------------------------------------------------------------------------
// Scenario configuration file: line-oriented "key = value", '#' comments.
// Keys mirror the usual simulation-parameter names (nodes, area_x, area_y,
// duration, max_speed, connections, ...). "flow", "attacker" and "position"
// may repeat.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline double to_real(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value of '" + key + "' is not a number: " + s);
    }
}

inline long long to_int(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("value of '" + key + "' is not an integer: " + s);
    }
}

inline bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("value of '" + key + "' is not a boolean: " + s);
}

}  // namespace detail

inline ScenarioConfig parse_scenario_config(std::istream& in) {
    ScenarioConfig c;
    int connections = -1;
    double cbr_rate = 4.0, flow_start = 10.0, flow_stop = 190.0;
    bool default_attacker = true;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!detail::split_ws(line).empty())
                throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        using detail::to_bool;
        using detail::to_int;
        using detail::to_real;
        if (key == "nodes")
            c.node_count = static_cast<int>(to_int(value, key));
        else if (key == "area_x")
            c.bounds.width = to_real(value, key);
        else if (key == "area_y")
            c.bounds.height = to_real(value, key);
        else if (key == "duration")
            c.duration = to_real(value, key);
        else if (key == "min_speed")
            c.rwp.min_speed = to_real(value, key);
        else if (key == "max_speed")
            c.rwp.max_speed = to_real(value, key);
        else if (key == "pause_time")
            c.rwp.pause_time = to_real(value, key);
        else if (key == "radio_range")
            c.radio_range = to_real(value, key);
        else if (key == "packet_size")
            c.packet_size = static_cast<int>(to_int(value, key));
        else if (key == "per_hop_latency")
            c.per_hop_latency = to_real(value, key);
        else if (key == "mobility_tick")
            c.mobility_tick = to_real(value, key);
        else if (key == "queue_capacity")
            c.queue_capacity = static_cast<int>(to_int(value, key));
        else if (key == "rreq_retry_interval")
            c.rreq_retry_interval = to_real(value, key);
        else if (key == "rreq_retries")
            c.rreq_retries = static_cast<int>(to_int(value, key));
        else if (key == "connections")
            connections = static_cast<int>(to_int(value, key));
        else if (key == "cbr_rate")
            cbr_rate = to_real(value, key);
        else if (key == "flow_start")
            flow_start = to_real(value, key);
        else if (key == "flow_stop")
            flow_stop = to_real(value, key);
        else if (key == "energy_initial")
            c.energy.initial = to_real(value, key);
        else if (key == "energy_tx")
            c.energy.tx_cost = to_real(value, key);
        else if (key == "energy_rx")
            c.energy.rx_cost = to_real(value, key);
        else if (key == "seed")
            c.seed = static_cast<std::uint64_t>(to_int(value, key));
        else if (key == "address_range")
            c.address_range = static_cast<int>(to_int(value, key));
        else if (key == "reference_mode")
            c.reference_mode = to_bool(value, key);
        else if (key == "default_attacker")
            default_attacker = to_bool(value, key);
        else if (key == "flow") {
            auto f = detail::split_ws(value);
            if (f.size() != 5) throw ConfigError("flow expects: src dst rate start stop");
            c.flows.push_back(CbrFlow{static_cast<int>(to_int(f[0], key)),
                                      static_cast<int>(to_int(f[1], key)), to_real(f[2], key),
                                      to_real(f[3], key), to_real(f[4], key)});
        } else if (key == "attacker") {
            auto f = detail::split_ws(value);
            if (f.size() >= 2 && f[1] == "dos") {
                if (f.size() != 5 && f.size() != 6)
                    throw ConfigError("attacker dos expects: node dos rate start stop [target]");
                DosFlood dos;
                dos.rate = to_real(f[2], key);
                dos.start = to_real(f[3], key);
                dos.stop = to_real(f[4], key);
                dos.target_addr = f.size() == 6 ? static_cast<int>(to_int(f[5], key)) : -1;
                c.attackers.push_back(AttackerSpec{static_cast<int>(to_int(f[0], key)), dos});
            } else if (f.size() >= 2 && f[1] == "dropper") {
                if (f.size() != 4)
                    throw ConfigError("attacker dropper expects: node dropper start stop");
                c.attackers.push_back(AttackerSpec{
                    static_cast<int>(to_int(f[0], key)),
                    PacketDropper{to_real(f[2], key), to_real(f[3], key)}});
            } else {
                throw ConfigError("attacker kind must be 'dos' or 'dropper'");
            }
        } else if (key == "position") {
            auto f = detail::split_ws(value);
            if (f.size() != 3) throw ConfigError("position expects: node x y");
            const int id = static_cast<int>(to_int(f[0], key));
            if (id < 0) throw ConfigError("position node id must be >= 0");
            if (static_cast<std::size_t>(id) >= c.initial_positions.size())
                c.initial_positions.resize(static_cast<std::size_t>(id) + 1);
            c.initial_positions[static_cast<std::size_t>(id)] = {to_real(f[1], key),
                                                                 to_real(f[2], key)};
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }
    // A dos attacker without explicit target gets the first expired address.
    for (auto& a : c.attackers)
        if (auto* dos = std::get_if<DosFlood>(&a.kind); dos && dos->target_addr < 0)
            dos->target_addr = c.node_count;
    if (c.flows.empty() && connections != 0) {
        if (connections < 0) connections = 5;
        std::vector<aodv::NodeId> excluded;
        if (default_attacker || !c.attackers.empty()) {
            for (const auto& a : c.attackers) excluded.push_back(a.node);
            if (c.attackers.empty()) excluded.push_back(c.node_count - 1);
        }
        c.flows = generate_flows(c.node_count, connections, cbr_rate, flow_start,
                                 std::min(flow_stop, c.duration), excluded, c.seed);
    }
    if (c.attackers.empty() && default_attacker && c.reference_mode)
        c.attackers.push_back(
            AttackerSpec{c.node_count - 1, DosFlood{c.node_count, 20.0, 50.0, 150.0}});
    return c;
}

inline ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    return parse_scenario_config(in);
}

// ---------------------------------------------------------------------------
// Ground truth sidecar: what the simulator knew that the trace alone does
// not say. Written next to the trace so feature extraction never has to
// re-derive attack timing, attacker identity, flow endpoints, or the
// starting energy level.
// ---------------------------------------------------------------------------

struct GroundTruth {
    int node_count = 0;
    double duration = 0.0;
    double initial_energy = 0.0;
    std::vector<aodv::NodeId> attacker_ids;
    std::vector<std::pair<double, double>> attack_intervals;  // [start, stop)
    std::vector<CbrFlow> flows;
};

inline GroundTruth ground_truth_of(const ScenarioConfig& c) {
    GroundTruth gt;
    gt.node_count = c.node_count;
    gt.duration = c.duration;
    gt.initial_energy = c.energy.initial;
    for (const auto& a : c.attackers) {
        gt.attacker_ids.push_back(a.node);
        if (const auto* dos = std::get_if<DosFlood>(&a.kind))
            gt.attack_intervals.emplace_back(dos->start, dos->stop);
        else if (const auto* drop = std::get_if<PacketDropper>(&a.kind))
            gt.attack_intervals.emplace_back(drop->start, drop->stop);
    }
    gt.flows = c.flows;
    return gt;
}

inline void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
    char buf[256];
    out << "# ground truth sidecar\n";
    out << "node_count = " << gt.node_count << "\n";
    std::snprintf(buf, sizeof buf, "duration = %.17g\n", gt.duration);
    out << buf;
    std::snprintf(buf, sizeof buf, "initial_energy = %.17g\n", gt.initial_energy);
    out << buf;
    for (std::size_t i = 0; i < gt.attacker_ids.size(); ++i) {
        std::snprintf(buf, sizeof buf, "attacker = %d %.17g %.17g\n", gt.attacker_ids[i],
                      gt.attack_intervals[i].first, gt.attack_intervals[i].second);
        out << buf;
    }
    for (const auto& f : gt.flows) {
        std::snprintf(buf, sizeof buf, "flow = %d %d %.17g %.17g %.17g\n", f.src, f.dst, f.rate,
                      f.start, f.stop);
        out << buf;
    }
}

inline GroundTruth parse_ground_truth(std::istream& in) {
    GroundTruth gt;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        const auto fields = detail::split_ws(line.substr(eq + 1));
        using detail::to_int;
        using detail::to_real;
        if (key == "node_count" && fields.size() == 1)
            gt.node_count = static_cast<int>(to_int(fields[0], key));
        else if (key == "duration" && fields.size() == 1)
            gt.duration = to_real(fields[0], key);
        else if (key == "initial_energy" && fields.size() == 1)
            gt.initial_energy = to_real(fields[0], key);
        else if (key == "attacker" && fields.size() == 3) {
            gt.attacker_ids.push_back(static_cast<int>(to_int(fields[0], key)));
            gt.attack_intervals.emplace_back(to_real(fields[1], key), to_real(fields[2], key));
        } else if (key == "flow" && fields.size() == 5) {
            gt.flows.push_back(CbrFlow{static_cast<int>(to_int(fields[0], key)),
                                       static_cast<int>(to_int(fields[1], key)),
                                       to_real(fields[2], key), to_real(fields[3], key),
                                       to_real(fields[4], key)});
        } else {
            throw ConfigError("ground truth: unrecognized line '" + line + "'");
        }
    }
    return gt;
}

inline GroundTruth load_ground_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ground truth file: " + path);
    return parse_ground_truth(in);
}

}  // namespace manetid::sim
