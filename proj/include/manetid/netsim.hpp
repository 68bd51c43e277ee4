#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <queue>
#include <string>
#include <variant>
#include <vector>

#include "manetid/aodv.hpp"
#include "manetid/errors.hpp"
#include "manetid/mobility.hpp"
#include "manetid/rng.hpp"
#include "manetid/scenario.hpp"
#include "manetid/trace.hpp"

// Deterministic discrete-event engine: random-waypoint mobility on a fixed
// tick, unit-disk radio with a fixed per-hop latency, AODV routing, CBR
// traffic, energy accounting, and the two attacker behaviors. Every
// send/receive/forward/drop becomes one trace record.
//
// Energy is accounted in integer microjoules so per-node conservation is
// exact and the 6-decimal Ne trace field is lossless.
namespace manetid::sim {

// Unit-disk adjacency, boundary inclusive: i and j are neighbors iff the
// Euclidean distance between them is <= range.
inline std::vector<std::vector<int>> neighbors(const std::vector<rwp::Vec2>& positions,
                                               double range) {
    if (range <= 0) throw ConfigError("radio range must be > 0");
    const int n = static_cast<int>(positions.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    const double range_sq = range * range;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = positions[i].x - positions[j].x;
            const double dy = positions[i].y - positions[j].y;
            if (dx * dx + dy * dy <= range_sq) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    }
    return adj;
}

struct DataPacket {
    int flow_id = 0;
    long seq = 0;
    aodv::NodeId src = 0;
    aodv::NodeId dst = 0;
    int size = 0;
};

struct Packet {
    std::variant<DataPacket, aodv::Rreq, aodv::Rrep, aodv::Rerr> body;
    aodv::NodeId origin = 0;      // node that created the packet
    aodv::NodeId final_dest = 0;  // end-to-end target address, -1 = none

    const char* kind_name() const {
        switch (body.index()) {
            case 0: return "cbr";
            case 1: return "rreq";
            case 2: return "rrep";
            default: return "rerr";
        }
    }
};

struct NodeCounters {
    long sends = 0;
    long receives = 0;
    long forwards = 0;
    long drops = 0;
    std::int64_t energy_used_uj = 0;
};

struct FlowStats {
    long originated = 0;
    long delivered = 0;
    long dropped = 0;
};

struct RunSummary {
    std::vector<NodeCounters> node;
    std::vector<FlowStats> flow;
    long rreq_receive_events = 0;
    long in_flight_data = 0;  // queued or on the air when the run cut off
    long total_records = 0;
};

class Simulator {
public:
    explicit Simulator(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
        validate(cfg_);
        tx_uj_ = to_uj(cfg_.energy.tx_cost);
        rx_uj_ = to_uj(cfg_.energy.rx_cost);
    }

    const std::vector<trace::TraceRecord>& run() {
        if (!ran_) {
            ran_ = true;
            setup();
            loop();
            finalize();
        }
        return records_;
    }

    const std::vector<trace::TraceRecord>& records() const { return records_; }
    const RunSummary& summary() const { return summary_; }
    const ScenarioConfig& config() const { return cfg_; }

    // Remaining energy of a node after run(), in joules.
    double node_energy(int id) const { return uj_to_joules(nodes_[static_cast<std::size_t>(id)].energy_uj); }

private:
    struct Event {
        enum class Kind { MobilityTick, CbrSend, RadioDeliver, AttackTick, FlowTimeout };
        double time = 0.0;
        std::uint64_t seqno = 0;  // assigned at enqueue, breaks time ties
        Kind kind = Kind::MobilityTick;
        int a = -1;     // CbrSend: flow, AttackTick: attacker, RadioDeliver: to, FlowTimeout: node
        int b = -1;     // RadioDeliver: from, FlowTimeout: dest
        long tick = 0;  // periodic event index
        Packet packet;  // RadioDeliver payload
    };

    struct EventAfter {
        bool operator()(const Event& x, const Event& y) const {
            if (x.time != y.time) return x.time > y.time;
            return x.seqno > y.seqno;
        }
    };

    struct NodeRuntime {
        aodv::NodeId id = 0;
        rwp::MotionState motion;
        Rng motion_rng{1};
        aodv::AodvNode routing;
        std::int64_t energy_uj = 0;
        bool dropper = false;
        double dropper_start = 0.0;
        double dropper_stop = 0.0;
        std::map<aodv::NodeId, std::deque<DataPacket>> queues;  // awaiting a route
        std::map<aodv::NodeId, int> discovery;                  // dest -> retries left
        NodeCounters counters;
    };

    struct DosRuntime {
        aodv::NodeId node = 0;
        DosFlood spec;
        long last_tick = 0;
    };

    static std::int64_t to_uj(double joules) {
        return static_cast<std::int64_t>(std::llround(joules * 1e6));
    }
    static double uj_to_joules(std::int64_t uj) { return static_cast<double>(uj) / 1e6; }

    void setup() {
        const auto n = static_cast<std::size_t>(cfg_.node_count);
        nodes_.resize(n);
        positions_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            NodeRuntime& node = nodes_[i];
            node.id = static_cast<int>(i);
            node.motion_rng = Rng(derive_seed(cfg_.seed, i));
            if (i < cfg_.initial_positions.size()) {
                node.motion.position = cfg_.initial_positions[i];
                node.motion.waypoint = node.motion.position;
                node.motion.phase = rwp::Phase::Paused;
                node.motion.pause_until = cfg_.rwp.pause_time;
            } else {
                node.motion = rwp::initial_state(cfg_.rwp, cfg_.bounds, node.motion_rng);
            }
            node.routing = aodv::AodvNode(node.id);
            node.energy_uj = to_uj(cfg_.energy.initial);
            positions_[i] = node.motion.position;
        }
        adjacency_ = neighbors(positions_, cfg_.radio_range);

        for (const auto& a : cfg_.attackers) {
            if (const auto* dos = std::get_if<DosFlood>(&a.kind)) {
                DosRuntime rt{a.node, *dos, 0};
                rt.last_tick =
                    static_cast<long>(std::floor((dos->stop - dos->start) * dos->rate - 1e-9));
                dos_.push_back(rt);
            } else if (const auto* drop = std::get_if<PacketDropper>(&a.kind)) {
                NodeRuntime& node = nodes_[static_cast<std::size_t>(a.node)];
                node.dropper = true;
                node.dropper_start = drop->start;
                node.dropper_stop = drop->stop;
            }
        }

        flow_stats_.assign(cfg_.flows.size(), FlowStats{});
        flow_last_tick_.resize(cfg_.flows.size());
        for (std::size_t f = 0; f < cfg_.flows.size(); ++f) {
            const CbrFlow& flow = cfg_.flows[f];
            flow_last_tick_[f] =
                static_cast<long>(std::floor((flow.stop - flow.start) * flow.rate - 1e-9));
            if (flow_last_tick_[f] >= 0 && flow.start <= cfg_.duration)
                schedule({flow.start, 0, Event::Kind::CbrSend, static_cast<int>(f), -1, 0, {}});
        }
        for (std::size_t d = 0; d < dos_.size(); ++d) {
            if (dos_[d].last_tick >= 0 && dos_[d].spec.start <= cfg_.duration)
                schedule({dos_[d].spec.start, 0, Event::Kind::AttackTick, static_cast<int>(d), -1,
                          0, {}});
        }
        if (cfg_.mobility_tick <= cfg_.duration)
            schedule({cfg_.mobility_tick, 0, Event::Kind::MobilityTick, -1, -1, 1, {}});
        records_.reserve(1 << 16);
    }

    void loop() {
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            if (ev.time > cfg_.duration) {
                queue_.push(ev);  // left in flight at cutoff
                break;
            }
            now_ = ev.time;
            switch (ev.kind) {
                case Event::Kind::MobilityTick: on_mobility_tick(ev); break;
                case Event::Kind::CbrSend: on_cbr_send(ev); break;
                case Event::Kind::RadioDeliver: on_deliver(ev); break;
                case Event::Kind::AttackTick: on_attack_tick(ev); break;
                case Event::Kind::FlowTimeout: on_flow_timeout(ev); break;
            }
        }
    }

    void finalize() {
        summary_.node.clear();
        for (const auto& node : nodes_) summary_.node.push_back(node.counters);
        summary_.flow = flow_stats_;
        summary_.total_records = static_cast<long>(records_.size());
        long in_flight = 0;
        for (const auto& node : nodes_)
            for (const auto& [dest, q] : node.queues) in_flight += static_cast<long>(q.size());
        while (!queue_.empty()) {
            const Event& ev = queue_.top();
            if (ev.kind == Event::Kind::RadioDeliver &&
                std::holds_alternative<DataPacket>(ev.packet.body))
                ++in_flight;
            queue_.pop();
        }
        summary_.in_flight_data = in_flight;
    }

    void schedule(Event ev) {
        ev.seqno = next_seqno_++;
        queue_.push(std::move(ev));
    }

    void on_mobility_tick(const Event& ev) {
        const double t = static_cast<double>(ev.tick) * cfg_.mobility_tick;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            NodeRuntime& node = nodes_[i];
            node.motion = rwp::step_to(node.motion, cfg_.rwp, cfg_.bounds, node.motion_rng, t);
            positions_[i] = node.motion.position;
        }
        adjacency_ = neighbors(positions_, cfg_.radio_range);
        const double next = static_cast<double>(ev.tick + 1) * cfg_.mobility_tick;
        if (next <= cfg_.duration)
            schedule({next, 0, Event::Kind::MobilityTick, -1, -1, ev.tick + 1, {}});
    }

    void on_cbr_send(const Event& ev) {
        const CbrFlow& flow = cfg_.flows[static_cast<std::size_t>(ev.a)];
        ++flow_stats_[static_cast<std::size_t>(ev.a)].originated;
        DataPacket dp{ev.a, ev.tick, flow.src, flow.dst, cfg_.packet_size};
        route_or_queue(nodes_[static_cast<std::size_t>(flow.src)], dp);
        if (ev.tick + 1 <= flow_last_tick_[static_cast<std::size_t>(ev.a)]) {
            const double next = flow.start + static_cast<double>(ev.tick + 1) / flow.rate;
            schedule({next, 0, Event::Kind::CbrSend, ev.a, -1, ev.tick + 1, {}});
        }
    }

    void on_attack_tick(const Event& ev) {
        DosRuntime& dos = dos_[static_cast<std::size_t>(ev.a)];
        NodeRuntime& attacker = nodes_[static_cast<std::size_t>(dos.node)];
        // A fresh flood every tick: new rreq_id, expired target address, so
        // no node can answer and everyone relays.
        aodv::Rreq rreq = attacker.routing.originate_rreq(dos.spec.target_addr);
        transmit(dos.node, Packet{rreq, dos.node, dos.spec.target_addr}, true, -1);
        if (ev.tick + 1 <= dos.last_tick) {
            const double next =
                dos.spec.start + static_cast<double>(ev.tick + 1) / dos.spec.rate;
            schedule({next, 0, Event::Kind::AttackTick, ev.a, -1, ev.tick + 1, {}});
        }
    }

    void on_flow_timeout(const Event& ev) {
        NodeRuntime& node = nodes_[static_cast<std::size_t>(ev.a)];
        const aodv::NodeId dest = ev.b;
        auto disc = node.discovery.find(dest);
        if (disc == node.discovery.end()) return;  // chain cancelled
        auto queued = node.queues.find(dest);
        const bool have_packets = queued != node.queues.end() && !queued->second.empty();
        if (node.routing.lookup_next_hop(dest)) {
            node.discovery.erase(disc);
            if (have_packets) flush(node);
            return;
        }
        if (!have_packets) {
            node.discovery.erase(disc);
            return;
        }
        if (disc->second > 0) {
            --disc->second;
            aodv::Rreq rreq = node.routing.originate_rreq(dest);
            transmit(node.id, Packet{rreq, node.id, dest}, true, -1);
            schedule({now_ + cfg_.rreq_retry_interval, 0, Event::Kind::FlowTimeout, node.id, dest,
                      0, {}});
            return;
        }
        // Retries exhausted: destination unreachable, queued data is lost.
        for (const DataPacket& dp : queued->second)
            emit(trace::Event::Drop, node.id, node.id, -1, Packet{dp, dp.src, dp.dst},
                 "no-route");
        node.queues.erase(queued);
        node.discovery.erase(disc);
    }

    void on_deliver(const Event& ev) {
        const int to = ev.a;
        const int from = ev.b;
        NodeRuntime& node = nodes_[static_cast<std::size_t>(to)];
        const Packet& p = ev.packet;
        if (node.energy_uj < rx_uj_) {
            emit(trace::Event::Drop, to, from, to, p, "energy");
            return;
        }
        node.energy_uj -= rx_uj_;
        node.counters.energy_used_uj += rx_uj_;
        emit(trace::Event::Receive, to, from, to, p, "---");
        if (dropper_active(node) && !addressed_to_self(node.id, p)) {
            emit(trace::Event::Drop, to, from, to, p, "dropper");
            return;
        }
        if (const auto* dp = std::get_if<DataPacket>(&p.body)) {
            if (dp->dst == node.id) {
                ++flow_stats_[static_cast<std::size_t>(dp->flow_id)].delivered;
            } else {
                route_or_queue(node, *dp);
            }
        } else if (const auto* rreq = std::get_if<aodv::Rreq>(&p.body)) {
            auto action = node.routing.handle_rreq(*rreq, from);
            if (std::holds_alternative<aodv::Discard>(action)) {
                emit(trace::Event::Drop, to, from, to, p, "duplicate");
            } else if (const auto* reply = std::get_if<aodv::Reply>(&action)) {
                transmit(to, Packet{reply->rrep, to, reply->rrep.origin}, false, from);
            } else if (const auto* rb = std::get_if<aodv::Rebroadcast>(&action)) {
                transmit(to, Packet{rb->rreq, p.origin, p.final_dest}, true, -1);
            }
            flush(node);  // the reverse route may satisfy queued traffic
        } else if (const auto* rrep = std::get_if<aodv::Rrep>(&p.body)) {
            auto action = node.routing.handle_rrep(*rrep, from);
            if (std::holds_alternative<aodv::MissingReverseRoute>(action)) {
                emit(trace::Event::Drop, to, from, to, p, "no-route");
            } else if (const auto* fwd = std::get_if<aodv::Forward>(&action)) {
                transmit(to, Packet{fwd->rrep, p.origin, p.final_dest}, false, fwd->next_hop);
            }
            flush(node);
        } else if (const auto* rerr = std::get_if<aodv::Rerr>(&p.body)) {
            if (auto cascade = node.routing.handle_rerr(*rerr, from))
                transmit(to, Packet{*cascade, to, -1}, true, -1);
        }
    }

    static bool addressed_to_self(aodv::NodeId id, const Packet& p) {
        if (const auto* dp = std::get_if<DataPacket>(&p.body)) return dp->dst == id;
        if (const auto* rreq = std::get_if<aodv::Rreq>(&p.body)) return rreq->dest == id;
        if (const auto* rrep = std::get_if<aodv::Rrep>(&p.body)) return rrep->origin == id;
        return false;
    }

    bool dropper_active(const NodeRuntime& node) const {
        return node.dropper && now_ >= node.dropper_start && now_ < node.dropper_stop;
    }

    bool is_neighbor(int a, int b) const {
        for (int x : adjacency_[static_cast<std::size_t>(a)])
            if (x == b) return true;
        return false;
    }

    void route_or_queue(NodeRuntime& node, const DataPacket& dp) {
        if (auto route = node.routing.lookup_next_hop(dp.dst)) {
            transmit(node.id, Packet{dp, dp.src, dp.dst}, false, route->first);
            return;
        }
        auto& q = node.queues[dp.dst];
        if (static_cast<int>(q.size()) >= cfg_.queue_capacity) {
            emit(trace::Event::Drop, node.id, node.id, -1, Packet{dp, dp.src, dp.dst},
                 "queue-full");
            return;
        }
        q.push_back(dp);
        ensure_discovery(node, dp.dst);
    }

    void ensure_discovery(NodeRuntime& node, aodv::NodeId dest) {
        if (node.discovery.count(dest)) return;  // a retry chain is already live
        node.discovery[dest] = cfg_.rreq_retries;
        aodv::Rreq rreq = node.routing.originate_rreq(dest);
        transmit(node.id, Packet{rreq, node.id, dest}, true, -1);
        schedule(
            {now_ + cfg_.rreq_retry_interval, 0, Event::Kind::FlowTimeout, node.id, dest, 0, {}});
    }

    // Send queued data for every destination that now has a route.
    void flush(NodeRuntime& node) {
        std::vector<aodv::NodeId> ready;
        for (const auto& [dest, q] : node.queues)
            if (!q.empty() && node.routing.lookup_next_hop(dest)) ready.push_back(dest);
        for (aodv::NodeId dest : ready) {
            auto it = node.queues.find(dest);
            if (it == node.queues.end()) continue;
            std::size_t budget = it->second.size();  // a mid-flush link break may requeue
            while (budget-- > 0 && !it->second.empty() && node.routing.lookup_next_hop(dest)) {
                DataPacket dp = it->second.front();
                it->second.pop_front();
                route_or_queue(node, dp);
                it = node.queues.find(dest);
                if (it == node.queues.end()) break;
            }
            it = node.queues.find(dest);
            if (it != node.queues.end() && it->second.empty()) {
                node.queues.erase(it);
                node.discovery.erase(dest);
            }
        }
    }

    void transmit(int from, const Packet& p, bool broadcast, int next_hop) {
        NodeRuntime& node = nodes_[static_cast<std::size_t>(from)];
        if (node.energy_uj < tx_uj_) {
            emit(trace::Event::Drop, from, from, broadcast ? -1 : next_hop, p, "energy");
            return;
        }
        if (!broadcast && !is_neighbor(from, next_hop)) {
            emit(trace::Event::Drop, from, from, next_hop, p, "link-break");
            if (auto err = node.routing.handle_link_break(next_hop))
                transmit(from, Packet{*err, from, -1}, true, -1);
            return;
        }
        node.energy_uj -= tx_uj_;
        node.counters.energy_used_uj += tx_uj_;
        emit(p.origin == from ? trace::Event::Send : trace::Event::Forward, from, from,
             broadcast ? -1 : next_hop, p, "---");
        if (broadcast) {
            for (int to : adjacency_[static_cast<std::size_t>(from)])
                schedule({now_ + cfg_.per_hop_latency, 0, Event::Kind::RadioDeliver, to, from, 0,
                          p});
        } else {
            schedule({now_ + cfg_.per_hop_latency, 0, Event::Kind::RadioDeliver, next_hop, from,
                      0, p});
        }
    }

    void emit(trace::Event kind, int at, int hop_src, int hop_dst, const Packet& p,
              const char* reason) {
        const NodeRuntime& node = nodes_[static_cast<std::size_t>(at)];
        trace::TraceRecord r;
        r.event = kind;
        r.time = trace::quantize(now_, 9);
        r.hop_src = hop_src;
        r.hop_dst = hop_dst;
        r.node = at;
        r.x = trace::quantize(positions_[static_cast<std::size_t>(at)].x, 2);
        r.y = trace::quantize(positions_[static_cast<std::size_t>(at)].y, 2);
        r.z = 0.0;
        r.energy = uj_to_joules(node.energy_uj);
        r.level_tag = trace::LevelTag::Nl;
        const auto* dp = std::get_if<DataPacket>(&p.body);
        const bool app_level = dp && ((kind == trace::Event::Send && at == dp->src) ||
                                      (kind == trace::Event::Receive && at == dp->dst));
        r.level = app_level ? "AGT" : "RTR";
        r.drop_reason = reason;
        r.ma = "0";
        r.md = std::to_string(p.final_dest);
        r.ms = std::to_string(p.origin);
        r.mt = p.kind_name();
        records_.push_back(std::move(r));

        NodeCounters& c = nodes_[static_cast<std::size_t>(at)].counters;
        switch (kind) {
            case trace::Event::Send: ++c.sends; break;
            case trace::Event::Receive: ++c.receives; break;
            case trace::Event::Drop: ++c.drops; break;
            case trace::Event::Forward: ++c.forwards; break;
        }
        if (kind == trace::Event::Receive && std::holds_alternative<aodv::Rreq>(p.body))
            ++summary_.rreq_receive_events;
        if (kind == trace::Event::Drop && dp)
            ++flow_stats_[static_cast<std::size_t>(dp->flow_id)].dropped;
    }

    ScenarioConfig cfg_;
    std::int64_t tx_uj_ = 0;
    std::int64_t rx_uj_ = 0;
    bool ran_ = false;
    double now_ = 0.0;
    std::uint64_t next_seqno_ = 0;
    std::vector<NodeRuntime> nodes_;
    std::vector<rwp::Vec2> positions_;
    std::vector<std::vector<int>> adjacency_;
    std::vector<DosRuntime> dos_;
    std::vector<FlowStats> flow_stats_;
    std::vector<long> flow_last_tick_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::vector<trace::TraceRecord> records_;
    RunSummary summary_;
};

}  // namespace manetid::sim
