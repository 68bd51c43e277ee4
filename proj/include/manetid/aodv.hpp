#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "manetid/errors.hpp"

// Per-node AODV state machine: route table, RREQ/RREP query cycle with
// duplicate suppression and sequence-number freshness, RERR generation.
// Every handler maps (state, input) -> (state, action); the simulator
// decides what the actions mean on the air.
namespace manetid::aodv {

using NodeId = int;
using SeqNo = std::uint32_t;

struct RouteEntry {
    NodeId dest = 0;
    NodeId next_hop = 0;
    int hop_count = 0;
    SeqNo dest_seq = 0;
    bool valid = false;

    bool operator==(const RouteEntry&) const = default;
};

struct Rreq {
    NodeId origin = 0;
    SeqNo origin_seq = 0;
    std::uint32_t rreq_id = 0;  // (origin, rreq_id) identifies a flood
    NodeId dest = 0;
    std::optional<SeqNo> dest_seq_known;
    int hop_count = 0;
};

struct Rrep {
    NodeId dest = 0;  // node the route leads to
    SeqNo dest_seq = 0;
    int hop_count = 0;
    NodeId origin = 0;  // node that asked for the route
};

struct Rerr {
    std::vector<std::pair<NodeId, SeqNo>> unreachable;  // non-empty when emitted
};

struct Discard {};
struct Rebroadcast {
    Rreq rreq;
};
struct Reply {
    Rrep rrep;
};
using RreqAction = std::variant<Discard, Rebroadcast, Reply>;

struct Consume {};
struct Forward {
    Rrep rrep;
    NodeId next_hop;
};
struct MissingReverseRoute {};
using RrepAction = std::variant<Consume, Forward, MissingReverseRoute>;

// Freshness rule: take the candidate when there is nothing usable yet, when
// it is strictly newer, or when it ties on sequence number with fewer hops.
// A tie on both keeps the existing entry (no route flapping). The stored
// sequence number never decreases, even across invalid entries.
inline RouteEntry route_update_rule(const std::optional<RouteEntry>& existing,
                                    const RouteEntry& candidate) {
    if (!existing) return candidate;
    if (candidate.dest_seq > existing->dest_seq) return candidate;
    if (candidate.dest_seq == existing->dest_seq &&
        (!existing->valid || candidate.hop_count < existing->hop_count))
        return candidate;
    return *existing;
}

class AodvNode {
public:
    NodeId self = 0;
    SeqNo seq = 0;
    std::uint32_t rreq_counter = 0;
    std::map<NodeId, RouteEntry> table;
    std::set<std::pair<NodeId, std::uint32_t>> seen;

    AodvNode() = default;
    explicit AodvNode(NodeId id) : self(id) {}

    // Start a route discovery. Pre: no valid route to dest (a route to self
    // always exists, so dest == self is rejected).
    Rreq originate_rreq(NodeId dest) {
        if (dest == self) throw Error("Precondition", "originate_rreq: dest is self");
        if (lookup_next_hop(dest))
            throw Error("Precondition", "originate_rreq: valid route already present");
        ++seq;
        ++rreq_counter;
        std::optional<SeqNo> known;
        if (auto it = table.find(dest); it != table.end()) known = it->second.dest_seq;
        seen.insert({self, rreq_counter});  // never rebroadcast our own flood
        return Rreq{self, seq, rreq_counter, dest, known, 0};
    }

    RreqAction handle_rreq(const Rreq& rreq, NodeId prev_hop) {
        if (rreq.origin != self)
            update_route({rreq.origin, prev_hop, rreq.hop_count + 1, rreq.origin_seq, true});
        if (!seen.insert({rreq.origin, rreq.rreq_id}).second) return Discard{};
        if (rreq.dest == self) {
            ++seq;  // answering as destination refreshes our own number
            return Reply{Rrep{self, seq, 0, rreq.origin}};
        }
        if (auto it = table.find(rreq.dest);
            it != table.end() && it->second.valid &&
            (!rreq.dest_seq_known || it->second.dest_seq >= *rreq.dest_seq_known)) {
            // Fresh cached route: answer from here instead of relaying.
            return Reply{Rrep{rreq.dest, it->second.dest_seq, it->second.hop_count, rreq.origin}};
        }
        Rreq forward = rreq;
        ++forward.hop_count;
        return Rebroadcast{forward};
    }

    RrepAction handle_rrep(const Rrep& rrep, NodeId prev_hop) {
        if (rrep.dest != self)
            update_route({rrep.dest, prev_hop, rrep.hop_count + 1, rrep.dest_seq, true});
        if (rrep.origin == self) return Consume{};
        auto reverse = lookup_next_hop(rrep.origin);
        if (!reverse) return MissingReverseRoute{};
        Rrep forward = rrep;
        ++forward.hop_count;
        return Forward{forward, reverse->first};
    }

    // Invalidate every route through a dead neighbor; the resulting RERR
    // (if any) lists them with their bumped sequence numbers.
    std::optional<Rerr> handle_link_break(NodeId dead_next_hop) {
        Rerr err;
        for (auto& [dest, entry] : table) {
            if (entry.valid && entry.next_hop == dead_next_hop) {
                entry.valid = false;
                ++entry.dest_seq;
                err.unreachable.emplace_back(dest, entry.dest_seq);
            }
        }
        if (err.unreachable.empty()) return std::nullopt;
        return err;
    }

    // Cascade an incoming RERR: routes through the sender to any listed
    // destination are invalidated, and a fresh RERR covering them is
    // returned for further propagation.
    std::optional<Rerr> handle_rerr(const Rerr& rerr, NodeId from) {
        Rerr cascade;
        for (const auto& [dest, dead_seq] : rerr.unreachable) {
            auto it = table.find(dest);
            if (it != table.end() && it->second.valid && it->second.next_hop == from) {
                it->second.valid = false;
                it->second.dest_seq = std::max(it->second.dest_seq + 1, dead_seq);
                cascade.unreachable.emplace_back(dest, it->second.dest_seq);
            }
        }
        if (cascade.unreachable.empty()) return std::nullopt;
        return cascade;
    }

    std::optional<std::pair<NodeId, int>> lookup_next_hop(NodeId dest) const {
        if (dest == self) return std::make_pair(self, 0);
        auto it = table.find(dest);
        if (it == table.end() || !it->second.valid) return std::nullopt;
        return std::make_pair(it->second.next_hop, it->second.hop_count);
    }

private:
    void update_route(const RouteEntry& candidate) {
        auto it = table.find(candidate.dest);
        std::optional<RouteEntry> existing;
        if (it != table.end()) existing = it->second;
        table[candidate.dest] = route_update_rule(existing, candidate);
    }
};

}  // namespace manetid::aodv
