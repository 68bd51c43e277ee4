#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "manetid/errors.hpp"
#include "manetid/rng.hpp"
#include "manetid/scenario.hpp"
#include "manetid/trace.hpp"

// Turns a trace into labeled per-(node, window) samples over the four
// features PS (packets sent), PR (packets received), PL (packets lost,
// i.e. explicit drops) and EC (energy consumed), then splits and min-max
// normalizes them for training.
namespace manetid::features {

struct FeatureRow {
    int node = 0;
    int window = 0;
    long ps = 0;
    long pr = 0;
    long pl = 0;
    double ec = 0.0;  // joules
    int label = 0;    // 1 = attack

    std::array<double, 4> values() const {
        return {static_cast<double>(ps), static_cast<double>(pr), static_cast<double>(pl), ec};
    }
    bool operator==(const FeatureRow&) const = default;
};

struct LabeledSample {
    int node = 0;
    int window = 0;
    std::array<double, 4> x{};  // normalized into [0, 1]
    int label = 0;
};

// Per-feature (min, max) fitted on the training portion only.
struct NormParams {
    std::array<std::pair<double, double>, 4> min_max{};
};

struct Dataset {
    std::vector<LabeledSample> train;
    std::vector<LabeledSample> test;
    NormParams normalization;
    std::uint64_t split_seed = 0;
    double split_ratio = 0.65;
};

inline int window_count(double duration, double window) {
    return std::max(1, static_cast<int>(std::ceil(duration / window - 1e-9)));
}

// One row per (node, window). A sample is labeled attack when an attack
// interval overlaps its window AND the node actually received at least one
// attacker-originated packet inside it (the trace carries the end-to-end
// origin in the Ms field), so nodes the flood never reached stay normal.
inline std::vector<FeatureRow> extract(const std::vector<trace::TraceRecord>& records,
                                       double window, const sim::GroundTruth& truth) {
    if (window <= 0) throw ConfigError("window must be > 0");
    if (records.empty()) return {};
    const int nodes = truth.node_count;
    const int windows = window_count(truth.duration, window);
    std::vector<FeatureRow> rows(static_cast<std::size_t>(nodes) * windows);
    std::vector<char> attacked(rows.size(), 0);
    for (int n = 0; n < nodes; ++n)
        for (int w = 0; w < windows; ++w) {
            auto& row = rows[static_cast<std::size_t>(n) * windows + w];
            row.node = n;
            row.window = w;
        }
    std::set<int> attacker_ids(truth.attacker_ids.begin(), truth.attacker_ids.end());
    std::vector<double> prev_energy(static_cast<std::size_t>(nodes), truth.initial_energy);

    for (const auto& rec : records) {
        if (rec.node < 0 || rec.node >= nodes) continue;
        int w = static_cast<int>(rec.time / window);
        if (w >= windows) w = windows - 1;
        if (w < 0) w = 0;
        auto& row = rows[static_cast<std::size_t>(rec.node) * windows + w];
        switch (rec.event) {
            case trace::Event::Send: ++row.ps; break;
            case trace::Event::Receive: ++row.pr; break;
            case trace::Event::Drop: ++row.pl; break;
            case trace::Event::Forward: break;
        }
        // Energy only moves at logged events, so the delta since this
        // node's previous record is exactly this event's debit.
        if (rec.energy >= 0.0) {
            const double delta = prev_energy[static_cast<std::size_t>(rec.node)] - rec.energy;
            if (delta > 0.0) row.ec += delta;
            prev_energy[static_cast<std::size_t>(rec.node)] = rec.energy;
        }
        if (rec.event == trace::Event::Receive && !attacker_ids.empty()) {
            int origin = 0;
            auto [ptr, ec] =
                std::from_chars(rec.ms.data(), rec.ms.data() + rec.ms.size(), origin);
            if (ec == std::errc{} && ptr == rec.ms.data() + rec.ms.size() &&
                attacker_ids.count(origin))
                attacked[static_cast<std::size_t>(rec.node) * windows + w] = 1;
        }
    }

    for (int n = 0; n < nodes; ++n) {
        for (int w = 0; w < windows; ++w) {
            const double w_start = w * window;
            const double w_stop = w_start + window;
            bool overlap = false;
            for (const auto& [a, b] : truth.attack_intervals)
                if (a < w_stop && b > w_start) overlap = true;
            auto& row = rows[static_cast<std::size_t>(n) * windows + w];
            row.label =
                overlap && attacked[static_cast<std::size_t>(n) * windows + w] ? 1 : 0;
        }
    }
    return rows;
}

// Seeded uniform shuffle; train gets round(ratio * n) samples. Both index
// lists come back sorted so downstream order is the original sample order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double ratio, std::uint64_t seed) {
    if (n == 0) throw EmptyInput("split: no samples");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0x5917u));
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.next_below(i + 1);
        std::swap(idx[i], idx[j]);
    }
    auto train_n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (train_n > n) train_n = n;
    std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_n));
    std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(train_n), idx.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

inline NormParams fit_normalization(const std::vector<FeatureRow>& train) {
    if (train.empty()) throw EmptyInput("normalize: empty training set");
    NormParams p;
    for (int f = 0; f < 4; ++f)
        p.min_max[static_cast<std::size_t>(f)] = {train.front().values()[static_cast<std::size_t>(f)],
                                                  train.front().values()[static_cast<std::size_t>(f)]};
    for (const auto& row : train) {
        const auto v = row.values();
        for (std::size_t f = 0; f < 4; ++f) {
            p.min_max[f].first = std::min(p.min_max[f].first, v[f]);
            p.min_max[f].second = std::max(p.min_max[f].second, v[f]);
        }
    }
    return p;
}

// Min-max scaling into [0, 1]; a degenerate feature (min == max on the
// training set) maps to 0.5, out-of-range test values clamp.
inline std::array<double, 4> apply_normalization(const NormParams& p, const FeatureRow& row) {
    std::array<double, 4> out{};
    const auto v = row.values();
    for (std::size_t f = 0; f < 4; ++f) {
        const auto [lo, hi] = p.min_max[f];
        if (hi <= lo) {
            out[f] = 0.5;
            continue;
        }
        double scaled = (v[f] - lo) / (hi - lo);
        out[f] = std::min(1.0, std::max(0.0, scaled));
    }
    return out;
}

inline LabeledSample to_sample(const NormParams& p, const FeatureRow& row) {
    return LabeledSample{row.node, row.window, apply_normalization(p, row), row.label};
}

// Split + normalize in one step; normalization statistics come from the
// training portion only.
inline Dataset make_dataset(const std::vector<FeatureRow>& rows, double ratio,
                            std::uint64_t seed) {
    auto [train_idx, test_idx] = split_indices(rows.size(), ratio, seed);
    Dataset ds;
    ds.split_seed = seed;
    ds.split_ratio = ratio;
    std::vector<FeatureRow> train_rows;
    train_rows.reserve(train_idx.size());
    for (auto i : train_idx) train_rows.push_back(rows[i]);
    ds.normalization = fit_normalization(train_rows);
    for (auto i : train_idx) ds.train.push_back(to_sample(ds.normalization, rows[i]));
    for (auto i : test_idx) ds.test.push_back(to_sample(ds.normalization, rows[i]));
    return ds;
}

// ---------------------------------------------------------------------------
// Dataset file: comma-separated, one header line, raw (unnormalized) rows.
// ---------------------------------------------------------------------------

inline void write_dataset(std::ostream& out, const std::vector<FeatureRow>& rows) {
    out << "node,window,ps,pr,pl,ec,label\n";
    char buf[192];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%ld,%ld,%ld,%.17g,%d\n", r.node, r.window, r.ps,
                      r.pr, r.pl, r.ec, r.label);
        out << buf;
    }
}

inline void write_dataset_file(const std::string& path, const std::vector<FeatureRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path);
    write_dataset(out, rows);
}

inline std::vector<FeatureRow> read_dataset(std::istream& in) {
    std::vector<FeatureRow> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    if (line != "node,window,ps,pr,pl,ec,label")
        throw Error("BadDataset", "unexpected dataset header: " + line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        FeatureRow r;
        char* end = nullptr;
        const char* s = line.c_str();
        auto next_field = [&](bool last) {
            if (!last) {
                if (*end != ',')
                    throw Error("BadDataset", "line " + std::to_string(line_no) + ": expected ','");
                ++end;
            }
        };
        r.node = static_cast<int>(std::strtol(s, &end, 10));
        next_field(false);
        r.window = static_cast<int>(std::strtol(end, &end, 10));
        next_field(false);
        r.ps = std::strtol(end, &end, 10);
        next_field(false);
        r.pr = std::strtol(end, &end, 10);
        next_field(false);
        r.pl = std::strtol(end, &end, 10);
        next_field(false);
        r.ec = std::strtod(end, &end);
        next_field(false);
        r.label = static_cast<int>(std::strtol(end, &end, 10));
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<FeatureRow> read_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    return read_dataset(in);
}

}  // namespace manetid::features
