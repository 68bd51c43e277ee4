#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "manetid/detect.hpp"
#include "manetid/features.hpp"
#include "manetid/netsim.hpp"
#include "manetid/neuralnet.hpp"
#include "manetid/scenario.hpp"
#include "manetid/trace.hpp"

// Command-level plumbing shared by the CLI binary and the test suites:
// simulate -> extract -> train -> evaluate, plus the sweep driver that
// mirrors the full experiment (paired attack/baseline runs over a list of
// connection counts and seeds).
namespace manetid::cli {

// ---------------------------------------------------------------------------
// small shared helpers
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x00000100000001b3ULL;
    }
    return h;
}

inline std::string format_real(double v, const char* fmt = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

// Pads each column to its widest cell; two spaces between columns.
inline std::string format_table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c >= width.size()) width.resize(c + 1, 0);
            width[c] = std::max(width[c], row[c].size());
        }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += row[c];
            if (c + 1 < row.size()) out.append(width[c] - row[c].size() + 2, ' ');
        }
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
}

inline void write_trace_file(const std::string& path,
                             const std::vector<trace::TraceRecord>& records,
                             std::optional<trace::LevelTag> force_tag = std::nullopt) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file: " + path);
    for (const auto& r : records) {
        if (force_tag) {
            trace::TraceRecord copy = r;
            copy.level_tag = *force_tag;
            out << trace::format_record(copy) << '\n';
        } else {
            out << trace::format_record(r) << '\n';
        }
    }
}

inline std::vector<trace::TraceRecord> read_trace_file(const std::string& path, bool strict,
                                                       std::ostream& log) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file: " + path);
    std::vector<trace::TraceRecord> records;
    trace::parse_file(
        in, [&](const trace::TraceRecord& r) { records.push_back(r); },
        [&](const trace::ParseIssue& issue) {
            log << "warning: line " << issue.line_number << ": malformed at column "
                << issue.position << ", expected " << issue.expected << "\n";
        },
        strict);
    return records;
}

// Model metadata sidecar (<model>.meta): the normalization constants and
// split parameters a model was trained with, so evaluation reconstructs the
// same test set.
struct ModelMeta {
    features::NormParams norm;
    std::uint64_t split_seed = 1;
    double split_ratio = 0.65;
    double threshold = 0.5;
};

inline void write_model_meta(const std::string& path, const ModelMeta& meta) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model metadata: " + path);
    out << "norm =";
    for (const auto& [lo, hi] : meta.norm.min_max)
        out << ' ' << format_real(lo) << ' ' << format_real(hi);
    out << "\nsplit_seed = " << meta.split_seed << "\nsplit_ratio = "
        << format_real(meta.split_ratio) << "\nthreshold = " << format_real(meta.threshold)
        << "\n";
}

inline ModelMeta load_model_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model metadata: " + path);
    ModelMeta meta;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::istringstream vs(line.substr(eq + 1));
        if (key == "norm") {
            for (auto& [lo, hi] : meta.norm.min_max)
                if (!(vs >> lo >> hi)) throw Error("BadModel", "bad norm line in " + path);
        } else if (key == "split_seed") {
            vs >> meta.split_seed;
        } else if (key == "split_ratio") {
            vs >> meta.split_ratio;
        } else if (key == "threshold") {
            vs >> meta.threshold;
        }
    }
    return meta;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::string config_path;  // empty = built-in defaults
    std::optional<std::uint64_t> seed;
    std::string out_trace = "out.tr";
    std::string out_truth;  // default: out_trace + ".truth"
    bool compat_ni_tag = false;
};

inline void print_counter_summary(std::ostream& out, const sim::Simulator& simulator) {
    const auto& summary = simulator.summary();
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"node", "sends", "recvs", "fwds", "drops", "used(J)", "left(J)"});
    for (std::size_t i = 0; i < summary.node.size(); ++i) {
        const auto& c = summary.node[i];
        rows.push_back({std::to_string(i), std::to_string(c.sends), std::to_string(c.receives),
                        std::to_string(c.forwards), std::to_string(c.drops),
                        format_real(static_cast<double>(c.energy_used_uj) / 1e6, "%.6f"),
                        format_real(simulator.node_energy(static_cast<int>(i)), "%.6f")});
    }
    out << format_table(rows);
    long sent = 0, delivered = 0, dropped = 0;
    for (const auto& f : summary.flow) {
        sent += f.originated;
        delivered += f.delivered;
        dropped += f.dropped;
    }
    out << "flows: " << summary.flow.size() << ", data originated " << sent << ", delivered "
        << delivered << ", dropped " << dropped << ", in flight " << summary.in_flight_data
        << "\n";
    out << "records: " << summary.total_records << " (rreq receive events "
        << summary.rreq_receive_events << ")\n";
}

inline sim::ScenarioConfig resolve_scenario(const SimulateOptions& opts) {
    sim::ScenarioConfig cfg = opts.config_path.empty()
                                  ? sim::reference_scenario(5, opts.seed.value_or(1))
                                  : sim::load_scenario_config(opts.config_path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        if (opts.config_path.empty())
            cfg = sim::reference_scenario(5, *opts.seed);
    }
    return cfg;
}

inline void cmd_simulate(const SimulateOptions& opts, std::ostream& log) {
    sim::ScenarioConfig cfg = resolve_scenario(opts);
    sim::Simulator simulator(cfg);
    simulator.run();
    write_trace_file(opts.out_trace, simulator.records(),
                     opts.compat_ni_tag ? std::optional(trace::LevelTag::NI) : std::nullopt);
    const std::string truth_path =
        opts.out_truth.empty() ? opts.out_trace + ".truth" : opts.out_truth;
    std::ofstream truth(truth_path);
    if (!truth) throw IoError("cannot write ground truth file: " + truth_path);
    sim::write_ground_truth(truth, sim::ground_truth_of(cfg));
    log << "trace: " << opts.out_trace << "\nground truth: " << truth_path << "\n";
    print_counter_summary(log, simulator);
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

struct ExtractOptions {
    std::string trace_path;
    std::string truth_path;
    double window = 10.0;
    std::string out_dataset = "dataset.csv";
    bool strict = false;
};

inline void cmd_extract(const ExtractOptions& opts, std::ostream& log) {
    const sim::GroundTruth truth = sim::load_ground_truth(opts.truth_path);
    const auto records = read_trace_file(opts.trace_path, opts.strict, log);
    const auto rows = features::extract(records, opts.window, truth);
    features::write_dataset_file(opts.out_dataset, rows);
    if (rows.empty()) {
        log << "warning: empty trace, wrote empty dataset\n";
        return;
    }
    long attack = 0;
    for (const auto& r : rows) attack += r.label;
    log << "dataset: " << opts.out_dataset << " (" << rows.size() << " samples, " << attack
        << " attack / " << rows.size() - attack << " normal)\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOptions {
    std::string dataset_path;
    std::string out_dir = ".";
    std::vector<std::string> architectures{"4-15-10-1", "4-20-10-1"};
    std::vector<nn::Transfer> transfers{nn::Transfer::LogSig, nn::Transfer::TanSig};
    std::vector<std::uint64_t> seeds{1};
    nn::TrainConfig train;
    double split_ratio = 0.65;
    double threshold = 0.5;
};

struct SingleClassDataset : Error {
    SingleClassDataset() : Error("SingleClassDataset", "dataset holds only one class") {}
};

inline std::vector<nn::Sample> to_nn_samples(const std::vector<features::LabeledSample>& in) {
    std::vector<nn::Sample> out;
    out.reserve(in.size());
    for (const auto& s : in)
        out.push_back(nn::Sample{{s.x.begin(), s.x.end()}, static_cast<double>(s.label)});
    return out;
}

inline std::string model_file_name(const std::string& arch, nn::Transfer transfer,
                                   std::uint64_t seed) {
    return "model_" + arch + "_" + nn::transfer_name(transfer) + "_seed" + std::to_string(seed) +
           ".net";
}

struct TrainRowResult {
    std::string arch;
    nn::Transfer transfer;
    std::uint64_t seed;
    double train_rmse;
    int epochs;
    nn::StopReason reason;
    std::string model_path;
};

inline std::vector<TrainRowResult> train_all(const std::vector<features::FeatureRow>& rows,
                                             const TrainOptions& opts, std::ostream& log) {
    bool has_attack = false, has_normal = false;
    for (const auto& r : rows) (r.label ? has_attack : has_normal) = true;
    if (!has_attack || !has_normal) throw SingleClassDataset();
    std::filesystem::create_directories(opts.out_dir);
    std::vector<TrainRowResult> results;
    for (std::uint64_t seed : opts.seeds) {
        const features::Dataset ds = features::make_dataset(rows, opts.split_ratio, seed);
        const auto train_samples = to_nn_samples(ds.train);
        for (const auto& arch_str : opts.architectures) {
            for (nn::Transfer transfer : opts.transfers) {
                nn::Network net = nn::init(nn::make_architecture(arch_str, transfer), seed);
                nn::TrainConfig cfg = opts.train;
                cfg.seed = seed;
                const nn::TrainReport report = nn::train(net, train_samples, cfg);
                const double train_rmse =
                    report.epoch_rmse.empty()
                        ? std::sqrt(nn::sse_of(nn::errors(net, train_samples)) /
                                    static_cast<double>(train_samples.size()))
                        : report.epoch_rmse.back();
                const std::string model_path =
                    (std::filesystem::path(opts.out_dir) / model_file_name(arch_str, transfer, seed))
                        .string();
                nn::save_network_file(model_path, net);
                write_model_meta(model_path + ".meta",
                                 ModelMeta{ds.normalization, seed, opts.split_ratio,
                                           opts.threshold});
                results.push_back(TrainRowResult{arch_str, transfer, seed, train_rmse,
                                                 report.final_epoch, report.stop_reason,
                                                 model_path});
                log << "trained " << arch_str << " " << nn::transfer_name(transfer) << " seed "
                    << seed << ": train RMSE " << format_real(train_rmse, "%.4f") << " in "
                    << report.final_epoch << " epochs (" << nn::stop_reason_name(report.stop_reason)
                    << ")\n";
            }
        }
    }
    return results;
}

inline std::string train_report_csv(const std::vector<TrainRowResult>& results) {
    std::string out = "network,layers,transfer,seed,rmse,epochs,stop\n";
    for (const auto& r : results) {
        out += "FFBP," + r.arch + "," + nn::transfer_name(r.transfer) + "," +
               std::to_string(r.seed) + "," + format_real(r.train_rmse, "%.4f") + "," +
               std::to_string(r.epochs) + "," + nn::stop_reason_name(r.reason) + "\n";
    }
    return out;
}

inline std::string train_report_text(const std::vector<TrainRowResult>& results) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Network", "Training function", "Layers", "Transfer function", "Seed", "RMSE",
                    "Epoch"});
    for (const auto& r : results)
        rows.push_back({"Feed Forward Back Propagation (FFBP)", "TrainLM", r.arch,
                        nn::transfer_name(r.transfer), std::to_string(r.seed),
                        format_real(r.train_rmse, "%.4f"), std::to_string(r.epochs)});
    return format_table(rows);
}

inline void cmd_train(const TrainOptions& opts, std::ostream& log) {
    const auto rows = features::read_dataset_file(opts.dataset_path);
    if (rows.empty()) throw EmptyInput("dataset is empty: " + opts.dataset_path);
    const auto results = train_all(rows, opts, log);
    write_text_file((std::filesystem::path(opts.out_dir) / "train_report.csv").string(),
                    train_report_csv(results));
    write_text_file((std::filesystem::path(opts.out_dir) / "train_report.txt").string(),
                    train_report_text(results));
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOptions {
    std::string model_path;
    std::string dataset_path;
    std::string out_metrics = "metrics.csv";
    std::string truth_path;  // optional; enables connection-level aggregation
    std::optional<double> threshold;
};

struct EvaluationResult {
    double test_rmse = 0.0;
    double test_mae = 0.0;
    std::optional<double> test_r2;
    detect::ConfusionCounts sample_counts;
    detect::DetectionRate sample_dr;
    // connection-level (one unit per CBR flow), present when truth given
    std::optional<detect::ConfusionCounts> connection_counts;
    std::optional<detect::DetectionRate> connection_dr;
    int connections = 0;
};

inline EvaluationResult evaluate_model(const nn::Network& net, const ModelMeta& meta,
                                       const std::vector<features::FeatureRow>& rows,
                                       const sim::GroundTruth* truth, double window) {
    if (net.arch.input_dim != 4)
        throw DimensionMismatch("model input dim must be 4 for the feature dataset");
    // Normalization comes from the stored metadata, never refit here; the
    // split seed reconstructs the exact train/test partition.
    EvaluationResult result;
    auto [train_idx, test_idx] =
        features::split_indices(rows.size(), meta.split_ratio, meta.split_seed);
    std::vector<features::LabeledSample> test;
    test.reserve(test_idx.size());
    for (auto i : test_idx) test.push_back(features::to_sample(meta.norm, rows[i]));

    std::vector<detect::Verdict> verdicts;
    std::vector<int> labels;
    std::vector<double> preds, targets;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto v = detect::classify(net, test[i], meta.threshold, static_cast<int>(i));
        verdicts.push_back(v);
        labels.push_back(test[i].label);
        preds.push_back(v.score);
        targets.push_back(static_cast<double>(test[i].label));
    }
    if (preds.empty()) throw EmptyInput("evaluate: test split is empty");
    result.test_rmse = nn::rmse(preds, targets);
    result.test_mae = nn::mae(preds, targets);
    result.test_r2 = nn::r_squared(preds, targets);
    result.sample_counts = detect::confusion(verdicts, labels);
    result.sample_dr = detect::detection_rate(verdicts, labels);

    if (truth) {
        result.connections = static_cast<int>(truth->flows.size());
        std::vector<detect::Verdict> conn_verdicts;
        std::vector<int> conn_labels;
        for (std::size_t f = 0; f < truth->flows.size(); ++f) {
            const auto& flow = truth->flows[f];
            std::vector<detect::Verdict> windows;
            long attack_windows = 0, total_windows = 0;
            for (std::size_t i = 0; i < test.size(); ++i) {
                if (test[i].node != flow.dst) continue;
                const double w_start = test[i].window * window;
                const double w_stop = w_start + window;
                if (w_start >= flow.stop || w_stop <= flow.start) continue;
                windows.push_back(verdicts[i]);
                ++total_windows;
                attack_windows += test[i].label;
            }
            if (windows.empty()) continue;  // flow has no test windows under this split
            conn_verdicts.push_back(detect::aggregate_connection(windows, static_cast<int>(f)));
            conn_labels.push_back(2 * attack_windows > total_windows ? 1 : 0);
        }
        if (!conn_verdicts.empty()) {
            result.connection_counts = detect::confusion(conn_verdicts, conn_labels);
            result.connection_dr = detect::detection_rate(conn_verdicts, conn_labels);
        }
    }
    return result;
}

inline std::string metrics_csv_header() {
    return "connections,dr_recall,dr_paper,tp,fp,tn,fn,rmse\n";
}

inline std::string metrics_csv_row(int connections, const detect::DetectionRate& dr,
                                   const detect::ConfusionCounts& c, double rmse_value) {
    std::string recall = dr.dr_recall ? format_real(*dr.dr_recall, "%.6f") : "nan";
    return std::to_string(connections) + "," + recall + "," + format_real(dr.dr_paper, "%.6f") +
           "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," + std::to_string(c.tn) +
           "," + std::to_string(c.fn) + "," + format_real(rmse_value, "%.6f") + "\n";
}

inline void cmd_evaluate(const EvaluateOptions& opts, std::ostream& log) {
    const nn::Network net = nn::load_network_file(opts.model_path);
    ModelMeta meta = load_model_meta(opts.model_path + ".meta");
    if (opts.threshold) meta.threshold = *opts.threshold;
    const auto rows = features::read_dataset_file(opts.dataset_path);
    if (rows.empty()) throw EmptyInput("dataset is empty: " + opts.dataset_path);
    std::optional<sim::GroundTruth> truth;
    if (!opts.truth_path.empty()) truth = sim::load_ground_truth(opts.truth_path);
    // window length is recoverable from the dataset grid
    int max_window = 0;
    for (const auto& r : rows) max_window = std::max(max_window, r.window);
    const double window = truth && max_window >= 0
                              ? truth->duration / static_cast<double>(max_window + 1)
                              : 10.0;
    const EvaluationResult result =
        evaluate_model(net, meta, rows, truth ? &*truth : nullptr, window);

    std::string csv = metrics_csv_header();
    if (result.connection_counts) {
        csv += metrics_csv_row(result.connections, *result.connection_dr,
                               *result.connection_counts, result.test_rmse);
    } else {
        csv += metrics_csv_row(result.connections, result.sample_dr, result.sample_counts,
                               result.test_rmse);
    }
    write_text_file(opts.out_metrics, csv);

    log << "test RMSE " << format_real(result.test_rmse, "%.4f") << ", MAE "
        << format_real(result.test_mae, "%.4f") << ", R2 "
        << (result.test_r2 ? format_real(*result.test_r2, "%.4f") : std::string("undefined"))
        << "\n";
    const auto& sc = result.sample_counts;
    log << "samples: tp " << sc.tp << " fp " << sc.fp << " tn " << sc.tn << " fn " << sc.fn
        << ", DR(recall) "
        << (result.sample_dr.dr_recall ? format_real(*result.sample_dr.dr_recall * 100, "%.2f") + "%"
                                       : std::string("undefined"))
        << ", DR(all units) " << format_real(result.sample_dr.dr_paper * 100, "%.2f") << "%\n";
    if (result.connection_counts) {
        const auto& cc = *result.connection_counts;
        log << "connections: tp " << cc.tp << " fp " << cc.fp << " tn " << cc.tn << " fn "
            << cc.fn << "\n";
    }
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentSpec {
    int node_count = 15;
    rwp::Bounds bounds{500.0, 500.0};
    double duration = 200.0;
    rwp::RwpParams rwp{0.0, 20.0, 2.0};
    double radio_range = 250.0;
    int packet_size = 512;
    sim::EnergyModel energy;
    double cbr_rate = 4.0;
    double flow_start = 10.0;
    double flow_stop = 190.0;
    double dos_rate = 20.0;
    double dos_start = 50.0;
    double dos_stop = 150.0;
    double window = 10.0;
    double split_ratio = 0.65;
    double threshold = 0.5;
    std::vector<std::string> architectures{"4-15-10-1", "4-20-10-1"};
    std::vector<nn::Transfer> transfers{nn::Transfer::LogSig, nn::Transfer::TanSig};
    nn::TrainConfig train;
    std::vector<std::uint64_t> seeds{101, 102, 103, 104, 105};
    std::vector<int> connections{2, 5, 10};
};

inline ExperimentSpec parse_experiment_spec(std::istream& in) {
    ExperimentSpec spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!sim::detail::split_ws(line).empty())
                throw ConfigError("spec line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t") + 1);
        const auto fields = sim::detail::split_ws(line.substr(eq + 1));
        if (fields.empty()) throw ConfigError("spec key '" + key + "' has no value");
        using sim::detail::to_int;
        using sim::detail::to_real;
        const std::string& v0 = fields[0];
        if (key == "nodes") spec.node_count = static_cast<int>(to_int(v0, key));
        else if (key == "area_x") spec.bounds.width = to_real(v0, key);
        else if (key == "area_y") spec.bounds.height = to_real(v0, key);
        else if (key == "duration") spec.duration = to_real(v0, key);
        else if (key == "min_speed") spec.rwp.min_speed = to_real(v0, key);
        else if (key == "max_speed") spec.rwp.max_speed = to_real(v0, key);
        else if (key == "pause_time") spec.rwp.pause_time = to_real(v0, key);
        else if (key == "radio_range") spec.radio_range = to_real(v0, key);
        else if (key == "packet_size") spec.packet_size = static_cast<int>(to_int(v0, key));
        else if (key == "energy_initial") spec.energy.initial = to_real(v0, key);
        else if (key == "energy_tx") spec.energy.tx_cost = to_real(v0, key);
        else if (key == "energy_rx") spec.energy.rx_cost = to_real(v0, key);
        else if (key == "cbr_rate") spec.cbr_rate = to_real(v0, key);
        else if (key == "flow_start") spec.flow_start = to_real(v0, key);
        else if (key == "flow_stop") spec.flow_stop = to_real(v0, key);
        else if (key == "dos_rate") spec.dos_rate = to_real(v0, key);
        else if (key == "dos_start") spec.dos_start = to_real(v0, key);
        else if (key == "dos_stop") spec.dos_stop = to_real(v0, key);
        else if (key == "window") spec.window = to_real(v0, key);
        else if (key == "split_ratio") spec.split_ratio = to_real(v0, key);
        else if (key == "threshold") spec.threshold = to_real(v0, key);
        else if (key == "max_epochs") spec.train.max_epochs = static_cast<int>(to_int(v0, key));
        else if (key == "goal_rmse") spec.train.goal_rmse = to_real(v0, key);
        else if (key == "learning_rate") spec.train.learning_rate = to_real(v0, key);
        else if (key == "momentum") spec.train.momentum = to_real(v0, key);
        else if (key == "algorithm") {
            if (v0 == "lm") spec.train.algorithm = nn::TrainConfig::Algorithm::LM;
            else if (v0 == "gdm") spec.train.algorithm = nn::TrainConfig::Algorithm::GDM;
            else throw ConfigError("algorithm must be 'lm' or 'gdm'");
        } else if (key == "architectures") {
            spec.architectures = fields;
        } else if (key == "transfers") {
            spec.transfers.clear();
            for (const auto& f : fields) {
                auto t = nn::transfer_from_name(f);
                if (!t) throw ConfigError("unknown transfer '" + f + "'");
                spec.transfers.push_back(*t);
            }
        } else if (key == "seeds") {
            spec.seeds.clear();
            for (const auto& f : fields)
                spec.seeds.push_back(static_cast<std::uint64_t>(to_int(f, key)));
        } else if (key == "connections") {
            spec.connections.clear();
            for (const auto& f : fields)
                spec.connections.push_back(static_cast<int>(to_int(f, key)));
        } else {
            throw ConfigError("unknown spec key '" + key + "'");
        }
    }
    if (spec.architectures.empty() || spec.transfers.empty() || spec.seeds.empty() ||
        spec.connections.empty())
        throw ConfigError("spec needs non-empty architectures, transfers, seeds, connections");
    return spec;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment spec: " + path);
    return parse_experiment_spec(in);
}

// Canonical dump: every knob in fixed order. Hashing this is what makes the
// manifest sufficient to reproduce a run.
inline std::string canonical_spec(const ExperimentSpec& s) {
    std::string out;
    out += "nodes = " + std::to_string(s.node_count) + "\n";
    out += "area_x = " + format_real(s.bounds.width) + "\n";
    out += "area_y = " + format_real(s.bounds.height) + "\n";
    out += "duration = " + format_real(s.duration) + "\n";
    out += "min_speed = " + format_real(s.rwp.min_speed) + "\n";
    out += "max_speed = " + format_real(s.rwp.max_speed) + "\n";
    out += "pause_time = " + format_real(s.rwp.pause_time) + "\n";
    out += "radio_range = " + format_real(s.radio_range) + "\n";
    out += "packet_size = " + std::to_string(s.packet_size) + "\n";
    out += "energy_initial = " + format_real(s.energy.initial) + "\n";
    out += "energy_tx = " + format_real(s.energy.tx_cost) + "\n";
    out += "energy_rx = " + format_real(s.energy.rx_cost) + "\n";
    out += "cbr_rate = " + format_real(s.cbr_rate) + "\n";
    out += "flow_start = " + format_real(s.flow_start) + "\n";
    out += "flow_stop = " + format_real(s.flow_stop) + "\n";
    out += "dos_rate = " + format_real(s.dos_rate) + "\n";
    out += "dos_start = " + format_real(s.dos_start) + "\n";
    out += "dos_stop = " + format_real(s.dos_stop) + "\n";
    out += "window = " + format_real(s.window) + "\n";
    out += "split_ratio = " + format_real(s.split_ratio) + "\n";
    out += "threshold = " + format_real(s.threshold) + "\n";
    out += std::string("algorithm = ") +
           (s.train.algorithm == nn::TrainConfig::Algorithm::LM ? "lm" : "gdm") + "\n";
    out += "max_epochs = " + std::to_string(s.train.max_epochs) + "\n";
    out += "goal_rmse = " + format_real(s.train.goal_rmse) + "\n";
    out += "learning_rate = " + format_real(s.train.learning_rate) + "\n";
    out += "momentum = " + format_real(s.train.momentum) + "\n";
    out += "architectures =";
    for (const auto& a : s.architectures) out += " " + a;
    out += "\ntransfers =";
    for (auto t : s.transfers) out += std::string(" ") + nn::transfer_name(t);
    out += "\nseeds =";
    for (auto x : s.seeds) out += " " + std::to_string(x);
    out += "\nconnections =";
    for (auto c : s.connections) out += " " + std::to_string(c);
    out += "\n";
    return out;
}

inline sim::ScenarioConfig scenario_for(const ExperimentSpec& spec, int connections,
                                        std::uint64_t seed, bool with_attacker) {
    sim::ScenarioConfig cfg;
    cfg.node_count = spec.node_count;
    cfg.bounds = spec.bounds;
    cfg.duration = spec.duration;
    cfg.rwp = spec.rwp;
    cfg.radio_range = spec.radio_range;
    cfg.packet_size = spec.packet_size;
    cfg.energy = spec.energy;
    cfg.seed = seed;
    cfg.reference_mode = connections >= 2 && connections <= 10;
    const aodv::NodeId attacker = cfg.node_count - 1;
    if (with_attacker)
        cfg.attackers.push_back(sim::AttackerSpec{
            attacker,
            sim::DosFlood{cfg.node_count, spec.dos_rate, spec.dos_start, spec.dos_stop}});
    // identical flows in the attack and baseline runs of a pair
    cfg.flows = sim::generate_flows(cfg.node_count, connections, spec.cbr_rate, spec.flow_start,
                                    std::min(spec.flow_stop, cfg.duration), {attacker}, seed);
    return cfg;
}

struct ExperimentOptions {
    std::string spec_path;  // empty = built-in defaults
    std::string out_dir = "experiment_out";
    bool compat_ni_tag = false;
};

inline void cmd_experiment(const ExperimentOptions& opts, std::ostream& log) {
    const ExperimentSpec spec = opts.spec_path.empty() ? ExperimentSpec{}
                                                       : load_experiment_spec(opts.spec_path);
    namespace fs = std::filesystem;
    fs::create_directories(opts.out_dir);
    fs::create_directories(fs::path(opts.out_dir) / "models");
    const std::string canonical = canonical_spec(spec);

    std::vector<TrainRowResult> table3;
    std::vector<std::vector<std::string>> table4_rows;
    table4_rows.push_back({"Network", "Layers", "Transfer function", "Seed", "Connections",
                           "RMSE", "MAE", "R2"});
    std::string table4_csv = "network,layers,transfer,seed,connections,rmse,mae,r2\n";
    std::string attack_csv =
        "connections,seed,rreq_rx_attack,rreq_rx_baseline,flow,pdr_attack,pdr_baseline\n";
    std::string table5_csv = metrics_csv_header();
    std::vector<std::vector<std::string>> table5_rows;
    table5_rows.push_back({"No. of connections", "Detection Rate (recall)",
                           "DR over all units", "conn-level DR", "mean test RMSE"});
    std::vector<std::string> outputs;

    for (int conn : spec.connections) {
        detect::ConfusionCounts dr_counts;          // sample-level, across seeds
        detect::ConfusionCounts dr_conn_counts;     // connection-level, across seeds
        double rmse_sum = 0.0;
        int rmse_n = 0;
        for (std::uint64_t seed : spec.seeds) {
            const std::string stem =
                "conn" + std::to_string(conn) + "_seed" + std::to_string(seed);
            log << "== " << stem << "\n";
            sim::ScenarioConfig attack_cfg = scenario_for(spec, conn, seed, true);
            sim::ScenarioConfig base_cfg = scenario_for(spec, conn, seed, false);
            sim::Simulator attack_sim(attack_cfg);
            attack_sim.run();
            sim::Simulator base_sim(base_cfg);
            base_sim.run();

            const auto tag =
                opts.compat_ni_tag ? std::optional(trace::LevelTag::NI) : std::nullopt;
            const std::string trace_path =
                (fs::path(opts.out_dir) / (stem + "_attack.tr")).string();
            const std::string base_path =
                (fs::path(opts.out_dir) / (stem + "_baseline.tr")).string();
            write_trace_file(trace_path, attack_sim.records(), tag);
            write_trace_file(base_path, base_sim.records(), tag);
            const sim::GroundTruth truth = sim::ground_truth_of(attack_cfg);
            {
                std::ofstream t(trace_path + ".truth");
                sim::write_ground_truth(t, truth);
                std::ofstream b(base_path + ".truth");
                sim::write_ground_truth(b, sim::ground_truth_of(base_cfg));
            }
            outputs.push_back(trace_path);
            outputs.push_back(base_path);

            // paired attack-effect accounting
            for (std::size_t f = 0; f < attack_cfg.flows.size(); ++f) {
                const auto& fa = attack_sim.summary().flow[f];
                const auto& fb = base_sim.summary().flow[f];
                const double pdr_a =
                    fa.originated ? static_cast<double>(fa.delivered) / fa.originated : 0.0;
                const double pdr_b =
                    fb.originated ? static_cast<double>(fb.delivered) / fb.originated : 0.0;
                attack_csv += std::to_string(conn) + "," + std::to_string(seed) + "," +
                              std::to_string(attack_sim.summary().rreq_receive_events) + "," +
                              std::to_string(base_sim.summary().rreq_receive_events) + "," +
                              std::to_string(f) + "," + format_real(pdr_a, "%.6f") + "," +
                              format_real(pdr_b, "%.6f") + "\n";
            }

            const auto rows = features::extract(attack_sim.records(), spec.window, truth);
            const std::string dataset_path =
                (fs::path(opts.out_dir) / (stem + "_dataset.csv")).string();
            features::write_dataset_file(dataset_path, rows);
            outputs.push_back(dataset_path);

            const auto base_rows =
                features::extract(base_sim.records(), spec.window, sim::ground_truth_of(base_cfg));
            bool base_all_normal = true;
            for (const auto& r : base_rows)
                if (r.label) base_all_normal = false;
            if (base_all_normal)
                log << "baseline run: all labels normal, detection degenerates; training uses "
                       "the attack run only\n";

            TrainOptions train_opts;
            train_opts.out_dir = (fs::path(opts.out_dir) / "models").string();
            train_opts.architectures = spec.architectures;
            train_opts.transfers = spec.transfers;
            train_opts.seeds = {seed};
            train_opts.train = spec.train;
            train_opts.split_ratio = spec.split_ratio;
            train_opts.threshold = spec.threshold;
            // model files are per (conn, seed): prefix via architecture name
            std::vector<TrainRowResult> results;
            {
                TrainOptions o = train_opts;
                o.out_dir = (fs::path(opts.out_dir) / "models" / stem).string();
                results = train_all(rows, o, log);
            }
            for (auto& r : results) outputs.push_back(r.model_path);

            // evaluate every trained model; keep the best by test RMSE for DR
            const EvaluationResult* best = nullptr;
            std::vector<EvaluationResult> evals(results.size());
            for (std::size_t i = 0; i < results.size(); ++i) {
                const nn::Network net = nn::load_network_file(results[i].model_path);
                const ModelMeta meta = load_model_meta(results[i].model_path + ".meta");
                evals[i] = evaluate_model(net, meta, rows, &truth, spec.window);
                table4_csv += "FFBP," + results[i].arch + "," +
                              nn::transfer_name(results[i].transfer) + "," +
                              std::to_string(seed) + "," + std::to_string(conn) + "," +
                              format_real(evals[i].test_rmse, "%.4f") + "," +
                              format_real(evals[i].test_mae, "%.4f") + "," +
                              (evals[i].test_r2 ? format_real(*evals[i].test_r2, "%.4f")
                                                : std::string("nan")) +
                              "\n";
                table4_rows.push_back({"FFBP", results[i].arch,
                                       nn::transfer_name(results[i].transfer),
                                       std::to_string(seed), std::to_string(conn),
                                       format_real(evals[i].test_rmse, "%.4f"),
                                       format_real(evals[i].test_mae, "%.4f"),
                                       evals[i].test_r2 ? format_real(*evals[i].test_r2, "%.4f")
                                                        : "nan"});
                if (!best || evals[i].test_rmse < best->test_rmse) best = &evals[i];
                table3.push_back(results[i]);
            }
            if (best) {
                dr_counts.tp += best->sample_counts.tp;
                dr_counts.fp += best->sample_counts.fp;
                dr_counts.tn += best->sample_counts.tn;
                dr_counts.fn += best->sample_counts.fn;
                if (best->connection_counts) {
                    dr_conn_counts.tp += best->connection_counts->tp;
                    dr_conn_counts.fp += best->connection_counts->fp;
                    dr_conn_counts.tn += best->connection_counts->tn;
                    dr_conn_counts.fn += best->connection_counts->fn;
                }
                rmse_sum += best->test_rmse;
                ++rmse_n;
            }
        }
        const double recall = dr_counts.tp + dr_counts.fn > 0
                                  ? static_cast<double>(dr_counts.tp) /
                                        static_cast<double>(dr_counts.tp + dr_counts.fn)
                                  : 0.0;
        const double dr_all = dr_counts.total() > 0
                                    ? static_cast<double>(dr_counts.tp) /
                                          static_cast<double>(dr_counts.total())
                                    : 0.0;
        const double conn_recall =
            dr_conn_counts.tp + dr_conn_counts.fn > 0
                ? static_cast<double>(dr_conn_counts.tp) /
                      static_cast<double>(dr_conn_counts.tp + dr_conn_counts.fn)
                : 0.0;
        const double mean_rmse = rmse_n ? rmse_sum / rmse_n : 0.0;
        detect::DetectionRate dr{recall, dr_all};
        table5_csv += metrics_csv_row(conn, dr, dr_counts, mean_rmse);
        table5_rows.push_back({std::to_string(conn), format_real(recall * 100, "%.2f") + "%",
                               format_real(dr_all * 100, "%.2f") + "%",
                               format_real(conn_recall * 100, "%.2f") + "%",
                               format_real(mean_rmse, "%.4f")});
    }

    write_text_file((fs::path(opts.out_dir) / "table3_train.csv").string(),
                    train_report_csv(table3));
    write_text_file((fs::path(opts.out_dir) / "table3_train.txt").string(),
                    train_report_text(table3));
    std::string table4_txt = format_table(table4_rows);
    write_text_file((fs::path(opts.out_dir) / "table4_test.csv").string(), table4_csv);
    write_text_file((fs::path(opts.out_dir) / "table4_test.txt").string(), table4_txt);
    write_text_file((fs::path(opts.out_dir) / "table5_dr.csv").string(), table5_csv);
    write_text_file((fs::path(opts.out_dir) / "table5_dr.txt").string(),
                    format_table(table5_rows));
    write_text_file((fs::path(opts.out_dir) / "attack_effect.csv").string(), attack_csv);

    std::string manifest = "# experiment manifest\n";
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical)));
    manifest += "spec_hash = " + std::string(hash_buf) + "\n";
    manifest += "# --- canonical spec ---\n" + canonical;
    manifest += "# --- outputs (relative to the experiment directory) ---\n";
    for (const auto& o : outputs)
        manifest +=
            "output = " + fs::relative(fs::path(o), fs::path(opts.out_dir)).generic_string() +
            "\n";
    write_text_file((fs::path(opts.out_dir) / "manifest.txt").string(), manifest);
    log << "experiment complete: " << opts.out_dir << "\n";
}

}  // namespace manetid::cli
