// manetid: MANET DoS intrusion-detection laboratory.
//
//   simulate    run the AODV/RWP scenario and write an NS-2 style trace
//   extract     turn a trace + ground truth into a labeled feature dataset
//   train       train FFBP networks (LM or GDM) on a dataset
//   evaluate    score a trained model, write the metrics table
//   experiment  the full sweep: simulate -> extract -> train -> evaluate
//               over paired attack/baseline runs and connection counts

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "manetid/experiment.hpp"

namespace {

std::vector<manetid::nn::Transfer> parse_transfers(const std::vector<std::string>& names) {
    std::vector<manetid::nn::Transfer> out;
    for (const auto& n : names) {
        auto t = manetid::nn::transfer_from_name(n);
        if (!t) throw manetid::ConfigError("unknown transfer '" + n + "'");
        out.push_back(*t);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace manetid;

    CLI::App app{"manetid: MANET DoS intrusion detection laboratory"};
    app.require_subcommand(1);

    // simulate
    cli::SimulateOptions sim_opts;
    std::int64_t seed_flag = -1;
    auto* simulate = app.add_subcommand("simulate", "run a scenario and write the trace");
    simulate->add_option("--config", sim_opts.config_path, "scenario config file");
    simulate->add_option("--seed", seed_flag, "override the scenario seed");
    simulate->add_option("--out", sim_opts.out_trace, "output trace file")->required();
    simulate->add_option("--truth", sim_opts.out_truth, "ground truth sidecar path");
    simulate->add_flag("--compat-ni-tag", sim_opts.compat_ni_tag,
                       "emit the -NI level tag instead of -Nl");

    // extract
    cli::ExtractOptions ext_opts;
    auto* extract = app.add_subcommand("extract", "extract labeled features from a trace");
    extract->add_option("--trace", ext_opts.trace_path, "input trace file")->required();
    extract->add_option("--truth", ext_opts.truth_path, "ground truth sidecar")->required();
    extract->add_option("--window", ext_opts.window, "window length in seconds");
    extract->add_option("--out", ext_opts.out_dataset, "output dataset file")->required();
    extract->add_flag("--strict", ext_opts.strict, "abort on the first malformed line");

    // train
    cli::TrainOptions train_opts;
    std::vector<std::string> transfer_names{"logsig", "tansig"};
    std::string algorithm = "lm";
    std::vector<std::int64_t> seed_list;
    auto* train = app.add_subcommand("train", "train FFBP networks on a dataset");
    train->add_option("--dataset", train_opts.dataset_path, "input dataset")->required();
    train->add_option("--out", train_opts.out_dir, "output directory")->required();
    train->add_option("--arch", train_opts.architectures, "architectures, e.g. 4-15-10-1");
    train->add_option("--transfer", transfer_names, "hidden transfers (logsig/tansig/purelin)");
    train->add_option("--seed", seed_list, "training seeds");
    train->add_option("--algorithm", algorithm, "lm or gdm");
    train->add_option("--max-epochs", train_opts.train.max_epochs, "epoch cap");
    train->add_option("--goal-rmse", train_opts.train.goal_rmse, "stop at this training RMSE");
    train->add_option("--learning-rate", train_opts.train.learning_rate, "GDM learning rate");
    train->add_option("--momentum", train_opts.train.momentum, "GDM momentum");
    train->add_option("--split-ratio", train_opts.split_ratio, "train fraction");

    // evaluate
    cli::EvaluateOptions eval_opts;
    double threshold_flag = -1.0;
    auto* evaluate = app.add_subcommand("evaluate", "score a model on a dataset");
    evaluate->add_option("--model", eval_opts.model_path, "trained model file")->required();
    evaluate->add_option("--dataset", eval_opts.dataset_path, "dataset file")->required();
    evaluate->add_option("--out", eval_opts.out_metrics, "output metrics csv")->required();
    evaluate->add_option("--truth", eval_opts.truth_path,
                         "ground truth sidecar (enables connection-level metrics)");
    evaluate->add_option("--threshold", threshold_flag, "attack threshold in (0,1)");

    // experiment
    cli::ExperimentOptions exp_opts;
    auto* experiment = app.add_subcommand("experiment", "full paired sweep with tables");
    experiment->add_option("--spec", exp_opts.spec_path, "experiment spec file");
    experiment->add_option("--out", exp_opts.out_dir, "output directory")->required();
    experiment->add_flag("--compat-ni-tag", exp_opts.compat_ni_tag,
                         "emit the -NI level tag instead of -Nl");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            if (seed_flag >= 0) sim_opts.seed = static_cast<std::uint64_t>(seed_flag);
            cli::cmd_simulate(sim_opts, std::cout);
        } else if (extract->parsed()) {
            cli::cmd_extract(ext_opts, std::cout);
        } else if (train->parsed()) {
            train_opts.transfers = parse_transfers(transfer_names);
            train_opts.train.algorithm = algorithm == "gdm" ? nn::TrainConfig::Algorithm::GDM
                                                            : nn::TrainConfig::Algorithm::LM;
            if (algorithm != "lm" && algorithm != "gdm")
                throw ConfigError("--algorithm must be lm or gdm");
            if (!seed_list.empty()) {
                train_opts.seeds.clear();
                for (auto s : seed_list) train_opts.seeds.push_back(static_cast<std::uint64_t>(s));
            }
            cli::cmd_train(train_opts, std::cout);
        } else if (evaluate->parsed()) {
            if (threshold_flag > 0.0) eval_opts.threshold = threshold_flag;
            cli::cmd_evaluate(eval_opts, std::cout);
        } else if (experiment->parsed()) {
            cli::cmd_experiment(exp_opts, std::cout);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
