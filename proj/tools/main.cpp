// Command-line front end: each subcommand wires the library stages into a
// reproducible run directory. Exit codes: 0 success, 1 usage/config error,
// 2 data error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "neurodec/errors.hpp"
#include "neurodec/pipeline.hpp"

namespace fs = std::filesystem;
using namespace neurodec;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "runs";
    std::string run_name;
    std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Flat key-value config file");
    cmd->add_option("--seed", args.seed, "Override global.seed");
    cmd->add_option("--out", args.out_dir, "Parent directory for run outputs");
    cmd->add_option("--run-name", args.run_name,
                    "Fixed run directory name (must not already exist)");
}

struct LoadedRun {
    FlatConfig raw;
    PipelineConfig cfg;
};

LoadedRun load_run(const CommonArgs& args) {
    FlatConfig raw = args.config_path.empty() ? FlatConfig{}
                                              : FlatConfig::parse_file(args.config_path);
    if (args.seed) raw.set("global.seed", std::to_string(*args.seed));
    return {raw, parse_pipeline_config(raw)};
}

int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const CheckpointError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-subject voxel decoding pipeline"};
    app.require_subcommand(1);

    CommonArgs synth_args, pretrain_args, train_args, eval_args, attr_args, base_args;
    std::string dataset_dir, stage1_dir, checkpoint_dir, roi_file;
    size_t class_id = 0, subject_id = 0;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    add_common(synth, synth_args);

    CLI::App* pretrain = app.add_subcommand("pretrain", "Stage-1 masked-autoencoder training");
    add_common(pretrain, pretrain_args);
    pretrain->add_option("--dataset", dataset_dir, "Dataset directory")->required();

    CLI::App* train = app.add_subcommand("train", "Stage-2 dual-decoder training");
    add_common(train, train_args);
    train->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    train->add_option("--stage1", stage1_dir, "Stage-1 checkpoint directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a stage-2 checkpoint");
    add_common(eval, eval_args);
    eval->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    eval->add_option("--checkpoint", checkpoint_dir, "Stage-2 checkpoint directory")->required();

    CLI::App* attribute = app.add_subcommand("attribute", "Object-voxel fingerprint");
    add_common(attribute, attr_args);
    attribute->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    attribute->add_option("--checkpoint", checkpoint_dir, "Stage-2 checkpoint directory")
        ->required();
    attribute->add_option("--class-id", class_id, "Object class to attribute")->required();
    attribute->add_option("--subject-id", subject_id, "Subject whose voxels to score")
        ->required();
    attribute->add_option("--roi", roi_file, "Optional MKT1 vector of integer ROI labels");

    CLI::App* baselines = app.add_subcommand("baselines", "Biometric baseline battery");
    add_common(baselines, base_args);
    baselines->add_option("--dataset", dataset_dir, "Dataset directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    return run_guarded([&] {
        if (synth->parsed()) {
            LoadedRun run = load_run(synth_args);
            fs::path dir = prepare_run_dir(synth_args.out_dir, "synth", synth_args.run_name,
                                           run.raw, run.cfg.seed);
            SynthOutcome outcome = run_synth(run.cfg, dir);
            std::cout << "synth: " << outcome.train_records << " train / "
                      << outcome.test_records << " test records -> "
                      << outcome.dataset_dir.string() << "\n";
        } else if (pretrain->parsed()) {
            LoadedRun run = load_run(pretrain_args);
            fs::path dir = prepare_run_dir(pretrain_args.out_dir, "pretrain",
                                           pretrain_args.run_name, run.raw, run.cfg.seed);
            PretrainOutcome outcome = run_pretrain(run.cfg, dataset_dir, dir);
            std::cout << "pretrain: loss " << format_double(outcome.initial_loss) << " -> "
                      << format_double(outcome.final_loss) << ", checkpoint "
                      << outcome.checkpoint_dir.string() << "\n";
        } else if (train->parsed()) {
            LoadedRun run = load_run(train_args);
            fs::path dir = prepare_run_dir(train_args.out_dir, "train", train_args.run_name,
                                           run.raw, run.cfg.seed);
            TrainOutcome outcome = run_train(run.cfg, dataset_dir, stage1_dir, dir);
            std::cout << "train: val ACC " << format_double(outcome.final_metrics.acc)
                      << ", val mAP " << format_double(outcome.final_metrics.map)
                      << ", checkpoint " << outcome.checkpoint_dir.string() << "\n";
        } else if (eval->parsed()) {
            LoadedRun run = load_run(eval_args);
            fs::path dir = prepare_run_dir(eval_args.out_dir, "eval", eval_args.run_name,
                                           run.raw, run.cfg.seed);
            EvalOutcome outcome = run_eval(run.cfg, checkpoint_dir, dataset_dir, dir);
            std::cout << "eval: ACC " << format_double(outcome.report.acc) << ", mAP "
                      << format_double(outcome.report.map) << ", AUC "
                      << format_double(outcome.report.auc) << ", Hamming "
                      << format_double(outcome.report.hamming) << ", MCC "
                      << format_double(outcome.report.mcc) << " -> "
                      << outcome.report_path.string() << "\n";
        } else if (attribute->parsed()) {
            LoadedRun run = load_run(attr_args);
            fs::path dir = prepare_run_dir(attr_args.out_dir, "attribute", attr_args.run_name,
                                           run.raw, run.cfg.seed);
            std::optional<fs::path> roi;
            if (!roi_file.empty()) roi = roi_file;
            AttributeOutcome outcome = run_attribute(run.cfg, checkpoint_dir, dataset_dir,
                                                     class_id, subject_id, roi, dir);
            if (outcome.empty_result)
                std::cout << "attribute: no qualifying true-positive samples (empty result)\n";
            else
                std::cout << "attribute: " << outcome.sample_count << " samples -> "
                          << outcome.csv_path.string() << "\n";
        } else if (baselines->parsed()) {
            LoadedRun run = load_run(base_args);
            fs::path dir = prepare_run_dir(base_args.out_dir, "baselines", base_args.run_name,
                                           run.raw, run.cfg.seed);
            BaselinesOutcome outcome = run_baselines(run.cfg, dataset_dir, dir);
            std::cout << "baselines: kmeans-euclidean ACC "
                      << format_double(outcome.kmeans_euclidean.acc) << ", kmeans-cosine ACC "
                      << format_double(outcome.kmeans_cosine.acc) << ", least-squares ACC "
                      << format_double(outcome.linear.least_squares.acc)
                      << ", linear-CE ACC "
                      << format_double(outcome.linear.cross_entropy.acc) << " -> "
                      << outcome.report_path.string() << "\n";
        }
    });
}
