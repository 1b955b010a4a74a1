#include "neurodec/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "neurodec/errors.hpp"
#include "neurodec/tensor_io.hpp"

namespace neurodec {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "global.seed",
        "synth.num_subjects", "synth.num_classes", "synth.voxel_lengths",
        "synth.base_voxel_length", "synth.length_jitter", "synth.latent_dim",
        "synth.subject_dim", "synth.object_dim", "synth.label_density", "synth.noise_std",
        "synth.train_stimuli", "synth.test_stimuli", "synth.repetitions",
        "synth.object_embedding", "synth.subject_gain", "synth.object_gain",
        "synth.vision_tokens", "synth.vision_dim", "synth.inject_class",
        "synth.inject_span", "synth.inject_align", "synth.inject_gain",
        "encoder.patch_size", "encoder.dim", "encoder.layers", "encoder.heads",
        "encoder.decoder_dim", "encoder.decoder_layers", "encoder.decoder_heads",
        "encoder.mask_ratio",
        "stage1.epochs", "stage1.batch_size", "stage1.learning_rate", "stage1.warmup_frac",
        "stage1.weight_decay",
        "stage2.epochs", "stage2.batch_size", "stage2.learning_rate", "stage2.warmup_frac",
        "stage2.weight_decay", "stage2.lambda", "stage2.use_subject_loss",
        "stage2.use_orth_loss", "stage2.use_cross_attention", "stage2.cross_heads",
        "stage2.object_dim", "stage2.threshold",
        "eval.threshold", "eval.micro_auc",
        "attribution.statistic", "attribution.rollout_residual", "attribution.threshold",
        "baselines.kmeans_restarts", "baselines.kmeans_max_iter", "baselines.kmeans_tol",
        "baselines.ridge", "baselines.linear_epochs", "baselines.linear_batch_size",
        "baselines.linear_learning_rate",
    };
    return keys;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

PipelineConfig parse_pipeline_config(const FlatConfig& cfg) {
    cfg.validate_known(known_keys());

    PipelineConfig p;
    p.seed = cfg.get_u64("global.seed", 42);

    GeneratorConfig& g = p.synth;
    g.num_subjects = cfg.get_u64("synth.num_subjects", g.num_subjects);
    g.num_classes = cfg.get_u64("synth.num_classes", g.num_classes);
    {
        auto lengths = cfg.get_u64_list("synth.voxel_lengths", {});
        g.voxel_lengths.assign(lengths.begin(), lengths.end());
    }
    g.base_voxel_length = cfg.get_u64("synth.base_voxel_length", g.base_voxel_length);
    g.length_jitter = cfg.get_f64("synth.length_jitter", g.length_jitter);
    g.latent_dim = cfg.get_u64("synth.latent_dim", g.latent_dim);
    g.subject_dim = cfg.get_u64("synth.subject_dim", g.subject_dim);
    g.object_dim = cfg.get_u64("synth.object_dim", g.object_dim);
    g.label_density = cfg.get_f64("synth.label_density", g.label_density);
    g.noise_std = cfg.get_f64("synth.noise_std", g.noise_std);
    g.train_stimuli = cfg.get_u64("synth.train_stimuli", g.train_stimuli);
    g.test_stimuli = cfg.get_u64("synth.test_stimuli", g.test_stimuli);
    g.repetitions = cfg.get_u64("synth.repetitions", g.repetitions);
    g.object_embedding = cfg.get_string("synth.object_embedding", g.object_embedding);
    g.subject_gain = cfg.get_f64("synth.subject_gain", g.subject_gain);
    g.object_gain = cfg.get_f64("synth.object_gain", g.object_gain);
    g.vision_tokens = cfg.get_u64("synth.vision_tokens", g.vision_tokens);
    g.vision_dim = cfg.get_u64("synth.vision_dim", g.vision_dim);
    g.inject_class = cfg.get_i64("synth.inject_class", g.inject_class);
    g.inject_span = cfg.get_u64("synth.inject_span", g.inject_span);
    g.inject_align = cfg.get_u64("synth.inject_align", g.inject_align);
    g.inject_gain = cfg.get_f64("synth.inject_gain", g.inject_gain);
    g.seed = derive_seed(p.seed, "synth");

    EncoderConfig& e = p.encoder;
    e.patch_size = cfg.get_u64("encoder.patch_size", e.patch_size);
    e.dim = cfg.get_u64("encoder.dim", e.dim);
    e.layers = cfg.get_u64("encoder.layers", e.layers);
    e.heads = cfg.get_u64("encoder.heads", e.heads);
    e.decoder_dim = cfg.get_u64("encoder.decoder_dim", e.decoder_dim);
    e.decoder_layers = cfg.get_u64("encoder.decoder_layers", e.decoder_layers);
    e.decoder_heads = cfg.get_u64("encoder.decoder_heads", e.decoder_heads);
    e.mask_ratio = cfg.get_f64("encoder.mask_ratio", e.mask_ratio);

    Stage1Config& s1 = p.stage1;
    s1.epochs = cfg.get_u64("stage1.epochs", s1.epochs);
    s1.batch_size = cfg.get_u64("stage1.batch_size", s1.batch_size);
    s1.learning_rate = cfg.get_f64("stage1.learning_rate", s1.learning_rate);
    s1.warmup_frac = cfg.get_f64("stage1.warmup_frac", s1.warmup_frac);
    s1.weight_decay = cfg.get_f64("stage1.weight_decay", s1.weight_decay);
    s1.seed = derive_seed(p.seed, "stage1");

    Stage2Config& s2 = p.stage2;
    s2.epochs = cfg.get_u64("stage2.epochs", s2.epochs);
    s2.batch_size = cfg.get_u64("stage2.batch_size", s2.batch_size);
    s2.learning_rate = cfg.get_f64("stage2.learning_rate", s2.learning_rate);
    s2.warmup_frac = cfg.get_f64("stage2.warmup_frac", s2.warmup_frac);
    s2.weight_decay = cfg.get_f64("stage2.weight_decay", s2.weight_decay);
    s2.lambda = cfg.get_f64("stage2.lambda", s2.lambda);
    s2.use_subject_loss = cfg.get_bool("stage2.use_subject_loss", s2.use_subject_loss);
    s2.use_orth_loss = cfg.get_bool("stage2.use_orth_loss", s2.use_orth_loss);
    s2.threshold = cfg.get_f64("stage2.threshold", s2.threshold);
    s2.seed = derive_seed(p.seed, "stage2");
    p.use_cross_attention = cfg.get_bool("stage2.use_cross_attention", p.use_cross_attention);
    p.cross_heads = cfg.get_u64("stage2.cross_heads", p.cross_heads);
    p.object_dim = cfg.get_u64("stage2.object_dim", p.object_dim);

    p.eval_threshold = cfg.get_f64("eval.threshold", p.eval_threshold);
    p.eval_micro_auc = cfg.get_bool("eval.micro_auc", p.eval_micro_auc);

    p.attribution.statistic = cfg.get_string("attribution.statistic", p.attribution.statistic);
    p.attribution.rollout_residual =
        cfg.get_bool("attribution.rollout_residual", p.attribution.rollout_residual);
    p.attribution.threshold = cfg.get_f64("attribution.threshold", p.attribution.threshold);

    p.kmeans_restarts = cfg.get_u64("baselines.kmeans_restarts", p.kmeans_restarts);
    p.kmeans_max_iter = cfg.get_u64("baselines.kmeans_max_iter", p.kmeans_max_iter);
    p.kmeans_tol = cfg.get_f64("baselines.kmeans_tol", p.kmeans_tol);
    p.linear_baseline.ridge = cfg.get_f64("baselines.ridge", p.linear_baseline.ridge);
    p.linear_baseline.epochs = cfg.get_u64("baselines.linear_epochs", p.linear_baseline.epochs);
    p.linear_baseline.batch_size =
        cfg.get_u64("baselines.linear_batch_size", p.linear_baseline.batch_size);
    p.linear_baseline.learning_rate =
        cfg.get_f64("baselines.linear_learning_rate", p.linear_baseline.learning_rate);
    p.linear_baseline.seed = derive_seed(p.seed, "baselines");
    return p;
}

std::filesystem::path prepare_run_dir(const fs::path& out, const std::string& command,
                                      const std::string& run_name, const FlatConfig& cfg,
                                      uint64_t seed) {
    fs::create_directories(out);
    fs::path run_dir;
    if (!run_name.empty()) {
        run_dir = out / run_name;
        if (fs::exists(run_dir))
            throw ConfigError("run directory already exists (runs are append-only): " +
                              run_dir.string());
    } else {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_utc);
        run_dir = out / (command + "-" + stamp);
        for (int k = 1; fs::exists(run_dir); ++k)
            run_dir = out / (command + "-" + std::string(stamp) + "-" + std::to_string(k));
    }
    fs::create_directories(run_dir);
    write_text(run_dir / "config.echo.txt", cfg.raw_text());

    ordered_json effective;
    effective["command"] = command;
    effective["seed"] = seed;
    ordered_json entries;
    for (const auto& [key, value] : cfg.entries()) entries[key] = value;
    effective["config"] = entries;
    write_json(run_dir / "effective.json", effective);
    return run_dir;
}

PreparedData prepare_data(const LoadedDataset& ds, size_t patch_size) {
    if (ds.train.empty()) throw DataError("prepare_data: dataset has no training records");

    // Order fixed as: standardize raw trials with training moments, average
    // repetitions, then pad to the uniform length.
    StandardizationStats stats = fit_standardization(ds.train);

    auto standardize_all = [&](const std::vector<VoxelRecord>& records) {
        std::vector<VoxelRecord> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(apply_standardization(r, stats));
        return out;
    };
    auto train_avg = average_repetitions(standardize_all(ds.train));
    auto test_avg = average_repetitions(standardize_all(ds.test));

    const size_t target = compute_target_length(ds.subject_lengths, patch_size);
    VisionFeatureProvider provider = make_vision_provider(ds.config);

    PreparedData prepared;
    prepared.dataset_config = ds.config;
    prepared.prep.stats = std::move(stats);
    prepared.prep.subject_lengths = ds.subject_lengths;
    prepared.prep.padded_length = target;

    auto convert = [&](const std::vector<VoxelRecord>& records,
                       std::vector<DecodingSample>& out) {
        out.reserve(records.size());
        for (const auto& r : records) {
            DecodingSample s;
            s.subject_id = r.subject_id;
            s.labels = r.labels;
            s.padded = pad_wraparound(r.voxels, target, patch_size).first;
            s.vision = provider.features(r.labels);
            out.push_back(std::move(s));
        }
    };
    convert(train_avg, prepared.train);
    convert(test_avg, prepared.test);
    return prepared;
}

SynthOutcome run_synth(const PipelineConfig& cfg, const fs::path& run_dir) {
    SynthDataset ds = generate_dataset(cfg.synth);
    save_dataset_dir(run_dir, ds);

    SynthOutcome outcome{run_dir, ds.train.size(), ds.test.size()};
    ordered_json summary;
    summary["command"] = "synth";
    summary["status"] = "ok";
    summary["train_records"] = outcome.train_records;
    summary["test_records"] = outcome.test_records;
    summary["subjects"] = cfg.synth.num_subjects;
    summary["classes"] = cfg.synth.num_classes;
    write_json(run_dir / "summary.json", summary);
    return outcome;
}

PretrainOutcome run_pretrain(const PipelineConfig& cfg, const fs::path& dataset_dir,
                             const fs::path& run_dir) {
    if (!fs::exists(dataset_dir / "manifest.csv"))
        throw IoError("missing dataset manifest: " + (dataset_dir / "manifest.csv").string());
    LoadedDataset ds = load_dataset_dir(dataset_dir);
    PreparedData prepared = prepare_data(ds, cfg.encoder.patch_size);

    MaeEncoder encoder(cfg.encoder, prepared.prep.padded_length,
                       derive_seed(cfg.stage1.seed, "encoder"));
    MaeDecoder decoder(cfg.encoder, encoder.seq_len(), derive_seed(cfg.stage1.seed, "decoder"));

    std::vector<std::vector<double>> padded;
    padded.reserve(prepared.train.size());
    for (const auto& s : prepared.train) padded.push_back(s.padded);
    Stage1Result result = pretrain_stage1(encoder, decoder, padded, cfg.stage1);

    const fs::path ckpt = run_dir / "stage1";
    save_stage1_checkpoint(ckpt, encoder, prepared.prep);

    std::string csv = "epoch,loss\n";
    for (size_t e = 0; e < result.epoch_loss.size(); ++e)
        csv += std::to_string(e) + "," + format_double(result.epoch_loss[e]) + "\n";
    write_text(run_dir / "loss.csv", csv);

    PretrainOutcome outcome;
    outcome.checkpoint_dir = ckpt;
    outcome.initial_loss = result.initial_loss;
    outcome.final_loss = result.final_loss;

    ordered_json summary;
    summary["command"] = "pretrain";
    summary["status"] = "ok";
    summary["checkpoint"] = "stage1";
    summary["epochs"] = result.epoch_loss.size();
    summary["initial_loss"] = outcome.initial_loss;
    summary["final_loss"] = outcome.final_loss;
    write_json(run_dir / "summary.json", summary);
    return outcome;
}

TrainOutcome run_train(const PipelineConfig& cfg, const fs::path& dataset_dir,
                       const fs::path& stage1_dir, const fs::path& run_dir) {
    if (!fs::exists(stage1_dir / "checkpoint.json"))
        throw IoError("missing stage-1 checkpoint: " + (stage1_dir / "checkpoint.json").string());
    Stage1Checkpoint stage1 = load_stage1_checkpoint(stage1_dir);
    LoadedDataset ds = load_dataset_dir(dataset_dir);
    PreparedData prepared = prepare_data(ds, stage1.encoder.config().patch_size);
    if (prepared.prep.padded_length != stage1.prep.padded_length)
        throw CheckpointError("dataset padded length " +
                              std::to_string(prepared.prep.padded_length) +
                              " does not match stage-1 checkpoint (" +
                              std::to_string(stage1.prep.padded_length) + ")");

    DualDecoderConfig dcfg;
    dcfg.num_subjects = ds.config.num_subjects;
    dcfg.num_classes = ds.config.num_classes;
    dcfg.object_dim = cfg.resolved_object_dim();
    dcfg.cross_heads = cfg.cross_heads;
    dcfg.vision_tokens = ds.config.vision_tokens;
    dcfg.vision_dim = ds.config.vision_dim;
    dcfg.use_cross_attention = cfg.use_cross_attention;

    DualDecoderModel model(std::move(stage1.encoder), dcfg,
                           derive_seed(cfg.stage2.seed, "model"));
    Stage2Result result = train_stage2(model, prepared.train, prepared.test, cfg.stage2);

    const fs::path ckpt = run_dir / "stage2";
    save_stage2_checkpoint(ckpt, model, prepared.prep);

    std::string csv = "epoch,L_subj,L_obj,L_orth,total,val_ACC,val_mAP\n";
    for (size_t e = 0; e < result.history.size(); ++e) {
        const auto& h = result.history[e];
        csv += std::to_string(e) + "," + format_double(h.loss_subject) + "," +
               format_double(h.loss_object) + "," + format_double(h.loss_orth) + "," +
               format_double(h.loss_total) + "," + format_double(h.val_acc) + "," +
               format_double(h.val_map) + "\n";
    }
    write_text(run_dir / "metrics.csv", csv);

    EvalOutputs eval = evaluate_model(model, prepared.test, cfg.stage2.threshold);

    TrainOutcome outcome;
    outcome.checkpoint_dir = ckpt;
    outcome.final_metrics = eval.report;

    ordered_json summary;
    summary["command"] = "train";
    summary["status"] = "ok";
    summary["checkpoint"] = "stage2";
    summary["epochs"] = result.history.size();
    summary["val_ACC"] = eval.report.acc;
    summary["val_mAP"] = eval.report.map;
    summary["val_MCC"] = eval.report.mcc;
    summary["basis_defect"] = orthonormality_defect(model.basis().snapshot());
    summary["use_cross_attention"] = dcfg.use_cross_attention;
    summary["lambda"] = cfg.stage2.lambda;
    summary["use_subject_loss"] = cfg.stage2.use_subject_loss;
    summary["use_orth_loss"] = cfg.stage2.use_orth_loss;
    write_json(run_dir / "summary.json", summary);
    return outcome;
}

namespace {

ordered_json report_to_json(const EvalReport& r) {
    ordered_json j;
    j["ACC"] = r.acc;
    j["mAP"] = r.map;
    j["AUC"] = r.auc;
    j["Hamming"] = r.hamming;
    j["MCC"] = r.mcc;
    return j;
}

}  // namespace

EvalOutcome run_eval(const PipelineConfig& cfg, const fs::path& checkpoint_dir,
                     const fs::path& dataset_dir, const fs::path& run_dir) {
    if (!fs::exists(checkpoint_dir / "checkpoint.json"))
        throw IoError("missing checkpoint: " + (checkpoint_dir / "checkpoint.json").string());
    Stage2Checkpoint ckpt = load_stage2_checkpoint(checkpoint_dir);
    LoadedDataset ds = load_dataset_dir(dataset_dir);
    PreparedData prepared = prepare_data(ds, ckpt.model.encoder().config().patch_size);

    EvalOutputs eval = evaluate_model(ckpt.model, prepared.test, cfg.eval_threshold);

    ordered_json j = report_to_json(eval.report);
    if (cfg.eval_micro_auc)
        j["AUC_micro"] = roc_auc(eval.object_probs, eval.object_true).micro;
    write_json(run_dir / "eval.json", j);

    std::string csv = "class,ap\n";
    for (size_t c = 0; c < eval.report.per_class_ap.size(); ++c)
        csv += std::to_string(c) + "," + format_double(eval.report.per_class_ap[c]) + "\n";
    write_text(run_dir / "per_class_ap.csv", csv);

    ordered_json summary;
    summary["command"] = "eval";
    summary["status"] = "ok";
    summary["metrics"] = report_to_json(eval.report);
    summary["samples"] = prepared.test.size();
    write_json(run_dir / "summary.json", summary);
    return {eval.report, run_dir / "eval.json"};
}

AttributeOutcome run_attribute(const PipelineConfig& cfg, const fs::path& checkpoint_dir,
                               const fs::path& dataset_dir, size_t class_id,
                               size_t subject_id,
                               const std::optional<fs::path>& roi_path,
                               const fs::path& run_dir) {
    if (!fs::exists(checkpoint_dir / "checkpoint.json"))
        throw IoError("missing checkpoint: " + (checkpoint_dir / "checkpoint.json").string());
    Stage2Checkpoint ckpt = load_stage2_checkpoint(checkpoint_dir);
    LoadedDataset ds = load_dataset_dir(dataset_dir);
    PreparedData prepared = prepare_data(ds, ckpt.model.encoder().config().patch_size);

    const PaddingPlan plan = ckpt.prep.plan_for(subject_id);
    std::vector<int64_t> roi_labels(plan.source_length, 0);
    if (roi_path) {
        TensorFile t = read_tensor_file(*roi_path);
        if (t.numel() != plan.source_length)
            throw DataError("ROI labels have " + std::to_string(t.numel()) +
                            " entries for " + std::to_string(plan.source_length) + " voxels");
        for (size_t i = 0; i < t.data.size(); ++i)
            roi_labels[i] = static_cast<int64_t>(t.data[i]);
    }

    auto fingerprint = aggregate_fingerprint(ckpt.model, prepared.test, class_id, subject_id,
                                             plan, cfg.attribution);

    AttributeOutcome outcome;
    outcome.csv_path = run_dir / "fingerprint.csv";
    std::string csv = "voxel_index,roi_label,score\n";
    ordered_json meta;
    meta["class_id"] = class_id;
    meta["subject_id"] = subject_id;
    meta["statistic"] = cfg.attribution.statistic;
    meta["qualifier_threshold"] = cfg.attribution.threshold;
    meta["rollout_residual"] = cfg.attribution.rollout_residual;
    meta["gradcam"] = "token-mean channel weights, relu of weighted sum";
    if (!fingerprint) {
        outcome.empty_result = true;
        meta["sample_count"] = 0;
        meta["empty_result"] = true;
    } else {
        outcome.sample_count = fingerprint->sample_count;
        meta["sample_count"] = fingerprint->sample_count;
        meta["empty_result"] = false;
        for (size_t i = 0; i < fingerprint->scores.size(); ++i)
            csv += std::to_string(i) + "," + std::to_string(roi_labels[i]) + "," +
                   format_double(fingerprint->scores[i]) + "\n";
        write_vector_file(run_dir / "fingerprint.mkt", fingerprint->scores);
    }
    write_text(outcome.csv_path, csv);
    write_json(run_dir / "attribution.json", meta);

    ordered_json summary;
    summary["command"] = "attribute";
    summary["status"] = "ok";
    summary["empty_result"] = outcome.empty_result;
    summary["sample_count"] = outcome.sample_count;
    write_json(run_dir / "summary.json", summary);
    return outcome;
}

BaselinesOutcome run_baselines(const PipelineConfig& cfg, const fs::path& dataset_dir,
                               const fs::path& run_dir) {
    LoadedDataset ds = load_dataset_dir(dataset_dir);
    // Baselines consume exactly the model's preprocessed view of the data.
    PreparedData prepared = prepare_data(ds, cfg.encoder.patch_size);

    const size_t dim = prepared.prep.padded_length;
    auto to_matrix = [&](const std::vector<DecodingSample>& samples, Mat& x,
                         std::vector<size_t>& y) {
        x = Mat(samples.size(), dim);
        y.clear();
        for (size_t i = 0; i < samples.size(); ++i) {
            std::copy(samples[i].padded.begin(), samples[i].padded.end(),
                      x.data.begin() + static_cast<long>(i * dim));
            y.push_back(samples[i].subject_id);
        }
    };
    Mat train_x, test_x;
    std::vector<size_t> train_y, test_y;
    to_matrix(prepared.train, train_x, train_y);
    to_matrix(prepared.test, test_x, test_y);

    const size_t k = prepared.dataset_config.num_subjects;
    BaselinesOutcome outcome;

    // Centroids fit on the training split; held-out test points get their
    // nearest centroid before cluster-to-subject alignment.
    KMeansResult km_e = kmeans(train_x, k, KMeansMetric::Euclidean,
                               derive_seed(cfg.seed, "kmeans-euclidean"), cfg.kmeans_restarts,
                               cfg.kmeans_max_iter, cfg.kmeans_tol);
    outcome.kmeans_euclidean = align_clusters(
        assign_clusters(test_x, km_e.centroids, KMeansMetric::Euclidean), test_y, k);

    KMeansResult km_c = kmeans(train_x, k, KMeansMetric::Cosine,
                               derive_seed(cfg.seed, "kmeans-cosine"), cfg.kmeans_restarts,
                               cfg.kmeans_max_iter, cfg.kmeans_tol);
    outcome.kmeans_cosine = align_clusters(
        assign_clusters(test_x, km_c.centroids, KMeansMetric::Cosine), test_y, k);

    outcome.linear =
        linear_subject_baselines(train_x, train_y, test_x, test_y, k, cfg.linear_baseline);

    ordered_json j;
    j["kmeans_euclidean"] = {{"ACC", outcome.kmeans_euclidean.acc},
                             {"MCC", outcome.kmeans_euclidean.mcc}};
    j["kmeans_cosine"] = {{"ACC", outcome.kmeans_cosine.acc},
                          {"MCC", outcome.kmeans_cosine.mcc}};
    j["least_squares"] = {{"ACC", outcome.linear.least_squares.acc},
                          {"MCC", outcome.linear.least_squares.mcc}};
    j["linear_cross_entropy"] = {{"ACC", outcome.linear.cross_entropy.acc},
                                 {"MCC", outcome.linear.cross_entropy.mcc}};
    outcome.report_path = run_dir / "baselines.json";
    write_json(outcome.report_path, j);

    ordered_json summary;
    summary["command"] = "baselines";
    summary["status"] = "ok";
    summary["report"] = j;
    write_json(run_dir / "summary.json", summary);
    return outcome;
}

}  // namespace neurodec
