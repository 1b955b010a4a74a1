#include "neurodec/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "neurodec/errors.hpp"
#include "neurodec/tensor_io.hpp"

namespace neurodec {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

PaddingPlan PreprocessState::plan_for(size_t subject_id) const {
    if (subject_id >= subject_lengths.size())
        throw DataError("no preprocessing state for subject " + std::to_string(subject_id));
    return PaddingPlan{subject_lengths[subject_id], padded_length};
}

namespace {

std::string param_file(const std::string& name) {
    std::string file = name;
    for (char& c : file)
        if (c == '.') c = '_';
    return "params/" + file + ".mkt";
}

void save_params(const fs::path& dir, const NamedParams& params, ordered_json& manifest) {
    fs::create_directories(dir / "params");
    for (const auto& [name, tensor] : params) {
        const std::string file = param_file(name);
        write_matrix_file(dir / file, tensor.rows(), tensor.cols(), tensor.values());
        manifest[name] = {{"file", file}, {"rows", tensor.rows()}, {"cols", tensor.cols()}};
    }
}

void load_params(const fs::path& dir, NamedParams& params) {
    for (auto& [name, tensor] : params) {
        const fs::path file = dir / param_file(name);
        if (!fs::exists(file))
            throw CheckpointError("checkpoint is missing parameter file " + file.string());
        TensorFile t = read_tensor_file(file);
        if (t.dims.size() != 2 || t.dims[0] != tensor.rows() || t.dims[1] != tensor.cols())
            throw CheckpointError("checkpoint parameter '" + name +
                                  "' has mismatched shape in " + file.string());
        tensor.mutable_values() = std::move(t.data);
    }
}

void save_prep(const fs::path& dir, const PreprocessState& prep, ordered_json& j) {
    fs::create_directories(dir / "stats");
    j["padded_length"] = prep.padded_length;
    j["subject_lengths"] = prep.subject_lengths;
    ordered_json stats = ordered_json::array();
    for (const auto& [subject, moments] : prep.stats.by_subject) {
        char name[48];
        std::snprintf(name, sizeof(name), "stats/subject_%03zu.mkt", subject);
        std::vector<double> packed = moments.mean;
        packed.insert(packed.end(), moments.stddev.begin(), moments.stddev.end());
        write_matrix_file(dir / name, 2, moments.mean.size(), packed);
        stats.push_back({{"subject", subject}, {"file", name}});
    }
    j["stats"] = stats;
}

PreprocessState load_prep(const fs::path& dir, const ordered_json& j) {
    PreprocessState prep;
    prep.padded_length = j.at("padded_length").get<size_t>();
    prep.subject_lengths = j.at("subject_lengths").get<std::vector<size_t>>();
    for (const auto& entry : j.at("stats")) {
        const size_t subject = entry.at("subject").get<size_t>();
        TensorFile t = read_tensor_file(dir / entry.at("file").get<std::string>());
        if (t.dims.size() != 2 || t.dims[0] != 2)
            throw CheckpointError("bad stats tensor for subject " + std::to_string(subject));
        const size_t len = t.dims[1];
        StandardizationStats::Moments m;
        m.mean.assign(t.data.begin(), t.data.begin() + static_cast<long>(len));
        m.stddev.assign(t.data.begin() + static_cast<long>(len), t.data.end());
        prep.stats.by_subject.emplace(subject, std::move(m));
    }
    return prep;
}

ordered_json encoder_config_json(const EncoderConfig& cfg) {
    return {{"patch_size", cfg.patch_size},
            {"dim", cfg.dim},
            {"layers", cfg.layers},
            {"heads", cfg.heads},
            {"decoder_dim", cfg.decoder_dim},
            {"decoder_layers", cfg.decoder_layers},
            {"decoder_heads", cfg.decoder_heads},
            {"mask_ratio", cfg.mask_ratio}};
}

EncoderConfig encoder_config_from_json(const ordered_json& j) {
    EncoderConfig cfg;
    cfg.patch_size = j.at("patch_size").get<size_t>();
    cfg.dim = j.at("dim").get<size_t>();
    cfg.layers = j.at("layers").get<size_t>();
    cfg.heads = j.at("heads").get<size_t>();
    cfg.decoder_dim = j.at("decoder_dim").get<size_t>();
    cfg.decoder_layers = j.at("decoder_layers").get<size_t>();
    cfg.decoder_heads = j.at("decoder_heads").get<size_t>();
    cfg.mask_ratio = j.at("mask_ratio").get<double>();
    return cfg;
}

ordered_json read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "checkpoint.json");
    if (!in) throw CheckpointError("missing checkpoint.json in " + dir.string());
    return ordered_json::parse(in);
}

}  // namespace

void save_stage1_checkpoint(const fs::path& dir, const MaeEncoder& encoder,
                            const PreprocessState& prep) {
    fs::create_directories(dir);
    ordered_json j;
    j["kind"] = "stage1";
    j["encoder"] = encoder_config_json(encoder.config());
    save_prep(dir, prep, j);
    ordered_json manifest;
    NamedParams params;
    encoder.collect("encoder", params);
    save_params(dir, params, manifest);
    j["params"] = manifest;
    std::ofstream out(dir / "checkpoint.json", std::ios::trunc);
    out << j.dump(2) << '\n';
}

Stage1Checkpoint load_stage1_checkpoint(const fs::path& dir) {
    ordered_json j = read_manifest(dir);
    if (j.at("kind") != "stage1")
        throw CheckpointError(dir.string() + " is not a stage-1 checkpoint");
    PreprocessState prep = load_prep(dir, j);
    MaeEncoder encoder(encoder_config_from_json(j.at("encoder")), prep.padded_length, 0);
    NamedParams params;
    encoder.collect("encoder", params);
    load_params(dir, params);
    return {std::move(encoder), std::move(prep)};
}

void save_stage2_checkpoint(const fs::path& dir, const DualDecoderModel& model,
                            const PreprocessState& prep) {
    fs::create_directories(dir);
    const DualDecoderConfig& cfg = model.config();
    ordered_json j;
    j["kind"] = "stage2";
    j["encoder"] = encoder_config_json(model.encoder().config());
    j["decoder"] = {{"num_subjects", cfg.num_subjects},
                    {"num_classes", cfg.num_classes},
                    {"object_dim", cfg.object_dim},
                    {"cross_heads", cfg.cross_heads},
                    {"vision_tokens", cfg.vision_tokens},
                    {"vision_dim", cfg.vision_dim},
                    {"use_cross_attention", cfg.use_cross_attention}};
    save_prep(dir, prep, j);
    ordered_json manifest;
    save_params(dir, model.named_params(), manifest);
    j["params"] = manifest;
    std::ofstream out(dir / "checkpoint.json", std::ios::trunc);
    out << j.dump(2) << '\n';
}

Stage2Checkpoint load_stage2_checkpoint(const fs::path& dir) {
    ordered_json j = read_manifest(dir);
    if (j.at("kind") != "stage2")
        throw CheckpointError(dir.string() + " is not a stage-2 checkpoint");
    PreprocessState prep = load_prep(dir, j);
    MaeEncoder encoder(encoder_config_from_json(j.at("encoder")), prep.padded_length, 0);

    const auto& d = j.at("decoder");
    DualDecoderConfig cfg;
    cfg.num_subjects = d.at("num_subjects").get<size_t>();
    cfg.num_classes = d.at("num_classes").get<size_t>();
    cfg.object_dim = d.at("object_dim").get<size_t>();
    cfg.cross_heads = d.at("cross_heads").get<size_t>();
    cfg.vision_tokens = d.at("vision_tokens").get<size_t>();
    cfg.vision_dim = d.at("vision_dim").get<size_t>();
    cfg.use_cross_attention = d.at("use_cross_attention").get<bool>();

    DualDecoderModel model(std::move(encoder), cfg, /*seed=*/0);
    NamedParams params = model.named_params();
    load_params(dir, params);
    return {std::move(model), std::move(prep)};
}

}  // namespace neurodec
