#include "neurodec/data.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "neurodec/errors.hpp"
#include "neurodec/tensor_io.hpp"

namespace neurodec {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string labels_to_string(const std::vector<uint8_t>& labels) {
    std::string out;
    for (size_t c = 0; c < labels.size(); ++c) {
        if (!labels[c]) continue;
        if (!out.empty()) out += ';';
        out += std::to_string(c);
    }
    return out;
}

std::vector<uint8_t> labels_from_string(const std::string& s, size_t num_classes) {
    std::vector<uint8_t> labels(num_classes, 0);
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ';')) {
        if (item.empty()) continue;
        size_t v = 0;
        auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw DataError("manifest: bad label id '" + item + "'");
        if (v >= num_classes)
            throw DataError("manifest: label id " + item + " outside [0, " +
                            std::to_string(num_classes) + ")");
        labels[v] = 1;
    }
    return labels;
}

namespace {

ordered_json config_to_json(const GeneratorConfig& cfg) {
    ordered_json j;
    j["num_subjects"] = cfg.num_subjects;
    j["num_classes"] = cfg.num_classes;
    j["base_voxel_length"] = cfg.base_voxel_length;
    j["length_jitter"] = cfg.length_jitter;
    j["latent_dim"] = cfg.latent_dim;
    j["subject_dim"] = cfg.subject_dim;
    j["object_dim"] = cfg.object_dim;
    j["label_density"] = cfg.label_density;
    j["noise_std"] = cfg.noise_std;
    j["train_stimuli"] = cfg.train_stimuli;
    j["test_stimuli"] = cfg.test_stimuli;
    j["repetitions"] = cfg.repetitions;
    j["object_embedding"] = cfg.object_embedding;
    j["subject_gain"] = cfg.subject_gain;
    j["object_gain"] = cfg.object_gain;
    j["vision_tokens"] = cfg.vision_tokens;
    j["vision_dim"] = cfg.vision_dim;
    j["inject_class"] = cfg.inject_class;
    j["inject_span"] = cfg.inject_span;
    j["inject_align"] = cfg.inject_align;
    j["inject_gain"] = cfg.inject_gain;
    j["seed"] = cfg.seed;
    return j;
}

GeneratorConfig config_from_json(const ordered_json& j) {
    GeneratorConfig cfg;
    cfg.num_subjects = j.at("num_subjects").get<size_t>();
    cfg.num_classes = j.at("num_classes").get<size_t>();
    cfg.base_voxel_length = j.at("base_voxel_length").get<size_t>();
    cfg.length_jitter = j.at("length_jitter").get<double>();
    cfg.latent_dim = j.at("latent_dim").get<size_t>();
    cfg.subject_dim = j.at("subject_dim").get<size_t>();
    cfg.object_dim = j.at("object_dim").get<size_t>();
    cfg.label_density = j.at("label_density").get<double>();
    cfg.noise_std = j.at("noise_std").get<double>();
    cfg.train_stimuli = j.at("train_stimuli").get<size_t>();
    cfg.test_stimuli = j.at("test_stimuli").get<size_t>();
    cfg.repetitions = j.at("repetitions").get<size_t>();
    cfg.object_embedding = j.at("object_embedding").get<std::string>();
    cfg.subject_gain = j.at("subject_gain").get<double>();
    cfg.object_gain = j.at("object_gain").get<double>();
    cfg.vision_tokens = j.at("vision_tokens").get<size_t>();
    cfg.vision_dim = j.at("vision_dim").get<size_t>();
    cfg.inject_class = j.at("inject_class").get<int64_t>();
    cfg.inject_span = j.at("inject_span").get<size_t>();
    cfg.inject_align = j.at("inject_align").get<size_t>();
    cfg.inject_gain = j.at("inject_gain").get<double>();
    cfg.seed = j.at("seed").get<uint64_t>();
    return cfg;
}

Mat read_mat(const fs::path& path) {
    TensorFile t = read_tensor_file(path);
    if (t.dims.size() != 2) throw IoError("expected rank-2 tensor in " + path.string());
    return Mat(t.dims[0], t.dims[1], std::move(t.data));
}

}  // namespace

void save_dataset_dir(const fs::path& dir, const SynthDataset& ds) {
    fs::create_directories(dir / "tensors");
    fs::create_directories(dir / "ground_truth");

    std::ofstream manifest(dir / "manifest.csv", std::ios::trunc);
    if (!manifest) throw IoError("cannot write manifest in " + dir.string());
    manifest << "subject_id,stimulus_id,labels,tensor_file,repetition\n";
    size_t index = 0;
    auto dump_records = [&](const std::vector<VoxelRecord>& records) {
        for (const auto& rec : records) {
            char name[32];
            std::snprintf(name, sizeof(name), "tensors/trial_%06zu.mkt", index++);
            write_vector_file(dir / name, rec.voxels);
            manifest << rec.subject_id << ',' << rec.stimulus_id << ','
                     << labels_to_string(rec.labels) << ',' << name << ','
                     << rec.repetition_index << '\n';
        }
    };
    dump_records(ds.train);
    dump_records(ds.test);
    manifest.close();

    const GroundTruth& gt = ds.ground_truth;
    write_matrix_file(dir / "ground_truth/mixing_q.mkt", gt.mixing_q.rows, gt.mixing_q.cols,
                      gt.mixing_q.data);
    write_matrix_file(dir / "ground_truth/subject_embeddings.mkt",
                      gt.subject_embeddings.rows, gt.subject_embeddings.cols,
                      gt.subject_embeddings.data);
    write_matrix_file(dir / "ground_truth/object_embedding.mkt", gt.object_embedding.rows,
                      gt.object_embedding.cols, gt.object_embedding.data);
    for (size_t s = 0; s < gt.subject_maps.size(); ++s) {
        char name[48];
        std::snprintf(name, sizeof(name), "ground_truth/subject_map_%02zu.mkt", s);
        write_matrix_file(dir / name, gt.subject_maps[s].rows, gt.subject_maps[s].cols,
                          gt.subject_maps[s].data);
    }

    ordered_json j;
    j["generator"] = config_to_json(ds.config);
    j["subject_lengths"] = ds.subject_lengths;
    j["test_stimulus_ids"] = ds.test_stimulus_ids;
    j["train_records"] = ds.train.size();
    j["test_records"] = ds.test.size();
    if (!gt.inject_ranges.empty()) {
        ordered_json ranges = ordered_json::array();
        for (const auto& [a, b] : gt.inject_ranges) ranges.push_back({a, b});
        j["inject_ranges"] = ranges;
    }
    std::ofstream meta(dir / "dataset.json", std::ios::trunc);
    meta << j.dump(2) << '\n';
}

std::vector<VoxelRecord> load_manifest(const fs::path& dir, const fs::path& manifest_csv,
                                       size_t num_classes) {
    std::ifstream in(manifest_csv);
    if (!in) throw IoError("cannot open manifest: " + manifest_csv.string());
    std::vector<VoxelRecord> records;
    std::map<size_t, size_t> subject_length;
    std::string line;
    bool first = true;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("subject_id,", 0) == 0) continue;  // header
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 5)
            throw DataError("manifest line " + std::to_string(lineno) +
                            ": expected 5 fields, got " + std::to_string(fields.size()));
        VoxelRecord rec;
        rec.subject_id = std::stoull(fields[0]);
        rec.stimulus_id = std::stoull(fields[1]);
        rec.labels = labels_from_string(fields[2], num_classes);
        rec.repetition_index = std::stoull(fields[4]);
        const fs::path tensor_path = dir / fields[3];
        if (!fs::exists(tensor_path))
            throw IoError("manifest references missing tensor file: " + tensor_path.string());
        TensorFile t = read_tensor_file(tensor_path);
        if (t.dims.size() != 1)
            throw DataError("trial tensor must be rank 1: " + tensor_path.string());
        rec.voxels = std::move(t.data);
        auto [it, inserted] = subject_length.emplace(rec.subject_id, rec.voxels.size());
        if (!inserted && it->second != rec.voxels.size())
            throw DataError("subject " + std::to_string(rec.subject_id) +
                            " has inconsistent voxel lengths (" + std::to_string(it->second) +
                            " vs " + std::to_string(rec.voxels.size()) + ")");
        records.push_back(std::move(rec));
    }
    return records;
}

LoadedDataset load_dataset_dir(const fs::path& dir) {
    std::ifstream meta_in(dir / "dataset.json");
    if (!meta_in) throw IoError("missing dataset.json in " + dir.string());
    ordered_json j = ordered_json::parse(meta_in);

    LoadedDataset ds;
    ds.config = config_from_json(j.at("generator"));
    ds.subject_lengths = j.at("subject_lengths").get<std::vector<size_t>>();
    std::set<size_t> test_ids;
    for (size_t id : j.at("test_stimulus_ids").get<std::vector<size_t>>()) test_ids.insert(id);

    auto records = load_manifest(dir, dir / "manifest.csv", ds.config.num_classes);
    for (auto& rec : records) {
        if (test_ids.count(rec.stimulus_id))
            ds.test.push_back(std::move(rec));
        else
            ds.train.push_back(std::move(rec));
    }

    if (fs::exists(dir / "ground_truth/mixing_q.mkt")) {
        GroundTruth gt;
        gt.mixing_q = read_mat(dir / "ground_truth/mixing_q.mkt");
        gt.subject_embeddings = read_mat(dir / "ground_truth/subject_embeddings.mkt");
        gt.object_embedding = read_mat(dir / "ground_truth/object_embedding.mkt");
        for (size_t s = 0;; ++s) {
            char name[48];
            std::snprintf(name, sizeof(name), "ground_truth/subject_map_%02zu.mkt", s);
            if (!fs::exists(dir / name)) break;
            gt.subject_maps.push_back(read_mat(dir / name));
        }
        if (j.contains("inject_ranges"))
            for (const auto& pair : j.at("inject_ranges"))
                gt.inject_ranges.emplace_back(pair.at(0).get<size_t>(),
                                              pair.at(1).get<size_t>());
        ds.ground_truth = std::move(gt);
    }
    return ds;
}

}  // namespace neurodec
