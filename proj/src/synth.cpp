#include "neurodec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "neurodec/errors.hpp"

namespace neurodec {

void GeneratorConfig::validate() const {
    if (num_subjects == 0) throw ConfigError("synth: num_subjects must be positive");
    if (num_classes == 0) throw ConfigError("synth: num_classes must be positive");
    if (subject_dim + object_dim != latent_dim)
        throw ConfigError("synth: subject_dim + object_dim must equal latent_dim (" +
                          std::to_string(subject_dim) + " + " + std::to_string(object_dim) +
                          " != " + std::to_string(latent_dim) + ")");
    if (object_dim < num_classes)
        throw ConfigError("synth: object_dim " + std::to_string(object_dim) +
                          " cannot embed " + std::to_string(num_classes) + " classes");
    if (!(label_density > 0.0 && label_density < 1.0))
        throw ConfigError("synth: label_density must lie in (0, 1)");
    if (noise_std < 0.0) throw ConfigError("synth: noise_std must be non-negative");
    if (!voxel_lengths.empty() && voxel_lengths.size() != num_subjects)
        throw ConfigError("synth: voxel_lengths must list one length per subject");
    if (repetitions == 0) throw ConfigError("synth: repetitions must be positive");
    if (object_embedding != "orthonormal" && object_embedding != "identity")
        throw ConfigError("synth: object_embedding must be 'orthonormal' or 'identity'");
    if (inject_class >= static_cast<int64_t>(num_classes))
        throw ConfigError("synth: inject_class out of range");
}

Mat make_object_embedding(const GeneratorConfig& cfg) {
    if (cfg.object_embedding == "identity") {
        Mat e(cfg.num_classes, cfg.object_dim);
        for (size_t c = 0; c < cfg.num_classes; ++c) e.at(c, c) = 1.0;
        return e;
    }
    Rng rng(derive_seed(cfg.seed, "object-embedding"));
    return random_orthonormal_rows(cfg.num_classes, cfg.object_dim, rng);
}

VisionFeatureProvider::VisionFeatureProvider(size_t tokens, size_t dim,
                                             Mat object_embedding, uint64_t seed)
    : tokens_(tokens), dim_(dim), object_embedding_(std::move(object_embedding)) {
    Rng rng(seed);
    const size_t object_dim = object_embedding_.cols;
    token_proj_.reserve(tokens_);
    for (size_t t = 0; t < tokens_; ++t)
        token_proj_.push_back(Mat::gaussian(dim_, object_dim, rng, 1.0 / std::sqrt(
                                                static_cast<double>(object_dim))));
    token_offset_ = Mat::gaussian(tokens_, dim_, rng, 0.5);
}

Mat VisionFeatureProvider::features(const std::vector<uint8_t>& labels) const {
    if (labels.size() != object_embedding_.rows)
        throw DimensionError("vision provider: label vector has " +
                             std::to_string(labels.size()) + " classes, expected " +
                             std::to_string(object_embedding_.rows));
    const size_t object_dim = object_embedding_.cols;
    std::vector<double> o(object_dim, 0.0);
    for (size_t c = 0; c < labels.size(); ++c) {
        if (!labels[c]) continue;
        for (size_t j = 0; j < object_dim; ++j) o[j] += object_embedding_.at(c, j);
    }
    Mat out(tokens_, dim_);
    for (size_t t = 0; t < tokens_; ++t) {
        const auto proj = matvec(token_proj_[t], o);
        for (size_t j = 0; j < dim_; ++j) out.at(t, j) = proj[j] + token_offset_.at(t, j);
    }
    return out;
}

VisionFeatureProvider make_vision_provider(const GeneratorConfig& cfg) {
    return VisionFeatureProvider(cfg.vision_tokens, cfg.vision_dim,
                                 make_object_embedding(cfg), derive_seed(cfg.seed, "vision"));
}

namespace {

std::vector<size_t> resolve_lengths(const GeneratorConfig& cfg) {
    if (!cfg.voxel_lengths.empty()) return cfg.voxel_lengths;
    Rng rng(derive_seed(cfg.seed, "lengths"));
    std::vector<size_t> lengths(cfg.num_subjects);
    const double base = static_cast<double>(cfg.base_voxel_length);
    const auto span = static_cast<uint64_t>(2.0 * cfg.length_jitter * base) + 1;
    for (auto& l : lengths) {
        const int64_t delta =
            static_cast<int64_t>(rng.uniform_int(span)) -
            static_cast<int64_t>(cfg.length_jitter * base);
        l = static_cast<size_t>(std::max<int64_t>(8, static_cast<int64_t>(base) + delta));
    }
    return lengths;
}

}  // namespace

SynthDataset generate_dataset(const GeneratorConfig& cfg) {
    cfg.validate();

    SynthDataset ds;
    ds.config = cfg;
    ds.subject_lengths = resolve_lengths(cfg);

    Rng structure_rng(derive_seed(cfg.seed, "structure"));
    GroundTruth& gt = ds.ground_truth;
    gt.object_embedding = make_object_embedding(cfg);
    gt.mixing_q = random_orthonormal(cfg.latent_dim, structure_rng);
    if (cfg.num_subjects <= cfg.subject_dim) {
        gt.subject_embeddings =
            random_orthonormal_rows(cfg.num_subjects, cfg.subject_dim, structure_rng);
    } else {
        gt.subject_embeddings = Mat::gaussian(cfg.num_subjects, cfg.subject_dim,
                                              structure_rng,
                                              1.0 / std::sqrt(static_cast<double>(cfg.subject_dim)));
    }
    for (size_t s = 0; s < cfg.num_subjects; ++s) {
        gt.subject_maps.push_back(
            Mat::gaussian(ds.subject_lengths[s], cfg.latent_dim, structure_rng,
                          1.0 / std::sqrt(static_cast<double>(cfg.latent_dim))));
    }

    // Injection targets: one aligned range per subject, plus a per-subject
    // response pattern on that range.
    std::vector<std::vector<double>> inject_patterns(cfg.num_subjects);
    if (cfg.inject_class >= 0) {
        Rng inject_rng(derive_seed(cfg.seed, "inject"));
        for (size_t s = 0; s < cfg.num_subjects; ++s) {
            const size_t len = ds.subject_lengths[s];
            if (cfg.inject_span + cfg.inject_align > len)
                throw ConfigError("synth: inject_span does not fit subject " +
                                  std::to_string(s));
            const size_t max_start = (len - cfg.inject_span) / cfg.inject_align;
            const size_t start = cfg.inject_align * inject_rng.uniform_int(max_start + 1);
            gt.inject_ranges.emplace_back(start, start + cfg.inject_span);
            auto& pattern = inject_patterns[s];
            pattern.resize(cfg.inject_span);
            for (auto& p : pattern) p = cfg.inject_gain * (0.5 + inject_rng.uniform());
        }
    }

    // Stimulus labels: Bernoulli per class; train and test stimuli are
    // disjoint id ranges.
    const size_t total_stimuli = cfg.train_stimuli + cfg.test_stimuli;
    Rng label_rng(derive_seed(cfg.seed, "labels"));
    std::vector<std::vector<uint8_t>> labels(total_stimuli);
    for (auto& y : labels) {
        y.resize(cfg.num_classes);
        for (auto& bit : y) bit = label_rng.uniform() < cfg.label_density ? 1 : 0;
    }

    Rng noise_rng(derive_seed(cfg.seed, "noise"));
    auto make_record = [&](size_t stim, size_t subject, size_t rep) {
        const auto& y = labels[stim];
        std::vector<double> latent(cfg.latent_dim, 0.0);
        for (size_t j = 0; j < cfg.subject_dim; ++j)
            latent[j] = cfg.subject_gain * gt.subject_embeddings.at(subject, j);
        for (size_t c = 0; c < cfg.num_classes; ++c) {
            if (!y[c]) continue;
            if (cfg.inject_class >= 0 && c == static_cast<size_t>(cfg.inject_class))
                continue;  // injected class bypasses the shared mixing
            for (size_t j = 0; j < cfg.object_dim; ++j)
                latent[cfg.subject_dim + j] += cfg.object_gain * gt.object_embedding.at(c, j);
        }
        const auto mixed = matvec(gt.mixing_q, latent);
        VoxelRecord rec;
        rec.subject_id = subject;
        rec.stimulus_id = stim;
        rec.repetition_index = rep;
        rec.labels = y;
        rec.voxels = matvec(gt.subject_maps[subject], mixed);
        if (cfg.inject_class >= 0 && y[static_cast<size_t>(cfg.inject_class)]) {
            const auto [start, end] = gt.inject_ranges[subject];
            for (size_t i = start; i < end; ++i)
                rec.voxels[i] += inject_patterns[subject][i - start];
        }
        if (cfg.noise_std > 0.0)
            for (auto& v : rec.voxels) v += noise_rng.normal(0.0, cfg.noise_std);
        return rec;
    };

    for (size_t stim = 0; stim < total_stimuli; ++stim) {
        const bool is_test = stim >= cfg.train_stimuli;
        if (is_test) ds.test_stimulus_ids.push_back(stim);
        for (size_t subject = 0; subject < cfg.num_subjects; ++subject)
            for (size_t rep = 0; rep < cfg.repetitions; ++rep)
                (is_test ? ds.test : ds.train).push_back(make_record(stim, subject, rep));
    }
    return ds;
}

std::vector<VoxelRecord> average_repetitions(const std::vector<VoxelRecord>& records) {
    std::map<std::pair<size_t, size_t>, size_t> group_of;  // (subject, stimulus) -> out index
    std::vector<VoxelRecord> out;
    std::vector<size_t> counts;
    for (const auto& rec : records) {
        const auto key = std::make_pair(rec.subject_id, rec.stimulus_id);
        auto it = group_of.find(key);
        if (it == group_of.end()) {
            group_of.emplace(key, out.size());
            VoxelRecord avg = rec;
            avg.repetition_index = 0;
            out.push_back(std::move(avg));
            counts.push_back(1);
            continue;
        }
        VoxelRecord& avg = out[it->second];
        if (rec.labels != avg.labels)
            throw DataError("average_repetitions: inconsistent labels for subject " +
                            std::to_string(rec.subject_id) + ", stimulus " +
                            std::to_string(rec.stimulus_id));
        if (rec.voxels.size() != avg.voxels.size())
            throw DataError("average_repetitions: inconsistent voxel lengths for subject " +
                            std::to_string(rec.subject_id));
        for (size_t i = 0; i < avg.voxels.size(); ++i) avg.voxels[i] += rec.voxels[i];
        ++counts[it->second];
    }
    for (size_t g = 0; g < out.size(); ++g) {
        const double inv = 1.0 / static_cast<double>(counts[g]);
        for (auto& v : out[g].voxels) v *= inv;
    }
    return out;
}

}  // namespace neurodec
