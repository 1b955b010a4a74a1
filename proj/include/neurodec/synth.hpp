#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "neurodec/linalg.hpp"
#include "neurodec/rng.hpp"

namespace neurodec {

// One (subject, stimulus, voxel-vector, label-set) trial.
struct VoxelRecord {
    size_t subject_id = 0;
    size_t stimulus_id = 0;
    std::vector<double> voxels;
    std::vector<uint8_t> labels;  // multi-hot, non-exclusive
    size_t repetition_index = 0;
};

// Multi-subject voxel generator. Subject and object information live in
// complementary subspaces of a latent vector l = (u_s, o_y); voxels are
// W_s * Q * l + noise with Q a shared random orthonormal mixing and W_s a
// subject-specific full-rank expansion. That construction makes the
// orthonormal-basis separation premise true by design, so a trained basis
// has an exact target to find.
struct GeneratorConfig {
    size_t num_subjects = 4;
    size_t num_classes = 8;
    // Per-subject voxel lengths; when empty, lengths are jittered around
    // base_voxel_length by +-length_jitter.
    std::vector<size_t> voxel_lengths;
    size_t base_voxel_length = 480;
    double length_jitter = 0.10;
    size_t latent_dim = 16;
    size_t subject_dim = 4;
    size_t object_dim = 12;
    double label_density = 0.3;
    double noise_std = 0.1;
    size_t train_stimuli = 500;
    size_t test_stimuli = 100;
    size_t repetitions = 3;
    std::string object_embedding = "orthonormal";  // or "identity"
    double subject_gain = 1.0;
    double object_gain = 1.0;

    size_t vision_tokens = 17;  // N_x
    size_t vision_dim = 32;     // d_x

    // Optional injection mode: route one class's voxel signal into a known
    // per-subject index range instead of the shared mixing, so attribution
    // has a ground-truth target. -1 disables.
    int64_t inject_class = -1;
    size_t inject_span = 64;    // voxels in the injected range
    size_t inject_align = 16;   // range start aligned to this many voxels
    double inject_gain = 3.0;

    uint64_t seed = 42;

    void validate() const;  // throws ConfigError
};

// Frozen stand-in for a vision encoder: a deterministic map from a
// stimulus's label set to an N_x x d_x token grid. Tokens are fixed affine
// views of the object latent, so they are subject-invariant by
// construction.
class VisionFeatureProvider {
public:
    VisionFeatureProvider(size_t tokens, size_t dim, Mat object_embedding, uint64_t seed);

    Mat features(const std::vector<uint8_t>& labels) const;  // N_x x d_x

    size_t tokens() const { return tokens_; }
    size_t dim() const { return dim_; }

private:
    size_t tokens_;
    size_t dim_;
    Mat object_embedding_;        // C x object_dim
    std::vector<Mat> token_proj_;  // per token: d_x x object_dim
    Mat token_offset_;             // N_x x d_x
};

struct GroundTruth {
    Mat mixing_q;                       // latent_dim x latent_dim, orthonormal
    std::vector<Mat> subject_maps;      // W_s, L_s x latent_dim
    Mat subject_embeddings;             // S x subject_dim
    Mat object_embedding;               // C x object_dim
    std::vector<std::pair<size_t, size_t>> inject_ranges;  // [start, end) per subject
};

struct SynthDataset {
    GeneratorConfig config;
    std::vector<VoxelRecord> train;
    std::vector<VoxelRecord> test;
    std::vector<size_t> test_stimulus_ids;
    std::vector<size_t> subject_lengths;
    GroundTruth ground_truth;
};

SynthDataset generate_dataset(const GeneratorConfig& cfg);

// Deterministic reconstruction of the provider for a dataset seed+config;
// the same function serves generation and later loading.
VisionFeatureProvider make_vision_provider(const GeneratorConfig& cfg);
Mat make_object_embedding(const GeneratorConfig& cfg);

// Collapses repetitions of the same (subject, stimulus) into their mean.
// Repetitions must agree on labels and length.
std::vector<VoxelRecord> average_repetitions(const std::vector<VoxelRecord>& records);

}  // namespace neurodec
