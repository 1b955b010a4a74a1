#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "neurodec/synth.hpp"

namespace neurodec {

// Dataset directory layout:
//   manifest.csv   subject_id,stimulus_id,labels,tensor_file,repetition
//   dataset.json   generator config echo, split ids, subject lengths
//   tensors/       one MKT1 vector per trial
//   ground_truth/  mixing matrices (synthetic datasets only)
// Labels are semicolon-separated active class ids ("1;4;7").

void save_dataset_dir(const std::filesystem::path& dir, const SynthDataset& ds);

// Parses a manifest and reads every referenced tensor. Per-subject voxel
// lengths must be consistent; labels index into [0, num_classes).
std::vector<VoxelRecord> load_manifest(const std::filesystem::path& dir,
                                       const std::filesystem::path& manifest_csv,
                                       size_t num_classes);

struct LoadedDataset {
    GeneratorConfig config;  // as recorded at generation time
    std::vector<VoxelRecord> train;
    std::vector<VoxelRecord> test;
    std::vector<size_t> subject_lengths;
    std::optional<GroundTruth> ground_truth;
};

LoadedDataset load_dataset_dir(const std::filesystem::path& dir);

std::string labels_to_string(const std::vector<uint8_t>& labels);
std::vector<uint8_t> labels_from_string(const std::string& s, size_t num_classes);

}  // namespace neurodec
