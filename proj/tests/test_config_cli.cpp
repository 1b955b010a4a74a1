#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "neurodec/config.hpp"
#include "neurodec/errors.hpp"
#include "neurodec/pipeline.hpp"

using namespace neurodec;
namespace fs = std::filesystem;

#ifndef NEURODEC_CLI_PATH
#define NEURODEC_CLI_PATH "neurodec"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NEURODEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("flat config parsing") {
    FlatConfig cfg = FlatConfig::parse_text(
        "# comment line\n"
        "global.seed = 9\n"
        "synth.noise_std = 0.25   # trailing comment\n"
        "stage2.use_orth_loss = false\n"
        "synth.voxel_lengths = 40;50;60\n");
    CHECK(cfg.get_u64("global.seed", 0) == 9);
    CHECK(cfg.get_f64("synth.noise_std", 0.0) == doctest::Approx(0.25));
    CHECK(cfg.get_bool("stage2.use_orth_loss", true) == false);
    CHECK(cfg.get_u64_list("synth.voxel_lengths", {}) == std::vector<uint64_t>{40, 50, 60});
    CHECK(cfg.get_string("missing.key", "fallback") == "fallback");

    CHECK_THROWS_AS(FlatConfig::parse_text("no_dot = 1\n"), ConfigError);
    CHECK_THROWS_AS(FlatConfig::parse_text("just a line\n"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_pipeline_config(FlatConfig::parse_text("synth.typo_key = 1\n")),
                         doctest::Contains("synth.typo_key"), ConfigError);
    CHECK_THROWS_AS(parse_pipeline_config(FlatConfig::parse_text("synth.noise_std = abc\n")),
                    ConfigError);
}

TEST_CASE("pipeline config defaults and derived seeds") {
    PipelineConfig cfg = parse_pipeline_config(FlatConfig::parse_text("global.seed = 5\n"));
    CHECK(cfg.synth.num_subjects == 4);
    CHECK(cfg.synth.num_classes == 8);
    CHECK(cfg.encoder.dim == 64);
    CHECK(cfg.resolved_object_dim() == 56);  // 7/8 of the encoder dim
    CHECK(cfg.stage2.lambda == doctest::Approx(0.1));
    // Stage seeds differ from each other and from the global seed.
    CHECK(cfg.synth.seed != cfg.stage1.seed);
    CHECK(cfg.stage1.seed != cfg.stage2.seed);
}

TEST_CASE("cli exit codes and determinism") {
    const fs::path work = fs::temp_directory_path() / "neurodec_cli_test";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg_path = work / "tiny.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "global.seed = 12\n"
               "synth.num_subjects = 2\n"
               "synth.num_classes = 4\n"
               "synth.base_voxel_length = 48\n"
               "synth.latent_dim = 8\n"
               "synth.subject_dim = 2\n"
               "synth.object_dim = 6\n"
               "synth.train_stimuli = 12\n"
               "synth.test_stimuli = 4\n"
               "synth.vision_tokens = 3\n"
               "synth.vision_dim = 4\n"
               "encoder.patch_size = 8\n"
               "encoder.dim = 8\n"
               "encoder.layers = 1\n"
               "encoder.heads = 2\n"
               "encoder.decoder_dim = 8\n"
               "encoder.decoder_layers = 1\n"
               "encoder.decoder_heads = 2\n"
               "stage1.epochs = 2\n"
               "stage1.batch_size = 12\n"
               "stage2.epochs = 2\n"
               "stage2.batch_size = 12\n"
               "stage2.object_dim = 6\n"
               "stage2.cross_heads = 2\n";
    }
    const std::string base = "--config " + cfg_path.string() + " --out " + work.string();

    // Unknown config key: exit 1 naming the key.
    {
        std::ofstream bad(work / "bad.cfg");
        bad << "synth.not_a_key = 3\n";
    }
    CHECK(run_cli("synth --config " + (work / "bad.cfg").string() + " --out " + work.string() +
                  " --run-name never") == 1);

    // Missing prerequisite artifact: exit 2.
    CHECK(run_cli("pretrain " + base + " --dataset " + (work / "absent").string() +
                  " --run-name no-ds") == 2);

    // Two synth runs under the same seed are byte-identical.
    REQUIRE(run_cli("synth " + base + " --run-name ds1") == 0);
    REQUIRE(run_cli("synth " + base + " --run-name ds2") == 0);
    CHECK(slurp(work / "ds1/manifest.csv") == slurp(work / "ds2/manifest.csv"));
    CHECK(slurp(work / "ds1/dataset.json") == slurp(work / "ds2/dataset.json"));
    CHECK(slurp(work / "ds1/tensors/trial_000000.mkt") ==
          slurp(work / "ds2/tensors/trial_000000.mkt"));

    // Rerunning into an existing run name refuses to overwrite.
    CHECK(run_cli("synth " + base + " --run-name ds1") == 1);

    // Pipeline stages run end to end with echoed configs.
    REQUIRE(run_cli("pretrain " + base + " --dataset " + (work / "ds1").string() +
                    " --run-name s1") == 0);
    CHECK(slurp(work / "s1/config.echo.txt") == slurp(cfg_path));
    REQUIRE(run_cli("train " + base + " --dataset " + (work / "ds1").string() + " --stage1 " +
                    (work / "s1/stage1").string() + " --run-name s2") == 0);
    REQUIRE(run_cli("eval " + base + " --dataset " + (work / "ds1").string() +
                    " --checkpoint " + (work / "s2/stage2").string() + " --run-name ev") == 0);
    const std::string eval_json = slurp(work / "ev/eval.json");
    for (const char* key : {"\"ACC\"", "\"mAP\"", "\"AUC\"", "\"Hamming\"", "\"MCC\""})
        CHECK(eval_json.find(key) != std::string::npos);

    // Attribution on a class with zero true positives still exits 0 with an
    // explicit empty-result marker (threshold 1.0 disqualifies everything).
    {
        std::ofstream strict(work / "strict.cfg");
        strict << slurp(cfg_path) << "attribution.threshold = 1.0\n";
    }
    CHECK(run_cli("attribute --config " + (work / "strict.cfg").string() + " --out " +
                  work.string() + " --dataset " + (work / "ds1").string() + " --checkpoint " +
                  (work / "s2/stage2").string() +
                  " --class-id 0 --subject-id 0 --run-name at-empty") == 0);
    CHECK(slurp(work / "at-empty/summary.json").find("\"empty_result\": true") !=
          std::string::npos);

    fs::remove_all(work);
}
