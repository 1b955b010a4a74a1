#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "neurodec/checkpoint.hpp"
#include "neurodec/decoder.hpp"
#include "neurodec/errors.hpp"
#include "neurodec/pipeline.hpp"

using namespace neurodec;
namespace fs = std::filesystem;

namespace {

EncoderConfig tiny_encoder_config() {
    EncoderConfig cfg;
    cfg.patch_size = 8;
    cfg.dim = 16;
    cfg.layers = 2;
    cfg.heads = 2;
    cfg.decoder_dim = 16;
    cfg.decoder_layers = 1;
    cfg.decoder_heads = 2;
    return cfg;
}

DualDecoderModel tiny_model(bool use_cross, uint64_t seed = 3) {
    DualDecoderConfig cfg;
    cfg.num_subjects = 2;
    cfg.num_classes = 4;
    cfg.object_dim = 12;
    cfg.cross_heads = 2;
    cfg.vision_tokens = 5;
    cfg.vision_dim = 6;
    cfg.use_cross_attention = use_cross;
    return DualDecoderModel(MaeEncoder(tiny_encoder_config(), 64, seed), cfg, seed);
}

}  // namespace

TEST_CASE("cross-attention with a single key/value token") {
    Rng rng(5);
    CrossAttention cross = CrossAttention::init({2, 6, 12}, rng);
    Tensor queries = Tensor::randn(4, 6, rng);
    Tensor kv = Tensor::randn(1, 12, rng);
    Tensor out = cross.forward(queries, kv);
    REQUIRE(out.rows() == 4);
    // Softmax over one key is 1 for every query, so all outputs equal the
    // projected value row.
    for (size_t i = 1; i < 4; ++i)
        for (size_t j = 0; j < 12; ++j)
            CHECK(out.at(i, j) == doctest::Approx(out.at(0, j)).epsilon(1e-12));
}

TEST_CASE("single-head cross-attention equals the explicit oracle") {
    Rng rng(7);
    CrossAttention cross = CrossAttention::init({1, 4, 4}, rng);
    Tensor queries = Tensor::randn(3, 4, rng);
    Tensor kv = Tensor::randn(4, 4, rng);
    Tensor out = cross.forward(queries, kv);

    // Reference: q/k/v projections, softmax(QK^T/sqrt(d)), AV, out proj.
    auto affine = [](const Tensor& x, const LinearLayer& l) {
        std::vector<std::vector<double>> y(x.rows(), std::vector<double>(l.weight.cols(), 0.0));
        for (size_t i = 0; i < x.rows(); ++i)
            for (size_t j = 0; j < l.weight.cols(); ++j) {
                double acc = l.bias.values()[j];
                for (size_t k = 0; k < x.cols(); ++k) acc += x.at(i, k) * l.weight.at(k, j);
                y[i][j] = acc;
            }
        return y;
    };
    auto q = affine(queries, cross.query);
    auto k = affine(kv, cross.key);
    auto v = affine(kv, cross.value);
    std::vector<std::vector<double>> fused(3, std::vector<double>(4, 0.0));
    for (size_t i = 0; i < 3; ++i) {
        std::vector<double> scores(4, 0.0);
        double mx = -1e300;
        for (size_t j = 0; j < 4; ++j) {
            for (size_t c = 0; c < 4; ++c) scores[j] += q[i][c] * k[j][c];
            scores[j] /= 2.0;  // sqrt(head_dim) = 2
            mx = std::max(mx, scores[j]);
        }
        double sum = 0.0;
        for (auto& s : scores) {
            s = std::exp(s - mx);
            sum += s;
        }
        for (auto& s : scores) s /= sum;
        for (size_t j = 0; j < 4; ++j)
            for (size_t c = 0; c < 4; ++c) fused[i][c] += scores[j] * v[j][c];
    }
    // Final projection.
    for (size_t i = 0; i < 3; ++i)
        for (size_t j = 0; j < 4; ++j) {
            double acc = cross.out.bias.values()[j];
            for (size_t c = 0; c < 4; ++c) acc += fused[i][c] * cross.out.weight.at(c, j);
            CHECK(std::abs(out.at(i, j) - acc) <= 1e-10);
        }
}

TEST_CASE("gap and head behaviors") {
    // All tokens identical: GAP returns that token.
    Tensor same = matmul(Tensor::full(5, 1, 1.0), Tensor::from_values(1, 3, {1.5, -2.0, 0.25}));
    Tensor pooled = global_average_pool(same);
    CHECK(pooled.at(0, 0) == doctest::Approx(1.5));
    CHECK(pooled.at(0, 2) == doctest::Approx(0.25));

    // Zero weights: logits equal the bias regardless of input.
    Rng rng(9);
    LinearLayer head;
    head.weight = Tensor::zeros(3, 4, true);
    head.bias = Tensor::from_values(1, 4, {1, 2, 3, 4}, true);
    Tensor logits = head.forward(global_average_pool(Tensor::randn(7, 3, rng)));
    for (size_t j = 0; j < 4; ++j) CHECK(logits.at(0, j) == doctest::Approx(j + 1.0));

    // GAP against an explicit loop mean.
    Tensor tokens = Tensor::randn(6, 3, rng);
    Tensor gap = global_average_pool(tokens);
    for (size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (size_t i = 0; i < 6; ++i) acc += tokens.at(i, j);
        CHECK(gap.at(0, j) == doctest::Approx(acc / 6.0).epsilon(1e-15));
    }
}

TEST_CASE("fmri-only semantic path ignores vision features") {
    DualDecoderModel model = tiny_model(/*use_cross=*/false);
    Rng rng(11);
    std::vector<double> padded(64);
    for (auto& v : padded) v = rng.normal();

    Mat vision_a = Mat::gaussian(5, 6, rng);
    Mat vision_b = Mat::gaussian(5, 6, rng);
    auto fa = model.forward(padded, vision_a);
    auto fb = model.forward(padded, vision_b);
    CHECK(fa.object_logits.values() == fb.object_logits.values());
    CHECK(fa.object_logits.cols() == 4);
}

TEST_CASE("biometric path has no route from vision features") {
    DualDecoderModel model = tiny_model(/*use_cross=*/true);
    Rng rng(13);
    std::vector<double> padded(64);
    for (auto& v : padded) v = rng.normal();
    Mat vision_a = Mat::gaussian(5, 6, rng);
    Mat vision_b = Mat::gaussian(5, 6, rng);
    auto fa = model.forward(padded, vision_a);
    auto fb = model.forward(padded, vision_b);
    CHECK(fa.subject_logits.values() == fb.subject_logits.values());
    // Vision does reach the semantic side.
    double diff = 0.0;
    for (size_t j = 0; j < 4; ++j)
        diff += std::abs(fa.object_logits.values()[j] - fb.object_logits.values()[j]);
    CHECK(diff > 1e-9);
}

TEST_CASE("constructed weights collapse fusion onto the fmri-only head") {
    // Zero query projection makes attention uniform; identity value/out
    // projections then emit the token mean everywhere, so GAP matches the
    // fMRI-only class token exactly.
    DualDecoderModel fused = tiny_model(/*use_cross=*/true, 21);
    const CrossAttention& cross = fused.cross_attention();
    std::fill(cross.query.weight.node()->value.begin(), cross.query.weight.node()->value.end(), 0.0);
    std::fill(cross.query.bias.node()->value.begin(), cross.query.bias.node()->value.end(), 0.0);
    auto make_identity = [](const LinearLayer& l) {
        std::fill(l.weight.node()->value.begin(), l.weight.node()->value.end(), 0.0);
        for (size_t i = 0; i < l.weight.rows(); ++i)
            l.weight.node()->value[i * l.weight.cols() + i] = 1.0;
        std::fill(l.bias.node()->value.begin(), l.bias.node()->value.end(), 0.0);
    };
    make_identity(cross.value);
    make_identity(cross.out);

    Rng rng(15);
    std::vector<double> padded(64);
    for (auto& v : padded) v = rng.normal();
    Mat vision = Mat::gaussian(5, 6, rng);

    auto fwd = fused.forward(padded, vision);
    Tensor direct = fused.semantic_from_object_tokens(fwd.object_tokens, vision);
    // Compare against the plain GAP + classifier route.
    Tensor expected = fused.object_head().forward(global_average_pool(fwd.object_tokens));
    for (size_t j = 0; j < 4; ++j)
        CHECK(std::abs(direct.values()[j] - expected.values()[j]) <= 1e-10);
}

TEST_CASE("total loss composition and toggles") {
    DualDecoderModel model = tiny_model(true);
    Rng rng(17);
    std::vector<double> padded(64);
    for (auto& v : padded) v = rng.normal();
    Mat vision = Mat::gaussian(5, 6, rng);
    auto fwd = model.forward(padded, vision);
    std::vector<uint8_t> labels{1, 0, 0, 1};

    // lambda = 0: total is exactly subject + object.
    TotalLoss no_orth = total_loss(fwd.subject_logits, 1, fwd.object_logits, labels,
                                   model.basis(), 0.0, true, true);
    CHECK(no_orth.total.scalar_value() ==
          doctest::Approx(no_orth.subject + no_orth.object + 0.0 * no_orth.orth)
              .epsilon(1e-12));

    // Exactly orthonormal basis: the penalty contributes almost nothing.
    CHECK(no_orth.orth <= 1e-20);

    // Random lambda: total equals the independently summed components.
    TotalLoss full = total_loss(fwd.subject_logits, 0, fwd.object_logits, labels,
                                model.basis(), 0.37, true, true);
    CHECK(full.total.scalar_value() ==
          doctest::Approx(full.subject + full.object + 0.37 * full.orth).epsilon(1e-12));

    // Toggles: disabled components contribute exactly nothing.
    TotalLoss obj_only = total_loss(fwd.subject_logits, 0, fwd.object_logits, labels,
                                    model.basis(), 0.37, false, false);
    CHECK(obj_only.total.scalar_value() == doctest::Approx(full.object).epsilon(1e-12));

    CHECK(full.subject >= 0.0);
    CHECK(full.object >= 0.0);
    CHECK(full.orth >= 0.0);
}

TEST_CASE("stage-2 training learns and is deterministic") {
    // Easy separable data straight from the generator.
    GeneratorConfig gen;
    gen.num_subjects = 2;
    gen.num_classes = 4;
    gen.base_voxel_length = 56;
    gen.length_jitter = 0.1;
    gen.latent_dim = 8;
    gen.subject_dim = 2;
    gen.object_dim = 6;
    gen.train_stimuli = 40;
    gen.test_stimuli = 12;
    gen.noise_std = 0.02;
    gen.vision_tokens = 5;
    gen.vision_dim = 6;
    gen.seed = 31;
    SynthDataset ds = generate_dataset(gen);

    LoadedDataset loaded;
    loaded.config = gen;
    loaded.train = ds.train;
    loaded.test = ds.test;
    loaded.subject_lengths = ds.subject_lengths;
    PreparedData prepared = prepare_data(loaded, 8);

    auto run_once = [&](uint64_t seed) {
        DualDecoderConfig cfg;
        cfg.num_subjects = 2;
        cfg.num_classes = 4;
        cfg.object_dim = 12;
        cfg.cross_heads = 2;
        cfg.vision_tokens = 5;
        cfg.vision_dim = 6;
        cfg.use_cross_attention = true;
        DualDecoderModel model(
            MaeEncoder(tiny_encoder_config(), prepared.prep.padded_length, seed), cfg, seed);
        Stage2Config s2;
        s2.epochs = 6;
        s2.batch_size = 20;
        s2.learning_rate = 2e-3;
        s2.seed = seed;
        Stage2Result result = train_stage2(model, prepared.train, prepared.test, s2);
        return std::make_pair(std::move(model), std::move(result));
    };

    auto [model, result] = run_once(50);
    CHECK(result.history.back().loss_object < result.history.front().loss_object);
    CHECK(result.history.back().val_map >= result.history.front().val_map - 0.05);

    auto [model2, result2] = run_once(50);
    for (size_t e = 0; e < result.history.size(); ++e) {
        CHECK(result.history[e].loss_total == result2.history[e].loss_total);
        CHECK(result.history[e].val_acc == result2.history[e].val_acc);
        CHECK(result.history[e].val_map == result2.history[e].val_map);
    }

    // Checkpoint round trip preserves the forward pass bit-for-bit.
    const fs::path dir = fs::temp_directory_path() / "neurodec_ckpt_test";
    fs::remove_all(dir);
    save_stage2_checkpoint(dir, model, prepared.prep);
    Stage2Checkpoint restored = load_stage2_checkpoint(dir);
    auto a = model.forward(prepared.test[0].padded, prepared.test[0].vision);
    auto b = restored.model.forward(prepared.test[0].padded, prepared.test[0].vision);
    CHECK(a.subject_logits.values() == b.subject_logits.values());
    CHECK(a.object_logits.values() == b.object_logits.values());
    CHECK(restored.prep.plan_for(0).source_length == ds.subject_lengths[0]);
    fs::remove_all(dir);
}
