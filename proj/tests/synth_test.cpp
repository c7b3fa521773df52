#include <cmath>

#include "rankshift/io.hpp"
#include "rankshift/measures.hpp"
#include "rankshift/stats.hpp"
#include "rankshift/synth.hpp"
#include "test_support.hpp"

using namespace rankshift;
using rankshift::testing::scratch_dir;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_models = 6;
    cfg.n_samples = 2000;
    cfg.n_classes = 5;
    cfg.accuracy_range = {0.3, 0.9};
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(SynthConfigValidation, Infeasible) {
    SynthConfig cfg;
    cfg.n_classes = 1;
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg = SynthConfig{};
    cfg.accuracy_range = {0.05, 0.5};
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg.accuracy_range = {0.5, 1.0};
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg.accuracy_range = {0.6, 0.5};
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg = SynthConfig{};
    cfg.temperature_range = {0.0, 1.0};
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg = SynthConfig{};
    cfg.bias_strength = -1;
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg = SynthConfig{};
    cfg.class_distribution = {0.5, 0.5};
    EXPECT_RS_ERROR(validate_synth_config(cfg), ErrorCode::InfeasibleConfig);
    cfg.n_classes = 2;
    cfg.accuracy_range = {0.6, 0.9};
    EXPECT_NO_THROW(validate_synth_config(cfg));
}

TEST(Synth, DeterministicForSeed) {
    SynthConfig cfg;
    cfg.seed = 42;
    const auto a = generate_pool(cfg);
    const auto b = generate_pool(cfg);
    ASSERT_EQ(a.matrices.size(), 30u);
    EXPECT_EQ(a.labels.labels, b.labels.labels);
    EXPECT_EQ(a.matrices, b.matrices);
    cfg.seed = 43;
    EXPECT_NE(generate_pool(cfg).labels.labels, a.labels.labels);
}

TEST(Synth, RealizedAccuracyNearTarget) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto pool = generate_pool(small_config(seed));
        for (std::size_t m = 0; m < pool.matrices.size(); ++m) {
            EXPECT_NEAR(pool.true_accuracies[m], pool.target_accuracies[m], 0.05);
            EXPECT_EQ(pool.true_accuracies[m], accuracy(pool.matrices[m], pool.labels));
        }
    }
}

TEST(Synth, ConfidentAccurateLimit) {
    SynthConfig cfg = small_config(4);
    cfg.accuracy_range = {0.999, 0.999};
    cfg.temperature_range = {0.01, 0.01};
    const auto pool = generate_pool(cfg);
    for (std::size_t m = 0; m < pool.matrices.size(); ++m) {
        EXPECT_GT(max_pred(pool.matrices[m]), 0.99);
        EXPECT_GT(pool.true_accuracies[m], 0.99);
    }
}

TEST(Synth, ChanceLevelHotLimit) {
    SynthConfig cfg = small_config(5);
    cfg.accuracy_range = {0.2 + 1e-3, 0.2 + 1e-3};
    cfg.temperature_range = {1000, 1000};
    const auto pool = generate_pool(cfg);
    for (const auto& p : pool.matrices) EXPECT_LT(soft_gap(p), 0.01);
}

TEST(Synth, ClassDistributionDrivesLabels) {
    SynthConfig cfg = small_config(6);
    cfg.n_samples = 5000;
    cfg.class_distribution = {0.6, 0.1, 0.1, 0.1, 0.1};
    const auto pool = generate_pool(cfg);
    std::size_t zeros = 0;
    for (auto l : pool.labels.labels) zeros += l == 0;
    EXPECT_NEAR(zeros / 5000.0, 0.6, 0.03);
}

TEST(Synth, MaxPredTracksAccuracy) {
    SynthConfig cfg;
    cfg.seed = 7;
    cfg.n_samples = 2000;
    const auto pool = generate_pool(cfg);
    std::vector<double> scores;
    for (const auto& p : pool.matrices) scores.push_back(max_pred(p));
    EXPECT_GT(spearman(PairedSeries(scores, pool.true_accuracies)), 0.5);
}

TEST(Synth, IdSetDoesNotChangeTestPool) {
    SynthConfig cfg = small_config(8);
    const auto plain = generate_pool(cfg);
    cfg.id_samples = 500;
    const auto with_id = generate_pool(cfg);
    EXPECT_EQ(plain.matrices, with_id.matrices);
    ASSERT_TRUE(with_id.id_labels);
    ASSERT_EQ(with_id.id_matrices.size(), cfg.n_models);
    for (std::size_t m = 0; m < cfg.n_models; ++m) {
        const double expected = normal_cdf(probit(with_id.target_accuracies[m]) + kIdProbitShift);
        EXPECT_NEAR(accuracy(with_id.id_matrices[m], *with_id.id_labels), expected, 0.08);
    }
}

TEST(SynthWrite, FilesAndRoundTrip) {
    const auto dir = scratch_dir("pool");
    SynthConfig cfg = small_config(9);
    cfg.n_models = 3;
    const auto pool = generate_pool(cfg);
    const auto manifest = write_pool(pool, dir);
    for (const char* name : {"model_00.npy", "model_01.npy", "model_02.npy", "labels.txt", "manifest.json", "truth.csv"}) {
        EXPECT_TRUE(fs::exists(dir / name)) << name;
    }
    const std::string truth = read_file(dir / "truth.csv");
    EXPECT_EQ(truth.substr(0, truth.find('\n')), "model_id,accuracy");
    EXPECT_EQ(std::count(truth.begin(), truth.end(), '\n'), 4);

    const auto loaded = load_pool(load_manifest(dir / "manifest.json"));
    ASSERT_EQ(loaded.models.size(), 3u);
    for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(loaded.models[m], pool.matrices[m]);
    EXPECT_EQ(loaded.labels->labels, pool.labels.labels);
    EXPECT_EQ(*loaded.class_distribution, pool.class_distribution);
    EXPECT_EQ(manifest.models.size(), 3u);
}

TEST(SynthWrite, ReferenceBestDesignatesMostAccurateModel) {
    const auto dir = scratch_dir("pool");
    SynthConfig cfg = small_config(10);
    cfg.reference_best = true;
    cfg.id_samples = 100;
    const auto pool = generate_pool(cfg);
    const auto manifest = write_pool(pool, dir);
    const auto best = std::max_element(pool.true_accuracies.begin(), pool.true_accuracies.end()) -
                      pool.true_accuracies.begin();
    const auto reloaded = load_manifest(dir / "manifest.json");
    EXPECT_EQ(std::get<PredictionSource>(*reloaded.reference).path,
              dir / (pool.matrices[static_cast<std::size_t>(best)].model_id() + ".npy"));
    EXPECT_EQ(reloaded.id_set.size(), cfg.n_models);
    const auto loaded = load_pool(reloaded);
    EXPECT_EQ(*loaded.reference_predictions, pool.matrices[static_cast<std::size_t>(best)].with_model_id("reference"));
}
