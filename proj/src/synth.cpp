#include "rankshift/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "rankshift/io.hpp"
#include "rankshift/random.hpp"
#include "rankshift/stats.hpp"

namespace rankshift {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void infeasible(const std::string& msg) { throw Error(ErrorCode::InfeasibleConfig, msg); }

std::vector<double> resolved_distribution(const SynthConfig& cfg) {
    if (cfg.class_distribution.empty()) {
        return std::vector<double>(cfg.n_classes, 1.0 / static_cast<double>(cfg.n_classes));
    }
    return cfg.class_distribution;
}

LabelVector draw_labels(Rng& rng, std::size_t n, std::span<const double> distribution) {
    LabelVector out;
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.labels.push_back(rng.categorical(distribution));
    return out;
}

struct ModelParams {
    double accuracy;
    double temperature;
    std::vector<double> preference;  // weight of each class when predicted wrongly
};

PredictionMatrix draw_predictions(Rng& rng, const LabelVector& labels, std::size_t k, const ModelParams& params,
                                  double accuracy, std::string model_id) {
    const std::size_t n = labels.size();
    std::vector<double> values(n * k);
    std::vector<double> logits(k);
    std::vector<double> wrong_weights(k);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t truth = labels[i];
        const bool correct = rng.uniform() < accuracy;
        std::size_t chosen = truth;
        if (!correct) {
            wrong_weights = params.preference;
            wrong_weights[truth] = 0.0;
            if (std::all_of(wrong_weights.begin(), wrong_weights.end(), [](double w) { return w <= 0.0; })) {
                std::fill(wrong_weights.begin(), wrong_weights.end(), 1.0);
                wrong_weights[truth] = 0.0;
            }
            chosen = rng.categorical(wrong_weights);
        }
        double runner_up = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            logits[j] = rng.gumbel();
            if (j != chosen) runner_up = std::max(runner_up, logits[j]);
        }
        const double margin = kMinMargin + rng.exponential(correct ? kCorrectMarginMean : kWrongMarginMean);
        logits[chosen] = runner_up + margin;

        // softmax(logits / T), shifted by the maximum for stability.
        double* row = values.data() + i * k;
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            row[j] = std::exp((logits[j] - logits[chosen]) / params.temperature);
            total += row[j];
        }
        for (std::size_t j = 0; j < k; ++j) row[j] /= total;
    }
    return validate_prediction_matrix(std::move(values), n, k, std::move(model_id));
}

std::string model_name(std::size_t index, std::size_t count) {
    const std::size_t width = std::max<std::size_t>(2, std::to_string(count - 1).size());
    std::string digits = std::to_string(index);
    return "model_" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

void validate_synth_config(const SynthConfig& cfg) {
    if (cfg.n_classes < 2) infeasible("n_classes must be at least 2");
    if (cfg.n_models < 1) infeasible("n_models must be at least 1");
    if (cfg.n_samples < 1) infeasible("n_samples must be at least 1");
    const double chance = 1.0 / static_cast<double>(cfg.n_classes);
    const auto& acc = cfg.accuracy_range;
    if (!(acc.lo > chance && acc.hi < 1.0 && acc.lo <= acc.hi)) {
        infeasible("accuracy_range must satisfy 1/K < lo <= hi < 1 (1/K = " + std::to_string(chance) + ")");
    }
    const auto& temp = cfg.temperature_range;
    if (!(temp.lo > 0.0 && temp.lo <= temp.hi && std::isfinite(temp.hi))) {
        infeasible("temperature_range must satisfy 0 < lo <= hi");
    }
    if (!(cfg.bias_strength >= 0.0) || !std::isfinite(cfg.bias_strength)) {
        infeasible("bias_strength must be a finite value >= 0");
    }
    if (!cfg.class_distribution.empty()) {
        if (cfg.class_distribution.size() != cfg.n_classes) infeasible("class_distribution must have K entries");
        double total = 0.0;
        for (double v : cfg.class_distribution) {
            if (!(v >= 0.0) || !std::isfinite(v)) infeasible("class_distribution entries must be finite and >= 0");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-6) infeasible("class_distribution must sum to 1");
    }
}

SynthPool generate_pool(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    const std::size_t k = cfg.n_classes;
    Rng rng(cfg.seed);

    SynthPool pool;
    pool.class_distribution = resolved_distribution(cfg);
    pool.reference_best = cfg.reference_best;
    pool.labels = draw_labels(rng, cfg.n_samples, pool.class_distribution);

    std::vector<ModelParams> params;
    params.reserve(cfg.n_models);
    for (std::size_t m = 0; m < cfg.n_models; ++m) {
        ModelParams p;
        p.accuracy = rng.uniform(cfg.accuracy_range.lo, cfg.accuracy_range.hi);
        p.temperature = rng.uniform(cfg.temperature_range.lo, cfg.temperature_range.hi);
        p.preference = cfg.bias_strength > 0.0 ? rng.dirichlet(k, 1.0 / cfg.bias_strength)
                                               : std::vector<double>(k, 1.0);
        params.push_back(std::move(p));
    }

    for (std::size_t m = 0; m < cfg.n_models; ++m) {
        const auto& p = params[m];
        pool.matrices.push_back(
            draw_predictions(rng, pool.labels, k, p, p.accuracy, model_name(m, cfg.n_models)));
        pool.target_accuracies.push_back(p.accuracy);
        pool.temperatures.push_back(p.temperature);
        pool.true_accuracies.push_back(accuracy(pool.matrices.back(), pool.labels));
    }

    // The ID set is drawn last so that enabling it leaves the test pool unchanged.
    if (cfg.id_samples > 0) {
        pool.id_labels = draw_labels(rng, cfg.id_samples, pool.class_distribution);
        for (std::size_t m = 0; m < cfg.n_models; ++m) {
            const double id_accuracy = std::min(normal_cdf(probit(params[m].accuracy) + kIdProbitShift), 1.0 - 1e-6);
            pool.id_matrices.push_back(
                draw_predictions(rng, *pool.id_labels, k, params[m], id_accuracy, model_name(m, cfg.n_models)));
        }
    }
    return pool;
}

PoolManifest write_pool(const SynthPool& pool, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    const fs::path root = fs::absolute(dir);

    PoolManifest manifest;
    std::string truth = "model_id,accuracy\n";
    for (std::size_t m = 0; m < pool.matrices.size(); ++m) {
        const auto& matrix = pool.matrices[m];
        const fs::path path = root / (matrix.model_id() + ".npy");
        write_prediction_matrix(matrix, path, FileFormat::binary_array_v1);
        manifest.models.push_back({matrix.model_id(), {path, FileFormat::binary_array_v1}});

        char buf[32];
        auto [ptr, _] = std::to_chars(buf, buf + sizeof(buf), pool.true_accuracies[m], std::chars_format::general, 17);
        truth += matrix.model_id() + "," + std::string(buf, ptr) + "\n";
    }
    write_file(root / "truth.csv", truth);

    write_labels(pool.labels, root / "labels.txt");
    manifest.labels_path = root / "labels.txt";

    if (pool.reference_best) {
        // Highest realized accuracy; ties go to the earliest model.
        const auto best = static_cast<std::size_t>(
            std::max_element(pool.true_accuracies.begin(), pool.true_accuracies.end()) -
            pool.true_accuracies.begin());
        manifest.reference = manifest.models[best].source;
    } else {
        manifest.reference = pool.class_distribution;
    }

    if (pool.id_labels) {
        write_labels(*pool.id_labels, root / "id_labels.txt");
        for (const auto& matrix : pool.id_matrices) {
            const fs::path path = root / ("id_" + matrix.model_id() + ".npy");
            write_prediction_matrix(matrix, path, FileFormat::binary_array_v1);
            manifest.id_set.push_back({matrix.model_id(), {path, FileFormat::binary_array_v1}, root / "id_labels.txt"});
        }
    }

    write_manifest(manifest, root / "manifest.json");
    return manifest;
}

}  // namespace rankshift
