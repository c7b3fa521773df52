// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "rankshift/io.hpp"
#include "rankshift/measures.hpp"
#include "rankshift/pipeline.hpp"
#include "rankshift/stats.hpp"

using namespace rankshift;
namespace fs = std::filesystem;

namespace {

// Frozen from pilot runs of the generator (see README).
constexpr double kGoldenStudyRho = 0.94260289210233594;
constexpr double kGoldenBiasSoftmaxCorrRho = 0.84427141268075645;
constexpr double kGoldenBiasCertaintyRho = 0.26273637374860959;
constexpr double kGoldenTolerance = 1e-9;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

fs::path work_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "rankshift_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PredictionMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        // Mix flat and peaked rows.
        const double power = 1.0 + 8.0 * u(rng);
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) total += v[i * k + j] = std::pow(u(rng), power);
        if (total == 0.0) v[i * k] = total = 1.0;
        for (std::size_t j = 0; j < k; ++j) v[i * k + j] /= total;
    }
    return validate_prediction_matrix(std::move(v), n, k);
}

std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> d(k);
    double total = 0.0;
    for (double& v : d) total += v = e(rng);
    for (double& v : d) v /= total;
    return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. SoftmaxCorr range and the I_a / I_e identities.
Outcome softmaxcorr_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<std::size_t> kd(2, 20), nd(1, 500);
    double worst_identity = 0.0;
    std::size_t out_of_range = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t k = kd(rng), n = nd(rng);
        const auto p = random_matrix(rng, n, k);
        const auto c = class_correlation(p);
        const double s = softmax_corr(c, ReferenceMatrix::from_distribution(random_distribution(rng, k)));
        out_of_range += !(s >= 0.0 && s <= 1.0);
        double fro = 0.0;
        for (double v : p.data()) fro += v * v;
        worst_identity = std::max({worst_identity, std::abs(c.intra() + c.inter() - 1.0),
                                   std::abs(c.intra() - fro / static_cast<double>(n))});
    }
    const double elapsed = seconds_since(t0);
    return {out_of_range == 0 && worst_identity <= 1e-9 && elapsed < 10.0,
            "out_of_range=" + std::to_string(out_of_range) + " max_identity_err=" + fmt(worst_identity) +
                " time=" + fmt(elapsed, 3) + "s"};
}

// 2. Maximum and minimum of SoftmaxCorr.
Outcome softmaxcorr_extremes() {
    std::mt19937_64 rng(7);
    double worst_max = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + trial % 15, n = k + trial;
        std::vector<std::size_t> cls(n);
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        for (auto& c : cls) c = pick(rng);
        std::vector<double> values(n * k, 0.0), freq(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            values[i * k + cls[i]] = 1.0;
            freq[cls[i]] += 1.0 / static_cast<double>(n);
        }
        double total = std::accumulate(freq.begin(), freq.end(), 0.0);
        for (double& f : freq) f /= total;
        const double s = softmax_corr(class_correlation(validate_prediction_matrix(std::move(values), n, k)),
                                      ReferenceMatrix::from_distribution(freq));
        worst_max = std::max(worst_max, std::abs(s - 1.0));
    }
    // One-class predictor; the reference puts no mass on that class.
    const auto biased = validate_prediction_matrix(std::vector<double>{1, 0, 0, 1, 0, 0, 1, 0, 0}, 3, 3);
    const double s_min = softmax_corr(class_correlation(biased), ReferenceMatrix::from_distribution({0, 0.5, 0.5}));
    return {worst_max <= 1e-9 && s_min == 0.0, "max_err=" + fmt(worst_max) + " min_score=" + fmt(s_min)};
}

int sign(double v) { return (v > 0) - (v < 0); }

double weighted_tau_pairwise(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<std::size_t> idx(a.size()), r(a.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
            return a[i] != a[j] ? a[i] > a[j] : (b[i] != b[j] ? b[i] > b[j] : i < j);
        });
        for (std::size_t pos = 0; pos < idx.size(); ++pos) r[idx[pos]] = pos;
        return r;
    };
    auto one = [&](const std::vector<std::size_t>& r) {
        long double num = 0, dx = 0, dy = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = i + 1; j < x.size(); ++j) {
                const long double w = 1.0L / (1 + r[i]) + 1.0L / (1 + r[j]);
                const int sx = sign(x[i] - x[j]), sy = sign(y[i] - y[j]);
                num += w * sx * sy;
                dx += w * (sx != 0);
                dy += w * (sy != 0);
            }
        return static_cast<double>(num / std::sqrt(dx * dy));
    };
    return 0.5 * (one(ranks(x, y)) + one(ranks(y, x)));
}

// 3. Statistics against independent oracles.
Outcome statistics_oracles() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> coarse(0, 6);
    double worst_tau = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + trial % 49;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = trial % 5 == 0 ? coarse(rng) : u(rng);
            y[i] = trial % 7 == 0 ? coarse(rng) : u(rng);
        }
        x[0] = 10.0;  // never constant
        y[n - 1] = -10.0;
        worst_tau = std::max(worst_tau, std::abs(weighted_kendall(PairedSeries(x, y)) - weighted_tau_pairwise(x, y)));
    }
    std::size_t spearman_mismatch = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + trial % 80;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = u(rng), y[i] = u(rng);
        const auto rx = average_ranks(x), ry = average_ranks(y);
        double d2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        const double nn = static_cast<double>(n);
        spearman_mismatch += spearman(PairedSeries(x, y)) != 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    }
    double worst_probit = 0.0;
    for (int i = 0; i <= 8000; ++i) {
        const double z = -4.0 + i * 0.001;
        worst_probit = std::max(worst_probit, std::abs(probit(normal_cdf(z)) - z));
    }
    return {worst_tau <= 1e-12 && spearman_mismatch == 0 && worst_probit <= 1e-7,
            "tau_max_err=" + fmt(worst_tau) + " spearman_mismatches=" + std::to_string(spearman_mismatch) +
                " probit_max_err=" + fmt(worst_probit)};
}

// 4. Rank metrics are unchanged by probit-scaling the scores.
Outcome probit_invariance() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(1e-9, 1.0 - 1e-9);
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + trial % 60;
        std::vector<double> s(n), g(n), ps(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Stay inside the clamp so probit is strictly increasing on the sample.
            s[i] = 1e-6 + (1.0 - 2e-6) * u(rng);
            g[i] = u(rng);
            ps[i] = probit(s[i]);
        }
        const PairedSeries raw(s, g), scaled(ps, g);
        worst = std::max({worst, std::abs(spearman(raw) - spearman(scaled)),
                          std::abs(weighted_kendall(raw) - weighted_kendall(scaled))});
    }
    return {worst <= 1e-12, "max_diff=" + fmt(worst)};
}

// 5. ATC calibration reproduces the ID error.
Outcome atc_calibration() {
    const auto id = validate_prediction_matrix(std::vector<double>{0.9, 0.1, 0.2, 0.8, 0.6, 0.4, 0.5, 0.5}, 4, 2);
    const auto th = atc_calibrate(id, LabelVector{{0, 1, 0, 1}});
    const bool hand = th.t == 0.6 && th.id_error == 0.25 && atc_score(id, th) == 0.75;

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::size_t> label(0, 3);
    std::size_t violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + trial % 200;
        const auto p = random_matrix(rng, n, 4);
        std::vector<double> conf(n);
        for (std::size_t i = 0; i < n; ++i) conf[i] = *std::max_element(p.row(i).begin(), p.row(i).end());
        std::sort(conf.begin(), conf.end());
        if (std::adjacent_find(conf.begin(), conf.end()) != conf.end()) continue;  // distinct confidences only
        LabelVector y;
        for (std::size_t i = 0; i < n; ++i) y.labels.push_back(label(rng));
        const auto t = atc_calibrate(p, y);
        // The fraction below t, recomputed from 1 - score on the same set.
        const double below = 1.0 - atc_score(p, t);
        violations += std::abs(below - t.id_error) > 1.0 / static_cast<double>(n);
    }
    return {hand && violations == 0,
            std::string("hand_example=") + (hand ? "ok" : "wrong") + " t=" + fmt(th.t) +
                " violations=" + std::to_string(violations)};
}

SynthConfig study_config() {
    SynthConfig cfg;
    cfg.n_models = 30;
    cfg.n_classes = 10;
    cfg.n_samples = 5000;
    cfg.accuracy_range = {0.2, 0.9};
    cfg.bias_strength = 0.5;
    cfg.seed = 2;
    return cfg;
}

double study_rho(const fs::path& manifest, Measure m) {
    RankRequest req;
    req.manifest_path = manifest;
    req.measures = {m};
    const auto reports = cmd_correlate(req);
    if (reports.at(0).error) throw std::runtime_error(*reports[0].error);
    return *reports[0].spearman;
}

// 6. Synthetic correlation study.
Outcome correlation_study() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto manifest = cmd_synth(study_config(), work_dir("study"));
    const double rho = study_rho(manifest, Measure::softmaxcorr);
    const double elapsed = seconds_since(t0);
    return {rho >= 0.8 && std::abs(rho - kGoldenStudyRho) <= kGoldenTolerance && elapsed < 30.0,
            "rho=" + fmt(rho, 17) + " golden=" + fmt(kGoldenStudyRho, 17) + " time=" + fmt(elapsed, 3) + "s"};
}

// 7. Class-biased confident models: SoftmaxCorr separates, Certainty does not.
Outcome bias_separation() {
    SynthConfig cfg = study_config();
    cfg.bias_strength = 5.0;
    cfg.temperature_range = {0.5, 1.5};
    cfg.seed = 1;
    const auto manifest = cmd_synth(cfg, work_dir("bias"));
    const double rho_sc = study_rho(manifest, Measure::softmaxcorr);
    const double rho_cert = study_rho(manifest, Measure::certainty);
    const bool golden = std::abs(rho_sc - kGoldenBiasSoftmaxCorrRho) <= kGoldenTolerance &&
                        std::abs(rho_cert - kGoldenBiasCertaintyRho) <= kGoldenTolerance;
    return {rho_sc - rho_cert >= 0.1 && golden, "softmaxcorr_rho=" + fmt(rho_sc, 17) +
                                                   " certainty_rho=" + fmt(rho_cert, 17) +
                                                   " gap=" + fmt(rho_sc - rho_cert)};
}

// 8. Subsampling sensitivity.
Outcome sensitivity_protocol() {
    const auto t0 = std::chrono::steady_clock::now();
    SensitivityRequest req;
    req.manifest_path = cmd_synth(study_config(), work_dir("sensitivity"));
    req.fractions = {0.01, 0.05, 0.1, 0.3, 1.0};
    req.runs = 3;
    req.seed = 7;
    const auto table = cmd_sensitivity(req);
    const double full = table.rows.back().mean_spearman;
    bool ok = true;
    std::string detail;
    for (const auto& row : table.rows) {
        if (row.fraction >= 0.1) ok = ok && std::abs(row.mean_spearman - full) <= 0.1;
        detail += fmt(row.fraction, 3) + ":" + fmt(row.mean_spearman, 4) + " ";
    }
    const double elapsed = seconds_since(t0);
    return {ok && elapsed < 60.0, detail + "time=" + fmt(elapsed, 3) + "s"};
}

// 9. Byte-identical pipeline reruns and matrix round-trips.
Outcome determinism_round_trip() {
    std::string reports[2];
    for (int run = 0; run < 2; ++run) {
        SynthConfig cfg = study_config();
        cfg.n_samples = 2000;
        cfg.id_samples = 500;
        cfg.reference_best = true;
        const auto dir = work_dir("determinism_" + std::to_string(run));
        RankRequest req;
        req.manifest_path = cmd_synth(cfg, dir);
        req.output_path = dir / "report.json";
        cmd_correlate(req);
        reports[run] = read_file(req.output_path);
    }
    const bool identical = !reports[0].empty() && reports[0] == reports[1];

    std::mt19937_64 rng(9);
    const auto dir = work_dir("round_trip");
    bool binary_exact = true;
    double text_err = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = random_matrix(rng, 1 + trial * 3, 2 + trial % 9);
        write_prediction_matrix(p, dir / "m.npy", FileFormat::binary_array_v1);
        write_prediction_matrix(p, dir / "m.csv", FileFormat::delimited_text);
        binary_exact = binary_exact && load_prediction_matrix(dir / "m.npy", FileFormat::binary_array_v1) == p;
        const auto q = load_prediction_matrix(dir / "m.csv", FileFormat::delimited_text);
        for (std::size_t i = 0; i < p.data().size(); ++i) text_err = std::max(text_err, std::abs(q.data()[i] - p.data()[i]));
    }
    return {identical && binary_exact && text_err <= 1e-12,
            std::string("reports_identical=") + (identical ? "yes" : "no") +
                " binary_exact=" + (binary_exact ? "yes" : "no") + " text_max_err=" + fmt(text_err)};
}

// 10. Huber fit resists gross outliers.
Outcome huber_robustness() {
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) x.push_back(i), y.push_back(i);
    for (double xo : {15.0, 18.0}) x.push_back(xo), y.push_back(xo + 10.0);
    const auto fit = huber_fit(PairedSeries(x, y));
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    const double ols_err = std::abs(sxy / sxx - 1.0), huber_err = std::abs(fit.slope - 1.0);
    return {huber_err < ols_err && huber_err < 0.05,
            "huber_slope_err=" + fmt(huber_err) + " ols_slope_err=" + fmt(ols_err)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"SoftmaxCorr range and intra/inter identities", softmaxcorr_identities},
        {"SoftmaxCorr extremes", softmaxcorr_extremes},
        {"statistics oracles", statistics_oracles},
        {"rank-metric probit invariance", probit_invariance},
        {"ATC calibration", atc_calibration},
        {"synthetic correlation study", correlation_study},
        {"bias failure-mode separation", bias_separation},
        {"sensitivity protocol", sensitivity_protocol},
        {"determinism and round-trip", determinism_round_trip},
        {"Huber robustness", huber_robustness},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        failed += !out.pass;
        std::printf("%s criterion %zu: %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    out.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed;
}
