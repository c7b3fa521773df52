#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rankshift/core_types.hpp"
#include "rankshift/error.hpp"

namespace rankshift::testing {

// Asserts that `expr` throws rankshift::Error with the given code.
#define EXPECT_RS_ERROR(expr, expected_code)                                                     \
    do {                                                                                         \
        try {                                                                                    \
            (void)(expr);                                                                        \
            ADD_FAILURE() << #expr " did not throw";                                             \
        } catch (const ::rankshift::Error& e_) {                                                 \
            EXPECT_EQ(e_.code(), (expected_code)) << e_.what();                                  \
        }                                                                                        \
    } while (0)

inline PredictionMatrix matrix(const std::vector<std::vector<double>>& rows, std::string id = {}) {
    return validate_prediction_matrix(rows, std::move(id));
}

// Random row-stochastic matrix; `sparsity` is the chance an entry is exactly 0.
inline PredictionMatrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t k, double sparsity = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> values(n * k);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double v = u(rng) < sparsity ? 0.0 : -std::log(1.0 - u(rng));
            values[i * k + j] = v;
            total += v;
        }
        if (total == 0.0) {
            values[i * k] = 1.0;
            total = 1.0;
        }
        for (std::size_t j = 0; j < k; ++j) values[i * k + j] /= total;
    }
    return validate_prediction_matrix(std::move(values), n, k);
}

inline LabelVector labels(std::vector<std::size_t> v) { return LabelVector{std::move(v)}; }

// Fresh per-test scratch directory under the build tree's temp area.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    auto dir = std::filesystem::temp_directory_path() / "rankshift_tests" /
               (std::string(info ? info->test_suite_name() : "suite") + "_" + (info ? info->name() : "") + "_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace rankshift::testing
