#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace trunclab {

struct VerifyCheck {
    std::string name;
    bool pass = true;
    int64_t cases = 0;
    std::string detail; // counterexample dump on failure
};

struct VerifyReport {
    std::string suite;
    std::vector<VerifyCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

struct VerifySizes {
    // identities
    int64_t window_n_max = 5;
    int64_t window_x_max = 10'000;
    int random_floor_identity = 100;
    int64_t floor_identity_x = 1'000;
    int random_convolutions = 50;
    int64_t convolution_x = 10'000;
    // oracles
    int64_t bnb_x_max = 60;
    int64_t reduction_x_max = 30;
    int rounding_samples = 200;
    int64_t rounding_x_max = 500;
    int witness_samples = 20;
    int64_t witness_x_max = 20;
    int64_t scan_oracle_x = 100'000;
    // bounds
    int random_bound_samples = 1000;
    int64_t g_positivity_x = 100'000;
    int64_t truncated_bound_x = 1'000;
    int hseries_samples = 100;

    uint64_t seed = 1;
    int threads = 1;
};

// reduced corpus for fast unit-test runs
VerifySizes quick_verify_sizes();

// name: identities | oracles | bounds | all
VerifyReport verify_suite(const std::string& name, const VerifySizes& sizes = {});

std::string verify_report_to_json(const VerifyReport& report);

} // namespace trunclab
