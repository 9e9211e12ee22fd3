#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trunclab/primes.hpp"

namespace trunclab {

// lambda(start+i) for i in [0, len), as +-1 signs.
struct LiouvilleBlock {
    int64_t start = 1;
    std::vector<int8_t> values;
};

// Segmented Omega-parity sieve. A block tracks one parity byte and the
// product of small-prime powers per integer; a leftover cofactor > 1 is a
// single prime > sqrt(n) and flips parity once more.
class LiouvilleSieve {
public:
    explicit LiouvilleSieve(int64_t max_n);
    // fills out[0..len) with lambda(start), ..., lambda(start+len-1)
    void fill(int64_t start, int64_t len, int8_t* out) const;
    int64_t max_n() const { return max_n_; }

private:
    int64_t max_n_;
    std::vector<int64_t> base_primes_; // p <= sqrt(max_n)
};

// One-shot block with an explicit memory budget for the materialized output.
LiouvilleBlock liouville_range(int64_t start, int64_t len,
                               int64_t mem_budget_bytes = int64_t(1) << 31);

enum class ScanKind { polya, turan };

const char* scan_kind_name(ScanKind k);
ScanKind scan_kind_from_name(const std::string& s);

// Resumable scan state after processing all n < next_n. The compensated
// pairs (value, comp) are bit-exact across save/load, so a resumed run
// reproduces an uninterrupted one exactly.
struct ScanCheckpoint {
    ScanKind kind = ScanKind::polya;
    int format_version = 1;
    int64_t next_n = 2;
    int64_t L = 1;                       // sum of lambda(n), n < next_n
    double T_value = 1.0, T_comp = 0.0;  // sum of lambda(n)/n
    double H_value = 1.0, H_comp = 0.0;  // sum of 1/n, drives the error bound

    // running extremes over 2 <= x < next_n; argmin_L == 0 means none yet
    int64_t min_L = 0, argmin_L = 0, max_L = 0, argmax_L = 0;
    double min_T = 0.0, max_T = 0.0;
    int64_t argmin_T = 0, argmax_T = 0;

    int64_t first_positive_L_x = 0;  // least x >= 2 with L(x) > 0; 0 = none
    int64_t first_unproven_T_x = 0;  // least x with T(x) <= error bound; 0 = none

    double t_error_bound() const;
};

ScanCheckpoint initial_checkpoint(ScanKind kind);

std::string checkpoint_to_json(const ScanCheckpoint& c);
ScanCheckpoint checkpoint_from_json(const std::string& text);

struct ScanRow {
    int64_t x;
    int64_t L;
    double T;
    double T_err;
};

struct ScanConfig {
    int64_t segment_len = int64_t(1) << 22;
    int64_t sample_every = 1'000'000;
    int threads = 1;
    // called after each segment; return false to stop early (state is consistent)
    std::function<bool(const ScanCheckpoint&)> segment_hook;
};

struct ScanReport {
    ScanKind kind = ScanKind::polya;
    std::vector<ScanRow> rows;
    ScanCheckpoint final_state;
    bool polya_nonpositive() const { return final_state.first_positive_L_x == 0; }
    bool turan_positive_proven() const { return final_state.first_unproven_T_x == 0; }
};

// Core engine: processes n in [state.next_n, bound] in order.
ScanReport scan_range(ScanKind kind, int64_t bound,
                      std::optional<ScanCheckpoint> resume,
                      const ScanConfig& cfg = {});

ScanReport polya_scan(int64_t bound, std::optional<ScanCheckpoint> resume = {},
                      const ScanConfig& cfg = {});
ScanReport turan_scan(int64_t bound, std::optional<ScanCheckpoint> resume = {},
                      const ScanConfig& cfg = {});

// CSV with header `x,L,T,T_err`; floats printed with 17 significant digits.
std::string report_to_csv(const ScanReport& report);

} // namespace trunclab
