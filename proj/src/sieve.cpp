#include "trunclab/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "trunclab/errors.hpp"
#include "trunclab/util.hpp"

namespace trunclab {

namespace {
constexpr int64_t kMaxSieveN = 4'000'000'000; // smooth parts must fit uint32
constexpr double kUnitRound = 1.1102230246251565e-16; // 2^-53
} // namespace

LiouvilleSieve::LiouvilleSieve(int64_t max_n) : max_n_(max_n) {
    if (max_n < 1) throw ValidationError("LiouvilleSieve: max_n must be >= 1");
    if (max_n > kMaxSieveN)
        throw BudgetError("LiouvilleSieve: max_n exceeds supported bound 4e9");
    base_primes_ = primes_up_to(isqrt64(max_n)).primes;
}

void LiouvilleSieve::fill(int64_t start, int64_t len, int8_t* out) const {
    if (start < 1 || len < 1 || start + len - 1 > max_n_)
        throw ValidationError("LiouvilleSieve::fill: range outside configured bound");
    const int64_t end = start + len; // exclusive
    std::vector<uint32_t> smooth(static_cast<size_t>(len), 1);
    std::vector<uint8_t> parity(static_cast<size_t>(len), 0);
    for (int64_t p : base_primes_) {
        if (p * p >= end) break;
        for (int64_t q = p; q < end; q *= p) {
            int64_t m = ((start + q - 1) / q) * q;
            for (; m < end; m += q) {
                parity[m - start] ^= 1;
                smooth[m - start] *= static_cast<uint32_t>(p);
            }
        }
    }
    for (int64_t i = 0; i < len; ++i) {
        // cofactor > 1 is a single prime above sqrt(end-1)
        uint8_t par = parity[i] ^ (smooth[i] != static_cast<uint64_t>(start + i));
        out[i] = par ? -1 : 1;
    }
}

LiouvilleBlock liouville_range(int64_t start, int64_t len, int64_t mem_budget_bytes) {
    if (start < 1 || len < 1)
        throw ValidationError("liouville_range: need start >= 1 and len >= 1");
    // 1 output byte + 5 scratch bytes per integer in the widest segment
    const int64_t seg = std::min<int64_t>(len, int64_t(1) << 22);
    if (len + seg * 5 > mem_budget_bytes)
        throw BudgetError("liouville_range: len " + std::to_string(len) +
                          " exceeds memory budget " + std::to_string(mem_budget_bytes));
    LiouvilleSieve sieve(start + len - 1);
    LiouvilleBlock block;
    block.start = start;
    block.values.resize(static_cast<size_t>(len));
    for (int64_t off = 0; off < len; off += seg)
        sieve.fill(start + off, std::min(seg, len - off), block.values.data() + off);
    return block;
}

const char* scan_kind_name(ScanKind k) { return k == ScanKind::polya ? "polya" : "turan"; }

ScanKind scan_kind_from_name(const std::string& s) {
    if (s == "polya") return ScanKind::polya;
    if (s == "turan") return ScanKind::turan;
    throw ValidationError("unknown scan kind '" + s + "'");
}

double ScanCheckpoint::t_error_bound() const {
    // compensated summation: |sum - sum of terms| <= 2u * sum|terms|, and each
    // term 1/n carries one rounding of at most u/n; 3.2u*H covers both.
    return 3.2 * kUnitRound * H_value;
}

ScanCheckpoint initial_checkpoint(ScanKind kind) {
    ScanCheckpoint c;
    c.kind = kind;
    return c; // state after n = 1
}

std::string checkpoint_to_json(const ScanCheckpoint& c) {
    nlohmann::ordered_json j;
    j["version"] = c.format_version;
    j["kind"] = scan_kind_name(c.kind);
    j["next_n"] = c.next_n;
    j["L"] = c.L;
    j["T_value"] = double_to_exact_string(c.T_value);
    j["T_comp"] = double_to_exact_string(c.T_comp);
    j["H_value"] = double_to_exact_string(c.H_value);
    j["H_comp"] = double_to_exact_string(c.H_comp);
    j["first_positive_L_x"] = c.first_positive_L_x;
    j["first_unproven_T_x"] = c.first_unproven_T_x;
    j["records"] = nlohmann::ordered_json::array();
    if (c.argmin_L != 0) {
        j["records"].push_back({{"which", "min_L"}, {"x", c.argmin_L}, {"value", c.min_L}});
        j["records"].push_back({{"which", "max_L"}, {"x", c.argmax_L}, {"value", c.max_L}});
        j["records"].push_back(
            {{"which", "min_T"}, {"x", c.argmin_T}, {"value", double_to_exact_string(c.min_T)}});
        j["records"].push_back(
            {{"which", "max_T"}, {"x", c.argmax_T}, {"value", double_to_exact_string(c.max_T)}});
    }
    return j.dump(2);
}

ScanCheckpoint checkpoint_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    ScanCheckpoint c;
    try {
        c.format_version = j.at("version").get<int>();
        if (c.format_version != 1)
            throw CheckpointError("unsupported checkpoint version " +
                                  std::to_string(c.format_version));
        c.kind = scan_kind_from_name(j.at("kind").get<std::string>());
        c.next_n = j.at("next_n").get<int64_t>();
        c.L = j.at("L").get<int64_t>();
        c.T_value = double_from_exact_string(j.at("T_value").get<std::string>());
        c.T_comp = double_from_exact_string(j.at("T_comp").get<std::string>());
        c.H_value = double_from_exact_string(j.at("H_value").get<std::string>());
        c.H_comp = double_from_exact_string(j.at("H_comp").get<std::string>());
        c.first_positive_L_x = j.at("first_positive_L_x").get<int64_t>();
        c.first_unproven_T_x = j.at("first_unproven_T_x").get<int64_t>();
        for (const auto& rec : j.at("records")) {
            const std::string which = rec.at("which").get<std::string>();
            int64_t x = rec.at("x").get<int64_t>();
            if (which == "min_L") { c.argmin_L = x; c.min_L = rec.at("value").get<int64_t>(); }
            else if (which == "max_L") { c.argmax_L = x; c.max_L = rec.at("value").get<int64_t>(); }
            else if (which == "min_T") { c.argmin_T = x; c.min_T = double_from_exact_string(rec.at("value").get<std::string>()); }
            else if (which == "max_T") { c.argmax_T = x; c.max_T = double_from_exact_string(rec.at("value").get<std::string>()); }
            else throw CheckpointError("unknown record tag '" + which + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint missing or malformed field: ") + e.what());
    }
    if (c.next_n < 2) throw CheckpointError("checkpoint invariant violated: next_n < 2");
    if (c.argmin_L < 0 || c.argmin_L >= c.next_n || c.argmax_L >= c.next_n)
        throw CheckpointError("checkpoint invariant violated: extreme position beyond next_n");
    if (c.next_n > 2 && c.argmin_L == 0)
        throw CheckpointError("checkpoint invariant violated: missing extreme records");
    if (!(c.H_value >= 1.0))
        throw CheckpointError("checkpoint invariant violated: harmonic accumulator < 1");
    return c;
}

namespace {

struct Segment {
    int64_t start = 0;
    int64_t len = 0;
    std::vector<int8_t> lam;
};

class Consumer {
public:
    Consumer(ScanCheckpoint& st, ScanReport& rep, const ScanConfig& cfg)
        : st_(st), rep_(rep), cfg_(cfg) {}

    void consume(const Segment& seg) {
        Kahan T{st_.T_value, st_.T_comp};
        Kahan H{st_.H_value, st_.H_comp};
        int64_t L = st_.L;
        for (int64_t i = 0; i < seg.len; ++i) {
            const int64_t n = seg.start + i;
            const int lam = seg.lam[i];
            L += lam;
            const double inv = 1.0 / static_cast<double>(n);
            T.add(lam > 0 ? inv : -inv);
            H.add(inv);
            const double err = 3.2 * kUnitRound * H.value;
            bool extreme = false;
            if (st_.argmin_L == 0) {
                st_.min_L = st_.max_L = L;
                st_.argmin_L = st_.argmax_L = n;
                st_.min_T = st_.max_T = T.value;
                st_.argmin_T = st_.argmax_T = n;
                extreme = true;
            } else {
                if (L < st_.min_L) { st_.min_L = L; st_.argmin_L = n; extreme = true; }
                if (L > st_.max_L) { st_.max_L = L; st_.argmax_L = n; extreme = true; }
                if (T.value < st_.min_T) { st_.min_T = T.value; st_.argmin_T = n; extreme = true; }
                if (T.value > st_.max_T) { st_.max_T = T.value; st_.argmax_T = n; extreme = true; }
            }
            if (L > 0 && st_.first_positive_L_x == 0) st_.first_positive_L_x = n;
            if (T.value <= err && st_.first_unproven_T_x == 0) st_.first_unproven_T_x = n;
            if (extreme || n % cfg_.sample_every == 0) emit_row(n, L, T.value, err);
        }
        st_.L = L;
        st_.T_value = T.value;
        st_.T_comp = T.comp;
        st_.H_value = H.value;
        st_.H_comp = H.comp;
        st_.next_n = seg.start + seg.len;
    }

    void emit_row(int64_t x, int64_t L, double T, double err) {
        if (!rep_.rows.empty() && rep_.rows.back().x == x) return;
        rep_.rows.push_back({x, L, T, err});
    }

private:
    ScanCheckpoint& st_;
    ScanReport& rep_;
    const ScanConfig& cfg_;
};

} // namespace

ScanReport scan_range(ScanKind kind, int64_t bound, std::optional<ScanCheckpoint> resume,
                      const ScanConfig& cfg) {
    if (bound < 2) throw ValidationError("scan bound must be >= 2");
    ScanCheckpoint state = resume ? *resume : initial_checkpoint(kind);
    if (state.kind != kind)
        throw CheckpointError(std::string("checkpoint kind '") + scan_kind_name(state.kind) +
                              "' does not match requested scan '" + scan_kind_name(kind) + "'");
    if (state.next_n > bound + 1)
        throw ValidationError("checkpoint next_n already beyond requested bound");

    ScanReport rep;
    rep.kind = kind;
    Consumer consumer(state, rep, cfg);

    LiouvilleSieve sieve(bound);
    const int width = std::max(1, cfg.threads);
    const int64_t seg_len = std::max<int64_t>(1, cfg.segment_len);

    int64_t produce_next = state.next_n;
    std::vector<std::future<Segment>> pipe;
    auto launch = [&]() {
        if (produce_next > bound) return;
        const int64_t s = produce_next;
        const int64_t len = std::min(seg_len, bound - s + 1);
        produce_next += len;
        auto policy = width == 1 ? std::launch::deferred : std::launch::async;
        pipe.push_back(std::async(policy, [s, len, &sieve] {
            Segment seg;
            seg.start = s;
            seg.len = len;
            seg.lam.resize(static_cast<size_t>(len));
            sieve.fill(s, len, seg.lam.data());
            return seg;
        }));
    };
    for (int i = 0; i < width; ++i) launch();

    size_t head = 0;
    bool stopped = false;
    while (head < pipe.size() && !stopped) {
        Segment seg = pipe[head++].get();
        launch();
        consumer.consume(seg);
        if (cfg.segment_hook && !cfg.segment_hook(state)) stopped = true;
    }
    // drain any in-flight producers before returning
    for (; head < pipe.size(); ++head) pipe[head].wait();

    if (!stopped && state.next_n == bound + 1) {
        const double err = state.t_error_bound();
        consumer.emit_row(bound, state.L, state.T_value, err);
    }
    rep.final_state = state;
    return rep;
}

ScanReport polya_scan(int64_t bound, std::optional<ScanCheckpoint> resume, const ScanConfig& cfg) {
    return scan_range(ScanKind::polya, bound, std::move(resume), cfg);
}

ScanReport turan_scan(int64_t bound, std::optional<ScanCheckpoint> resume, const ScanConfig& cfg) {
    return scan_range(ScanKind::turan, bound, std::move(resume), cfg);
}

std::string report_to_csv(const ScanReport& report) {
    std::ostringstream os;
    os << "x,L,T,T_err\n";
    for (const auto& r : report.rows)
        os << r.x << ',' << r.L << ',' << double_to_csv(r.T) << ',' << double_to_csv(r.T_err)
           << '\n';
    return os.str();
}

} // namespace trunclab
