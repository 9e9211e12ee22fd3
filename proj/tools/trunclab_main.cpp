#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trunclab/analysis.hpp"
#include "trunclab/constructions.hpp"
#include "trunclab/errors.hpp"
#include "trunclab/minimize.hpp"
#include "trunclab/multfunc.hpp"
#include "trunclab/rounding.hpp"
#include "trunclab/sieve.hpp"
#include "trunclab/util.hpp"
#include "trunclab/verify.hpp"

namespace {

using namespace trunclab;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitVerifyFailed = 4;

struct GlobalOpts {
    int threads = 1;
    uint64_t seed = 1;
    int64_t budget_mem = int64_t(1) << 31;
    std::string out_dir = ".";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_artifact(const GlobalOpts& g, const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.is_relative()) p = std::filesystem::path(g.out_dir) / p;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw ValidationError("cannot write '" + p.string() + "'");
    out << content;
}

int run_scan(const GlobalOpts& g, const std::string& kind_name, int64_t bound,
             const std::string& resume_path, const std::string& checkpoint_path,
             int64_t checkpoint_every, int64_t sample_every, const std::string& csv_path) {
    const ScanKind kind = scan_kind_from_name(kind_name);
    std::optional<ScanCheckpoint> resume;
    if (!resume_path.empty()) resume = checkpoint_from_json(read_file(resume_path));

    ScanConfig cfg;
    cfg.threads = g.threads;
    cfg.sample_every = sample_every;
    // ~13 bytes of scratch per integer per in-flight segment
    const int64_t seg_cap = g.budget_mem / (13 * std::max(1, g.threads));
    if (seg_cap < 1024)
        throw BudgetError("scan: memory budget too small for a working segment");
    cfg.segment_len = std::min(cfg.segment_len, seg_cap);
    int64_t segments_done = 0;
    if (!checkpoint_path.empty()) {
        cfg.segment_hook = [&](const ScanCheckpoint& st) {
            if (++segments_done % checkpoint_every == 0)
                write_artifact(g, checkpoint_path, checkpoint_to_json(st));
            return true;
        };
    }

    auto report = scan_range(kind, bound, resume, cfg);
    if (!checkpoint_path.empty())
        write_artifact(g, checkpoint_path, checkpoint_to_json(report.final_state));
    if (!csv_path.empty()) write_artifact(g, csv_path, report_to_csv(report));

    const auto& st = report.final_state;
    nlohmann::ordered_json j;
    j["kind"] = kind_name;
    j["bound"] = bound;
    j["L"] = st.L;
    j["T"] = double_to_exact_string(st.T_value);
    j["T_err"] = double_to_exact_string(st.t_error_bound());
    j["min_L"] = st.min_L;
    j["argmin_L"] = st.argmin_L;
    j["max_L"] = st.max_L;
    j["argmax_L"] = st.argmax_L;
    j["min_T"] = double_to_exact_string(st.min_T);
    j["argmin_T"] = st.argmin_T;
    j["first_positive_L_x"] = st.first_positive_L_x;
    j["first_unproven_T_x"] = st.first_unproven_T_x;
    if (kind == ScanKind::polya)
        j["conclusion"] = st.first_positive_L_x == 0
                              ? "L(x) <= 0 throughout"
                              : "L(x) > 0 first at x = " + std::to_string(st.first_positive_L_x);
    else
        j["conclusion"] = st.first_unproven_T_x == 0
                              ? "T(x) > 0 beyond the error bound throughout"
                              : "T(x) not provably positive first at x = " +
                                    std::to_string(st.first_unproven_T_x);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int run_delta(const GlobalOpts& g, int64_t x, const std::string& cls_name,
              const std::string& method, int starts, int64_t node_budget,
              const std::string& out_path, bool with_vertex_report) {
    MinResult res;
    if (method == "brute") {
        FuncClass cls = func_class_from_name(cls_name);
        if (cls == FuncClass::F)
            throw ValidationError("class f has a continuum of assignments; "
                                  "use --method descent");
        res = cls == FuncClass::F1 ? delta1_brute(x) : delta0_brute(x);
    } else if (method == "bnb") {
        if (func_class_from_name(cls_name) != FuncClass::F1)
            throw ValidationError("bnb supports --class f1 only");
        BnBConfig cfg;
        cfg.node_budget = node_budget;
        cfg.parallel_width = g.threads;
        res = delta1_bnb(x, cfg);
    } else if (method == "descent") {
        if (func_class_from_name(cls_name) != FuncClass::F)
            throw ValidationError("descent minimizes over class f; use --class f");
        res = delta_descent(x, starts, g.seed);
    } else {
        throw ValidationError("unknown method '" + method + "'");
    }

    std::string payload = min_result_to_json(res);
    if (with_vertex_report) {
        BnBConfig cfg;
        cfg.node_budget = node_budget;
        cfg.parallel_width = g.threads;
        auto vr = vertex_report(x, starts, g.seed, cfg);
        nlohmann::ordered_json j = nlohmann::ordered_json::parse(payload);
        j["vertex_report"] = {{"descent_at_vertex", vr.descent_at_vertex},
                              {"values_equal", vr.values_equal},
                              {"value_gap", vr.value_gap},
                              {"descent_value", vr.descent.value.fvalue},
                              {"bnb_value", rat_str(vr.bnb.value.value)}};
        payload = j.dump(2);
    }
    if (!out_path.empty()) write_artifact(g, out_path, payload);
    std::cout << payload << '\n';
    return kExitOk;
}

int run_round(const GlobalOpts& g, int64_t x, const std::string& input_path,
              const std::string& trace_path) {
    auto f = assignment_from_json(read_file(input_path));
    auto [rounded, trace] = round_to_pm1(f, x);
    if (!trace_path.empty()) write_artifact(g, trace_path, trace_to_json(trace));
    nlohmann::ordered_json j;
    j["x"] = x;
    j["initial_sum"] = rat_str(trace.initial_sum);
    j["final_sum"] = rat_str(trace.final_sum);
    j["steps"] = trace.steps.size();
    j["rounded"] = nlohmann::ordered_json::parse(assignment_to_json(rounded));
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int run_construct(const GlobalOpts& g, const std::string& kind, int64_t x, int64_t N,
                  const std::string& mode_name, const std::string& out_path) {
    const SumMode mode = mode_name == "float" ? SumMode::floating : SumMode::exact;
    nlohmann::ordered_json j;
    if (kind == "window") {
        auto [wc, id] = liouville_window(x, N, mode);
        j["kind"] = "window";
        j["x"] = x;
        j["N"] = N;
        j["window_primes"] = wc.window_primes;
        if (id.lhs.exact) {
            j["lhs"] = rat_str(id.lhs.value);
            j["rhs"] = rat_str(id.rhs.value);
            j["exact_equal"] = id.exact_equal;
        } else {
            j["lhs"] = id.lhs.fvalue;
            j["rhs"] = id.rhs.fvalue;
            j["lhs_err"] = id.lhs.error_bound;
            j["rhs_err"] = id.rhs.error_bound;
        }
        j["single_prime_form"] = id.single_prime_form;
        if (!out_path.empty()) write_artifact(g, out_path, assignment_to_json(wc.assignment));
    } else if (kind == "extremal") {
        j["kind"] = "extremal";
        j["x"] = x;
        if (mode == SumMode::exact) {
            auto ec = extremal_multiplicative(x, SumMode::exact);
            j["y"] = ec.y;
            j["value"] = rat_str(ec.value.value);
            j["value_float"] = ec.value.fvalue;
            if (!out_path.empty()) write_artifact(g, out_path, multspec_to_json(ec.spec));
        } else {
            auto v = extremal_multiplicative_value(x, g.threads);
            j["y"] = std::pow(static_cast<double>(x), 1.0 / (1.0 + std::sqrt(std::exp(1.0))));
            j["value"] = v.fvalue;
            j["error_bound"] = v.error_bound;
        }
    } else {
        throw ValidationError("unknown construct kind '" + kind + "' (window or extremal)");
    }
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int run_realize(const GlobalOpts& g, const std::string& pattern_path, int64_t x,
                int64_t max_candidates, const std::string& out_path) {
    auto pattern = assignment_from_json(read_file(pattern_path));
    auto w = realize_as_character(pattern, x, max_candidates);
    std::string payload = witness_to_json(w);
    if (!out_path.empty()) write_artifact(g, out_path, payload);
    std::cout << payload << '\n';
    return kExitOk;
}

int run_constants() {
    auto c = extremal_limit_constant();
    nlohmann::ordered_json j;
    j["inner"] = c.inner;
    j["full"] = c.full;
    j["quad_error"] = c.quad_error;
    j["kappa"] = kKappaConst;
    j["kappa_note"] = "printed truncation of the decay constant 0.32867...";
    j["euler_gamma"] = kEulerGammaConst;
    j["log2"] = kLogTwoConst;
    j["note"] = "inner = 1 - 2 log(1+sqrt(e)) + 4 int_1^sqrt(e) log t/(t+1) dt; "
                "full = inner * log 2";
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int run_rho(double u, double precision) {
    const double v = dickman_rho(u, precision);
    nlohmann::ordered_json j;
    j["u"] = u;
    j["rho"] = double_to_exact_string(v);
    j["error_estimate"] = dickman_error_estimate(u);
    j["sigma_minus"] = sigma_minus(u);
    std::cout << j.dump(2) << '\n';
    return kExitOk;
}

int run_verify(const GlobalOpts& g, const std::string& suite, bool quick,
               const std::string& out_path) {
    VerifySizes sizes = quick ? quick_verify_sizes() : VerifySizes{};
    sizes.seed = g.seed;
    sizes.threads = g.threads;
    auto rep = verify_suite(suite, sizes);
    std::string payload = verify_report_to_json(rep);
    if (!out_path.empty()) write_artifact(g, out_path, payload);
    std::cout << payload << '\n';
    return rep.all_pass() ? kExitOk : kExitVerifyFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trunclab: extremal truncated sums of multiplicative functions"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    GlobalOpts g;
    app.add_option("--threads", g.threads, "worker threads (results are thread-count independent)")
        ->envname("TRUNCLAB_THREADS")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for randomized searches")->envname("TRUNCLAB_SEED");
    app.add_option("--budget-mem", g.budget_mem, "memory budget in bytes")
        ->envname("TRUNCLAB_BUDGET_MEM")
        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "directory for artifact files")
        ->envname("TRUNCLAB_OUT_DIR");

    // scan
    auto* scan = app.add_subcommand("scan", "Liouville partial-sum scans");
    std::string scan_kind = "polya", resume_path, checkpoint_path, csv_path;
    int64_t bound = 1'000'000, checkpoint_every = 24, sample_every = 1'000'000;
    scan->add_option("--kind", scan_kind, "polya or turan")->required();
    scan->add_option("--bound", bound, "scan up to this x")->required();
    scan->add_option("--resume", resume_path, "checkpoint JSON to resume from");
    scan->add_option("--checkpoint", checkpoint_path, "checkpoint JSON to write");
    scan->add_option("--checkpoint-every", checkpoint_every, "segments between checkpoint flushes");
    scan->add_option("--sample-every", sample_every, "row cadence for the CSV report");
    scan->add_option("--csv", csv_path, "CSV report path");

    // delta
    auto* delta = app.add_subcommand("delta", "minimize the truncated sum over a class");
    int64_t delta_x = 10;
    std::string delta_class = "f1", delta_method = "brute", delta_out;
    int starts = 8;
    int64_t node_budget = 200'000'000;
    bool with_vertex = false;
    delta->add_option("--x", delta_x)->required();
    delta->add_option("--class", delta_class, "f, f0 or f1");
    delta->add_option("--method", delta_method, "brute, bnb or descent");
    delta->add_option("--starts", starts, "random multistarts for descent");
    delta->add_option("--node-budget", node_budget);
    delta->add_option("--out", delta_out, "write the result JSON here");
    delta->add_flag("--vertex-report", with_vertex, "compare descent against bnb");

    // round
    auto* round = app.add_subcommand("round", "round an assignment into the +-1 class");
    int64_t round_x = 10;
    std::string round_input, round_trace;
    round->add_option("--x", round_x)->required();
    round->add_option("--input", round_input, "assignment JSON")->required();
    round->add_option("--trace", round_trace, "write the step trace here");

    // construct
    auto* construct = app.add_subcommand("construct", "build the explicit functions");
    std::string construct_kind, construct_mode = "exact", construct_out;
    int64_t cx = 100, cN = 2;
    construct->add_option("--kind", construct_kind, "window or extremal")->required();
    construct->add_option("--x", cx)->required();
    construct->add_option("--N", cN, "window parameter");
    construct->add_option("--mode", construct_mode, "exact or float");
    construct->add_option("--out", construct_out, "write the constructed function here");

    // realize
    auto* realize = app.add_subcommand("realize", "find a quadratic character matching a pattern");
    std::string pattern_path, realize_out;
    int64_t realize_x = 10, max_candidates = 5'000'000;
    realize->add_option("--pattern", pattern_path, "assignment JSON (class f1)")->required();
    realize->add_option("--x", realize_x)->required();
    realize->add_option("--max-candidates", max_candidates);
    realize->add_option("--out", realize_out, "write the witness here");

    // constants
    app.add_subcommand("constants", "print the quadrature constants with provenance notes");

    // rho
    auto* rho = app.add_subcommand("rho", "evaluate the smooth-density function");
    double rho_u = 2.0, rho_precision = 1e-12;
    rho->add_option("--u", rho_u)->required();
    rho->add_option("--precision", rho_precision);

    // verify
    auto* verify = app.add_subcommand("verify", "cross-module invariant suites");
    std::string suite = "all", verify_out;
    bool quick = false;
    verify->add_option("--suite", suite, "identities, oracles, bounds or all");
    verify->add_flag("--quick", quick, "reduced corpus");
    verify->add_option("--out", verify_out, "write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (scan->parsed())
            return run_scan(g, scan_kind, bound, resume_path, checkpoint_path, checkpoint_every,
                            sample_every, csv_path);
        if (delta->parsed())
            return run_delta(g, delta_x, delta_class, delta_method, starts, node_budget, delta_out,
                             with_vertex);
        if (round->parsed()) return run_round(g, round_x, round_input, round_trace);
        if (construct->parsed())
            return run_construct(g, construct_kind, cx, cN, construct_mode, construct_out);
        if (realize->parsed())
            return run_realize(g, pattern_path, realize_x, max_candidates, realize_out);
        if (app.got_subcommand("constants")) return run_constants();
        if (rho->parsed()) return run_rho(rho_u, rho_precision);
        if (verify->parsed()) return run_verify(g, suite, quick, verify_out);
    } catch (const BudgetError& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return kExitBudget;
    } catch (const PrecisionError& e) {
        std::cerr << "precision unachievable: " << e.what() << '\n';
        return kExitBudget;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}
