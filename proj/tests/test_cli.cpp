#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trunclab/multfunc.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run_cli(const std::string& args) {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "trunclab_cli_test";
        fs::create_directories(d);
        return d;
    }();
    const fs::path out = dir / "stdout.txt";
    const std::string cmd =
        std::string(TRUNCLAB_BIN) + " " + args + " > " + out.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    return r;
}

fs::path scratch_dir() {
    auto d = fs::temp_directory_path() / "trunclab_cli_scratch";
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("constants subcommand prints the quadrature values") {
    auto r = run_cli("constants");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["inner"].get<double>() - (-0.656999)) < 1e-5);
    CHECK(std::abs(j["full"].get<double>() - (-0.4553)) < 5e-4);
}

TEST_CASE("delta brute from the command line") {
    auto r = run_cli("delta --x 10 --class f1 --method brute");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["value"] == "823/2520");
    CHECK(j["certificate"] == "global");
    // validation: descent needs class f
    CHECK(run_cli("delta --x 10 --class f1 --method descent").exit_code == 2);
    // budget: brute beyond pi(x) <= 28
    CHECK(run_cli("delta --x 200 --class f1 --method brute").exit_code == 3);
}

TEST_CASE("rho subcommand") {
    auto r = run_cli("rho --u 2");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(std::stod(j["rho"].get<std::string>()) - 0.30685281944005469) < 1e-12);
    CHECK(run_cli("rho --u 40").exit_code == 3); // beyond the grid
}

TEST_CASE("scan with checkpoint and resume") {
    auto dir = scratch_dir();
    auto ck = dir / "polya.ckpt.json";
    auto csv = dir / "polya.csv";
    auto r1 = run_cli("scan --kind polya --bound 300000 --checkpoint " + ck.string() +
                      " --sample-every 100000 --csv " + csv.string());
    REQUIRE(r1.exit_code == 0);
    auto j1 = nlohmann::json::parse(r1.out);
    CHECK(j1["first_positive_L_x"] == 0);
    CHECK(slurp(csv).rfind("x,L,T,T_err\n", 0) == 0);
    const std::string full_ckpt = slurp(ck);

    // run the first half, then resume from its checkpoint
    auto ck_half = dir / "polya_half.ckpt.json";
    REQUIRE(run_cli("scan --kind polya --bound 150000 --checkpoint " + ck_half.string())
                .exit_code == 0);
    auto r2 = run_cli("scan --kind polya --bound 300000 --resume " + ck_half.string() +
                      " --checkpoint " + ck.string());
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(ck) == full_ckpt); // bit-identical final checkpoint

    // kind mismatch is a validation failure
    CHECK(run_cli("scan --kind turan --bound 400000 --resume " + ck.string()).exit_code == 2);
}

TEST_CASE("round and realize round trip through files") {
    auto dir = scratch_dir();
    auto input = dir / "ones.json";
    {
        std::ofstream out(input);
        out << trunclab::assignment_to_json(
            trunclab::constant_assignment(4, trunclab::FuncClass::F1, trunclab::Rat(1)));
    }
    auto trace = dir / "trace.json";
    auto r = run_cli("round --x 4 --input " + input.string() + " --trace " + trace.string());
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["final_sum"] == "5/12");
    auto tj = nlohmann::json::parse(slurp(trace));
    CHECK(tj["steps"].size() == 2);

    auto pat = dir / "allminus.json";
    {
        std::ofstream out(pat);
        out << trunclab::assignment_to_json(trunclab::lambda_pattern(10));
    }
    auto rw = run_cli("realize --pattern " + pat.string() + " --x 10");
    REQUIRE(rw.exit_code == 0);
    CHECK(nlohmann::json::parse(rw.out)["q"] == 43);
    // tiny candidate budget exhausts
    CHECK(run_cli("realize --pattern " + pat.string() + " --x 10 --max-candidates 2")
              .exit_code == 3);
}

TEST_CASE("construct subcommands") {
    auto r = run_cli("construct --kind window --x 25 --N 2");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["exact_equal"] == true);
    CHECK(j["window_primes"][0] == 11);

    auto re = run_cli("construct --kind extremal --x 10");
    REQUIRE(re.exit_code == 0);
    CHECK(nlohmann::json::parse(re.out)["value"] == "-437/2520");

    CHECK(run_cli("construct --kind window --x 4 --N 2").exit_code == 2);
}

TEST_CASE("verify quick suites pass and bad input fails validation") {
    auto r = run_cli("verify --suite bounds --quick");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["all_pass"] == true);

    CHECK(run_cli("verify --suite nonsense").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code != 0);
}

TEST_CASE("relative artifact paths land in --out-dir") {
    auto dir = scratch_dir() / "outdir";
    fs::remove_all(dir);
    auto r = run_cli("scan --kind polya --bound 10000 --csv report.csv --out-dir " + dir.string());
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "report.csv"));
}

TEST_CASE("reproducibility: same config gives byte-identical output") {
    auto a = run_cli("delta --x 30 --class f --method descent --starts 3 --seed 7");
    auto b = run_cli("delta --x 30 --class f --method descent --starts 3 --seed 7");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);
    auto c = run_cli("--threads 4 scan --kind turan --bound 200000");
    auto d = run_cli("--threads 1 scan --kind turan --bound 200000");
    REQUIRE(c.exit_code == 0);
    CHECK(c.out == d.out);
}
