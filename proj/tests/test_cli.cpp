#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "slasf");
    std::ostringstream out, err;
    const int code = slasf::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("slasf_cli_test_" + std::to_string(counter()++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path path_;
};

}  // namespace

TEST_CASE("cli design, verify, simulate round trip") {
    TempDir dir;
    const std::string sys = dir / "sys.json", des = dir / "des.json";
    REQUIRE(run({"random", "--n", "6", "--m", "4,5", "--seed", "3", "-o", sys}).code == 0);
    const std::string sys_bytes = slurp(sys);

    Result r = run({"precheck", sys, "-o", dir / "pre.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("q1 = 0") != std::string::npos);
    const auto pre = nlohmann::json::parse(slurp(dir / "pre.json"));
    CHECK(pre["rho"] == nlohmann::json({2, 4}));
    CHECK(pre["verdict"] == true);

    r = run({"design", sys, "-o", des});
    CHECK(r.code == 0);
    const auto d = nlohmann::json::parse(slurp(des));
    CHECK(d["status"] == "ok");
    CHECK(d["trace"].size() == 6);
    CHECK(d["gains"].size() == 2);

    r = run({"verify", sys, des, "-o", dir / "ver.json"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "ver.json"))["pass"] == true);

    r = run({"simulate", sys, des, "--steps", "50", "--seed", "4", "-o", dir / "traj.json"});
    CHECK(r.code == 0);
    const auto traj = nlohmann::json::parse(slurp(dir / "traj.json"));
    CHECK(traj["states"].size() == 51);
    CHECK(traj["mode"] == "uniform-random");

    r = run({"simulate", sys, des, "--mode", "custom", "--sequence", "1,2,2,1", "--format", "csv",
             "-o", dir / "traj.csv"});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "traj.csv").rfind("k,i_k,x_1,x_2,x_3,x_4,x_5,x_6,V\n0,1,", 0) == 0);

    r = run({"simulate", sys, des, "--mode", "fixed", "--subsystem", "2", "--x0", "1,0,0,0,0,0",
             "--steps", "3", "-o", dir / "fixed.json"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "fixed.json"))["switching"] == nlohmann::json({2, 2, 2}));

    CHECK(slurp(sys) == sys_bytes);
}

TEST_CASE("cli exit codes") {
    TempDir dir;
    const std::string neg = dir / "neg.json";
    REQUIRE(run({"random", "--n", "3", "--m", "1,1", "--seed", "1", "-o", neg}).code == 0);

    CHECK(run({"precheck", neg}).code == 3);

    Result r = run({"design", neg, "-o", dir / "negd.json"});
    CHECK(r.code == 2);
    CHECK(r.err.find("kernel empty at iteration 1 after 25 probes") != std::string::npos);
    const auto partial = nlohmann::json::parse(slurp(dir / "negd.json"));
    CHECK(partial["status"] == "failed");
    CHECK(partial["ell"] == 1);
    CHECK(partial["trace"].size() == 1);

    CHECK(run({"design", dir / "missing.json", "-o", dir / "x.json"}).code == 1);
    CHECK(run({"design", neg, "-o", neg}).code == 1);
    CHECK(run({"design", neg, "-o", dir / "x.json", "--lambda", "1.2"}).code == 1);
    CHECK(run({"design", neg, "-o", dir / "x.json", "--lambda", "abc"}).code == 1);
    CHECK(run({"design", neg, "-o", dir / "x.json", "--probe-budget", "0"}).code == 1);
    CHECK(run({"design", neg, "-o", dir / "x.json", "--tol-rank", "-1"}).code == 1);
    CHECK(run({"nonsense"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"--help"}).code == 0);

    std::ofstream(dir / "garbage.json") << "{ not json";
    CHECK(run({"precheck", dir / "garbage.json"}).code == 1);

    // Full-input system: q1 = n.
    std::ofstream(dir / "full.json") << R"({"n": 2, "subsystems": [{"A": [[3,1],[0,2]], "B": [[1,0],[0,1]]}]})";
    r = run({"precheck", dir / "full.json"});
    CHECK(r.code == 0);
    CHECK(r.out.find("q1 = 2") != std::string::npos);
}

TEST_CASE("cli verify rejects a corrupted design") {
    TempDir dir;
    const std::string sys = dir / "sys.json", des = dir / "des.json";
    std::ofstream(sys) << R"({"n": 1, "subsystems": [{"A": [[2]], "B": [[1]]}, {"A": [[-3]], "B": [[1]]}]})";
    REQUIRE(run({"design", sys, "-o", des}).code == 0);
    auto d = nlohmann::json::parse(slurp(des));
    d["gains"][0][0][0] = 0.0;
    std::ofstream(dir / "bad.json") << d.dump();
    const Result r = run({"verify", sys, dir / "bad.json"});
    CHECK(r.code == 4);
    CHECK(r.out.find("subsystem 1: spectral radius 2 >= 1") != std::string::npos);
}

TEST_CASE("cli outputs are byte-identical across reruns") {
    TempDir dir;
    const std::string sys = dir / "sys.json";
    REQUIRE(run({"random", "--n", "5", "--m", "3,4", "--seed", "8", "-o", sys}).code == 0);
    REQUIRE(run({"random", "--n", "5", "--m", "3,4", "--seed", "8", "-o", dir / "sys2.json"}).code == 0);
    CHECK(slurp(sys) == slurp(dir / "sys2.json"));

    for (int k : {1, 2}) {
        const std::string s = std::to_string(k);
        CHECK(run({"design", sys, "-o", dir / ("d" + s + ".json"), "--diagnostic-subspaces"}).code == 0);
        CHECK(run({"precheck", sys, "-o", dir / ("p" + s + ".json")}).code == 3);
        CHECK(run({"verify", sys, dir / "d1.json", "-o", dir / ("v" + s + ".json")}).code == 0);
        CHECK(run({"simulate", sys, dir / "d1.json", "--seed", "2", "-o", dir / ("s" + s + ".json")}).code == 0);
        CHECK(run({"montecarlo", "--n", "4", "--m", "3,3", "--trials", "10", "--seed", "1",
                   "--threads", s, "-o", dir / ("m" + s + ".json"), "--rows", dir / ("r" + s + ".csv")})
                  .code == 0);
    }
    for (const char* f : {"d", "p", "v", "s", "m"}) {
        CHECK(slurp(dir / (std::string(f) + "1.json")) == slurp(dir / (std::string(f) + "2.json")));
    }
    CHECK(slurp(dir / "r1.csv") == slurp(dir / "r2.csv"));
}

TEST_CASE("cli montecarlo spec file and overrides") {
    TempDir dir;
    std::ofstream(dir / "spec.json") << R"({"n": 2, "m": [2, 2], "trials": 5, "seed": 9, "lambda": 0.25})";
    Result r = run({"montecarlo", "--spec", dir / "spec.json", "-o", dir / "a.json"});
    CHECK(r.code == 0);
    auto a = nlohmann::json::parse(slurp(dir / "a.json"));
    CHECK(a["spec"]["n"] == 2);
    CHECK(a["counts"]["trials"] == 5);

    r = run({"montecarlo", "--spec", dir / "spec.json", "--trials", "3", "-o", dir / "b.json"});
    CHECK(nlohmann::json::parse(slurp(dir / "b.json"))["counts"]["trials"] == 3);

    r = run({"montecarlo", "--spec", dir / "spec.json", "--format", "csv", "-o", dir / "rows.csv"});
    CHECK(r.code == 0);
    CHECK(slurp(dir / "rows.csv").rfind("trial,seed,valid,", 0) == 0);

    CHECK(run({"montecarlo", "--spec", dir / "spec.json", "-o", dir / "spec.json"}).code == 1);
    CHECK(run({"montecarlo", "--n", "3", "--m", "4"}).code == 1);
}
