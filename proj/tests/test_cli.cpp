// End-to-end checks of the command-line binary. CTest points
// EXTREMIS_CLI_BIN at the built executable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string cli_bin() {
    const char* env = std::getenv("EXTREMIS_CLI_BIN");
    REQUIRE(env != nullptr);
    return env;
}

int run(const std::string& args, const std::string& out_file = "/dev/null") {
    std::string cmd = cli_bin() + " " + args + " >" + out_file + " 2>cli_stderr.txt";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content) : path(name) {
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string comonotone_csv(int n) {
    std::string csv = "a,b,c\n";
    for (int i = 1; i <= n; ++i) {
        csv += std::to_string(i) + "," + std::to_string(2 * i) + "," + std::to_string(3 * i) + "\n";
    }
    return csv;
}

}  // namespace

TEST_CASE("fit writes a model and a one-subset summary on comonotone data") {
    TempFile train("cli_train.csv", comonotone_csv(100));
    CHECK(run("fit --train cli_train.csv --out cli_model.json --eps 0.2", "cli_fit.txt") == 0);
    std::string summary = slurp("cli_fit.txt");
    CHECK(summary.find("charged subsets: 1") != std::string::npos);
    CHECK(summary.find("3:1") != std::string::npos);  // all mass at dimension 3
    std::string model = slurp("cli_model.json");
    CHECK(model.find("\"version\": 1") != std::string::npos);
    std::remove("cli_fit.txt");
}

TEST_CASE("fit rejects k larger than n with exit 3") {
    TempFile train("cli_train2.csv", comonotone_csv(50));
    CHECK(run("fit --train cli_train2.csv --out cli_m2.json --k 51") == 3);
    std::remove("cli_m2.json");
}

TEST_CASE("missing input file exits 2") {
    CHECK(run("fit --train nope_does_not_exist.csv --out cli_m3.json") == 2);
}

TEST_CASE("score output is deterministic and scale invariant") {
    TempFile train("cli_train3.csv", comonotone_csv(100));
    REQUIRE(run("fit --train cli_train3.csv --out cli_model3.json --eps 0.2") == 0);

    REQUIRE(run("score --model cli_model3.json --in cli_train3.csv --out cli_s1.csv") == 0);
    REQUIRE(run("score --model cli_model3.json --in cli_train3.csv --out cli_s2.csv") == 0);
    std::string s1 = slurp("cli_s1.csv");
    CHECK(s1 == slurp("cli_s2.csv"));
    CHECK(s1.rfind("row_index,score,radius,subset\n", 0) == 0);
    CHECK(s1.find("1|2|3") != std::string::npos);

    // cubing every value preserves ranks, so the score file is identical
    std::string cubed = "a,b,c\n";
    for (int i = 1; i <= 100; ++i) {
        auto c = [](long long v) { return std::to_string(v * v * v); };
        cubed += c(i) + "," + c(2 * i) + "," + c(3 * i) + "\n";
    }
    TempFile cubed_file("cli_train3_cubed.csv", cubed);
    REQUIRE(run("fit --train cli_train3_cubed.csv --out cli_model3c.json --eps 0.2") == 0);
    REQUIRE(run("score --model cli_model3c.json --in cli_train3_cubed.csv --out cli_s3.csv") == 0);
    CHECK(slurp("cli_s3.csv") == s1);

    for (const char* f : {"cli_model3.json", "cli_model3c.json", "cli_s1.csv", "cli_s2.csv",
                          "cli_s3.csv"})
        std::remove(f);
}

TEST_CASE("score with mismatched dimension exits 2") {
    TempFile train("cli_train4.csv", comonotone_csv(60));
    REQUIRE(run("fit --train cli_train4.csv --out cli_model4.json --eps 0.2") == 0);
    TempFile narrow("cli_narrow.csv", "a,b\n1,2\n3,4\n");
    CHECK(run("score --model cli_model4.json --in cli_narrow.csv --out cli_s4.csv") == 2);
    std::remove("cli_model4.json");
}

TEST_CASE("simulate is reproducible byte for byte") {
    REQUIRE(run("simulate --d 4 --K 2 --n 200 --seed 9 --out cli_sim1.csv "
                "--spec-out cli_spec1.json") == 0);
    REQUIRE(run("simulate --d 4 --K 2 --n 200 --seed 9 --out cli_sim2.csv "
                "--spec-out cli_spec2.json") == 0);
    CHECK(slurp("cli_sim1.csv") == slurp("cli_sim2.csv"));
    CHECK(slurp("cli_spec1.json") == slurp("cli_spec2.json"));
    CHECK(slurp("cli_spec1.json").find("\"subsets\"") != std::string::npos);

    REQUIRE(run("simulate --d 4 --K 2 --n 200 --seed 10 --out cli_sim3.csv") == 0);
    CHECK(slurp("cli_sim1.csv") != slurp("cli_sim3.csv"));
    for (const char* f : {"cli_sim1.csv", "cli_sim2.csv", "cli_sim3.csv", "cli_spec1.json",
                          "cli_spec2.json"})
        std::remove(f);
}

TEST_CASE("simulated data round-trips through fit") {
    REQUIRE(run("simulate --d 5 --K 2 --n 2000 --seed 3 --out cli_sim_fit.csv") == 0);
    CHECK(run("fit --train cli_sim_fit.csv --out cli_sim_model.json --eps 0.1 "
              "--refine-threshold", "cli_sim_fit.txt") == 0);
    std::string summary = slurp("cli_sim_fit.txt");
    CHECK(summary.find("n=2000 d=5 k=44") != std::string::npos);
    for (const char* f : {"cli_sim_fit.csv", "cli_sim_model.json", "cli_sim_fit.txt"})
        std::remove(f);
}

TEST_CASE("recover-support emits the report fields") {
    REQUIRE(run("recover-support --d 6 --K 2 --n 2000 --runs 3 --seed 5 --out cli_rec.json",
                "cli_rec.txt") == 0);
    std::string report = slurp("cli_rec.json");
    for (const char* field : {"\"K\": 2", "\"runs\": 3", "\"errors\"", "\"mean_errors\"",
                              "\"membership_mode\": \"self-scaled-cone\"",
                              "\"threshold_refinement\": true"})
        CHECK(report.find(field) != std::string::npos);
    std::remove("cli_rec.json");
    std::remove("cli_rec.txt");
}

TEST_CASE("bad epsilon exits 3") {
    CHECK(run("recover-support --d 4 --K 2 --n 500 --runs 1 --eps 1.5") == 3);
}

TEST_CASE("recover-support at defaults nails the easy regime") {
    REQUIRE(run("recover-support --d 10 --K 3 --n 50000 --runs 20 --seed 1 --out cli_rec3.json") ==
            0);
    std::string report = slurp("cli_rec3.json");
    auto pos = report.find("\"mean_errors\": ");
    REQUIRE(pos != std::string::npos);
    double mean = std::stod(report.substr(pos + 15));
    CHECK(mean <= 0.5);
    std::remove("cli_rec3.json");
}

TEST_CASE("fit recovers a small face count on simulated data") {
    REQUIRE(run("simulate --d 10 --K 3 --n 50000 --seed 4 --out cli_sim_k3.csv") == 0);
    REQUIRE(run("fit --train cli_sim_k3.csv --out cli_sim_k3.json --eps 0.1 --refine-threshold",
                "cli_sim_k3.txt") == 0);
    std::string summary = slurp("cli_sim_k3.txt");
    auto pos = summary.find("charged subsets: ");
    REQUIRE(pos != std::string::npos);
    int count = std::stoi(summary.substr(pos + 17));
    CHECK(count >= 2);
    CHECK(count <= 6);
    for (const char* f : {"cli_sim_k3.csv", "cli_sim_k3.json", "cli_sim_k3.txt"}) std::remove(f);
}

TEST_CASE("eval on a synthetic shuttle fixture reports the AUC fields") {
    std::string raw;
    {
        // class-1 comonotone cloud plus a few class-2 anomalies along one axis
        for (int i = 1; i <= 300; ++i) {
            std::string row;
            for (int j = 0; j < 9; ++j) row += std::to_string(i * (j + 1)) + " ";
            raw += row + "1\n";
        }
        for (int i = 0; i < 12; ++i) {
            std::string row = std::to_string(100000 + i) + " ";
            for (int j = 1; j < 9; ++j) row += "-5 ";
            raw += row + "2\n";
        }
    }
    TempFile f("cli_shuttle.trn", raw);
    REQUIRE(run("eval --recipe shuttle --raw cli_shuttle.trn --runs 3 --seed 2 --eps 0.2 "
                "--out cli_eval.json", "cli_eval.txt") == 0);
    std::string report = slurp("cli_eval.json");
    for (const char* field : {"\"recipe\": \"shuttle\"", "\"roc_auc\"", "\"pr_auc\"",
                              "\"n_extreme\"", "\"per_run\""})
        CHECK(report.find(field) != std::string::npos);
    std::remove("cli_eval.json");
    std::remove("cli_eval.txt");
}

TEST_CASE("unknown recipe exits 3") {
    TempFile f("cli_any.csv", "1 2 3\n");
    CHECK(run("eval --recipe nope --raw cli_any.csv") == 3);
}

TEST_CASE("fit warns on stderr when the tolerance is degenerate") {
    TempFile train("cli_train_warn.csv", comonotone_csv(100));
    // eps <= k/n: 0.005 <= 20/100
    REQUIRE(run("fit --train cli_train_warn.csv --out cli_warn.json --k 20 --eps 0.005") == 0);
    std::string err = slurp("cli_stderr.txt");
    CHECK(err.find("warning") != std::string::npos);
    std::remove("cli_warn.json");
}

TEST_CASE("thread cap does not change results") {
    REQUIRE(run("simulate --d 5 --K 3 --n 500 --seed 6 --out cli_thr_a.csv") == 0);
    std::string cmd = "EXTREMIS_THREADS=1 " + cli_bin() +
                      " simulate --d 5 --K 3 --n 500 --seed 6 --out cli_thr_b.csv >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp("cli_thr_a.csv") == slurp("cli_thr_b.csv"));
    std::remove("cli_thr_a.csv");
    std::remove("cli_thr_b.csv");
}
