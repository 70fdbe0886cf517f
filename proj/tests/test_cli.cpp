#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "lmvsc/io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using lmvsc::testing::temp_dir;
using lmvsc::testing::write_text;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = lmvsc::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

// Small synthetic fixture shared by the fit and grid tests.
fs::path fixture(const fs::path& dir) {
    const Run r = run({"synth", "--n", "240", "--k", "3", "--v", "2", "--dims", "10,7",
                       "--subspace-dim", "2", "--noise-sigma", "0.01", "--seed", "11", "--out",
                       (dir / "data").string()});
    REQUIRE(r.code == 0);
    return dir / "data" / "manifest.txt";
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("fit writes JSON and labels deterministically") {
    const fs::path dir = temp_dir("cli_fit");
    const fs::path manifest = fixture(dir);
    const std::vector<std::string> base{"fit", "--manifest", manifest.string(), "--k", "3",
                                        "--m", "15", "--seed", "3", "--out"};
    auto a = base, b = base;
    a.push_back((dir / "a").string());
    b.push_back((dir / "b").string());
    b.insert(b.end(), {"--threads", "2"});
    const Run ra = run(a), rb = run(b);
    REQUIRE(ra.code == 0);
    REQUIRE(rb.code == 0);
    CHECK(ra.out.find("Acc") != std::string::npos);
    CHECK(lmvsc::io::read_file(dir / "a" / "labels.txt") ==
          lmvsc::io::read_file(dir / "b" / "labels.txt"));
    const auto j = nlohmann::json::parse(lmvsc::io::read_file(dir / "a" / "result.json"));
    CHECK(j["labels"].size() == 240);
    CHECK(j["metrics"]["acc"].get<double>() >= 0.95);
    CHECK(j["config"]["seed"] == 3);
}

TEST_CASE("fit failures exit with code 1") {
    const fs::path dir = temp_dir("cli_fit_errors");
    const fs::path manifest = fixture(dir);
    const std::string view = (dir / "data" / "view_0.csv").string();

    Run r = run({"fit", "--views", view, "--k", "3", "--seed", "1", "--out",
                 (dir / "x").string(), "--require-metrics"});
    CHECK(r.code == 1);
    CHECK(r.err.find("labels required") != std::string::npos);

    r = run({"fit", "--manifest", manifest.string(), "--k", "3", "--m", "2", "--seed", "1",
             "--out", (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("[") != std::string::npos);

    r = run({"fit", "--views", (dir / "missing.csv").string(), "--k", "3", "--seed", "1",
             "--out", (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("[load]") != std::string::npos);

    r = run({"fit", "--manifest", manifest.string(), "--k", "3", "--out", (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("--seed") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "x"));
}

TEST_CASE("grid writes the sensitivity table and logs skipped cells") {
    const fs::path dir = temp_dir("cli_grid");
    const fs::path manifest = fixture(dir);
    const Run r = run({"grid", "--manifest", manifest.string(), "--k", "3", "--grid-m", "2,15",
                       "--grid-alpha", "0.01,1", "--seed", "3", "--out", (dir / "g").string()});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("skipped m=2") != std::string::npos);
    const std::string csv = lmvsc::io::read_file(dir / "g" / "grid.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    const Run one = run({"grid", "--manifest", manifest.string(), "--k", "3", "--grid-m", "15",
                         "--grid-alpha", "0.01", "--seed", "3", "--out", (dir / "one").string()});
    const Run fit = run({"fit", "--manifest", manifest.string(), "--k", "3", "--m", "15",
                         "--alpha", "0.01", "--seed", "3", "--out", (dir / "fit").string()});
    REQUIRE(one.code == 0);
    REQUIRE(fit.code == 0);
    CHECK(lmvsc::io::read_file(dir / "one" / "labels.txt") ==
          lmvsc::io::read_file(dir / "fit" / "labels.txt"));
}

TEST_CASE("synth is seed-deterministic and accepts the noise levels") {
    const fs::path dir = temp_dir("cli_synth");
    for (const char* name : {"a", "b"}) {
        const Run r = run({"synth", "--n", "50", "--k", "2", "--dims", "6", "--seed", "9",
                           "--out", (dir / name).string()});
        REQUIRE(r.code == 0);
    }
    CHECK(lmvsc::io::read_file(dir / "a" / "view_0.csv") ==
          lmvsc::io::read_file(dir / "b" / "view_0.csv"));

    std::string base_csv;
    for (int i = 0; i < 20; ++i) base_csv += "0.1,0.5,0.9\n";
    write_text(dir / "base.csv", base_csv);
    const std::vector<std::vector<std::string>> levels{
        {"gaussian:0.01", "salt_pepper:0.05", "speckle:0.05"},
        {"gaussian:0.03", "salt_pepper:0.1", "speckle:0.1"},
        {"gaussian:0.05", "salt_pepper:0.2", "speckle:0.15"}};
    for (const auto& set : levels) {
        std::vector<std::string> args{"synth", "--base", (dir / "base.csv").string(), "--seed",
                                      "4", "--out", (dir / "noisy").string()};
        for (const auto& s : set) args.insert(args.end(), {"--noise", s});
        const Run r = run(args);
        CHECK(r.code == 0);
        CHECK(fs::exists(dir / "noisy" / "view_2.csv"));
    }

    const Run bad = run({"synth", "--base", (dir / "base.csv").string(), "--noise", "blur:0.1",
                         "--seed", "4", "--out", (dir / "bad").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("blur") != std::string::npos);
}

TEST_CASE("eval on label files") {
    const fs::path dir = temp_dir("cli_eval");
    write_text(dir / "pred.txt", "0\n0\n1\n1\n2\n2\n");
    write_text(dir / "truth.txt", "0\n0\n0\n1\n1\n1\n");
    write_text(dir / "short.txt", "0\n1\n");

    Run r = run({"eval", "--pred", (dir / "pred.txt").string(), "--truth",
                 (dir / "truth.txt").string(), "--out", (dir / "m.json").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0.6667") != std::string::npos);
    CHECK(r.out.find("0.8333") != std::string::npos);
    const auto j = nlohmann::json::parse(lmvsc::io::read_file(dir / "m.json"));
    CHECK(j["acc"].get<double>() == doctest::Approx(4.0 / 6.0));

    r = run({"eval", "--pred", (dir / "truth.txt").string(), "--truth",
             (dir / "truth.txt").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("1.0000   1.0000   1.0000") != std::string::npos);

    r = run({"eval", "--pred", (dir / "short.txt").string(), "--truth",
             (dir / "truth.txt").string()});
    CHECK(r.code == 1);
}

TEST_CASE("bench reports the slope or its absence") {
    const fs::path dir = temp_dir("cli_bench");
    Run r = run({"bench", "--ladder", "300,600", "--m", "8", "--k", "3", "--d", "6", "--v", "2",
                 "--subspace-dim", "2", "--reps", "1", "--seed", "1", "--out",
                 (dir / "b.csv").string()});
    REQUIRE(r.code == 0);
    const std::string csv = lmvsc::io::read_file(dir / "b.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(r.out.find("not applicable") == std::string::npos);

    r = run({"bench", "--ladder", "300", "--m", "8", "--k", "3", "--d", "6", "--v", "2",
             "--subspace-dim", "2", "--reps", "1", "--seed", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("not applicable") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 1);
    CHECK(run({"cluster"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

}
