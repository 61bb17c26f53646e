#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "wheelplan/cli.hpp"
#include "wheelplan/costmap.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/planners.hpp"

using namespace wheelplan;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(call({}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({"plan", "--map", "x"}).code == 2);  // missing --goal and --out
    CHECK(call({"navigate", "--noise", "1.5"}).code == 2);
}

TEST_CASE("help exits with 0") {
    const Result r = call({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("gen-dataset") != std::string::npos);
}

TEST_CASE("missing input is a domain failure") {
    testsupport::TempDir dir("cli_missing");
    const Result r = call({"plan", "--map", (dir / "nope.costmap").string(), "--goal", "1,0,0", "--out",
                           (dir / "p.csv").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("IoError") != std::string::npos);
}

TEST_CASE("plan writes a 25-node path with provenance") {
    testsupport::TempDir dir("cli_plan");
    const Costmap open(100, 100, 0.1, Pose2D{-1.0, -5.0, 0.0}, CellState::Free);
    io::write_file(dir / "m.costmap", format_costmap(open));
    const Result r = call({"plan", "--map", (dir / "m.costmap").string(), "--goal", "5,1,0", "--algo", "jps", "--out",
                           (dir / "p.csv").string(), "--seed", "3"});
    REQUIRE(r.code == 0);
    const std::string csv = io::read_file(dir / "p.csv");
    CHECK(csv.find(io::kToolVersion) != std::string::npos);
    const PlannedPath p = parse_path_csv(csv);
    CHECK(p.nodes.size() == 25);
    CHECK(distance(p.goal().position(), Vec2{5.0, 1.0}) <= 0.1);
}

TEST_CASE("dataset generation is reproducible across runs and thread counts") {
    testsupport::TempDir a("cli_ds_a"), b("cli_ds_b");
    REQUIRE(call({"gen-dataset", "--count", "2", "--goals", "4", "--seed", "5", "--threads", "3", "--out", a.path().string()})
                .code == 0);
    REQUIRE(call({"gen-dataset", "--count", "2", "--goals", "4", "--seed", "5", "--threads", "1", "--out", b.path().string()})
                .code == 0);
    CHECK(io::read_file(a / "manifest.jsonl") == io::read_file(b / "manifest.jsonl"));

    const Result ev = call({"evaluate", "--manifest", (a / "manifest.jsonl").string(), "--split", "all", "--algos", "astar"});
    CHECK(ev.code == 0);
    CHECK(ev.out.find("SR_percent") != std::string::npos);
}

TEST_CASE("navigate prints one report per seed and level") {
    const Result r = call({"navigate", "--seeds", "0..1", "--noise", "0,0.02"});
    REQUIRE(r.code == 0);
    int reports = 0;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("{\"outcome\"", 0) == 0) ++reports;
    CHECK(reports == 4);
    CHECK(r.out.find("trend_slope=") != std::string::npos);
}
