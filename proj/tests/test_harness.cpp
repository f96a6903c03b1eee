#include "ovfl/commands.hpp"
#include "ovfl/errors.hpp"
#include "ovfl/report_io.hpp"
#include "ovfl/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace ovfl;
using nlohmann::json;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("harness");

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ovfl_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

json last_line(const std::ostringstream& err) {
    std::string s = err.str();
    while (!s.empty() && s.back() == '\n') s.pop_back();
    return json::parse(s.substr(s.rfind('\n') == std::string::npos ? 0 : s.rfind('\n') + 1));
}

const char* kFig8Scenario = R"({
  "name": "three",
  "params": {"alpha": 1.0, "beta": 0.25, "vbar": 0.8, "n_vehicles": 3},
  "coordinate_system": "difference",
  "initial": [[1.5, 0.3], [0.8, -1.4]],
  "t_end": 20.0
})";

} // namespace

TEST_CASE("scenario parsing") {
    SUBCASE("defaults are filled in") {
        const auto s = parse_scenario(R"({"params": {"alpha": 2, "beta": 1, "vbar": 0.8}, "initial": [[0.5, -0.7]]})");
        CHECK(s.params.n_vehicles == 2);
        CHECK(s.coordinate_system == CoordinateSystem::Relative);
        CHECK(s.epsilon == 0.1);
        CHECK(s.dense_points == 16);
        CHECK(s.wants(OutputKind::Barrier));
        const auto j = to_json(s);
        CHECK(j.contains("integrator"));
        const auto again = scenario_from_json(j);
        CHECK(to_json(again) == j);
    }
    SUBCASE("malformed JSON reports a byte position") {
        try {
            parse_scenario("{\"params\": {\"alpha\": 2,, }}");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            REQUIRE(e.byte());
            CHECK(*e.byte() > 0);
            CHECK(*e.byte() <= 26);
        }
    }
    SUBCASE("unknown keys and wrong types") {
        CHECK_THROWS_AS(parse_scenario(R"({"params": {"alpha": 2}, "initial": [[1, 0]], "colour": 1})"), ParseError);
        CHECK_THROWS_AS(parse_scenario(R"({"params": {"alpha": "fast"}, "initial": [[1, 0]]})"), ParseError);
        CHECK_THROWS_AS(parse_scenario(R"({"params": {}, "initial": [[1, 0]], "outputs": ["plots"]})"), ParseError);
        CHECK_THROWS_AS(parse_scenario(R"({"params": {}, "initial": [1, 0]})"), ParseError);
    }
    SUBCASE("invariants") {
        auto s = parse_scenario(kFig8Scenario);
        CHECK_NOTHROW(validate_scenario(s));
        s.initial[1][0] = -0.1;
        try {
            validate_scenario(s);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("xi_2") != std::string::npos);
        }
        s = parse_scenario(kFig8Scenario);
        s.epsilon = 0.0;
        CHECK_THROWS_AS(validate_scenario(s), ValidationError);
        s = parse_scenario(kFig8Scenario);
        s.initial.pop_back();
        CHECK_THROWS_AS(validate_scenario(s), ValidationError);
    }
    SUBCASE("presets") {
        for (const auto& name : preset_names()) {
            const auto s = preset(name);
            REQUIRE(s);
            CHECK_NOTHROW(validate_scenario(*s));
        }
        CHECK_FALSE(preset("nope"));
        CHECK_THROWS_AS(load_scenario("no-such-preset-or-file"), ValidationError);
    }
}

TEST_CASE("simulate exit codes") {
    TempDir tmp("simulate");
    std::ostringstream err;

    SUBCASE("malformed JSON exits 2 with the position") {
        spit(tmp.path / "bad.json", "{\"params\": {\"alpha\": 2,, }}");
        const int code = cmd_simulate({(tmp.path / "bad.json").string(), tmp.path / "out", false}, err);
        CHECK(code == kExitParse);
        const auto j = last_line(err);
        CHECK(j["error"] == "parse_error");
        CHECK(j["exit_code"] == 2);
        CHECK(j.contains("position"));
        CHECK(fs::exists(tmp.path / "out" / "error.json"));
    }
    SUBCASE("unknown key exits 2") {
        spit(tmp.path / "bad.json", R"({"params": {}, "initial": [[1, 0]], "speed": 3})");
        CHECK(cmd_simulate({(tmp.path / "bad.json").string(), tmp.path / "out", false}, err) == kExitParse);
    }
    SUBCASE("negative gap exits 3 naming the invariant") {
        auto j = json::parse(kFig8Scenario);
        j["initial"][1][0] = -0.05;
        spit(tmp.path / "neg.json", j.dump());
        CHECK(cmd_simulate({(tmp.path / "neg.json").string(), tmp.path / "out", false}, err) == kExitValidation);
        const auto e = last_line(err);
        CHECK(e["error"] == "validation_error");
        CHECK(e["message"].get<std::string>().find("xi_2") != std::string::npos);
    }
    SUBCASE("integration failure exits 4") {
        auto j = json::parse(kFig8Scenario);
        j["integrator"] = {{"max_steps", 5}};
        spit(tmp.path / "short.json", j.dump());
        CHECK(cmd_simulate({(tmp.path / "short.json").string(), tmp.path / "out", false}, err) == kExitIntegration);
        const auto e = last_line(err);
        CHECK(e["error"] == "integration_error");
        CHECK(e.contains("time"));
    }
    SUBCASE("a successful run writes every artifact") {
        spit(tmp.path / "ok.json", kFig8Scenario);
        REQUIRE(cmd_simulate({(tmp.path / "ok.json").string(), tmp.path / "out", true}, err) == kExitOk);
        for (const char* f : {"trajectory.csv", "events.json", "monitors.json", "barrier.json", "energy.json",
                              "run.json"}) {
            CHECK_MESSAGE(fs::exists(tmp.path / "out" / f), f);
        }
        const auto run = json::parse(slurp(tmp.path / "out" / "run.json"));
        CHECK(run["monitors_passed"] == true);
        CHECK(run["collided"] == false);
        CHECK(run["version"] == std::string(version()));
        const auto monitors = json::parse(slurp(tmp.path / "out" / "monitors.json"));
        REQUIRE(monitors.is_array());
        for (const auto& m : monitors) {
            CHECK(m.contains("name"));
            CHECK(m.contains("passed"));
            CHECK(m.contains("worst_violation"));
            CHECK(m.contains("tolerance"));
        }
        const auto energy = json::parse(slurp(tmp.path / "out" / "energy.json"));
        CHECK(energy["budget"].contains("gronwall_rate"));
        CHECK(energy["convergence"].contains("entered_ball"));
    }
}

TEST_CASE("analyze reproduces the inline report") {
    TempDir tmp("analyze");
    std::ostringstream err;
    REQUIRE(cmd_simulate({"fig5", tmp.path / "run", false}, err) == kExitOk);
    spit(tmp.path / "fig5.json", to_json(*preset("fig5")).dump());

    SUBCASE("round trip is exact") {
        REQUIRE(cmd_analyze({tmp.path / "run" / "trajectory.csv", (tmp.path / "fig5.json").string(),
                             tmp.path / "again.json"},
                            err) == kExitOk);
        CHECK(slurp(tmp.path / "again.json") == slurp(tmp.path / "run" / "monitors.json"));
    }
    SUBCASE("a missing column exits 2 naming it") {
        std::istringstream in(slurp(tmp.path / "run" / "trajectory.csv"));
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';  // drop H1
        spit(tmp.path / "cut.csv", out.str());
        const int code =
            cmd_analyze({tmp.path / "cut.csv", (tmp.path / "fig5.json").string(), tmp.path / "cut.json"}, err);
        CHECK(code == kExitParse);
        const auto e = last_line(err);
        CHECK(e["column"] == "H1");
        CHECK(e["message"].get<std::string>().find("H1") != std::string::npos);
    }
    SUBCASE("an edited energy column fails the energy monitor") {
        auto table = read_csv_file(tmp.path / "run" / "trajectory.csv");
        table.rows[table.rows.size() / 2].H1 += 0.01;
        std::ostringstream csv;
        write_csv(csv, table);
        spit(tmp.path / "edited.csv", csv.str());
        REQUIRE(cmd_analyze({tmp.path / "edited.csv", (tmp.path / "fig5.json").string(), tmp.path / "edited.json"},
                            err) == kExitOk);
        const auto monitors = json::parse(slurp(tmp.path / "edited.json"));
        bool seen = false;
        for (const auto& m : monitors) {
            if (m["name"] == "energy_monotone") {
                seen = true;
                CHECK(m["passed"] == false);
            }
        }
        CHECK(seen);
    }
    SUBCASE("follower count mismatch is a schema error") {
        CHECK(cmd_analyze({tmp.path / "run" / "trajectory.csv", "fig8", tmp.path / "x.json"}, err) == kExitParse);
    }
}

TEST_CASE("csv reader") {
    SUBCASE("round trip") {
        const auto run = run_scenario(*preset("fig6-converge"));
        std::ostringstream out;
        write_csv(out, run.table);
        std::istringstream in(out.str());
        const auto back = read_csv(in);
        REQUIRE(back.rows.size() == run.table.rows.size());
        for (std::size_t i = 0; i < back.rows.size(); i += 7) {
            CHECK(back.rows[i].t == run.table.rows[i].t);
            CHECK(back.rows[i].X == run.table.rows[i].X);
            CHECK(back.rows[i].H1 == run.table.rows[i].H1);
        }
    }
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_csv(in);
    };
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(parse("t,X1,Y1,xi1,zeta1,H1\n"), ParseError);
    CHECK_THROWS_AS(parse("t,X1,Y1,xi1,zeta1,H1,extra\n0,1,0,1,0,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse("t,X1,Y1,xi1,zeta1,H1\n0,1,zero,1,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse("t,X1,Y1,xi1,zeta1,H1\n0,1,0,1,0\n"), ParseError);
    CHECK_THROWS_AS(parse("t,X1,Y1,xi1,zeta1,H1\n1,1,0,1,0,0\n1,1,0,1,0,0\n"), ParseError);
    CHECK(parse("t,X1,Y1,xi1,zeta1,H1\n0,1,0,1,0,0\n").followers == 1);
}

TEST_CASE("sweep") {
    TempDir tmp("sweep");
    std::ostringstream err;

    SUBCASE("empty grid exits 3") {
        CHECK(cmd_sweep({"fig5", {}, {1.0}, 0, std::nullopt, tmp.path / "s"}, err) == kExitValidation);
        CHECK(last_line(err)["error"] == "validation_error");
    }
    SUBCASE("grid summary") {
        auto s = *preset("fig5");
        s.integrator.t_end = 40.0;
        spit(tmp.path / "base.json", to_json(s).dump());
        REQUIRE(cmd_sweep({(tmp.path / "base.json").string(), {1.0, 3.0}, {1.0, 2.0}, 0, std::nullopt, tmp.path / "s"},
                          err) == kExitOk);
        const auto summary = json::parse(slurp(tmp.path / "s" / "summary.json"));
        CHECK(summary["runs"] == 4);
        CHECK(summary["failures"] == 0);
        CHECK(summary["collision_events"] == 0);
        REQUIRE(summary["cells"].size() == 4);
        for (const auto& c : summary["cells"]) {
            CHECK(c["status"] == "ok");
            CHECK(fs::exists(tmp.path / "s" / c["dir"].get<std::string>() / "run.json"));
        }
    }
    SUBCASE("sampled cells are reproducible") {
        const auto base = *preset("fig8");
        SweepOptions opt{"", {1.0}, {0.5}, 3, 17, tmp.path / "a"};
        auto s = base;
        s.integrator.t_end = 20.0;
        const auto a = run_sweep(s, opt);
        opt.out = tmp.path / "b";
        const auto b = run_sweep(s, opt);
        CHECK(a["runs"] == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(a["cells"][i]["min_gap"] == b["cells"][i]["min_gap"]);
            CHECK(slurp(tmp.path / "a" / a["cells"][i]["dir"].get<std::string>() / "trajectory.csv") ==
                  slurp(tmp.path / "b" / b["cells"][i]["dir"].get<std::string>() / "trajectory.csv"));
        }
    }
}

TEST_CASE("number lists") {
    CHECK(parse_number_list("", "--alpha").empty());
    CHECK(parse_number_list("1, 2.5,3e-1", "--alpha") == std::vector<double>{1.0, 2.5, 0.3});
    CHECK_THROWS_AS(parse_number_list("1,,2", "--alpha"), ParseError);
    CHECK_THROWS_AS(parse_number_list("1,", "--alpha"), ParseError);
    CHECK_THROWS_AS(parse_number_list("one", "--alpha"), ParseError);
}

TEST_CASE("runs are deterministic") {
    TempDir tmp("determinism");
    std::ostringstream err;
    REQUIRE(cmd_simulate({"fig8", tmp.path / "a", false}, err) == kExitOk);
    REQUIRE(cmd_simulate({"fig8", tmp.path / "b", false}, err) == kExitOk);
    for (const char* f : {"trajectory.csv", "events.json", "monitors.json", "barrier.json", "energy.json"}) {
        CHECK_MESSAGE(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f), f);
    }
}

TEST_CASE("presets finish quickly and pass their monitors") {
    for (const auto& name : preset_names()) {
        const auto start = std::chrono::steady_clock::now();
        const auto run = run_scenario(*preset(name));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        INFO(name << " took " << secs << " s");
        CHECK(secs < 10.0);
        CHECK_FALSE(run.trajectory.collided());
        for (const auto& m : run.analysis.monitors) {
            INFO(name << ": " << m.name << " worst " << m.worst_violation);
            CHECK(m.passed);
        }
    }
}

#ifdef OVFL_CLI_PATH
TEST_CASE("command-line exit codes") {
    TempDir tmp("cli");
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(OVFL_CLI_PATH) + " " + args + " > " + (tmp.path / "stdout").string() +
                                " 2> " + (tmp.path / "stderr").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    spit(tmp.path / "bad.json", "{ not json");
    CHECK(run("simulate --scenario " + (tmp.path / "bad.json").string() + " --out " + (tmp.path / "o").string()) ==
          2);
    const auto e = json::parse(slurp(tmp.path / "stderr"));
    CHECK(e["exit_code"] == 2);
    CHECK(e.contains("position"));

    CHECK(run("sweep --scenario fig5 --alpha '' --beta 1 --out " + (tmp.path / "s").string()) == 3);
    CHECK(run("sweep --scenario fig5 --alpha 1,x --beta 1 --out " + (tmp.path / "s").string()) == 2);
    CHECK(run("--version") == 0);
    CHECK(slurp(tmp.path / "stdout").find(std::string(version())) != std::string::npos);
    CHECK(run("presets") == 0);
    CHECK(slurp(tmp.path / "stdout").find("fig8") != std::string::npos);
    CHECK(run("simulate --scenario fig6-converge --strict --out " + (tmp.path / "f6").string()) == 0);
}
#endif

TEST_SUITE_END();
