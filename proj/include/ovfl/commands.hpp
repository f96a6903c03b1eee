#pragma once

#include "ovfl/analysis.hpp"
#include "ovfl/barrier.hpp"
#include "ovfl/energy.hpp"
#include "ovfl/integrator.hpp"
#include "ovfl/samples.hpp"
#include "ovfl/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ovfl {

std::string_view version();

// Call from a catch block: prints the error JSON line and returns the exit code.
int report_exception(std::ostream& err, const std::filesystem::path& dir);

// Comma-separated numbers; an empty string gives an empty list. Throws ParseError.
std::vector<double> parse_number_list(std::string_view text, std::string_view what);

enum ExitCode : int {
    kExitOk = 0,
    kExitParse = 2,
    kExitValidation = 3,
    kExitIntegration = 4,
    kExitMonitor = 5,
};

struct AnalysisOutcome {
    EnergyBudget budget;
    std::vector<MonitorReport> monitors;
    std::optional<BarrierSegment> barrier;
    ConvergenceReport convergence;

    bool all_passed() const;
};

// Every monitor, computed from the sample table alone so that a table read
// back from CSV gives the same result as the inline run.
AnalysisOutcome analyze_table(const SampleTable& table, const Scenario& s);

struct RunResult {
    Scenario scenario;
    Trajectory trajectory;
    SampleTable table;
    std::vector<Event> events;
    AnalysisOutcome analysis;
};

// Validates, integrates with the diagnostic events, tabulates and analyses.
RunResult run_scenario(const Scenario& s);

// Writes the requested outputs plus run.json into `dir` and returns run.json.
nlohmann::json write_run(const RunResult& run, const std::filesystem::path& dir);

struct SimulateOptions {
    std::string scenario;  // file or preset name
    std::filesystem::path out;
    bool strict = false;
};

struct SweepOptions {
    std::string scenario;
    std::vector<double> alpha;
    std::vector<double> beta;
    std::size_t samples = 0;  // 0: every cell runs the scenario's own initial data
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
};

struct AnalyzeOptions {
    std::filesystem::path csv;
    std::string scenario;
    std::filesystem::path out;
};

// Each returns an ExitCode; failures print one line of error JSON to `err`.
int cmd_simulate(const SimulateOptions& opt, std::ostream& err);
int cmd_sweep(const SweepOptions& opt, std::ostream& err);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& err);

// Sweep grid runner shared by the CLI and the bindings; returns the summary.
nlohmann::json run_sweep(const Scenario& base, const SweepOptions& opt);

} // namespace ovfl
