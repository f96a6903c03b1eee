#include "ovfl/commands.hpp"

#include "ovfl/errors.hpp"
#include "ovfl/report_io.hpp"
#include "ovfl/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef OVFL_VERSION
#define OVFL_VERSION "0.0.0"
#endif

namespace ovfl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

MonitorReport informational(std::string name) {
    MonitorReport m;
    m.name = std::move(name);
    return m;
}

MonitorReport failing(std::string name, double violation, double tol, double t, std::string_view what) {
    MonitorReport m;
    m.name = std::move(name);
    m.worst_violation = violation;
    m.tolerance = tol;
    m.time = t;
    m.passed = false;
    m.details["error_" + std::string(what)] = 1.0;
    return m;
}

MonitorReport convergence_monitor(const ConvergenceReport& c, bool insufficient) {
    auto m = informational("convergence");
    m.details["epsilon"] = c.epsilon;
    m.details["entered_ball"] = c.entered_ball ? 1.0 : 0.0;
    if (c.entry_time) m.details["entry_time"] = *c.entry_time;
    if (c.fitted_rate) m.details["fitted_rate"] = *c.fitted_rate;
    if (c.envelope_rate) m.details["envelope_rate"] = *c.envelope_rate;
    m.details["gronwall_rate"] = c.gronwall_rate;
    m.details["y1_sign_changes"] = c.y1_sign_changes;
    m.details["samples_after_entry"] = static_cast<double>(c.samples_after_entry);
    if (insufficient) m.details["insufficient_data"] = 1.0;
    return m;
}

void barrier_monitors(const SampleTable& table, const ModelParams& p, const EnergyBudget& budget,
                      AnalysisOutcome& out) {
    try {
        out.barrier = extract_barrier_segment(table, budget, p);
    } catch (const MonotonicityViolation& e) {
        out.monitors.push_back(failing("barrier_segment", e.drop(), 1e-9, e.time(), "monotonicity"));
        return;
    }
    if (!out.barrier) {
        auto m = informational("barrier_segment");
        m.details["present"] = 0.0;
        out.monitors.push_back(std::move(m));
        return;
    }
    const BarrierSegment& seg = *out.barrier;
    auto present = informational("barrier_segment");
    present.details["present"] = 1.0;
    present.details["delta_2"] = seg.delta_2;
    present.details["t_check"] = seg.t_check;
    present.details["zeta_check"] = seg.zeta_check;
    present.details["mu_plus"] = seg.mu_plus;
    present.details["samples"] = static_cast<double>(seg.samples.size());
    out.monitors.push_back(std::move(present));

    out.monitors.push_back(verify_barrier(seg, p.beta));
    out.monitors.push_back(verify_zeta2_increasing(seg, p));
    out.monitors.push_back(verify_zeta2_positive_invariance(table, seg.delta_2, seg.t_check));
    try {
        const auto check = check_psi_derivative(seg, p);
        MonitorReport m;
        m.name = "psi_derivative";
        m.tolerance = 1e-3;
        m.worst_violation = check.max_relative_error;
        m.passed = m.worst_violation <= m.tolerance;
        m.details["checked"] = static_cast<double>(check.checked);
        m.details["worst_zeta"] = check.worst_zeta;
        out.monitors.push_back(std::move(m));
    } catch (const SingularQuotientError&) {
        out.monitors.push_back(
            failing("psi_derivative", std::numeric_limits<double>::infinity(), 1e-3, seg.t_check, "singular"));
    }
}

std::vector<double> event_times(const std::vector<Event>& events) {
    std::vector<double> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(e.time);
    return out;
}

json error_json(const char* kind, int code, const std::string& message) {
    return {{"error", kind}, {"exit_code", code}, {"message", message}};
}

// Reports an exception as error JSON on `err` (and error.json in `dir` when
// given) and maps it to an exit code.
int report_failure(std::ostream& err, const fs::path& dir) {
    json j;
    try {
        throw;
    } catch (const ParseError& e) {
        j = error_json("parse_error", kExitParse, e.what());
        if (e.byte()) j["position"] = *e.byte();
        if (!e.column().empty()) j["column"] = e.column();
    } catch (const ValidationError& e) {
        j = error_json("validation_error", kExitValidation, e.what());
    } catch (const DomainError& e) {
        j = error_json("validation_error", kExitValidation, e.what());
    } catch (const StiffnessError& e) {
        j = error_json("integration_error", kExitIntegration, e.what());
        j["time"] = e.time();
        j["state"] = e.last_state();
    } catch (const std::exception& e) {
        j = error_json("integration_error", kExitIntegration, e.what());
    }
    err << j.dump() << '\n';
    if (!dir.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (!ec) {
            try {
                write_json_file(dir / "error.json", j);
            } catch (const std::exception&) {
            }
        }
    }
    return j["exit_code"].get<int>();
}

Scenario cell_scenario(const Scenario& base, double alpha, double beta, std::size_t sample, std::uint64_t seed,
                       bool sampled) {
    Scenario s = base;
    s.params.alpha = alpha;
    s.params.beta = beta;
    s.seed = seed;
    if (!sampled) return s;

    SamplerRanges r;
    r.alpha = {alpha, alpha};
    r.beta = {beta, beta};
    r.vbar = {base.params.vbar, base.params.vbar};
    r.n_min = r.n_max = base.params.followers();
    const SweepDraw d = random_admissible_sampler(r)(seed + sample);
    s.initial.clear();
    switch (base.coordinate_system) {
    case CoordinateSystem::Difference:
        for (std::size_t n = 0; n < d.initial.xi.size(); ++n) s.initial.push_back({d.initial.xi[n], d.initial.zeta[n]});
        break;
    case CoordinateSystem::Relative: {
        const auto rel = from_difference(d.initial);
        for (std::size_t n = 0; n < rel.X.size(); ++n) s.initial.push_back({rel.X[n], rel.Y[n]});
        break;
    }
    case CoordinateSystem::Absolute: {
        const auto abs = to_absolute(from_difference(d.initial), 0.0, base.params.vbar);
        for (std::size_t n = 0; n < abs.x.size(); ++n) s.initial.push_back({abs.x[n], abs.y[n]});
        break;
    }
    }
    return s;
}

} // namespace

std::string_view version() { return OVFL_VERSION; }

int report_exception(std::ostream& err, const fs::path& dir) { return report_failure(err, dir); }

std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
    std::vector<double> out;
    if (text.find_first_not_of(' ') == std::string_view::npos) return out;
    std::string cell;
    std::istringstream is{std::string(text)};
    while (std::getline(is, cell, ',')) {
        const auto first = cell.find_first_not_of(' ');
        const auto last = cell.find_last_not_of(' ');
        cell = first == std::string::npos ? std::string() : cell.substr(first, last - first + 1);
        char* stop = nullptr;
        const double v = std::strtod(cell.c_str(), &stop);
        if (cell.empty() || *stop != '\0') {
            throw ParseError(std::string(what) + " list holds '" + cell + "', not a number");
        }
        out.push_back(v);
    }
    if (text.back() == ',') throw ParseError(std::string(what) + " list ends with a comma");
    return out;
}

bool AnalysisOutcome::all_passed() const {
    return std::all_of(monitors.begin(), monitors.end(), [](const MonitorReport& m) { return m.passed; });
}

AnalysisOutcome analyze_table(const SampleTable& table, const Scenario& s) {
    const ModelParams& p = s.params;
    if (table.followers != p.followers()) {
        throw ParseError("table has " + std::to_string(table.followers) + " followers, scenario expects " +
                         std::to_string(p.followers()));
    }
    if (table.rows.empty()) throw ParseError("table has no rows");

    AnalysisOutcome out;
    const SampleTable pair = table.first_pair();
    const auto& first = table.rows.front();
    out.budget = energy_budget(p, first.X[0], first.Y[0]);
    if (out.budget.delta_1_source != Delta1Source::Energy) {
        double observed = std::numeric_limits<double>::infinity();
        for (const auto& r : pair.rows) observed = std::min(observed, r.X[0]);
        out.budget = refine_delta1(p, out.budget, observed);
    }

    for (auto& m : verify_region_lemmas(pair, p)) out.monitors.push_back(std::move(m));
    for (auto& m : verify_energy_and_bounds(pair, p, out.budget)) out.monitors.push_back(std::move(m));
    out.monitors.push_back(verify_speed_limits(table, p));
    out.monitors.push_back(verify_min_gap(table, s.integrator.singular_guard));

    bool insufficient = false;
    try {
        out.convergence = convergence_diagnostics(pair, p, out.budget, s.epsilon);
    } catch (const InsufficientDataError&) {
        insufficient = true;
        out.convergence.epsilon = s.epsilon;
        out.convergence.gronwall_rate = out.budget.gronwall_rate;
        out.convergence.y1_sign_changes = count_y1_sign_changes(pair);
    }
    out.monitors.push_back(convergence_monitor(out.convergence, insufficient));

    if (table.followers == 2) barrier_monitors(table, p, out.budget, out);
    return out;
}

RunResult run_scenario(const Scenario& s) {
    validate_scenario(s);
    const ModelParams& p = s.params;
    const CoordinateSystem sys = s.coordinate_system;
    const OdeSystem ode = platoon_system(sys, p);
    const std::vector<double> y0 = initial_state(s);

    const std::vector<EventSpec> specs{t_infinity_event(sys, p), t_infinity_eps_event(sys, p, s.epsilon),
                                       y_sign_change_event(sys), energy_violation_event(sys, p)};
    RunResult run{s, integrate(ode, y0, 0.0, s.integrator, specs), {}, {}, {}};
    run.events = run.trajectory.events();

    if (p.followers() == 2) {
        // T_CHECK depends on delta_2, which may need the observed minimum of X_1.
        const SampleTable coarse = tabulate(run.trajectory, sys, p, s.dense_points, event_times(run.events));
        EnergyBudget b = energy_budget(p, coarse.rows[0].X[0], coarse.rows[0].Y[0]);
        if (b.delta_1_source != Delta1Source::Energy) {
            double observed = std::numeric_limits<double>::infinity();
            for (const auto& r : coarse.rows) observed = std::min(observed, r.X[0]);
            b = refine_delta1(p, b, observed);
        }
        const double delta_2 = std::min(coarse.rows[0].xi[1], *b.delta_1);
        for (auto& e : locate_events(run.trajectory, t_check_event(sys, 0.5 * delta_2))) {
            run.events.push_back(std::move(e));
        }
        std::stable_sort(run.events.begin(), run.events.end(),
                         [](const Event& a, const Event& b) { return a.time < b.time; });
    }

    run.table = tabulate(run.trajectory, sys, p, s.dense_points, event_times(run.events));
    run.analysis = analyze_table(run.table, s);
    return run;
}

json write_run(const RunResult& run, const fs::path& dir) {
    fs::create_directories(dir);
    const Scenario& s = run.scenario;
    json files = json::object();
    if (s.wants(OutputKind::Timeseries)) {
        std::ostringstream csv;
        write_csv(csv, run.table);
        write_text_file(dir / "trajectory.csv", csv.str());
        files["timeseries"] = "trajectory.csv";
    }
    if (s.wants(OutputKind::Events)) {
        write_json_file(dir / "events.json", to_json(run.events));
        files["events"] = "events.json";
    }
    if (s.wants(OutputKind::Monitors)) {
        write_json_file(dir / "monitors.json", to_json(run.analysis.monitors));
        files["monitors"] = "monitors.json";
    }
    if (s.wants(OutputKind::Barrier)) {
        write_json_file(dir / "barrier.json", run.analysis.barrier ? to_json(*run.analysis.barrier) : json(nullptr));
        files["barrier"] = "barrier.json";
    }
    if (s.wants(OutputKind::Energy)) {
        write_json_file(dir / "energy.json",
                        {{"budget", to_json(run.analysis.budget)}, {"convergence", to_json(run.analysis.convergence)}});
        files["energy"] = "energy.json";
    }
    json artifact = {{"scenario", to_json(s)},
                     {"files", files},
                     {"version", std::string(version())},
                     {"accepted_steps", run.trajectory.accepted_steps()},
                     {"rejected_steps", run.trajectory.rejected_steps()},
                     {"collided", run.trajectory.collided()},
                     {"monitors_passed", run.analysis.all_passed()}};
    write_json_file(dir / "run.json", artifact);
    return artifact;
}

int cmd_simulate(const SimulateOptions& opt, std::ostream& err) {
    try {
        const Scenario s = load_scenario(opt.scenario);
        const RunResult run = run_scenario(s);
        write_run(run, opt.out);
        if (opt.strict && !run.analysis.all_passed()) {
            json j = error_json("monitor_failure", kExitMonitor, "one or more monitors failed");
            j["failed"] = json::array();
            for (const auto& m : run.analysis.monitors) {
                if (!m.passed) j["failed"].push_back(m.name);
            }
            err << j.dump() << '\n';
            write_json_file(opt.out / "error.json", j);
            return kExitMonitor;
        }
        return kExitOk;
    } catch (...) {
        return report_failure(err, opt.out);
    }
}

json run_sweep(const Scenario& base, const SweepOptions& opt) {
    if (opt.alpha.empty() || opt.beta.empty()) {
        throw ValidationError("sweep grid is empty: need at least one alpha and one beta");
    }
    validate_scenario(base);
    const bool sampled = opt.samples > 0;
    const std::size_t per_cell = sampled ? opt.samples : 1;
    const std::uint64_t seed = opt.seed.value_or(base.seed);

    struct Job {
        std::size_t ia, ib, k;
    };
    std::vector<Job> jobs;
    for (std::size_t ia = 0; ia < opt.alpha.size(); ++ia) {
        for (std::size_t ib = 0; ib < opt.beta.size(); ++ib) {
            for (std::size_t k = 0; k < per_cell; ++k) jobs.push_back({ia, ib, k});
        }
    }
    std::vector<json> cells(jobs.size());

    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& job = jobs[i];
        const double alpha = opt.alpha[job.ia];
        const double beta = opt.beta[job.ib];
        std::ostringstream name;
        name << "cell_a" << job.ia << "_b" << job.ib << "_s" << job.k;
        json cell = {{"alpha", alpha}, {"beta", beta}, {"sample", job.k}, {"dir", name.str()}};
        const fs::path dir = opt.out / name.str();
        std::ostringstream err;
        try {
            const Scenario s = cell_scenario(base, alpha, beta, job.k, seed, sampled);
            const RunResult run = run_scenario(s);
            write_run(run, dir);
            const auto& c = run.analysis.convergence;
            std::size_t collisions = 0;
            for (const auto& e : run.events) collisions += e.kind == EventKind::CollisionGuard;
            std::size_t failed = 0;
            for (const auto& m : run.analysis.monitors) failed += !m.passed;
            cell["status"] = "ok";
            cell["entered_ball"] = c.entered_ball;
            cell["entry_time"] = c.entry_time ? json(*c.entry_time) : json(nullptr);
            cell["y1_sign_changes"] = c.y1_sign_changes;
            cell["min_gap"] = run.table.min_gap();
            cell["collision_events"] = collisions;
            cell["monitor_failures"] = failed;
        } catch (...) {
            const int code = report_failure(err, dir);
            cell["status"] = code == kExitValidation ? "validation_error"
                             : code == kExitParse    ? "parse_error"
                                                     : "integration_error";
            cell["error"] = json::parse(err.str());
        }
        cells[i] = std::move(cell);
    });

    json summary = {{"version", std::string(version())},
                    {"scenario", to_json(base)},
                    {"alpha", opt.alpha},
                    {"beta", opt.beta},
                    {"samples", opt.samples},
                    {"seed", seed}};
    std::size_t failures = 0;
    std::size_t collisions = 0;
    double min_gap = std::numeric_limits<double>::infinity();
    summary["cells"] = json::array();
    for (auto& c : cells) {
        if (c["status"] != "ok") {
            ++failures;
        } else {
            collisions += c["collision_events"].get<std::size_t>();
            min_gap = std::min(min_gap, c["min_gap"].get<double>());
        }
        summary["cells"].push_back(std::move(c));
    }
    summary["runs"] = cells.size();
    summary["failures"] = failures;
    summary["collision_events"] = collisions;
    summary["min_gap"] = std::isfinite(min_gap) ? json(min_gap) : json(nullptr);
    return summary;
}

int cmd_sweep(const SweepOptions& opt, std::ostream& err) {
    try {
        const Scenario base = load_scenario(opt.scenario);
        const json summary = run_sweep(base, opt);
        fs::create_directories(opt.out);
        write_json_file(opt.out / "summary.json", summary);
        return kExitOk;
    } catch (...) {
        return report_failure(err, opt.out);
    }
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& err) {
    try {
        const SampleTable table = read_csv_file(opt.csv);
        const Scenario s = load_scenario(opt.scenario);
        validate_scenario(s);
        const AnalysisOutcome out = analyze_table(table, s);
        if (opt.out.has_parent_path()) fs::create_directories(opt.out.parent_path());
        write_json_file(opt.out, to_json(out.monitors));
        return kExitOk;
    } catch (...) {
        return report_failure(err, {});
    }
}

} // namespace ovfl
