#include "ovfl/report_io.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace ovfl {

using nlohmann::json;

namespace {

void put(std::string& line, double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    line.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

double parse_number(const std::string& cell, std::size_t line_no, const std::string& column) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ParseError("line " + std::to_string(line_no) + ": column " + column + " holds '" + cell +
                             "', not a number",
                         std::nullopt, column);
    }
    return v;
}

// Non-finite doubles become null, which is what nlohmann would emit anyway;
// spelled out so the schema is explicit.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

} // namespace

std::vector<std::string> csv_header(int followers) {
    std::vector<std::string> cols{"t"};
    for (const char* prefix : {"X", "Y", "xi", "zeta"}) {
        for (int n = 1; n <= followers; ++n) cols.push_back(prefix + std::to_string(n));
    }
    cols.emplace_back("H1");
    return cols;
}

void write_csv(std::ostream& out, const SampleTable& table) {
    const auto header = csv_header(table.followers);
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) line += ',';
        line += header[i];
    }
    out << line << '\n';
    for (const auto& r : table.rows) {
        line.clear();
        put(line, r.t);
        for (const auto* v : {&r.X, &r.Y, &r.xi, &r.zeta}) {
            for (double x : *v) {
                line += ',';
                put(line, x);
            }
        }
        line += ',';
        put(line, r.H1);
        out << line << '\n';
    }
}

SampleTable read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty CSV: missing header row");
    const auto cols = split(trim(line));
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < cols.size(); ++i) index[trim(cols[i])] = i;

    int followers = 0;
    while (index.count("X" + std::to_string(followers + 1)) || index.count("Y" + std::to_string(followers + 1)) ||
           index.count("xi" + std::to_string(followers + 1)) || index.count("zeta" + std::to_string(followers + 1))) {
        ++followers;
    }
    if (followers == 0) throw ParseError("CSV is missing required column X1", std::nullopt, "X1");
    const auto expected = csv_header(followers);
    std::vector<std::size_t> pos;
    for (const auto& c : expected) {
        auto it = index.find(c);
        if (it == index.end()) throw ParseError("CSV is missing required column " + c, std::nullopt, c);
        pos.push_back(it->second);
    }
    if (cols.size() != expected.size()) {
        for (const auto& c : cols) {
            if (std::find(expected.begin(), expected.end(), trim(c)) == expected.end()) {
                throw ParseError("CSV has unexpected column " + trim(c), std::nullopt, trim(c));
            }
        }
        throw ParseError("CSV has duplicate columns");
    }

    SampleTable table;
    table.followers = followers;
    const auto n = static_cast<std::size_t>(followers);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != cols.size()) {
            throw ParseError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                             " fields, header has " + std::to_string(cols.size()));
        }
        auto get = [&](std::size_t k) { return parse_number(cells[pos[k]], line_no, expected[k]); };
        SampleRow r;
        r.t = get(0);
        r.X.resize(n);
        r.Y.resize(n);
        r.xi.resize(n);
        r.zeta.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            r.X[i] = get(1 + i);
            r.Y[i] = get(1 + n + i);
            r.xi[i] = get(1 + 2 * n + i);
            r.zeta[i] = get(1 + 3 * n + i);
        }
        r.H1 = get(1 + 4 * n);
        if (!table.rows.empty() && !(r.t > table.rows.back().t)) {
            throw ParseError("line " + std::to_string(line_no) + ": times must be strictly increasing");
        }
        table.rows.push_back(std::move(r));
    }
    if (table.rows.empty()) throw ParseError("CSV has a header but no data rows");
    return table;
}

SampleTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open CSV file " + path.string());
    return read_csv(in);
}

json to_json(const MonitorReport& m) {
    json details = json::object();
    for (const auto& [k, v] : m.details) details[k] = number(v);
    return {{"name", m.name},
            {"passed", m.passed},
            {"worst_violation", number(m.worst_violation)},
            {"tolerance", number(m.tolerance)},
            {"time", number(m.time)},
            {"state", vec(m.state)},
            {"details", details}};
}

json to_json(const std::vector<MonitorReport>& reports) {
    json a = json::array();
    for (const auto& m : reports) a.push_back(to_json(m));
    return a;
}

json to_json(const Event& e) {
    return {{"kind", std::string(to_string(e.kind))}, {"time", number(e.time)}, {"vehicle", e.vehicle},
            {"state", vec(e.state)}};
}

json to_json(const std::vector<Event>& events) {
    json a = json::array();
    for (const auto& e : events) a.push_back(to_json(e));
    return a;
}

json to_json(const EnergyBudget& b) {
    return {{"x_infinity", number(b.x_infinity)},
            {"h_circ", number(b.h_circ)},
            {"y_bar", number(b.y_bar)},
            {"x_bar", number(b.x_bar)},
            {"x_bar_literal", number(b.x_bar_literal)},
            {"delta_1", b.delta_1 ? number(*b.delta_1) : json(nullptr)},
            {"delta_1_source", std::string(to_string(b.delta_1_source))},
            {"potential_at_contact", number(b.potential_at_contact)},
            {"k_sc", number(b.k_sc)},
            {"k_lower", number(b.k_lower)},
            {"k_upper", number(b.k_upper)},
            {"k19", number(b.k19)},
            {"gronwall_rate", number(b.gronwall_rate)}};
}

json to_json(const BarrierSegment& seg) {
    json samples = json::array();
    for (const auto& s : seg.samples) {
        samples.push_back({{"t", number(s.t)},
                           {"zeta", number(s.zeta)},
                           {"psi", number(s.psi)},
                           {"xi1", number(s.xi1)},
                           {"zeta1", number(s.zeta1)}});
    }
    return {{"t_check", number(seg.t_check)},
            {"zeta_check", number(seg.zeta_check)},
            {"delta_1", number(seg.delta_1)},
            {"delta_1_source", std::string(to_string(seg.delta_1_source))},
            {"delta_2", number(seg.delta_2)},
            {"mu_plus", number(seg.mu_plus)},
            {"t_exit", number(seg.t_exit)},
            {"barrier_bound", number(seg.barrier_bound)},
            {"barrier_bound_signed", seg.barrier_bound_signed ? number(*seg.barrier_bound_signed) : json(nullptr)},
            {"samples", samples}};
}

json to_json(const ConvergenceReport& c) {
    auto opt = [](const std::optional<double>& v) { return v ? number(*v) : json(nullptr); };
    return {{"epsilon", number(c.epsilon)},
            {"entered_ball", c.entered_ball},
            {"entry_time", opt(c.entry_time)},
            {"fitted_rate", opt(c.fitted_rate)},
            {"envelope_rate", opt(c.envelope_rate)},
            {"gronwall_rate", number(c.gronwall_rate)},
            {"y1_sign_changes", c.y1_sign_changes},
            {"samples_after_entry", c.samples_after_entry}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

} // namespace ovfl
