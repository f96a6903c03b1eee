#pragma once

#include "ovfl/analysis.hpp"
#include "ovfl/barrier.hpp"
#include "ovfl/energy.hpp"
#include "ovfl/integrator.hpp"
#include "ovfl/samples.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ovfl {

// Columns t, X1..XN, Y1..YN, xi1..xiN, zeta1..zetaN, H1; 17 significant digits.
std::vector<std::string> csv_header(int followers);
void write_csv(std::ostream& out, const SampleTable& table);

// Throws ParseError naming the first missing column or the offending line.
SampleTable read_csv(std::istream& in);
SampleTable read_csv_file(const std::filesystem::path& path);

nlohmann::json to_json(const MonitorReport& m);
nlohmann::json to_json(const std::vector<MonitorReport>& reports);
nlohmann::json to_json(const Event& e);
nlohmann::json to_json(const std::vector<Event>& events);
nlohmann::json to_json(const EnergyBudget& b);
nlohmann::json to_json(const BarrierSegment& seg);
nlohmann::json to_json(const ConvergenceReport& c);

// Two-space indented dump followed by a newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace ovfl
