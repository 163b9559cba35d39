#pragma once

// Scenario files (strict JSON), run artifacts and SVG frames.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oampc/sim.hpp"

namespace oampc {

/// Schema or semantic problem in a scenario document.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& source, int line, const std::string& field, const std::string& what);

  int line() const { return line_; }           // 0 when unknown
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Parses `text`; `overrides` are "dot.path=value" edits applied before validation.
Scenario parse_scenario_text(const std::string& text, const std::vector<std::string>& overrides = {},
                             const std::string& source = "<scenario>");
Scenario parse_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

nlohmann::json scenario_to_json(const Scenario& sc);
void write_scenario(const Scenario& sc, const std::filesystem::path& path);

/// Applies one "a.b.c=value" edit. The value is read as JSON when it parses,
/// otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

inline constexpr const char* kLogHeader = "tau,x,y,psi,v,delta,status,solve_ms,min_clearance,collision";

void write_log_csv(const std::vector<LogRow>& log, const std::filesystem::path& path);
void write_diagnostics_csv(const std::vector<LogRow>& log, const std::filesystem::path& path);
nlohmann::json metrics_to_json(const Metrics& m, bool finished);

nlohmann::json snapshot_to_json(const Snapshot& s);
Snapshot snapshot_from_json(const nlohmann::json& j);
void write_snapshots(const std::vector<Snapshot>& snaps, const std::filesystem::path& path);
/// Throws std::runtime_error on a missing or corrupt file.
std::vector<Snapshot> read_snapshots(const std::filesystem::path& path);

/// One SVG document for snapshot `index`, with the executed path up to it.
std::string render_svg(const World& world, const std::vector<Snapshot>& snaps, std::size_t index);

/// Writes scenario.json, log.csv, diagnostics.csv, snapshots.jsonl and metrics.json.
void write_run_artifacts(const Scenario& sc, const RunResult& res, const std::filesystem::path& dir);

}  // namespace oampc
