#pragma once

// Command reports: a human-readable body and a JSON mirror of it.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtc/basis.hpp"
#include "wtc/error.hpp"

namespace wtc {

struct ReportError {
  ErrorKind kind;
  std::string message;
  std::string witness;
};

struct Report {
  std::string command;  // echo of the invocation
  std::vector<std::string> lines;
  nlohmann::json data = nlohmann::json::object();
  std::optional<bool> verdict;
  std::optional<ReportError> error;

  void add(const std::string& line) { lines.push_back(line); }
  void fail(const Error& e) { error = ReportError{e.kind(), e.message(), e.witness()}; }
  /// Exit code 0 iff every verdict passes.
  bool pass() const { return !error && verdict.value_or(true); }
};

std::string emit_text(const Report& r);
std::string emit_json(const Report& r);

/// One line per (k, q) cell.
void add_theta_report(Report& r, const ThetaReport& t, const std::string& key = "theta");
void add_localization_report(Report& r, const LocalizationReport& l);

std::string cell_line(const ThetaCell& c);
nlohmann::json cell_json(const ThetaCell& c);

}  // namespace wtc
