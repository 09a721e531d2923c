#pragma once

// Workspace files: geometry, Witt presentations, basis candidates and
// localization ledgers in one JSON document.

#include <map>
#include <string>

#include <json.hpp>

#include "wtc/basis.hpp"

namespace wtc {

struct Workspace {
  int version = 1;
  /// False for geometry-only workspaces (no "ring" entry).
  bool has_witt = true;
  WittSystem system;
  std::map<std::string, BasisCandidate> bases;
  std::map<std::string, LocalizationLedger> ledgers;

  const BasisCandidate& basis(const std::string& name) const;
  const LocalizationLedger& ledger(const std::string& name) const;
};

/// Reads and validates a workspace; ParseError carries "line L, column C".
Workspace load_workspace(const std::string& path);
Workspace parse_workspace_text(const std::string& text);
Workspace parse_workspace(const nlohmann::json& j);
nlohmann::json serialize_workspace(const Workspace& ws);

/// Member JSON {id, degree, twist, element, alis?: {m, u}}; element in
/// presentation coordinates of the piece at the canonical representative.
BasisMember parse_member(const WittSystem& w, const std::string& module, const nlohmann::json& j);
nlohmann::json member_json(const WittSystem& w, const BasisMember& m);
/// Twist texts to their classes in Pic_X(Y)/2.
std::vector<F2Vec> parse_scope(const WittModule& m, const nlohmann::json& j);
nlohmann::json scope_json(const WittModule& m, const std::vector<F2Vec>& scope);

}  // namespace wtc
