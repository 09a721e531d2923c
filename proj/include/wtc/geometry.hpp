#pragma once

// Schemes, morphisms and localization triples of a workspace, with their JSON form.

#include <map>
#include <string>

#include <json.hpp>

#include "wtc/descent.hpp"
#include "wtc/picard.hpp"

namespace wtc {

/// Closed support Z on Y with open complement υ: U -> Y.
struct Localization {
  std::string name;
  std::string total;    // scheme Y
  std::string support;  // support label of Z on Y
  std::string open;     // scheme U
  std::string upsilon;  // morphism U -> Y
  std::string closed;   // optional scheme Z
  std::string iota;     // optional closed immersion Z -> Y
};

struct Geometry {
  std::string base;
  std::map<std::string, SchemePtr> schemes;
  std::map<std::string, MorphismPtr> morphisms;
  std::map<std::string, Localization> localizations;

  SchemePtr scheme(const std::string& name) const;
  MorphismPtr morphism(const std::string& name) const;
  const Localization& localization(const std::string& name) const;
  /// Structure morphism of a scheme; the identity for the base.
  MorphismPtr structure(const SchemePtr& s) const;
  /// Tower for f: Ȳ -> Y.
  Tower tower(const MorphismPtr& f) const;
};

/// Throws ValidationError for dangling references or ill-formed data.
Geometry parse_geometry(const nlohmann::json& j);
void serialize_geometry(const Geometry& g, nlohmann::json& out);

}  // namespace wtc
