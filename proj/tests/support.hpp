#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "wtc/geometry.hpp"
#include "wtc/module.hpp"

namespace wtc::testing {

inline std::string fixture_path(const std::string& name) { return std::string(WTC_FIXTURE_DIR) + "/" + name; }

inline nlohmann::json read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  return nlohmann::json::parse(in);
}

inline Geometry load_geometry(const std::string& name) { return parse_geometry(read_fixture(name)); }

inline WittSystem load_system(const std::string& name) {
  auto j = read_fixture(name);
  return parse_witt_system(parse_geometry(j), j);
}

inline LineBundle bundle(const Geometry& g, const std::string& scheme, const std::string& text) {
  auto s = g.scheme(scheme);
  return {s, parse_pic(*s, text)};
}

}  // namespace wtc::testing
