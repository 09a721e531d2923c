#include "wtc/workspace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "wtc/descent.hpp"
#include "wtc/error.hpp"

namespace wtc {

using nlohmann::json;

const BasisCandidate& Workspace::basis(const std::string& name) const {
  auto it = bases.find(name);
  if (it == bases.end()) throw Error(ErrorKind::UsageError, "unknown basis '" + name + "'");
  return it->second;
}

const LocalizationLedger& Workspace::ledger(const std::string& name) const {
  auto it = ledgers.find(name);
  if (it == ledgers.end()) throw Error(ErrorKind::UsageError, "unknown ledger '" + name + "'");
  return it->second;
}

namespace {

[[noreturn]] void invalid(const std::string& what, const std::string& witness = {}) {
  throw Error(ErrorKind::ValidationError, what, witness);
}

IntVector int_vector(const json& j) {
  IntVector out;
  for (const auto& x : j) out.emplace_back(x.get<long>());
  return out;
}

json json_vector(const IntVector& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(x.get_si());
  return out;
}

std::string position_text(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

json ledger_member_json(const WittSystem& w, const WittModule& y, const LedgerMember& m) {
  json j = member_json(w, {m.id, m.w});
  if (m.over) j["over"] = format_pic(*y.scheme, m.over->cls);
  return j;
}

LocalizationLedger parse_ledger(const WittSystem& w, const std::string& name, const json& j) {
  LocalizationLedger l;
  l.name = name;
  l.localization = j.at("localization").get<std::string>();
  w.geometry.localization(l.localization);
  const json& mods = j.at("modules");
  l.z_module = mods.at("Z").get<std::string>();
  l.y_module = mods.at("Y").get<std::string>();
  l.u_module = mods.at("U").get<std::string>();
  const json& maps = j.at("maps");
  l.e = maps.at("e").get<std::string>();
  l.restrict = maps.at("restrict").get<std::string>();
  l.bord = maps.at("bord").get<std::string>();
  for (const auto& m : {l.e, l.restrict, l.bord}) w.map(m);
  const WittModule& y = w.module(l.y_module);
  l.scope = j.contains("scope") ? parse_scope(y, j.at("scope")) : y.scope;
  auto family = [&](const char* key, const std::string& module, bool with_over) {
    std::vector<LedgerMember> out;
    if (!j.contains(key)) return out;
    for (const auto& mj : j.at(key)) {
      BasisMember b = parse_member(w, module, mj);
      LedgerMember m{b.id, b.w, std::nullopt};
      if (with_over && mj.contains("over")) m.over = LineBundle{y.scheme, parse_pic(*y.scheme, mj.at("over").get<std::string>())};
      out.push_back(m);
    }
    return out;
  };
  l.v = family("v", l.z_module, false);
  l.w_prime = family("w_prime", l.y_module, false);
  l.w = family("w", l.y_module, false);
  l.u_prime = family("u_prime", l.u_module, true);
  l.u = family("u", l.u_module, true);
  l.v_prime = family("v_prime", l.z_module, false);
  l.asserted = j.at("assert").get<std::vector<std::string>>();
  return l;
}

json ledger_json(const WittSystem& w, const LocalizationLedger& l) {
  const WittModule& y = w.module(l.y_module);
  json j;
  j["localization"] = l.localization;
  j["modules"] = {{"Z", l.z_module}, {"Y", l.y_module}, {"U", l.u_module}};
  j["maps"] = {{"e", l.e}, {"restrict", l.restrict}, {"bord", l.bord}};
  j["scope"] = scope_json(y, l.scope);
  auto family = [&](const std::vector<LedgerMember>& ms) {
    json out = json::array();
    for (const auto& m : ms) out.push_back(ledger_member_json(w, y, m));
    return out;
  };
  j["v"] = family(l.v);
  j["w_prime"] = family(l.w_prime);
  j["w"] = family(l.w);
  j["u_prime"] = family(l.u_prime);
  j["u"] = family(l.u);
  j["v_prime"] = family(l.v_prime);
  j["assert"] = l.asserted;
  return j;
}

}  // namespace

BasisMember parse_member(const WittSystem& w, const std::string& module, const json& j) {
  const WittModule& m = w.module(module);
  std::string id = j.at("id").get<std::string>();
  long degree = j.at("degree").get<long>();
  GroupElement twist = parse_pic(*m.scheme, j.value("twist", "0"));
  GroupPtr g = m.piece(m.key(degree, twist));
  IntVector x = int_vector(j.at("element"));
  if (x.size() != g->presentation_generators())
    invalid("member " + id + ": element has the wrong number of coordinates", j.at("element").dump());
  RepresentedClass c = w.canonical(module, degree, twist, GroupElement::from_presentation(g, x));
  if (j.contains("alis")) {
    const json& a = j.at("alis");
    GroupElement mm = parse_pic(*m.scheme, a.value("m", "0"));
    F2Vec u = parse_unit(*m.scheme, a.value("u", "1"));
    LineBundle src = c.twist();
    LineBundle tgt{m.scheme, src.cls + mm + mm};
    c = w.transport(c, AlignmentClass(src, tgt, mm, u));
  }
  return {id, c};
}

json member_json(const WittSystem& w, const BasisMember& mem) {
  const WittModule& m = w.module(mem.w.module);
  GroupElement coords = w.coordinates(mem.w);
  json j;
  j["id"] = mem.id;
  j["degree"] = mem.w.degree;
  j["twist"] = format_pic(*m.scheme, mem.w.twist().cls);
  j["element"] = json_vector(coords.group()->presentation_from_canonical(coords.coords()));
  return j;
}

std::vector<F2Vec> parse_scope(const WittModule& m, const json& j) {
  std::vector<F2Vec> out;
  for (const auto& t : j) {
    F2Vec c = m.relative_class(parse_pic(*m.scheme, t.get<std::string>()));
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

json scope_json(const WittModule& m, const std::vector<F2Vec>& scope) {
  RelativePic rel = relative_pic(*m.pi);
  Mod2Reduction red = mod2_reduction(rel.group);
  json out = json::array();
  for (const auto& c : scope) out.push_back(format_pic(*m.scheme, rel.lift(red.lift(c), m.scheme->pic)));
  return out;
}

Workspace parse_workspace(const json& j) {
  Workspace ws;
  try {
    ws.version = j.value("version", 1);
    if (ws.version != 1) invalid("unsupported workspace version " + std::to_string(ws.version));
    if (!j.contains("ring")) {
      for (const char* key : {"modules", "maps", "bases", "ledgers"})
        if (j.contains(key)) invalid(std::string("workspace has ") + key + " but no base ring");
      ws.has_witt = false;
      ws.system.geometry = parse_geometry(j);
      return ws;
    }
    ws.system = parse_witt_system(parse_geometry(j), j);
    const WittSystem& w = ws.system;
    if (j.contains("bases"))
      for (const auto& [name, bj] : j.at("bases").items()) {
        BasisCandidate c;
        c.name = name;
        c.module = bj.at("module").get<std::string>();
        const WittModule& m = w.module(c.module);
        c.scope = bj.contains("scope") ? parse_scope(m, bj.at("scope")) : m.scope;
        for (const auto& mj : bj.at("members")) c.family.push_back(parse_member(w, c.module, mj));
        ws.bases.emplace(name, c);
      }
    if (j.contains("ledgers"))
      for (const auto& [name, lj] : j.at("ledgers").items()) ws.ledgers.emplace(name, parse_ledger(w, name, lj));
  } catch (const json::exception& e) {
    invalid(std::string("malformed workspace: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ValidationError) throw;
    invalid("workspace does not load: " + std::string(to_string(e.kind())) + ": " + e.message(), e.witness());
  }
  return ws;
}

Workspace parse_workspace_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "workspace is not valid JSON at " + position_text(text, e.byte > 0 ? e.byte - 1 : 0),
                e.what());
  }
  return parse_workspace(j);
}

Workspace load_workspace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UsageError, "cannot read workspace '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_workspace_text(buf.str());
}

json serialize_workspace(const Workspace& ws) {
  json out;
  out["version"] = ws.version;
  serialize_geometry(ws.system.geometry, out);
  if (!ws.has_witt) return out;
  serialize_witt_system(ws.system, out);
  if (!ws.bases.empty()) {
    json bases = json::object();
    for (const auto& [name, c] : ws.bases) {
      json members = json::array();
      for (const auto& m : c.family) members.push_back(member_json(ws.system, m));
      bases[name] = {{"module", c.module}, {"scope", scope_json(ws.system.module(c.module), c.scope)}, {"members", members}};
    }
    out["bases"] = bases;
  }
  if (!ws.ledgers.empty()) {
    json ledgers = json::object();
    for (const auto& [name, l] : ws.ledgers) ledgers[name] = ledger_json(ws.system, l);
    out["ledgers"] = ledgers;
  }
  return out;
}

}  // namespace wtc
