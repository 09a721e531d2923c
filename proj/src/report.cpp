#include "wtc/report.hpp"

#include <sstream>

namespace wtc {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + xs[i];
  return out;
}

std::string bits(const F2Vec& v) {
  std::string out;
  for (auto b : v) out += b ? '1' : '0';
  return out.empty() ? "-" : out;
}

}  // namespace

std::string cell_line(const ThetaCell& c) {
  std::ostringstream out;
  out << "cell k=" << c.degree << " q=" << c.twist << ": " << (c.iso ? "iso" : "NOT iso") << " " << c.rows << "x"
      << c.cols << " members [" << join(c.members) << "]";
  if (!c.iso) out << " witness " << c.witness;
  if (c.choices > 1 || !c.choice_independent)
    out << " choices " << c.choices << (c.choice_independent ? " agree" : " DISAGREE at " + c.choice_witness);
  return out.str();
}

json cell_json(const ThetaCell& c) {
  json j;
  j["degree"] = c.degree;
  j["class"] = bits(c.cls);
  j["relative"] = bits(c.relative);
  j["twist"] = c.twist;
  j["members"] = c.members;
  j["shape"] = {c.rows, c.cols};
  j["iso"] = c.iso;
  if (!c.iso) j["witness"] = c.witness;
  j["choices"] = c.choices;
  j["choice_independent"] = c.choice_independent;
  if (!c.choice_independent) j["choice_witness"] = c.choice_witness;
  return j;
}

void add_theta_report(Report& r, const ThetaReport& t, const std::string& key) {
  r.add(key + " " + t.candidate + " on " + t.module + (t.mode == ChoiceMode::All ? " (all choices)" : ""));
  json cells = json::array();
  for (const auto& c : t.cells) {
    r.add("  " + cell_line(c));
    cells.push_back(cell_json(c));
  }
  r.add("  " + std::string(t.pass() ? "total basis" : "not a total basis"));
  r.data[key] = {{"candidate", t.candidate}, {"module", t.module}, {"cells", cells}, {"pass", t.pass()}};
}

void add_localization_report(Report& r, const LocalizationReport& l) {
  r.add("ledger " + l.ledger);
  json sims = json::array();
  for (const auto& s : l.similitudes) {
    r.add("  similitude (" + s.condition + ") " + s.id + " by " + s.witness);
    sims.push_back({{"condition", s.condition}, {"id", s.id}, {"witness", s.witness}});
  }
  for (const auto& c : l.conclusions) r.add("  conclusion " + c);
  r.add("  exactness checked at " + std::to_string(l.exactness_positions) + " positions");
  json sides = json::array();
  for (const auto& s : l.sides) {
    r.add("  side " + s.side + " " + s.how + ": " + (s.pass ? "basis" : "NOT a basis") +
          (s.note.empty() ? "" : " (" + s.note + ")"));
    json sj = {{"side", s.side}, {"how", s.how}, {"pass", s.pass}};
    if (!s.note.empty()) sj["note"] = s.note;
    if (s.report) {
      json cells = json::array();
      for (const auto& c : s.report->cells) {
        r.add("    " + cell_line(c));
        cells.push_back(cell_json(c));
      }
      sj["cells"] = cells;
      sj["theta_pass"] = s.report->pass();
    }
    sides.push_back(sj);
  }
  if (l.derived_agrees) r.add(std::string("  derived verdict ") + (*l.derived_agrees ? "agrees" : "DISAGREES") + " with θ");
  r.data["ledger"] = {{"name", l.ledger},
                      {"similitudes", sims},
                      {"conclusions", l.conclusions},
                      {"conclusions_hold", l.conclusions_hold},
                      {"exactness_positions", l.exactness_positions},
                      {"sides", sides},
                      {"pass", l.pass()}};
  if (l.derived_agrees) r.data["ledger"]["derived_agrees"] = *l.derived_agrees;
}

std::string emit_text(const Report& r) {
  std::string out = "wtc " + r.command + "\n";
  for (const auto& l : r.lines) out += l + "\n";
  if (r.error) {
    out += "error: " + std::string(to_string(r.error->kind)) + ": " + r.error->message + "\n";
    if (!r.error->witness.empty()) out += "witness: " + r.error->witness + "\n";
  }
  if (r.verdict || r.error) out += std::string("verdict: ") + (r.pass() ? "pass" : "fail") + "\n";
  return out;
}

std::string emit_json(const Report& r) {
  json j;
  j["command"] = r.command;
  j["lines"] = r.lines;
  j["data"] = r.data;
  if (r.error) {
    json e = {{"kind", std::string(to_string(r.error->kind))}, {"message", r.error->message}};
    if (!r.error->witness.empty()) e["witness"] = r.error->witness;
    j["error"] = e;
  }
  if (r.verdict || r.error) j["verdict"] = r.pass() ? "pass" : "fail";
  return j.dump(2) + "\n";
}

}  // namespace wtc
