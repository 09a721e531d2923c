#include "doctest.h"
#include "support.hpp"
#include "wtc/error.hpp"
#include "wtc/report.hpp"
#include "wtc/workspace.hpp"

using namespace wtc;
using namespace wtc::testing;

namespace {

const char* kFixtures[] = {"point.json", "affine_line.json", "projective_line.json", "f1.json", "torsion_pic.json",
                           "failing_smpic.json"};

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  return Error(ErrorKind::UsageError, "no error");
}

}  // namespace

TEST_CASE("minimal workspace loads") {
  Workspace ws = load_workspace(fixture_path("point.json"));
  CHECK(ws.version == 1);
  CHECK(ws.system.modules.size() == 1);
  CHECK(ws.basis("one").family.size() == 1);
  CHECK(error_of([&] { ws.basis("nope"); }).kind() == ErrorKind::UsageError);
}

TEST_CASE("serialization is idempotent on every fixture") {
  for (const char* name : kFixtures) {
    CAPTURE(name);
    Workspace ws = load_workspace(fixture_path(name));
    nlohmann::json once = serialize_workspace(ws);
    nlohmann::json twice = serialize_workspace(parse_workspace(once));
    CHECK(once.dump() == twice.dump());
  }
}

TEST_CASE("ledgers and bases survive a round trip") {
  Workspace ws = load_workspace(fixture_path("projective_line.json"));
  Workspace again = parse_workspace(serialize_workspace(ws));
  REQUIRE(again.ledgers.size() == 2);
  const LocalizationLedger& l = again.ledger("chunk_h");
  REQUIRE(l.u.size() == 1);
  REQUIRE(l.u[0].over);
  CHECK(format_pic(*l.u[0].over->scheme, l.u[0].over->cls) == "h");
  CHECK(check_localization(again.system, l).pass());
  for (const auto& [name, c] : ws.bases) {
    const BasisCandidate& d = again.basis(name);
    REQUIRE(d.family.size() == c.family.size());
    for (std::size_t i = 0; i < c.family.size(); ++i)
      CHECK(again.system.coordinates(d.family[i].w).to_string() == ws.system.coordinates(c.family[i].w).to_string());
    CHECK(d.scope == c.scope);
  }
}

TEST_CASE("member alignments are applied at load") {
  Workspace ws = load_workspace(fixture_path("f1.json"));
  const WittSystem& w = ws.system;
  nlohmann::json plain = {{"id", "x"}, {"degree", 1}, {"twist", "h"}, {"element", {3}}};
  nlohmann::json moved = plain;
  moved["alis"] = {{"m", "h"}, {"u", "a"}};
  BasisMember a = parse_member(w, "WY", plain);
  BasisMember b = parse_member(w, "WY", moved);
  CHECK(format_pic(*b.w.twist().scheme, b.w.twist().cls) == "3h");
  // ⟨a⟩ acts by -1 on the fixture, and per(h) carries canonical coordinates along
  CHECK(w.coordinates(b.w).coords()[0] == -w.coordinates(a.w).coords()[0]);
  nlohmann::json out = member_json(w, b);
  CHECK(out["twist"] == "3h");
  CHECK(w.compare(parse_member(w, "WY", out).w, b.w));
}

TEST_CASE("parse errors carry a position") {
  Error e = error_of([] { parse_workspace_text("{\n  \"version\": 1,\n  \"base\": ]\n}"); });
  CHECK(e.kind() == ErrorKind::ParseError);
  CHECK(e.message().find("line 3") != std::string::npos);
  CHECK(e.message().find("column") != std::string::npos);
}

TEST_CASE("validation failures name the axiom") {
  Error assoc = error_of([] { load_workspace(fixture_path("mutations/nonassociative_ring.json")); });
  CHECK(assoc.kind() == ErrorKind::ValidationError);
  CHECK(assoc.message().find("associativity") != std::string::npos);
  // the witness is the failing triple
  CHECK(std::count(assoc.witness().begin(), assoc.witness().end(), ';') == 2);

  Error linear = error_of([] { load_workspace(fixture_path("mutations/nonlinear_bord.json")); });
  CHECK(linear.kind() == ErrorKind::ValidationError);
  CHECK(linear.message().find("map bd: not linear") != std::string::npos);
  CHECK(!linear.witness().empty());

  auto j = read_fixture("point.json");
  j["version"] = 7;
  CHECK(error_of([&] { parse_workspace(j); }).kind() == ErrorKind::ValidationError);
  j = read_fixture("point.json");
  j["bases"]["one"]["members"][0]["element"] = {1, 0};
  CHECK(error_of([&] { parse_workspace(j); }).kind() == ErrorKind::ValidationError);
  j = read_fixture("projective_line.json");
  j["ledgers"]["chunk_0"]["maps"]["e"] = "missing";
  CHECK(error_of([&] { parse_workspace(j); }).kind() == ErrorKind::ValidationError);
}

TEST_CASE("report emission") {
  Report empty;
  empty.command = "check-basis";
  CHECK(emit_text(empty) == "wtc check-basis\n");

  Workspace ws = load_workspace(fixture_path("projective_line.json"));
  Report r;
  r.command = "check-basis --basis line";
  ThetaReport t = check_total_basis(ws.system, ws.basis("line"));
  add_theta_report(r, t);
  r.verdict = t.pass();
  std::string text = emit_text(r);
  std::size_t cells = 0;
  for (std::size_t p = text.find("cell k="); p != std::string::npos; p = text.find("cell k=", p + 1)) ++cells;
  CHECK(cells == t.cells.size());
  CHECK(text == emit_text(r));
  CHECK(emit_json(r) == emit_json(r));
  auto j = nlohmann::json::parse(emit_json(r));
  CHECK(j["verdict"] == "pass");
  CHECK(j["data"]["theta"]["cells"].size() == t.cells.size());
}
