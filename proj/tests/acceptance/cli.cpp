#include <sstream>

#include "acceptance.hpp"
#include "wtc/commands.hpp"
#include "wtc/workspace.hpp"

namespace wtc::acceptance {

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& fixture, std::vector<std::string> args) {
  args.push_back("--workspace");
  args.push_back(fixture_path(fixture));
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

/// Designated failure: exit code 1, the named error or verdict, and a witness line.
void designated(Checks& c, const std::string& fixture, const std::vector<std::string>& args, const std::string& error,
                const std::string& witness) {
  Run r = run(fixture, args);
  c.expect(r.code == 1, fixture + ": exit code " + std::to_string(r.code));
  c.expect(has(r.out, error), fixture + ": missing " + error);
  c.expect(has(r.out, witness), fixture + ": missing witness " + witness);
  c.expect(has(r.out, "verdict: fail"), fixture + ": missing fail verdict");
  std::vector<std::string> json = args;
  json.push_back("--json");
  Run j = run(fixture, json);
  c.expect(j.code == 1, fixture + ": json exit code " + std::to_string(j.code));
  auto doc = nlohmann::json::parse(j.out);
  c.expect(doc["verdict"] == "fail", fixture + ": json verdict");
}

}  // namespace

void negative_suite(Checks& c) {
  designated(c, "mutations/broken_exactness.json", {"check-localization", "--ledger", "chunk_0"},
             "error: ExactnessFailure", "witness: ");
  designated(c, "mutations/nonlinear_bord.json", {"certify-smpic", "--morphism", "q"},
             "error: ValidationError: map bd: not linear", "witness: ");
  designated(c, "failing_smpic.json", {"certify-smpic", "--morphism", "piY"}, "certificate: fail (II)",
             "2-torsion class lifted to");
  designated(c, "mutations/overlap_union.json", {"union-bases", "--basis", "left", "--with", "right"},
             "error: OverlapWarning", "witness: ");
  designated(c, "mutations/nonassociative_ring.json", {"certify-smpic", "--morphism", "q"},
             "error: ValidationError", "associativity");
}

namespace {

const char* kFixtures[] = {"point.json",       "affine_line.json",   "projective_line.json",
                           "f1.json",          "torsion_pic.json",   "failing_smpic.json",
                           "mutations/broken_exactness.json", "mutations/overlap_union.json"};

std::vector<std::vector<std::string>> commands_for(const Workspace& ws) {
  std::vector<std::vector<std::string>> out;
  const Geometry& g = ws.system.geometry;
  for (const auto& [name, f] : g.morphisms) {
    out.push_back({"certify-smpic", "--morphism", name});
    if (f->source->name == g.base || f->target->name == g.base) continue;
    out.push_back({"descend", "--morphism", name, "--l1", "0", "--l2", "0", "--m", "0"});
    out.push_back({"realign", "--morphism", name, "--l1", "0", "--l2", "0", "--lbar", "0", "--m1", "0", "--m2", "0"});
  }
  for (const auto& [name, s] : g.schemes) out.push_back({"normalize", "--expr", "id", "--scheme", name});
  if (!ws.has_witt) return out;
  for (const auto& [name, m] : ws.system.modules) {
    const auto& [key, piece] = *m.pieces.begin();
    std::string element = "[";
    for (std::size_t i = 0; i < piece->presentation_generators(); ++i) element += i ? ",0" : "0";
    element += "]";
    out.push_back({"eval", "--expr", "id", "--module", name, "--degree", std::to_string(key.degree), "--twist",
                   format_pic(*m.scheme, m.representative(key.cls).cls), "--element", element});
  }
  for (const auto& [name, b] : ws.bases) {
    out.push_back({"check-basis", "--basis", name});
    out.push_back({"check-basis", "--basis", name, "--all-choices", "--linearity", "20"});
    for (const auto& [other, o] : ws.bases) out.push_back({"union-bases", "--basis", name, "--with", other});
    for (const auto& [mname, f] : g.morphisms)
      for (const char* mode : {"pullback", "affine", "push", "devissage"})
        out.push_back({"transfer-basis", "--basis", name, "--morphism", mname, "--mode", mode});
  }
  for (const auto& [name, l] : ws.ledgers) out.push_back({"check-localization", "--ledger", name});
  return out;
}

}  // namespace

void determinism_suite(Checks& c) {
  std::size_t pairs = 0;
  for (const char* fx : kFixtures) {
    Workspace ws = load_workspace(fixture_path(fx));
    for (auto args : commands_for(ws)) {
      for (bool json : {false, true}) {
        if (json) args.push_back("--json");
        Run a = run(fx, args), b = run(fx, args);
        std::string what = std::string(fx) + ":";
        for (const auto& s : args) what += " " + s;
        c.expect(a.code == b.code && a.out == b.out && a.err == b.err, "output differs between runs of" + what);
        c.expect(a.code != 2, "usage error in" + what);
        ++pairs;
      }
    }
  }
  c.expect(pairs >= 100, "too few command runs: " + std::to_string(pairs));
}

}  // namespace wtc::acceptance
