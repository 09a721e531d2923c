#include <optional>

#include "acceptance.hpp"
#include "oracles.hpp"
#include "wtc/error.hpp"
#include "wtc/workspace.hpp"

namespace wtc::acceptance {

void theta_suite(Checks& c) {
  unsigned seed = seed_or(6);
  std::size_t cells = 0, choices = 0;
  for (const char* fx : {"point.json", "affine_line.json", "projective_line.json"}) {
    Workspace ws = load_workspace(fixture_path(fx));
    std::size_t triples = 0;
    for (const auto& [name, basis] : ws.bases) {
      std::string where = std::string(fx) + " " + name;
      ThetaReport fixed = check_total_basis(ws.system, basis);
      ThetaReport all = check_total_basis(ws.system, basis, ChoiceMode::All);
      c.expect(fixed.pass() == all.pass(), "verdict depends on the choices for " + where);
      c.expect(fixed.cells.size() == all.cells.size(), "cell count depends on the mode for " + where);
      for (std::size_t i = 0; i < fixed.cells.size() && i < all.cells.size(); ++i) {
        const ThetaCell& a = all.cells[i];
        c.expect(a.choice_independent, "cell k=" + std::to_string(a.degree) + " twist " + a.twist + " of " + where +
                                           " depends on the choices: " + a.choice_witness);
        c.expect(fixed.cells[i].iso == a.iso, "cell verdict differs between modes for " + where);
        ++cells;
        choices += a.choices;
      }
      try {
        triples += check_theta_linearity(ws.system, basis, 100, seed);
      } catch (const Error& e) {
        c.fail("linearity fails for " + where + ": " + e.message() + " [" + e.witness() + "]");
      }
    }
    c.expect(triples >= 100, std::string("too few linearity triples on ") + fx + ": " + std::to_string(triples));
  }
  c.expect(choices > cells, "no cell offered more than one choice");
}

void projective_line_suite(Checks& c) {
  WittSystem w = load_system("projective_line.json");
  // the base ring is Z/2 in degree 0 and vanishes elsewhere
  for (const auto& [key, g] : w.ring.pieces) {
    bool unit_piece = key.degree == 0 && is_zero(key.cls);
    c.expect(unit_piece ? g->invariants() == IntVector{Integer(2)} : g->is_trivial(), "unexpected base ring piece");
  }
  const WittModule& pt = w.module("W_pt");
  GroupPtr b00 = pt.piece(pt.key(0, GroupElement::zero(pt.scheme->pic)));
  BasisCandidate point{"point", "W_pt", pt.scope,
                       {{"one", w.canonical("W_pt", 0, GroupElement::zero(pt.scheme->pic),
                                            GroupElement::from_presentation(b00, {Integer(1)}))}}};

  BasisCandidate open = transfer_basis(w, point, w.geometry.morphism("p"), TransferMode::Affine).candidate;
  const WittModule& line = w.module("W_P1");
  std::optional<BasisCandidate> total;
  std::size_t ledgers = 0;
  for (const auto& chunk : chunk_scope(w.geometry, line.scope, w.geometry.morphism("upsilon"))) {
    BasisCandidate closed =
        transfer_basis(w, point, w.geometry.morphism("iota"), TransferMode::Devissage, chunk).candidate;
    LocalizationLedger l = derive_ledger(w, "loc", "e", "res", "bd", closed, open, chunk);
    LocalizationReport r = check_localization(w, l);
    c.expect(r.pass(), "localization ledger fails on a chunk");
    c.expect(r.exactness_positions == 12, "exactness not checked at all twelve positions");
    bool derived = false;
    for (const auto& s : r.sides) derived |= s.how == "derived-by-five-lemma" && s.pass;
    c.expect(derived, "no side was derived by the five lemma");
    c.expect(r.derived_agrees.has_value() && *r.derived_agrees, "five lemma verdict disagrees with θ");
    BasisCandidate y = ledger_side(w, l, "Y");
    total = total ? union_bases(w, *total, y).candidate : y;
    ++ledgers;
  }
  c.expect(ledgers == 2, "expected two chunks of Pic(P1)/2");
  if (!c.expect(total.has_value(), "no basis was assembled")) return;
  c.expect(total->family.size() == 2, "total basis has " + std::to_string(total->family.size()) + " members");
  c.expect(check_total_basis(w, *total).pass(), "assembled basis fails check_total_basis");

  // independent verification: every cell by exhaustive enumeration
  for (long k = 0; k < 4; ++k)
    for (const auto& q : enumerate(mod2_reduction(line.scheme->pic).dim()))
      c.expect(brute_force_iso(w, *total, k, q), "cell k=" + std::to_string(k) + " is not a bijection");
}

}  // namespace wtc::acceptance
