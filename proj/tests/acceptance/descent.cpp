#include "acceptance.hpp"
#include "wtc/error.hpp"

namespace wtc::acceptance {

namespace {

constexpr long kRadius = 10;

void tower_cases(Checks& c, const Geometry& g, const MorphismPtr& f, std::size_t& cases, std::size_t& refused) {
  Tower t = g.tower(f);
  t.validate();
  std::vector<LineBundle> ls = bundles(t.f->target, kRadius);
  for (DescentMode mode : {DescentMode::Plain, DescentMode::Shriek}) {
    if (mode == DescentMode::Shriek && !f->proper) continue;
    bool shriek = mode == DescentMode::Shriek;
    auto up = [&](const LineBundle& l) { return shriek ? shriek_bundle(*f, l) : pull_bundle(*f, l); };
    for (const auto& l1 : ls)
      for (const auto& l2 : ls) {
        auto abars = alignments_between(up(l1), up(l2));
        if (abars.empty()) continue;
        bool related = same_relative_class_mod2(*t.pi, l1, l2);
        std::vector<AlignmentClass> homs = alignments_between(l1, l2);
        for (const auto& abar : abars) {
          ++cases;
          std::vector<AlignmentClass> oracle;
          for (const auto& a : homs)
            if ((shriek ? shriek_alignment(*f, a) : pull_alignment(*f, a)) == abar) oracle.push_back(a);
          std::string where = f->name + " " + abar.to_string();
          try {
            DescentCertificate cert = descend_alignment(t, abar, l1, l2, mode);
            c.expect(related, "descent succeeded across relative classes: " + where);
            c.expect(cert.check, "certificate check flag unset: " + where);
            AlignmentClass back = shriek ? shriek_alignment(*f, cert.output) : pull_alignment(*f, cert.output);
            c.expect(back == abar && cert.input == abar, "certificate does not recompose: " + where);
            bool member = false, smallest = true, one_m = true;
            for (const auto& a : oracle) {
              member |= a == cert.output;
              smallest &= !(a.u() < cert.output.u());
              one_m &= a.m() == cert.output.m();
            }
            c.expect(member, "output outside the oracle solution set: " + where);
            c.expect(smallest && one_m, "output is not the canonical solution: " + where);
          } catch (const Error& e) {
            c.expect(!related, "descent failed on related classes: " + where + ": " + e.message());
            c.expect(e.kind() == ErrorKind::ClassMismatch, "unexpected failure kind " + std::string(to_string(e.kind())));
            c.expect(oracle.empty(), "oracle has solutions where descent failed: " + where);
            ++refused;
          }
        }
      }
  }
}

}  // namespace

void descent_suite(Checks& c) {
  std::size_t cases = 0, refused = 0;
  for (const char* fx : {"f1.json", "torsion_pic.json"}) {
    Geometry g = load_geometry(fx);
    for (const auto& [name, f] : g.morphisms) {
      if (f->source->name == g.base || f->target->name == g.base) continue;
      tower_cases(c, g, f, cases, refused);
    }
  }
  c.expect(refused > 0, "no case with distinct relative classes was exercised");
  c.expect(cases >= 10000, "too few descent cases: " + std::to_string(cases));
}

}  // namespace wtc::acceptance
