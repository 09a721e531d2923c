#pragma once

// Formal words in per, lbi, alis, pull-backs, push-forwards, extension of
// supports, restriction to an open and the boundary map, with normalization.
//
// A word is stored in application order: word[0] acts first. The text form
// composes right to left, so "push(f) . per(h)" is the word [per(h), push(f)].

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wtc/geometry.hpp"

namespace wtc {

/// W^degree_support(scheme, twist)
struct TwistedGroupRef {
  SchemePtr scheme;
  std::string support = "full";
  long degree = 0;
  GroupElement twist;

  bool operator==(const TwistedGroupRef& o) const {
    return scheme == o.scheme && support == o.support && degree == o.degree && twist == o.twist;
  }
  bool operator!=(const TwistedGroupRef& o) const { return !(*this == o); }
  std::string to_string() const;
};

/// Formal Z-combination of named Picard atoms and F2-combination of unit atoms,
/// kept alongside the class so that printed words stay readable.
struct Label {
  std::map<std::string, long> pic;
  std::map<std::string, int> units;

  bool empty() const { return pic.empty() && units.empty(); }
  Label operator+(const Label& o) const;
  /// Every atom a becomes f*a.
  Label pulled(const std::string& morphism) const;
  std::string pic_text() const;
  std::string unit_text() const;
  bool operator==(const Label& o) const { return pic == o.pic && units == o.units; }
};

enum class GenKind { Per, Lbi, Alis, Pull, Push, Ext, Restrict, Bord };

struct Generator {
  GenKind kind = GenKind::Alis;
  // Per, Lbi, Alis: class of the alignment on the current scheme
  GroupElement m;
  F2Vec u;
  Label label;
  // Pull, Push
  MorphismPtr f;
  // Ext, Restrict, Bord
  std::string localization;
  // Push, Bord: explicit codomain twist (otherwise the canonical preimage)
  std::optional<GroupElement> target_twist;

  bool is_alis() const { return kind == GenKind::Per || kind == GenKind::Lbi || kind == GenKind::Alis; }
  bool is_identity_class() const;
  std::string to_string() const;
};

struct MorphismExpr {
  std::vector<Generator> word;
  /// refs[i] is the domain of word[i]; refs.back() is the codomain.
  std::vector<TwistedGroupRef> refs;

  const TwistedGroupRef& domain() const { return refs.front(); }
  const TwistedGroupRef& codomain() const { return refs.back(); }
  std::string to_string() const;
};

/// Scheme of the domain read off the first morphism-type generator, if any.
std::optional<std::string> infer_domain_scheme(const Geometry& g, const std::string& text);

/// Parse text and type-check it against the given domain.
/// Throws ParseError for syntax, TypeMismatch for ill-typed words.
MorphismExpr parse_expr(const Geometry& g, const std::string& text, const TwistedGroupRef& domain);

/// Recompute the endpoint chain; throws TypeMismatch naming the first bad generator.
MorphismExpr typecheck(const Geometry& g, std::vector<Generator> word, const TwistedGroupRef& domain);

/// Canonical word: alis classes merged into one per gap between the remaining
/// generators, moved past pulls/restrictions toward the codomain and past
/// pushes, extensions and boundaries toward the domain.
MorphismExpr normalize(const Geometry& g, const MorphismExpr& e);

/// Rewrite budget counter exposed for tests.
struct NormalizeStats {
  std::size_t steps = 0;
};
MorphismExpr normalize(const Geometry& g, const MorphismExpr& e, NormalizeStats& stats);

/// Normalization applying single-step rewrites in an order driven by the seed.
MorphismExpr normalize_randomized(const Geometry& g, const MorphismExpr& e, unsigned seed, NormalizeStats& stats);

/// Same normal form up to identity-class alis generators. Throws TypeMismatch
/// when the domains differ; differing codomains compare unequal.
bool expr_equal(const Geometry& g, const MorphismExpr& a, const MorphismExpr& b);

/// alis(A) ∘ f* with A: f*L ⇝ L̄.
struct LaxPull {
  MorphismPtr f;
  AlignmentClass a;
};
/// f_* ∘ alis(A) with A: L̄ ⇝ ω_f + f*L.
struct LaxPush {
  MorphismPtr f;
  AlignmentClass a;
};

/// outer ∘ inner for inner = Pull f[Ā] and outer = Pull g[Ã]: Pull fg[Ã ∘ g*Ā].
LaxPull compose_lax(const LaxPull& outer, const LaxPull& inner);
/// outer ∘ inner for inner = Push g[Ã] and outer = Push f[Ā]: Push fg[g!Ā ∘ Ã].
LaxPush compose_lax(const LaxPush& outer, const LaxPush& inner);

Generator make_alis(const AlignmentClass& a, Label label = {});
Generator make_pull(const MorphismPtr& f);
Generator make_push(const MorphismPtr& f, std::optional<GroupElement> target_twist = std::nullopt);
Generator make_local(GenKind kind, const std::string& localization,
                     std::optional<GroupElement> target_twist = std::nullopt);

/// Word of a lax operation, typed from the given domain.
MorphismExpr lax_word(const Geometry& g, const LaxPull& p, const TwistedGroupRef& domain);
MorphismExpr lax_word(const Geometry& g, const LaxPush& p, const TwistedGroupRef& domain);

}  // namespace wtc
