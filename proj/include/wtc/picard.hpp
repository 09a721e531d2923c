#pragma once

// Skeletal Picard data and quadratic alignment classes.
//
// A line bundle is its class in Pic. An alignment (M, φ): L1 ⇝ L2 up to
// isomorphism is the pair (m, u) with m = [M] and u the class of φ in
// Gm/Gm² relative to the canonical identifications; 2m + L1 = L2.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wtc/abelian.hpp"
#include "wtc/f2.hpp"

namespace wtc {

struct Scheme;
struct Morphism;
using SchemePtr = std::shared_ptr<const Scheme>;
using MorphismPtr = std::shared_ptr<const Morphism>;

struct Scheme {
  std::string name;
  GroupPtr pic;
  /// Labels of the presentation generators of pic, used for parsing and printing.
  std::vector<std::string> pic_labels;
  F2Space units;
  /// Declared closed-support labels; "full" is always implicitly present.
  std::vector<std::string> supports;
  /// Name of the base scheme X (empty when this scheme is the base).
  std::string base;
  /// Name of the structure morphism π to the base (empty for the base).
  std::string structure;
  /// Named line bundles, usable wherever a Picard class is parsed.
  std::map<std::string, GroupElement> named_bundles;

  bool has_support(const std::string& label) const;
};

GroupElement parse_pic(const Scheme& s, const std::string& text);
std::string format_pic(const Scheme& s, const GroupElement& x);
F2Vec parse_unit(const Scheme& s, const std::string& text);
std::string format_unit(const Scheme& s, const F2Vec& u);

struct ProperData {
  GroupElement omega;  // class of ω_f on the source
  long dimension = 0;  // relative dimension
};

struct Morphism {
  std::string name;
  SchemePtr source;
  SchemePtr target;
  GroupHom pic_pullback;  // target.pic -> source.pic
  F2Map unit_pullback;    // target.units -> source.units
  std::optional<ProperData> proper;
  bool affine_bundle = false;
  bool witt_pullback_iso = false;
  bool witt_pushforward_iso = false;
  /// Pullback on supports: target label -> source label.
  std::map<std::string, std::string> pull_supports;
  /// Pushforward on supports: source label -> target label.
  std::map<std::string, std::string> push_supports;

  static MorphismPtr identity(const SchemePtr& s);
  /// outer ∘ inner, with ω_{outer∘inner} = ω_inner + inner*ω_outer.
  static MorphismPtr compose(const MorphismPtr& outer, const MorphismPtr& inner);

  std::string pull_support(const std::string& label) const;
  std::string push_support(const std::string& label) const;
};

/// Throws NotProper when f has no proper data.
const ProperData& require_proper(const Morphism& f);

struct LineBundle {
  SchemePtr scheme;
  GroupElement cls;

  static LineBundle trivial(const SchemePtr& s);
  LineBundle operator+(const LineBundle& o) const;
  LineBundle operator-(const LineBundle& o) const;
  bool operator==(const LineBundle& o) const { return scheme == o.scheme && cls == o.cls; }
  bool operator!=(const LineBundle& o) const { return !(*this == o); }
};

LineBundle pull_bundle(const Morphism& f, const LineBundle& l);
/// ω_f ⊗ f*L
LineBundle shriek_bundle(const Morphism& f, const LineBundle& l);

class AlignmentClass {
 public:
  AlignmentClass() = default;
  /// Throws TypeMismatch unless 2m + source = target on one scheme.
  AlignmentClass(LineBundle source, LineBundle target, GroupElement m, F2Vec u);

  static AlignmentClass identity(const LineBundle& l);

  const LineBundle& source() const { return source_; }
  const LineBundle& target() const { return target_; }
  const GroupElement& m() const { return m_; }
  const F2Vec& u() const { return u_; }
  const SchemePtr& scheme() const { return source_.scheme; }

  bool is_identity_shaped() const;
  bool operator==(const AlignmentClass& o) const;
  bool operator!=(const AlignmentClass& o) const { return !(*this == o); }
  /// Order by (m, u) for canonical choices.
  bool operator<(const AlignmentClass& o) const;

  std::string to_string() const;

 private:
  LineBundle source_;
  LineBundle target_;
  GroupElement m_;
  F2Vec u_;
};

/// Existence test: [l1] = [l2] in Pic/2.
bool alignment_exists(const LineBundle& l1, const LineBundle& l2);
/// All classes l1 ⇝ l2; throws NotEnumerable when the set is infinite or too large.
std::vector<AlignmentClass> alignments_between(const LineBundle& l1, const LineBundle& l2,
                                               std::size_t limit = 1u << 16);
/// (m, 0) with m the canonical solution of 2m = l2 - l1; throws ClassMismatch if none.
AlignmentClass standard_alignment(const LineBundle& l1, const LineBundle& l2);

/// a2 ∘ a1
AlignmentClass compose(const AlignmentClass& a2, const AlignmentClass& a1);
AlignmentClass invert(const AlignmentClass& a);
AlignmentClass tensor(const AlignmentClass& a1, const AlignmentClass& a2);
AlignmentClass pull_alignment(const Morphism& f, const AlignmentClass& a);
/// f!(A) = id_{ω_f} ⊗ f*A
AlignmentClass shriek_alignment(const Morphism& f, const AlignmentClass& a);
/// Same class with both endpoints shifted by -ω_f (inverse of the ω twist).
AlignmentClass strip_omega(const Morphism& f, const AlignmentClass& a);

enum class Side { Left, Right };
/// Left: B with B∘a1 = a2. Right: B with a1∘B = a2.
AlignmentClass solve_composition(const AlignmentClass& a1, const AlignmentClass& a2, Side side);

/// K-alignment L1 ⇝_K L2: an alignment π*K ⊗ L1 ⇝ L2.
class KAlignmentClass {
 public:
  KAlignmentClass() = default;
  KAlignmentClass(MorphismPtr pi, LineBundle k, LineBundle l1, AlignmentClass inner);

  const MorphismPtr& pi() const { return pi_; }
  const LineBundle& k() const { return k_; }
  const LineBundle& l1() const { return l1_; }
  const AlignmentClass& inner() const { return inner_; }
  const LineBundle& l2() const { return inner_.target(); }

  bool operator==(const KAlignmentClass& o) const {
    return k_ == o.k_ && l1_ == o.l1_ && inner_ == o.inner_;
  }

 private:
  MorphismPtr pi_;
  LineBundle k_;
  LineBundle l1_;
  AlignmentClass inner_;
};

}  // namespace wtc
