#pragma once

// SmPic certification, Picard chases over a tower Ȳ -> Y -> X, and
// constructive descent of alignments along f: Ȳ -> Y.

#include <optional>
#include <string>

#include "wtc/picard.hpp"

namespace wtc {

struct SmPicCertificate {
  std::string morphism;
  bool injective = true;         // (I)  π*: Pic(X) -> Pic(Y)
  bool no_two_torsion = true;    // (II) Pic_X(Y) has no 2-torsion
  bool units_surjective = true;  // (III) Gm(X) -> Gm(Y)/2
  std::optional<GroupElement> kernel_witness;   // in Pic(X)
  std::optional<GroupElement> torsion_witness;  // in Pic(Y), a lift of a 2-torsion class of Pic_X(Y)
  std::optional<F2Vec> unit_witness;            // in Gm(Y)/2

  bool pass() const { return injective && no_two_torsion && units_surjective; }
  /// "pass" or the failing conditions with witnesses, in a stable format.
  std::string summary() const;
};

SmPicCertificate certify_smpic(const Morphism& pi);
/// Throws NotSmPic naming the first failing condition.
void require_smpic(const Morphism& pi);

/// Pic_X(Y) = coker(π*) with the projection from Pic(Y).
struct RelativePic {
  GroupPtr group;
  GroupHom projection;
  /// A preimage in Pic(Y) of a relative class.
  GroupElement lift(const GroupElement& x, const GroupPtr& pic) const;
};

RelativePic relative_pic(const Morphism& pi);

/// f: Ȳ -> Y together with the structure maps π̄: Ȳ -> X and π: Y -> X.
struct Tower {
  MorphismPtr f;
  MorphismPtr pi_bar;
  MorphismPtr pi;

  /// Checks shapes and π̄* = f*∘π* on Picard groups and units (HypothesisFailed otherwise).
  void validate() const;
};

/// Restriction of f* to 2-torsion; bijective on SmPic towers.
struct TwoTorsionChase {
  Subgroup torsion;      // ₂Pic(Y)
  Subgroup torsion_bar;  // ₂Pic(Ȳ)
  GroupHom restricted;   // ₂Pic(Y) -> ₂Pic(Ȳ)
  bool bijective = false;
  std::optional<GroupElement> witness;  // kernel element or missed element (in Pic)

  /// The unique x in ₂Pic(Y) with f*x = xbar; throws HypothesisFailed if none.
  GroupElement preimage(const GroupElement& xbar) const;
};

TwoTorsionChase chase_two_torsion(const Tower& t);

/// 0 -> Pic(X)/2 -> Pic(Y)/2 -> Pic_X(Y)/2 -> 0, as a report over F2.
ExactnessReport chase_mod2_sequence(const Morphism& pi);

struct JointInjectivity {
  bool injective = true;
  std::optional<F2Vec> witness;  // nonzero class of Pic(Y)/2 with both images zero
  bool cartesian = true;
  std::string cartesian_witness;
};

/// Pic(Y)/2 -> Pic_X(Y)/2 ⊕ Pic(Ȳ)/2, plus the cartesian check of the square
/// with corners Pic(Y)/2, Pic_X(Y)/2, Pic(Ȳ)/2, Pic_X(Ȳ)/2 by enumeration.
JointInjectivity chase_joint_injectivity(const Tower& t);

/// Induced map Pic_X(Y) -> Pic_X(Ȳ).
GroupHom relative_pullback(const Tower& t);

/// Given [lbar] = [f*l] in Pic_X(Ȳ)/2, returns l' = l + π*K with [l'] = [l] in
/// Pic_X(Y)/2 and [lbar] = [f*l'] in Pic(Ȳ)/2. K is the first such class of
/// Pic(X)/2 in lexicographic order. HypothesisFailed if none exists.
LineBundle chase_adjust(const Tower& t, const LineBundle& l, const LineBundle& lbar);

bool same_relative_class_mod2(const Morphism& pi, const LineBundle& l1, const LineBundle& l2);

enum class DescentMode { Plain, Shriek };

struct DescentCertificate {
  AlignmentClass input;
  AlignmentClass output;
  DescentMode mode = DescentMode::Plain;
  bool check = false;
};

/// Finds A: l1 ⇝ l2 with f*A = abar (plain) or f!A = abar (shriek). Among all
/// such A the output has the unique admissible m and the lexicographically
/// smallest unit vector.
DescentCertificate descend_alignment(const Tower& t, const AlignmentClass& abar, const LineBundle& l1,
                                     const LineBundle& l2, DescentMode mode);

enum class RealignSide { Pull, Push };

/// Pull: ā1: f*L1 ⇝ L̄, ā2: f*L2 ⇝ L̄, returns A with ā2∘f*A = ā1.
/// Push: ā1: L̄ ⇝ ω⊗f*L1, ā2: L̄ ⇝ ω⊗f*L2, returns A with f!A∘ā1 = ā2.
AlignmentClass realign(const Tower& t, const AlignmentClass& a1bar, const AlignmentClass& a2bar,
                       const LineBundle& l1, const LineBundle& l2, RealignSide side);

/// C: K1 ⇝ K2 on X with a2∘((π*C)⊗id_{L1}) = a1.
AlignmentClass move_coefficient(const MorphismPtr& pi, const KAlignmentClass& a1, const KAlignmentClass& a2);

enum class Frame { Pull, Push };

/// The squares relating a K-alignment C: L ⇝_K M on Y and C̄: L̄ ⇝_K M̄ on Ȳ.
/// Pull frame: Ā: f*L ⇝ L̄, B̄: f*M ⇝ M̄, and B̄∘f*C = C̄∘(id⊗Ā).
/// Push frame: Ā: L̄ ⇝ ω⊗f*L, B̄: M̄ ⇝ ω⊗f*M, and B̄∘C̄ = f!C∘(id⊗Ā).
struct CoefficientSquare {
  Tower tower;
  Frame frame = Frame::Pull;
  AlignmentClass abar;
  AlignmentClass bbar;
  LineBundle l;  // on Y
  LineBundle m;  // on Y

  void validate() const;
  KAlignmentClass lift_up(const KAlignmentClass& c) const;      // C -> C̄
  KAlignmentClass descend(const KAlignmentClass& cbar) const;   // C̄ -> C
  bool commutes(const KAlignmentClass& c, const KAlignmentClass& cbar) const;
};

}  // namespace wtc
