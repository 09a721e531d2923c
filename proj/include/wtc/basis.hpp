#pragma once

// Total bases: θ-maps per (degree, twist class) cell, basis surgery,
// transfer along pull-backs and push-forwards, and the localization ledger.

#include <optional>
#include <string>
#include <vector>

#include "wtc/module.hpp"

namespace wtc {

struct BasisMember {
  std::string id;
  RepresentedClass w;
};

struct BasisCandidate {
  std::string name;
  std::string module;
  /// Scope P as classes in Pic_X(Y)/2.
  std::vector<F2Vec> scope;
  std::vector<BasisMember> family;
};

/// One (degree, class) cell of a θ computation.
struct ThetaCell {
  int degree = 0;
  F2Vec cls;           // class q in Pic(Y)/2
  F2Vec relative;      // p in Pic_X(Y)/2
  std::string twist;   // printed target twist
  std::vector<std::string> members;
  std::size_t rows = 0, cols = 0;
  bool iso = false;
  std::string witness;  // kernel element or missed target element
  std::size_t choices = 1;
  bool choice_independent = true;
  std::string choice_witness;
};

enum class ChoiceMode { Fixed, All };

struct ThetaReport {
  std::string candidate;
  std::string module;
  ChoiceMode mode = ChoiceMode::Fixed;
  std::vector<ThetaCell> cells;

  bool pass() const;
  /// First failing cell, if any.
  const ThetaCell* failure() const;
};

/// Relative class of a member's twist.
F2Vec member_class(const WittSystem& w, const BasisCandidate& c, const BasisMember& m);

/// θ: ⊕ B[k−j_s, K_s] -> G[k, L] for explicit K-alignments C_s: L_s ⇝_{K_s} L.
/// Coordinates in the target are relative to the standard transport to L.
struct ThetaMap {
  GroupHom map;
  /// Offset of each member's block among the source presentation generators.
  std::vector<std::size_t> offsets;
  std::vector<PieceKey> blocks;
};
ThetaMap theta_map(const WittSystem& w, const std::string& module, const std::vector<RepresentedClass>& members,
                   const std::vector<KAlignmentClass>& alignments, long degree, const LineBundle& target);

/// Base twist K with π*K + L_s ≡ target in Pic(Y)/2, as the canonical lift.
LineBundle coefficient_twist(const WittSystem& w, const WittModule& m, const LineBundle& ls, const LineBundle& target);

ThetaReport check_total_basis(const WittSystem& w, const BasisCandidate& c, ChoiceMode mode = ChoiceMode::Fixed);

/// λ ·_{C''} w with C'' = A∘(id⊗C) compared to λ ·_A (x ·_C w) for random data;
/// returns the number of triples checked, throws InternalContradiction on failure.
std::size_t check_theta_linearity(const WittSystem& w, const BasisCandidate& c, std::size_t triples, unsigned seed);

struct UnionResult {
  BasisCandidate candidate;
  bool independent = true;
  std::vector<F2Vec> overlap;
};
UnionResult union_bases(const WittSystem& w, const BasisCandidate& c1, const BasisCandidate& c2);

/// Greedy partition of P into chunks on which the relative pullback along f is injective.
std::vector<std::vector<F2Vec>> chunk_scope(const Geometry& g, const std::vector<F2Vec>& scope, const MorphismPtr& f);

enum class TransferMode { Pullback, Affine, Push, Devissage };

struct TransferResult {
  BasisCandidate candidate;
  std::optional<ThetaReport> source_report;
  std::optional<ThetaReport> target_report;
  /// Verdict carried over from the source; agrees with target_report when present.
  bool transferred_pass = false;
};

/// Pull-backs use Ā_s: f*L_s ⇝ L̄_s (default identity); push-forwards use
/// Ā_s: L̄_s ⇝ ω + f*L_s (default standard). For push modes `scope` is the
/// target P; when empty the target module's full scope is used.
TransferResult transfer_basis(const WittSystem& w, const BasisCandidate& c, const MorphismPtr& f, TransferMode mode,
                              const std::vector<F2Vec>& scope = {},
                              const std::vector<std::optional<AlignmentClass>>& alignments = {});

// ---------------------------------------------------------------- localization

struct LedgerMember {
  std::string id;
  RepresentedClass w;
  /// U-side members: the twist on Y restricting to w's twist.
  std::optional<LineBundle> over;
};

struct LocalizationLedger {
  std::string name;
  std::string localization;
  std::string z_module, y_module, u_module;
  std::string e, restrict, bord;  // registered map names
  std::vector<F2Vec> scope;       // P in Pic_X(Y)/2
  std::vector<LedgerMember> v, w_prime;  // indexed by the same set
  std::vector<LedgerMember> w, u_prime;
  std::vector<LedgerMember> u, v_prime;
  std::vector<std::string> asserted;  // two of "Z", "Y", "U"
};

struct SimilitudeRecord {
  std::string condition;  // "a", "b", "c"
  std::string id;
  std::string witness;    // alignment realizing the similitude
};

struct SideVerdict {
  std::string side;  // "Z", "Y", "U"
  std::string how;   // "verified-by-θ", "derived-by-five-lemma"
  bool pass = false;
  std::optional<ThetaReport> report;
  std::string note;
};

struct LocalizationReport {
  std::string ledger;
  std::vector<SimilitudeRecord> similitudes;
  std::vector<std::string> conclusions;  // "(1) id: ok" lines
  bool conclusions_hold = true;
  std::size_t exactness_positions = 0;
  std::vector<SideVerdict> sides;
  /// Derived third verdict re-checked directly.
  std::optional<bool> derived_agrees;

  bool pass() const;
};

LocalizationReport check_localization(const WittSystem& w, const LocalizationLedger& ledger);

/// Builds a ledger from Z-side and U-side bases on one υ-injective chunk:
/// v ↦ w' = e(v) when e(v) ≠ 0, v' = ∂(u) for the U-members with ∂(u) ≠ 0,
/// and w a υ*-preimage of each remaining U-member.
LocalizationLedger derive_ledger(const WittSystem& w, const std::string& localization, const std::string& e,
                                 const std::string& restrict, const std::string& bord, const BasisCandidate& z_side,
                                 const BasisCandidate& u_side, const std::vector<F2Vec>& scope);

/// Candidate formed by one side of a ledger.
BasisCandidate ledger_side(const WittSystem& w, const LocalizationLedger& l, const std::string& side);

}  // namespace wtc
