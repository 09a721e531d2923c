#pragma once

// Exact presentations of total Witt groups as graded modules over the base
// Witt ring, with alignment transport, lax products and evaluation of words.
//
// Pieces are indexed by (degree mod 4, class q in Pic/2). The piece at q
// stands for the Witt group twisted by the representative ℓ_q, the canonical
// lift of q. Stored data follows one convention throughout: whenever a value
// naturally lives at a twist N ≡ ℓ_q, it is moved to ℓ_q by alis of the
// standard alignment N ⇝ ℓ_q.

#include <map>
#include <tuple>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtc/expr.hpp"

namespace wtc {

struct PieceKey {
  int degree = 0;  // mod 4
  F2Vec cls;       // class in Pic/2

  bool operator<(const PieceKey& o) const { return std::tie(degree, cls) < std::tie(o.degree, o.cls); }
  bool operator==(const PieceKey& o) const { return degree == o.degree && cls == o.cls; }
};

int mod4(long degree);

/// Bilinear map P x Q -> R given on canonical generators.
struct Bilinear {
  PieceKey left, right, target;
  std::vector<std::vector<IntVector>> table;  // table[a][b]: canonical coordinates in target

  GroupElement apply(const GroupElement& x, const GroupElement& y, const GroupPtr& target_group) const;
};

/// A graded module over the base ring on (scheme, support). The base ring itself
/// is stored in the same shape with scheme X and π the identity.
struct WittModule {
  std::string name;
  SchemePtr scheme;
  MorphismPtr pi;
  std::string support = "full";
  /// Scope P as classes in Pic_X(Y)/2.
  std::vector<F2Vec> scope;
  std::map<PieceKey, GroupPtr> pieces;
  /// Keyed by (ring piece, module piece).
  std::map<std::pair<PieceKey, PieceKey>, Bilinear> action;
  /// Per piece, one automorphism per generator of the 2-torsion of Pic.
  std::map<PieceKey, std::vector<IntMatrix>> torsion_aut;
  /// Per piece, optional explicit automorphisms per unit generator.
  std::map<PieceKey, std::vector<IntMatrix>> unit_aut;
  /// 2-torsion of Pic(scheme), whose generators index torsion_aut.
  Subgroup torsion;

  GroupPtr piece(const PieceKey& k) const;
  PieceKey key(long degree, const GroupElement& twist) const;
  F2Vec pic_class(const GroupElement& twist) const;
  /// Class in Pic_X(Y)/2.
  F2Vec relative_class(const GroupElement& twist) const;
  bool in_scope(const GroupElement& twist) const;
  LineBundle representative(const F2Vec& cls) const;
  std::string key_text(const PieceKey& k) const;
};

/// w = alis(transport)(g) with g in the piece of (degree, class of twist).
struct RepresentedClass {
  std::string module;
  long degree = 0;
  GroupElement g;
  AlignmentClass transport;  // ℓ_q ⇝ twist

  const LineBundle& twist() const { return transport.target(); }
  std::string to_string() const;
};

enum class MapDirection { Forward, Backward };

/// A registered graded homomorphism: pull-back, restriction and extension are
/// stored per source piece (alis(S(f*ℓ_q ⇝ ℓ_q'))∘f*); push-forward and boundary
/// per target piece (f_*∘alis(S(ℓ_q̄ ⇝ ω+f*ℓ_q))).
struct RegisteredMap {
  std::string name;
  GenKind kind = GenKind::Pull;
  MorphismPtr f;  // pull, push: the morphism; restrict, bord: υ; ext: identity
  std::string localization;
  std::string source, target;
  std::map<PieceKey, IntMatrix> matrices;

  MapDirection direction() const {
    return kind == GenKind::Push || kind == GenKind::Bord ? MapDirection::Backward : MapDirection::Forward;
  }
  /// Degree change of the map.
  long shift() const;
  /// ω for backward maps (zero for the boundary).
  GroupElement omega() const;
};

class WittSystem {
 public:
  Geometry geometry;
  WittModule ring;
  GroupElement one;
  /// ⟨e_j⟩ in B[0,0] for each unit generator of X.
  std::vector<GroupElement> unit_classes;
  GroupElement minus_one;
  std::map<std::string, WittModule> modules;
  std::map<std::string, RegisteredMap> maps;

  static constexpr const char* kRing = "ring";

  const WittModule& module(const std::string& name) const;
  const RegisteredMap& map(const std::string& name) const;

  /// Action of an automorphism σ of ℓ_q on the piece key of module m.
  GroupHom aut(const WittModule& m, const PieceKey& k, const AlignmentClass& sigma) const;
  /// Multiplication by ⟨a⟩ for a unit class a of X.
  GroupHom unit_multiplication(const WittModule& m, const PieceKey& k, const F2Vec& a) const;

  RepresentedClass canonical(const std::string& module, long degree, const GroupElement& twist,
                             const GroupElement& g) const;
  RepresentedClass zero(const std::string& module, long degree, const LineBundle& twist) const;
  RepresentedClass transport(const RepresentedClass& w, const AlignmentClass& b) const;
  bool compare(const RepresentedClass& w1, const RepresentedClass& w2) const;
  /// Coordinates of w relative to the canonical transport to its twist.
  GroupElement coordinates(const RepresentedClass& w) const;
  RepresentedClass add(const RepresentedClass& a, const RepresentedClass& b) const;
  RepresentedClass negate(const RepresentedClass& a) const;

  /// λ ·_A w = alis(A)(π*λ · w).
  RepresentedClass lax_product(const RepresentedClass& lambda, const KAlignmentClass& a,
                               const RepresentedClass& w) const;
  struct Term {
    RepresentedClass lambda;
    KAlignmentClass c;
    RepresentedClass w;
  };
  RepresentedClass lax_combination(const std::vector<Term>& terms, long degree, const LineBundle& target) const;
  /// λ2·λ1 in the ring.
  RepresentedClass ring_product(const RepresentedClass& l2, const RepresentedClass& l1) const;

  /// Apply a registered map. Backward maps need the codomain twist.
  RepresentedClass apply(const RegisteredMap& map, const RepresentedClass& w,
                         const std::optional<GroupElement>& target_twist = std::nullopt) const;
  /// Registered map for a generator acting on the given module; throws MissingMap.
  const RegisteredMap& find_map(const Generator& gen, const std::string& source_module) const;
  RepresentedClass eval(const MorphismExpr& e, const RepresentedClass& w) const;

  /// Every element of every piece of a module, canonically represented; free
  /// coordinates range over [-radius, radius].
  std::vector<RepresentedClass> elements(const std::string& module, long radius = 2,
                                         std::size_t limit = 1u << 14) const;

  /// Load-time axioms; throws ValidationError naming the failing data.
  void validate() const;
};

/// Builds ring, modules and maps from workspace JSON on top of a parsed geometry.
WittSystem parse_witt_system(Geometry geometry, const nlohmann::json& j);
void serialize_witt_system(const WittSystem& w, nlohmann::json& out);

}  // namespace wtc
