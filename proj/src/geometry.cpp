#include "wtc/geometry.hpp"

#include "wtc/error.hpp"

namespace wtc {

using nlohmann::json;

SchemePtr Geometry::scheme(const std::string& name) const {
  auto it = schemes.find(name);
  if (it == schemes.end()) throw Error(ErrorKind::ValidationError, "unknown scheme '" + name + "'");
  return it->second;
}

MorphismPtr Geometry::morphism(const std::string& name) const {
  auto it = morphisms.find(name);
  if (it == morphisms.end()) throw Error(ErrorKind::ValidationError, "unknown morphism '" + name + "'");
  return it->second;
}

const Localization& Geometry::localization(const std::string& name) const {
  auto it = localizations.find(name);
  if (it == localizations.end()) throw Error(ErrorKind::ValidationError, "unknown localization '" + name + "'");
  return it->second;
}

MorphismPtr Geometry::structure(const SchemePtr& s) const {
  if (s->structure.empty()) return Morphism::identity(s);
  return morphism(s->structure);
}

Tower Geometry::tower(const MorphismPtr& f) const { return Tower{f, structure(f->source), structure(f->target)}; }

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

SchemePtr parse_scheme(const std::string& name, const json& j, const std::string& base) {
  auto s = std::make_shared<Scheme>();
  s->name = name;
  if (name != base) s->base = base;
  s->pic_labels = string_list(j, "pic_labels");
  const json& pic = j.at("pic");
  std::size_t n = s->pic_labels.size();
  if (pic.contains("invariants")) {
    IntVector inv;
    for (long d : pic.at("invariants").get<std::vector<long>>()) inv.emplace_back(d);
    if (inv.size() != n)
      throw Error(ErrorKind::ValidationError, "scheme " + name + ": one label per invariant factor required");
    s->pic = FgAbGroup::from_invariants(inv);
  } else {
    std::vector<IntVector> rows;
    for (const auto& r : pic.at("relations")) {
      IntVector row;
      for (long x : r.get<std::vector<long>>()) row.emplace_back(x);
      if (row.size() != n) throw Error(ErrorKind::ValidationError, "scheme " + name + ": relation width mismatch");
      rows.push_back(row);
    }
    s->pic = FgAbGroup::from_relations(IntMatrix::from_rows(rows, n), n);
  }
  s->units.labels = string_list(j, "units");
  s->supports = string_list(j, "supports");
  s->structure = j.value("structure", "");
  if (j.contains("bundles"))
    for (const auto& [label, text] : j.at("bundles").items())
      s->named_bundles.emplace(label, parse_pic(*s, text.get<std::string>()));
  return s;
}

MorphismPtr parse_morphism(const std::string& name, const json& j, const Geometry& g) {
  auto m = std::make_shared<Morphism>();
  m->name = name;
  m->source = g.scheme(j.at("source").get<std::string>());
  m->target = g.scheme(j.at("target").get<std::string>());
  auto pic = string_list(j, "pic");
  if (pic.size() != m->target->pic->presentation_generators())
    throw Error(ErrorKind::ValidationError, "morphism " + name + ": need one Picard image per target generator");
  std::vector<GroupElement> images;
  for (const auto& t : pic) images.push_back(parse_pic(*m->source, t));
  try {
    m->pic_pullback = GroupHom::from_generator_images(m->target->pic, m->source->pic, images);
  } catch (const Error& e) {
    throw Error(ErrorKind::ValidationError, "morphism " + name + ": Picard pullback ill formed", e.witness());
  }
  auto units = string_list(j, "units");
  if (units.size() != m->target->units.dim())
    throw Error(ErrorKind::ValidationError, "morphism " + name + ": need one unit image per target unit");
  std::vector<F2Vec> cols;
  for (const auto& t : units) cols.push_back(parse_unit(*m->source, t));
  m->unit_pullback = F2Map(m->target->units.dim(), m->source->units.dim(), cols);
  if (j.contains("proper")) {
    const json& p = j.at("proper");
    m->proper = ProperData{parse_pic(*m->source, p.value("omega", "0")), p.value("dimension", 0L)};
  }
  for (const auto& a : string_list(j, "annotations")) {
    if (a == "affine_bundle")
      m->affine_bundle = true;
    else if (a == "witt_pullback_iso")
      m->witt_pullback_iso = true;
    else if (a == "witt_pushforward_iso")
      m->witt_pushforward_iso = true;
    else
      throw Error(ErrorKind::ValidationError, "morphism " + name + ": unknown annotation '" + a + "'");
  }
  if (j.contains("pull_supports")) m->pull_supports = j.at("pull_supports").get<std::map<std::string, std::string>>();
  if (j.contains("push_supports")) m->push_supports = j.at("push_supports").get<std::map<std::string, std::string>>();
  for (const auto& [t, s] : m->pull_supports)
    if (!m->target->has_support(t) || !m->source->has_support(s))
      throw Error(ErrorKind::ValidationError, "morphism " + name + ": undeclared support in pull_supports", t + "->" + s);
  for (const auto& [s, t] : m->push_supports)
    if (!m->source->has_support(s) || !m->target->has_support(t))
      throw Error(ErrorKind::ValidationError, "morphism " + name + ": undeclared support in push_supports", s + "->" + t);
  return m;
}

json unit_text(const Scheme& s, const F2Vec& u) { return format_unit(s, u); }

}  // namespace

Geometry parse_geometry(const json& j) {
  Geometry g;
  try {
    g.base = j.at("base").get<std::string>();
    for (const auto& [name, sj] : j.at("schemes").items()) g.schemes.emplace(name, parse_scheme(name, sj, g.base));
    g.scheme(g.base);
    if (j.contains("morphisms"))
      for (const auto& [name, mj] : j.at("morphisms").items()) g.morphisms.emplace(name, parse_morphism(name, mj, g));
    for (const auto& [name, s] : g.schemes) {
      if (name == g.base) {
        if (!s->structure.empty()) throw Error(ErrorKind::ValidationError, "the base scheme has no structure morphism");
        continue;
      }
      if (s->structure.empty())
        throw Error(ErrorKind::ValidationError, "scheme " + name + " lacks a structure morphism to " + g.base);
      MorphismPtr pi = g.morphism(s->structure);
      if (pi->source != s || pi->target->name != g.base)
        throw Error(ErrorKind::ValidationError, "structure morphism of " + name + " must map it to " + g.base);
    }
    for (const auto& [name, f] : g.morphisms) {
      // every morphism must live over the base
      if (f->source->name == g.base && f->target->name == g.base) continue;
      try {
        g.tower(f).validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::ValidationError, "morphism " + name + " is not a morphism over " + g.base, e.message());
      }
    }
    if (j.contains("localizations"))
      for (const auto& [name, lj] : j.at("localizations").items()) {
        Localization l;
        l.name = name;
        l.total = lj.at("total").get<std::string>();
        l.support = lj.at("support").get<std::string>();
        l.open = lj.at("open").get<std::string>();
        l.upsilon = lj.at("upsilon").get<std::string>();
        l.closed = lj.value("closed", "");
        l.iota = lj.value("iota", "");
        auto y = g.scheme(l.total);
        auto u = g.morphism(l.upsilon);
        if (u->target != y || u->source != g.scheme(l.open))
          throw Error(ErrorKind::ValidationError, "localization " + name + ": υ must map the open part into the total space");
        if (!y->has_support(l.support))
          throw Error(ErrorKind::ValidationError, "localization " + name + ": undeclared support " + l.support);
        if (!l.iota.empty()) {
          auto i = g.morphism(l.iota);
          if (i->target != y || (!l.closed.empty() && i->source != g.scheme(l.closed)))
            throw Error(ErrorKind::ValidationError, "localization " + name + ": ι must map the closed part into the total space");
        }
        g.localizations.emplace(name, l);
      }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("malformed geometry: ") + e.what());
  }
  return g;
}

void serialize_geometry(const Geometry& g, json& out) {
  out["base"] = g.base;
  json schemes = json::object();
  for (const auto& [name, s] : g.schemes) {
    json sj;
    IntVector inv = s->pic->invariants();
    // canonical presentation: relations as stored
    json rel = json::array();
    for (std::size_t r = 0; r < s->pic->presentation().rows(); ++r) {
      json row = json::array();
      for (const auto& x : s->pic->presentation().row(r)) row.push_back(x.get_si());
      rel.push_back(row);
    }
    sj["pic"] = {{"relations", rel}};
    sj["pic_labels"] = s->pic_labels;
    sj["units"] = s->units.labels;
    if (!s->supports.empty()) sj["supports"] = s->supports;
    if (!s->structure.empty()) sj["structure"] = s->structure;
    if (!s->named_bundles.empty()) {
      json b = json::object();
      for (const auto& [label, cls] : s->named_bundles) b[label] = format_pic(*s, cls);
      sj["bundles"] = b;
    }
    schemes[name] = sj;
  }
  out["schemes"] = schemes;
  json morphisms = json::object();
  for (const auto& [name, m] : g.morphisms) {
    json mj;
    mj["source"] = m->source->name;
    mj["target"] = m->target->name;
    json pic = json::array();
    for (std::size_t i = 0; i < m->target->pic->presentation_generators(); ++i) {
      IntVector e(m->target->pic->presentation_generators(), Integer(0));
      e[i] = 1;
      pic.push_back(format_pic(*m->source, m->pic_pullback(GroupElement::from_presentation(m->target->pic, e))));
    }
    mj["pic"] = pic;
    json units = json::array();
    for (const auto& c : m->unit_pullback.columns()) units.push_back(unit_text(*m->source, c));
    mj["units"] = units;
    if (m->proper) mj["proper"] = {{"omega", format_pic(*m->source, m->proper->omega)}, {"dimension", m->proper->dimension}};
    json ann = json::array();
    if (m->affine_bundle) ann.push_back("affine_bundle");
    if (m->witt_pullback_iso) ann.push_back("witt_pullback_iso");
    if (m->witt_pushforward_iso) ann.push_back("witt_pushforward_iso");
    if (!ann.empty()) mj["annotations"] = ann;
    if (!m->pull_supports.empty()) mj["pull_supports"] = m->pull_supports;
    if (!m->push_supports.empty()) mj["push_supports"] = m->push_supports;
    morphisms[name] = mj;
  }
  out["morphisms"] = morphisms;
  if (!g.localizations.empty()) {
    json locs = json::object();
    for (const auto& [name, l] : g.localizations) {
      json lj = {{"total", l.total}, {"support", l.support}, {"open", l.open}, {"upsilon", l.upsilon}};
      if (!l.closed.empty()) lj["closed"] = l.closed;
      if (!l.iota.empty()) lj["iota"] = l.iota;
      locs[name] = lj;
    }
    out["localizations"] = locs;
  }
}

}  // namespace wtc
