#include "wtc/commands.hpp"

#include <cstdlib>

#include <CLI11.hpp>

#include "wtc/descent.hpp"
#include "wtc/expr.hpp"

namespace wtc {

using nlohmann::json;

unsigned seed_from_env() {
  const char* s = std::getenv("WTC_SEED");
  if (!s || !*s) return 0;
  try {
    return static_cast<unsigned>(std::stoul(s));
  } catch (const std::exception&) {
    throw Error(ErrorKind::UsageError, "WTC_SEED must be a non-negative integer", s);
  }
}

namespace {

struct Options {
  std::string workspace;
  bool json = false;
  std::string morphism, basis, other, ledger, expr, module, mode = "pullback", scheme, support = "full";
  std::string l1 = "0", l2 = "0", lbar = "0", m = "0", u = "1", m2 = "0", u2 = "1", twist = "0", element;
  std::vector<std::string> scope;
  long degree = 0;
  bool shriek = false, push = false, all_choices = false;
  std::size_t linearity = 0;
};

LineBundle bundle(const SchemePtr& s, const std::string& text) { return {s, parse_pic(*s, text)}; }

AlignmentClass alignment(const LineBundle& src, const LineBundle& tgt, const std::string& m, const std::string& u) {
  return AlignmentClass(src, tgt, parse_pic(*src.scheme, m), parse_unit(*src.scheme, u));
}

void certify(const Workspace& ws, const Options& o, Report& r) {
  auto f = ws.system.geometry.morphism(o.morphism);
  SmPicCertificate c = certify_smpic(*f);
  r.add("morphism " + f->name + ": " + f->source->name + " -> " + f->target->name);
  r.add("(I) injective pull-back on Pic: " + std::string(c.injective ? "yes" : "no"));
  r.add("(II) no 2-torsion in the relative Picard group: " + std::string(c.no_two_torsion ? "yes" : "no"));
  r.add("(III) units surjective mod squares: " + std::string(c.units_surjective ? "yes" : "no"));
  r.add("certificate: " + c.summary());
  r.data["certificate"] = {{"morphism", f->name},
                           {"injective", c.injective},
                           {"no_two_torsion", c.no_two_torsion},
                           {"units_surjective", c.units_surjective},
                           {"summary", c.summary()}};
  r.verdict = c.pass();
}

void descend(const Workspace& ws, const Options& o, Report& r) {
  const Geometry& g = ws.system.geometry;
  auto f = g.morphism(o.morphism);
  Tower t = g.tower(f);
  LineBundle l1 = bundle(f->target, o.l1), l2 = bundle(f->target, o.l2);
  LineBundle s = o.shriek ? shriek_bundle(*f, l1) : pull_bundle(*f, l1);
  LineBundle e = o.shriek ? shriek_bundle(*f, l2) : pull_bundle(*f, l2);
  AlignmentClass abar = alignment(s, e, o.m, o.u);
  DescentCertificate c = descend_alignment(t, abar, l1, l2, o.shriek ? DescentMode::Shriek : DescentMode::Plain);
  r.add("input " + c.input.to_string());
  r.add("output " + c.output.to_string());
  r.add(std::string("recomposes: ") + (c.check ? "yes" : "no"));
  r.data["descent"] = {{"input", c.input.to_string()}, {"output", c.output.to_string()}, {"check", c.check}};
  r.verdict = c.check;
}

void do_realign(const Workspace& ws, const Options& o, Report& r) {
  const Geometry& g = ws.system.geometry;
  auto f = g.morphism(o.morphism);
  Tower t = g.tower(f);
  LineBundle l1 = bundle(f->target, o.l1), l2 = bundle(f->target, o.l2), lb = bundle(f->source, o.lbar);
  AlignmentClass a1 = o.push ? alignment(lb, shriek_bundle(*f, l1), o.m, o.u) : alignment(pull_bundle(*f, l1), lb, o.m, o.u);
  AlignmentClass a2 =
      o.push ? alignment(lb, shriek_bundle(*f, l2), o.m2, o.u2) : alignment(pull_bundle(*f, l2), lb, o.m2, o.u2);
  AlignmentClass a = realign(t, a1, a2, l1, l2, o.push ? RealignSide::Push : RealignSide::Pull);
  r.add("realignment " + a.to_string());
  r.data["realignment"] = a.to_string();
  r.verdict = true;
}

TwistedGroupRef domain_of(const Geometry& g, const Options& o, const std::string& scheme) {
  auto s = g.scheme(scheme);
  return {s, o.support, o.degree, parse_pic(*s, o.twist)};
}

void do_normalize(const Workspace& ws, const Options& o, Report& r) {
  const Geometry& g = ws.system.geometry;
  std::string scheme = o.scheme;
  if (scheme.empty()) {
    auto inferred = infer_domain_scheme(g, o.expr);
    if (!inferred) throw Error(ErrorKind::UsageError, "cannot infer the domain scheme; pass --scheme");
    scheme = *inferred;
  }
  MorphismExpr e = parse_expr(g, o.expr, domain_of(g, o, scheme));
  NormalizeStats stats;
  MorphismExpr n = normalize(g, e, stats);
  r.add("input " + e.to_string());
  r.add("normal " + n.to_string());
  r.add("domain " + n.domain().to_string());
  r.add("codomain " + n.codomain().to_string());
  r.data["normalize"] = {{"input", e.to_string()},
                         {"normal", n.to_string()},
                         {"domain", n.domain().to_string()},
                         {"codomain", n.codomain().to_string()},
                         {"steps", stats.steps}};
  r.verdict = true;
}

void do_eval(const Workspace& ws, const Options& o, Report& r) {
  const WittSystem& w = ws.system;
  const WittModule& m = w.module(o.module);
  TwistedGroupRef d{m.scheme, m.support, o.degree, parse_pic(*m.scheme, o.twist)};
  MorphismExpr e = parse_expr(w.geometry, o.expr, d);
  json member = {{"id", "x"}, {"degree", o.degree}, {"twist", o.twist}, {"element", json::parse(o.element)}};
  BasisMember x = parse_member(w, o.module, member);
  RepresentedClass y = w.eval(e, x.w);
  GroupElement c = w.coordinates(y);
  r.add("input " + x.w.to_string());
  r.add("word " + e.to_string());
  r.add("value " + y.to_string());
  r.add("coordinates " + c.to_string());
  r.data["eval"] = {{"word", e.to_string()}, {"value", y.to_string()}, {"result", member_json(w, {"y", y})}};
  r.verdict = true;
}

void add_candidate(Report& r, const WittSystem& w, const BasisCandidate& c, const std::string& key) {
  r.add(key + " " + c.name + " on " + c.module + " with " + std::to_string(c.family.size()) + " members");
  json members = json::array();
  for (const auto& m : c.family) {
    json mj = member_json(w, m);
    r.add("  member " + m.id + " degree " + std::to_string(m.w.degree) + " twist " + mj["twist"].get<std::string>() +
          " element " + mj["element"].dump());
    members.push_back(mj);
  }
  r.data[key] = {{"name", c.name},
                 {"module", c.module},
                 {"scope", scope_json(w.module(c.module), c.scope)},
                 {"members", members}};
}

void check_basis(const Workspace& ws, const Options& o, Report& r) {
  const BasisCandidate& c = ws.basis(o.basis);
  ThetaReport t = check_total_basis(ws.system, c, o.all_choices ? ChoiceMode::All : ChoiceMode::Fixed);
  add_theta_report(r, t);
  if (o.linearity) {
    unsigned seed = seed_from_env();
    std::size_t n = check_theta_linearity(ws.system, c, o.linearity, seed);
    r.add("linearity checked on " + std::to_string(n) + " triples (seed " + std::to_string(seed) + ")");
    r.data["linearity"] = {{"triples", n}, {"seed", seed}};
  }
  r.verdict = t.pass();
}

void transfer(const Workspace& ws, const Options& o, Report& r) {
  const WittSystem& w = ws.system;
  const BasisCandidate& c = ws.basis(o.basis);
  auto f = w.geometry.morphism(o.morphism);
  TransferMode mode;
  if (o.mode == "pullback")
    mode = TransferMode::Pullback;
  else if (o.mode == "affine")
    mode = TransferMode::Affine;
  else if (o.mode == "push")
    mode = TransferMode::Push;
  else if (o.mode == "devissage")
    mode = TransferMode::Devissage;
  else
    throw Error(ErrorKind::UsageError, "unknown transfer mode '" + o.mode + "'");
  std::vector<F2Vec> scope;
  if (!o.scope.empty()) {
    bool pull = mode == TransferMode::Pullback || mode == TransferMode::Affine;
    std::string target = pull ? c.module : "";
    if (!pull)
      for (const auto& [name, m] : w.maps)
        if (m.kind == GenKind::Push && m.f == f && m.source == c.module) target = m.target;
    if (target.empty()) throw Error(ErrorKind::MissingMap, "no push-forward registered along " + f->name);
    scope = parse_scope(w.module(target), json(o.scope));
  }
  TransferResult t = transfer_basis(w, c, f, mode, scope);
  if (t.source_report) add_theta_report(r, *t.source_report, "source");
  add_candidate(r, w, t.candidate, "transferred");
  if (t.target_report) add_theta_report(r, *t.target_report, "target");
  r.add(std::string("transferred verdict: ") + (t.transferred_pass ? "basis" : "not a basis"));
  bool agree = !t.target_report || t.target_report->pass() == t.transferred_pass;
  if (t.target_report) r.add(std::string("re-verification ") + (agree ? "agrees" : "DISAGREES"));
  r.data["transferred_pass"] = t.transferred_pass;
  r.verdict = t.transferred_pass && agree;
}

void localization(const Workspace& ws, const Options& o, Report& r) {
  LocalizationReport l = check_localization(ws.system, ws.ledger(o.ledger));
  add_localization_report(r, l);
  r.verdict = l.pass();
}

void do_union(const Workspace& ws, const Options& o, Report& r) {
  const WittSystem& w = ws.system;
  UnionResult u = union_bases(w, ws.basis(o.basis), ws.basis(o.other));
  add_candidate(r, w, u.candidate, "union");
  r.add(std::string("independence: ") + (u.independent ? "claimed (disjoint scopes)" : "not claimed"));
  r.data["independent"] = u.independent;
  if (!u.overlap.empty()) {
    json overlap = scope_json(w.module(u.candidate.module), u.overlap);
    std::string witness;
    for (const auto& t : overlap) witness += (witness.empty() ? "" : ", ") + t.get<std::string>();
    throw Error(ErrorKind::OverlapWarning, "scopes overlap; the union only generates", witness);
  }
  r.verdict = true;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Witt group bookkeeping over twisted line bundles", "wtc"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--workspace,-w", o.workspace, "workspace JSON file");
  app.add_flag("--json", o.json, "emit the report as JSON");

  auto* certify_cmd = app.add_subcommand("certify-smpic", "certify the SmPic conditions for a structure morphism");
  certify_cmd->add_option("--morphism", o.morphism)->required();

  auto* descend_cmd = app.add_subcommand("descend", "descend an alignment along a morphism");
  descend_cmd->add_option("--morphism", o.morphism)->required();
  descend_cmd->add_option("--l1", o.l1);
  descend_cmd->add_option("--l2", o.l2);
  descend_cmd->add_option("--m", o.m, "m of the alignment upstairs");
  descend_cmd->add_option("--u", o.u, "unit of the alignment upstairs");
  descend_cmd->add_flag("--shriek", o.shriek);

  auto* realign_cmd = app.add_subcommand("realign", "alignment relating two lax operations");
  realign_cmd->add_option("--morphism", o.morphism)->required();
  realign_cmd->add_option("--l1", o.l1);
  realign_cmd->add_option("--l2", o.l2);
  realign_cmd->add_option("--lbar", o.lbar);
  realign_cmd->add_option("--m1", o.m);
  realign_cmd->add_option("--u1", o.u);
  realign_cmd->add_option("--m2", o.m2);
  realign_cmd->add_option("--u2", o.u2);
  realign_cmd->add_flag("--push", o.push);

  auto* normalize_cmd = app.add_subcommand("normalize", "normal form of a word");
  normalize_cmd->add_option("--expr", o.expr)->required();
  normalize_cmd->add_option("--scheme", o.scheme);
  normalize_cmd->add_option("--support", o.support);
  normalize_cmd->add_option("--degree", o.degree);
  normalize_cmd->add_option("--twist", o.twist);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a word on a module element");
  eval_cmd->add_option("--expr", o.expr)->required();
  eval_cmd->add_option("--module", o.module)->required();
  eval_cmd->add_option("--degree", o.degree);
  eval_cmd->add_option("--twist", o.twist);
  eval_cmd->add_option("--element", o.element, "presentation coordinates as a JSON array")->required();

  auto* basis_cmd = app.add_subcommand("check-basis", "decide whether a family is a total basis");
  basis_cmd->add_option("--basis", o.basis)->required();
  basis_cmd->add_flag("--all-choices", o.all_choices);
  basis_cmd->add_option("--linearity", o.linearity, "number of random linearity triples");

  auto* transfer_cmd = app.add_subcommand("transfer-basis", "transfer a basis along a morphism");
  transfer_cmd->add_option("--basis", o.basis)->required();
  transfer_cmd->add_option("--morphism", o.morphism)->required();
  transfer_cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"pullback", "affine", "push", "devissage"}));
  transfer_cmd->add_option("--scope", o.scope, "target scope as twists");

  auto* loc_cmd = app.add_subcommand("check-localization", "check a localization ledger");
  loc_cmd->add_option("--ledger", o.ledger)->required();

  auto* union_cmd = app.add_subcommand("union-bases", "merge two basis candidates");
  union_cmd->add_option("--basis", o.basis)->required();
  union_cmd->add_option("--with", o.other)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }
  if (o.workspace.empty()) {
    err << "usage error: --workspace is required\n";
    return kExitUsage;
  }
  Report r;
  for (const auto& a : args)
    r.command += (r.command.empty() ? "" : " ") + (a.find(' ') == std::string::npos ? a : "\"" + a + "\"");
  CLI::App* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    Workspace ws = load_workspace(o.workspace);
    bool geometric = name == "certify-smpic" || name == "descend" || name == "realign" || name == "normalize";
    if (!geometric && !ws.has_witt)
      throw Error(ErrorKind::UsageError, "command " + name + " needs a workspace with Witt data");
    if (name == "certify-smpic")
      certify(ws, o, r);
    else if (name == "descend")
      descend(ws, o, r);
    else if (name == "realign")
      do_realign(ws, o, r);
    else if (name == "normalize")
      do_normalize(ws, o, r);
    else if (name == "eval")
      do_eval(ws, o, r);
    else if (name == "check-basis")
      check_basis(ws, o, r);
    else if (name == "transfer-basis")
      transfer(ws, o, r);
    else if (name == "check-localization")
      localization(ws, o, r);
    else
      do_union(ws, o, r);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UsageError || e.kind() == ErrorKind::UnknownCommand) {
      err << "usage error: " << e.message() << (e.witness().empty() ? "" : " (" + e.witness() + ")") << "\n";
      return kExitUsage;
    }
    r.fail(e);
  } catch (const json::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << (o.json ? emit_json(r) : emit_text(r));
  return r.pass() ? kExitPass : kExitFailure;
}

}  // namespace wtc
