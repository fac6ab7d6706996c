#include "subriem/report.hpp"

#include "subriem/brackets.hpp"
#include "subriem/errors.hpp"
#include "subriem/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace subriem {

using nlohmann::json;

namespace {

// Round-off below this is printed as an exact zero so that reports do not
// carry sign noise like -0.0 or 1e-17.
double chop(double x) { return std::abs(x) < 1e-13 ? 0.0 : x; }

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(chop(v(i)));
  return a;
}

json columns_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(vec_json(m.col(j)));
  return a;
}

json rows_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

double flag_bound(const StructureSpec& spec, double tol) { return 1e3 * tol * std::max(1.0, spec.max_abs_coeff()); }

json structure_json(const StructureSpec& spec) {
  json brackets = json::array();
  for (int i = 0; i < spec.n(); ++i)
    for (int j = i + 1; j < spec.n(); ++j) {
      const Vec b = spec.bracket(i, j);
      if (b.cwiseAbs().maxCoeff() == 0.0) continue;
      brackets.push_back({{"pair", {spec.names()[static_cast<std::size_t>(i)], spec.names()[static_cast<std::size_t>(j)]}},
                          {"value", format_vector(spec, b)},
                          {"coords", vec_json(b)}});
    }
  return {{"dim", spec.n()},
          {"horizontal", spec.d1()},
          {"basis", spec.names()},
          {"brackets", brackets},
          {"text", format_structure(spec)}};
}

json header(const char* command, const ReportOptions& opts) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", command}, {"tolerance", opts.tol}, {"seed", opts.seed}};
}

json filtration_json(const QuotientTower& tower) {
  json grams = json::array();
  for (int m = 1; m <= tower.step(); ++m)
    grams.push_back({{"level", m}, {"dim", tower.dim(m)}, {"gram", rows_json(tower.level(m).gram)}});
  return {{"growth", tower.growth()}, {"step", tower.step()}, {"quotients", grams}};
}

json nondegeneracy_json(const StructureSpec& spec, const QuotientTower& tower, const NondegeneracyReport& nd,
                        const ReportOptions& opts) {
  json levels = json::array();
  for (const auto& l : nd.levels)
    levels.push_back({{"level", l.level},
                      {"injective", l.injective},
                      {"domain_dim", l.domain_dim},
                      {"kernel_dim", l.kernel_dim},
                      {"sigma_min", chop(l.sigma_min)},
                      {"sigma_max", chop(l.sigma_max)}});
  json out = {{"semi_j_nondegenerate", nd.semi_j_nondegenerate},
              {"first_degenerate_level", nd.first_degenerate_level()},
              {"trace_surjective", nd.trace_surjective},
              {"levels", levels},
              {"step2", nullptr}};
  if (tower.step() == 2) {
    const Step2Report s2 = check_step2_conditions(spec, tower, opts.seed, opts.tol);
    out["step2"] = {{"j_nondegenerate", s2.j_nondegenerate},
                    {"exists_isomorphism", s2.exists_isomorphism},
                    {"kernel_sum_condition", s2.kernel_sum_condition},
                    {"determinant_identically_zero", s2.determinant_identically_zero},
                    {"samples", s2.samples},
                    {"seed", s2.seed}};
  }
  return out;
}

json complement_levels_json(const StructureSpec& spec, const GradedComplement& c) {
  json levels = json::array();
  for (const auto& l : c.levels) {
    json names = json::array();
    for (Eigen::Index j = 0; j < l.basis.cols(); ++j) names.push_back(format_vector(spec, l.basis.col(j)));
    levels.push_back({{"level", l.level}, {"basis", columns_json(l.basis)}, {"span", names}});
  }
  return {{"variant", to_string(c.variant)}, {"levels", levels}};
}

json trace_json(const std::vector<TraceStage>& trace) {
  json a = json::array();
  for (const auto& s : trace)
    a.push_back({{"kind", s.kind},
                 {"level", s.level},
                 {"step", s.step},
                 {"params", vec_json(s.params)},
                 {"min_norm", chop(s.value)},
                 {"sigma_min", chop(s.sigma_min)},
                 {"frame", columns_json(s.frame)},
                 {"coframe", rows_json(s.coframe)}});
  return a;
}

json error_for_level(ErrorKind kind, int level, const std::string& msg) {
  return {{"kind", to_string(kind)}, {"level", level}, {"message", std::string(to_string(kind)) + ": " + msg}};
}

const char* kDriverNote =
    "descent runs m = r-1 down to 2 followed by the trace-constrained final step on the level-2 sections";
const char* kConnectionNote =
    "horizontal sections use the same two rules as the complement levels, with V_1 = H (interpretation)";

}  // namespace

std::string format_vector(const StructureSpec& spec, const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double c = v(i);
    if (std::abs(c) < 1e-12) continue;
    const std::string& name = spec.names()[static_cast<std::size_t>(i)];
    const double a = std::abs(c);
    char buf[64];
    if (std::abs(a - 1.0) < 1e-12)
      buf[0] = '\0';
    else
      std::snprintf(buf, sizeof buf, "%.6g ", a);
    if (out.empty())
      out += (c < 0 ? "-" : "") + std::string(buf) + name;
    else
      out += (c < 0 ? " - " : " + ") + std::string(buf) + name;
  }
  return out.empty() ? "0" : out;
}

json error_json(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    return {{"kind", err->name()}, {"level", err->level()}, {"message", err->what()}};
  return {{"kind", "Error"}, {"level", -1}, {"message", e.what()}};
}

Outcome analyze(const StructureSpec& spec, const ReportOptions& opts) {
  const QuotientTower tower = quotient_tower(spec, opts.tol);
  const NondegeneracyReport nd = check_semi_j_nondegenerate(spec, tower, opts.tol);
  Outcome out;
  out.doc = header("analyze", opts);
  out.doc["structure"] = structure_json(spec);
  out.doc["filtration"] = filtration_json(tower);
  out.doc["nondegeneracy"] = nondegeneracy_json(spec, tower, nd, opts);
  out.ok = nd.semi_j_nondegenerate;
  if (!out.ok) {
    const int k = nd.first_degenerate_level();
    out.doc["error"] = error_for_level(ErrorKind::NotSemiJNondegenerate, k,
                                       "Ĵ at level " + std::to_string(k) + " has a " +
                                           std::to_string(nd.levels[static_cast<std::size_t>(k - 2)].kernel_dim) +
                                           "-dimensional kernel");
  }
  return out;
}

Outcome complement(const StructureSpec& spec, const ReportOptions& opts, Variant variant) {
  const QuotientTower tower = quotient_tower(spec, opts.tol);
  const ComplementResult res = minimal_rigid_complement(spec, tower, variant, opts.tol);
  const double resid = verify_v_rigid(spec, res.complement);
  Outcome out;
  out.doc = header("complement", opts);
  out.doc["structure"] = structure_json(spec);
  out.doc["filtration"] = filtration_json(tower);
  out.doc["complement"] = complement_levels_json(spec, res.complement);
  out.doc["r_vector"] = vec_json(res.r_vector);
  out.doc["w_rank"] = res.w_rank;
  out.doc["v_rigid"] = {{"residual", chop(resid)}, {"flag", resid <= flag_bound(spec, opts.tol)}};
  out.doc["algorithm_trace"] = trace_json(res.trace);
  out.doc["notes"] = {kDriverNote};
  return out;
}

Outcome check(const StructureDocument& doc, const ReportOptions& opts) {
  const StructureSpec& spec = doc.spec;
  const QuotientTower tower = quotient_tower(spec, opts.tol);
  const GradedComplement comp = make_complement(tower, doc.complement, opts.tol);
  const double resid = verify_v_rigid(spec, comp);
  const ConnectionTable table = connection_and_torsion(spec, comp);
  const ConnectionProperties props = connection_properties(table, opts.tol);
  const TorsionFlags flags = vnormal_vrigid_flags(table, opts.tol);
  Outcome out;
  out.doc = header("check", opts);
  out.doc["structure"] = structure_json(spec);
  out.doc["filtration"] = filtration_json(tower);
  out.doc["complement"] = complement_levels_json(spec, comp);
  out.doc["valid"] = true;
  out.doc["v_rigid"] = {{"residual", chop(resid)}, {"flag", resid <= flag_bound(spec, opts.tol)}};
  out.doc["v_normal"] = {{"flag", flags.v_normal}, {"residual", chop(flags.normal_residual)}};
  out.doc["connection"] = {{"same_level_orthogonal", props.same_level_orthogonal},
                           {"cross_level_symmetric", props.cross_level_symmetric},
                           {"metric_compatible", props.metric_compatible}};
  out.ok = out.doc["v_rigid"]["flag"].get<bool>();
  return out;
}

Outcome full_report(const StructureSpec& spec, const ReportOptions& opts) {
  Outcome out = analyze(spec, opts);
  out.doc["command"] = "report";
  const QuotientTower tower = quotient_tower(spec, opts.tol);
  out.doc["popp_density"] = popp_volume(tower);
  json notes = json::array({kDriverNote, kConnectionNote});
  if (!out.ok) {
    out.doc["complement"] = nullptr;
    out.doc["isometry_bound"] = nullptr;
    notes.push_back("structure is not semi-𝒥-nondegenerate; the complement and isometry bound do not apply");
    out.doc["notes"] = notes;
    out.doc["summary"] = text_summary(out.doc);
    return out;
  }

  const ComplementResult res = minimal_rigid_complement(spec, tower, Variant::MinimalRigid, opts.tol);
  const ComplementResult alt = minimal_rigid_complement(spec, tower, Variant::Alternate, opts.tol);
  const double resid = verify_v_rigid(spec, res.complement);
  const VNormalResult vn = solve_v_normal(spec, tower, opts.tol);
  const ConnectionTable table = connection_and_torsion(spec, res.complement);
  const ConnectionProperties props = connection_properties(table, opts.tol);
  const TorsionFlags flags = vnormal_vrigid_flags(table, opts.tol);
  const LaplacianCoeffs lap = horizontal_laplacian_coeffs(table, flags);

  out.doc["complement"] = complement_levels_json(spec, res.complement);
  out.doc["alternate_complement"] = complement_levels_json(spec, alt.complement);
  out.doc["r_vector"] = vec_json(res.r_vector);
  out.doc["w_rank"] = res.w_rank;
  out.doc["algorithm_trace"] = trace_json(res.trace);
  out.doc["v_rigid"] = {{"residual", chop(resid)}, {"flag", resid <= flag_bound(spec, opts.tol)}};
  json vnj = {{"exists", vn.exists}, {"failing_level", vn.failing_level}, {"torsion_flag", flags.v_normal}};
  vnj["complement"] = vn.exists ? complement_levels_json(spec, vn.complement) : json(nullptr);
  out.doc["v_normal"] = vnj;
  out.doc["connection"] = {{"same_level_orthogonal", props.same_level_orthogonal},
                           {"cross_level_symmetric", props.cross_level_symmetric},
                           {"metric_compatible", props.metric_compatible},
                           {"same_level_residual", chop(props.same_level_residual)},
                           {"cross_level_residual", chop(props.cross_level_residual)},
                           {"v_normal", flags.v_normal},
                           {"v_rigid", flags.v_rigid},
                           {"horizontal_drift", vec_json(lap.drift)},
                           {"laplacian_self_adjoint", lap.self_adjoint_applicable},
                           {"second_order_symbol", lap.second_order_symbol},
                           {"note", kConnectionNote}};
  out.doc["isometry_bound"] = isometry_dim_bound(spec, tower, opts.tol);
  if (vn.exists != flags.v_normal) notes.push_back("V-normal solver and torsion flag disagree");
  out.doc["notes"] = notes;
  out.doc["summary"] = text_summary(out.doc);
  return out;
}

StructureDocument document_from_report(const json& report, double tol) {
  StructureDocument doc;
  try {
    doc.spec = parse_structure(report.at("structure").at("text").get<std::string>(), tol);
    const json& comp = report.at("complement");
    if (comp.is_null()) throw Error(ErrorKind::InvalidComplement, "report carries no complement");
    for (const auto& lvl : comp.at("levels")) {
      ComplementBlock b;
      b.level = lvl.at("level").get<int>();
      for (const auto& v : lvl.at("basis")) {
        const auto xs = v.get<std::vector<double>>();
        b.vectors.push_back(Eigen::Map<const Vec>(xs.data(), static_cast<Eigen::Index>(xs.size())));
      }
      doc.complement.push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("report document: ") + e.what());
  }
  return doc;
}

std::string text_summary(const json& doc) {
  std::ostringstream os;
  auto yes = [](const json& b) { return b.is_boolean() && b.get<bool>() ? "yes" : "no"; };
  if (doc.contains("structure")) {
    const auto& s = doc["structure"];
    os << "structure: dim " << s["dim"] << ", horizontal " << s["horizontal"] << "\n";
  }
  if (doc.contains("filtration")) {
    os << "growth:";
    for (const auto& g : doc["filtration"]["growth"]) os << " " << g;
    os << "\nstep: " << doc["filtration"]["step"] << "\n";
  }
  if (doc.contains("nondegeneracy")) {
    const auto& nd = doc["nondegeneracy"];
    os << "semi-J-nondegenerate: " << yes(nd["semi_j_nondegenerate"]) << "\n";
    for (const auto& l : nd["levels"])
      os << "  level " << l["level"] << ": kernel dim " << l["kernel_dim"] << " of " << l["domain_dim"] << "\n";
    if (!nd["step2"].is_null()) {
      const auto& s2 = nd["step2"];
      os << "step-2 checks: J nondegenerate " << yes(s2["j_nondegenerate"]) << ", isomorphism exists "
         << yes(s2["exists_isomorphism"]) << ", kernel-sum condition " << yes(s2["kernel_sum_condition"]) << "\n";
    }
  }
  auto print_complement = [&](const char* title, const json& c) {
    if (c.is_null()) return;
    os << title << " (" << c["variant"].get<std::string>() << "):\n";
    for (const auto& l : c["levels"]) {
      os << "  V_" << l["level"] << " = span(";
      bool first = true;
      for (const auto& s : l["span"]) {
        os << (first ? "" : ", ") << s.get<std::string>();
        first = false;
      }
      os << ")\n";
    }
  };
  if (doc.contains("complement")) print_complement("complement", doc["complement"]);
  if (doc.contains("alternate_complement")) print_complement("alternate complement", doc["alternate_complement"]);
  if (doc.contains("v_rigid"))
    os << "V-rigid: " << yes(doc["v_rigid"]["flag"]) << " (residual " << doc["v_rigid"]["residual"].get<double>() << ")\n";
  if (doc.contains("v_normal") && doc["v_normal"].contains("exists"))
    os << "V-normal complement exists: " << yes(doc["v_normal"]["exists"]) << "\n";
  if (doc.contains("popp_density")) os << "Popp density: " << doc["popp_density"].get<double>() << "\n";
  if (doc.contains("connection")) {
    const auto& c = doc["connection"];
    os << "torsion: same-level orthogonal " << yes(c["same_level_orthogonal"]) << ", cross-level symmetric "
       << yes(c["cross_level_symmetric"]) << "\n";
  }
  if (doc.contains("isometry_bound") && !doc["isometry_bound"].is_null())
    os << "isometry dimension bound: " << doc["isometry_bound"] << "\n";
  if (doc.contains("error") && !doc["error"].is_null()) os << "error: " << doc["error"]["message"].get<std::string>() << "\n";
  return os.str();
}

}  // namespace subriem
