// srcomp: minimal rigid complements of sub-Riemannian structures given by a
// frame with constant structure constants.

#include "subriem/errors.hpp"
#include "subriem/report.hpp"
#include "subriem/structure.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum Exit { kOk = 0, kIoError = 1, kDegenerate = 2 };

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    return c == '{';
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal rigid complements of equiregular sub-Riemannian structures"};
  app.require_subcommand(1);

  std::string input;
  subriem::ReportOptions opts;
  bool alternate = false;
  bool text = false;
  bool json_out = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", input, "structure file")->required();
    sub->add_option("--tol", opts.tol, "relative rank tolerance")->capture_default_str();
    sub->add_option("--seed", opts.seed, "seed for the sampled step-2 checks")->capture_default_str();
    auto* j = sub->add_flag("--json", json_out, "print the JSON document (default)");
    auto* t = sub->add_flag("--text", text, "print a text summary");
    j->excludes(t);
  };
  auto* analyze = app.add_subcommand("analyze", "filtration and nondegeneracy");
  auto* comp = app.add_subcommand("complement", "minimal rigid complement");
  auto* check = app.add_subcommand("check", "verify a complement listed in the input (or a report)");
  auto* report = app.add_subcommand("report", "full report");
  for (auto* s : {analyze, comp, check, report}) add_common(s);
  comp->add_flag("--alternate", alternate, "skip the trace constraint in the final step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kIoError;
  }

  std::string content;
  if (!read_file(input, content)) {
    std::cerr << "srcomp: cannot read " << input << "\n";
    return kIoError;
  }

  auto emit = [&](const nlohmann::json& doc) {
    if (text)
      std::cout << subriem::text_summary(doc);
    else
      std::cout << doc.dump(2) << "\n";
  };

  try {
    subriem::Outcome out;
    if (*check) {
      subriem::StructureDocument doc;
      if (looks_like_json(content)) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
          throw subriem::Error(subriem::ErrorKind::ParseError, e.what());
        }
        doc = subriem::document_from_report(j, opts.tol);
      } else {
        doc = subriem::parse_document(content, opts.tol);
      }
      out = subriem::check(doc, opts);
    } else {
      const subriem::StructureSpec spec = subriem::parse_structure(content, opts.tol);
      if (*analyze)
        out = subriem::analyze(spec, opts);
      else if (*comp)
        out = subriem::complement(spec, opts, alternate ? subriem::Variant::Alternate : subriem::Variant::MinimalRigid);
      else
        out = subriem::full_report(spec, opts);
    }
    emit(out.doc);
    return out.ok ? kOk : kDegenerate;
  } catch (const subriem::Error& e) {
    std::cerr << "srcomp: " << e.what();
    if (e.level() >= 0) std::cerr << " (level " << e.level() << ")";
    std::cerr << "\n";
    if (e.kind() == subriem::ErrorKind::ParseError) return kIoError;
    nlohmann::json doc = {{"tool", subriem::kToolName}, {"error", subriem::error_json(e)}};
    emit(doc);
    return kDegenerate;
  }
}
