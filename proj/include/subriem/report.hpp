#pragma once

#include "subriem/complement.hpp"
#include "subriem/structure.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace subriem {

inline constexpr const char* kToolName = "srcomp";
inline constexpr const char* kToolVersion = "1.0.0";

struct ReportOptions {
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
};

/// Result of a command: the JSON document and whether the input passed
/// (false maps to exit status 2).
struct Outcome {
  nlohmann::json doc;
  bool ok = true;
};

/// Filtration and nondegeneracy verdicts; not ok when degenerate.
Outcome analyze(const StructureSpec& spec, const ReportOptions& opts);
/// Complement bases, R, W and the algorithm trace for one variant.
Outcome complement(const StructureSpec& spec, const ReportOptions& opts, Variant variant);
/// Validity and V-rigidity of a user-supplied complement; not ok when the
/// complement is not V-rigid. Invalid complements throw InvalidComplement.
Outcome check(const StructureDocument& doc, const ReportOptions& opts);
/// Everything: both complement variants, geometry, text summary.
Outcome full_report(const StructureSpec& spec, const ReportOptions& opts);

/// Structure and minimal complement of a `report` document, as a check input.
StructureDocument document_from_report(const nlohmann::json& report, double tol = kDefaultTol);

/// JSON for an Error: {"kind", "level", "message"}.
nlohmann::json error_json(const std::exception& e);

/// Human-readable rendering of any document produced above.
std::string text_summary(const nlohmann::json& doc);

/// "S1 - 3 X2" style rendering of frame coordinates.
std::string format_vector(const StructureSpec& spec, const Vec& v);

}  // namespace subriem
