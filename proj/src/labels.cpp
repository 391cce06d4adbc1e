#include "gecforge/labels.hpp"

#include "gecforge/error.hpp"

namespace gecforge {

std::string to_string(CorrectionLabel label) {
  switch (label) {
    case CorrectionLabel::Accurate: return "accurate";
    case CorrectionLabel::Inaccurate: return "inaccurate";
    case CorrectionLabel::Undetermined: return "undetermined";
  }
  return "?";
}

std::string to_string(ResidualLabel label) {
  switch (label) {
    case ResidualLabel::NoErrors: return "no_errors";
    case ResidualLabel::HasErrors: return "has_errors";
    case ResidualLabel::Undetermined: return "undetermined";
  }
  return "?";
}

CorrectionLabel parse_correction_label(const std::string& name) {
  if (name == "accurate") return CorrectionLabel::Accurate;
  if (name == "inaccurate") return CorrectionLabel::Inaccurate;
  if (name == "undetermined") return CorrectionLabel::Undetermined;
  throw FormatError("unknown subtask 1 label '" + name +
                    "' (expected accurate, inaccurate or undetermined)");
}

ResidualLabel parse_residual_label(const std::string& name) {
  if (name == "no_errors") return ResidualLabel::NoErrors;
  if (name == "has_errors") return ResidualLabel::HasErrors;
  if (name == "undetermined") return ResidualLabel::Undetermined;
  throw FormatError("unknown subtask 2 label '" + name +
                    "' (expected no_errors, has_errors or undetermined)");
}

Json to_json(const FinalLabel& l) {
  Json j = {{"item_id", l.item_id},
            {"category", aligner::to_string(l.category)},
            {"judgments", l.judgments}};
  j["subtask1"] = l.subtask1 ? Json(to_string(*l.subtask1)) : Json(nullptr);
  j["subtask2"] = l.subtask2 ? Json(to_string(*l.subtask2)) : Json(nullptr);
  return j;
}

FinalLabel final_label_from_json(const Json& j) {
  FinalLabel l;
  l.item_id = j.at("item_id").get<std::string>();
  l.category = aligner::parse_category(j.at("category").get<std::string>());
  l.judgments = j.value("judgments", std::size_t{0});
  if (j.contains("subtask1") && !j["subtask1"].is_null())
    l.subtask1 = parse_correction_label(j["subtask1"].get<std::string>());
  if (j.contains("subtask2") && !j["subtask2"].is_null())
    l.subtask2 = parse_residual_label(j["subtask2"].get<std::string>());
  return l;
}

void write_final_labels(const std::filesystem::path& path,
                        const std::vector<FinalLabel>& labels) {
  std::vector<Json> out;
  for (const auto& l : labels) out.push_back(to_json(l));
  write_jsonl(path, out);
}

std::vector<FinalLabel> read_final_labels(const std::filesystem::path& path) {
  std::vector<FinalLabel> out;
  for (const auto& j : read_jsonl(path)) {
    try {
      out.push_back(final_label_from_json(j));
    } catch (const Json::exception& e) {
      throw FormatError(path.string() + ": malformed final label: " + e.what());
    }
  }
  return out;
}

}  // namespace gecforge
