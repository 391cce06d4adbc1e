#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gecforge/aligner.hpp"
#include "gecforge/io.hpp"

namespace gecforge {

/// Subtask 1: is the model's correction accurate?
enum class CorrectionLabel { Accurate, Inaccurate, Undetermined };

/// Subtask 2: does the corrected sentence still contain errors?
enum class ResidualLabel { NoErrors, HasErrors, Undetermined };

std::string to_string(CorrectionLabel label);
std::string to_string(ResidualLabel label);
CorrectionLabel parse_correction_label(const std::string& name);
ResidualLabel parse_residual_label(const std::string& name);

/// Adjudicated labels for one annotation item. A label is absent when the
/// item could not be finalized.
struct FinalLabel {
  std::string item_id;
  aligner::ErrorCategory category = aligner::ErrorCategory::NoChange;
  std::optional<CorrectionLabel> subtask1;
  std::optional<ResidualLabel> subtask2;
  std::size_t judgments = 0;

  bool operator==(const FinalLabel&) const = default;
};

Json to_json(const FinalLabel& label);
FinalLabel final_label_from_json(const Json& j);

void write_final_labels(const std::filesystem::path& path, const std::vector<FinalLabel>& labels);
std::vector<FinalLabel> read_final_labels(const std::filesystem::path& path);

}  // namespace gecforge
