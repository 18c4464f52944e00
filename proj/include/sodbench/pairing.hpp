#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sodbench {

// One stem-matched prediction/ground-truth pair, with an optional depth map.
struct PairPaths {
  std::string stem;
  std::filesystem::path pred;
  std::filesystem::path gt;
  std::optional<std::filesystem::path> depth;
};

struct PairSet {
  std::vector<PairPaths> entries;  // sorted by stem
  // stems present on one side only; reported, never silently dropped
  std::vector<std::string> unmatched_pred;
  std::vector<std::string> unmatched_gt;
  std::vector<std::string> unmatched_depth;
};

// Matches .png/.pgm files across the directories by file stem. Throws when a
// directory is unreadable, a stem appears twice within one directory, or the
// prediction/ground-truth intersection is empty.
PairSet pair_files(const std::filesystem::path& pred_dir,
                   const std::filesystem::path& gt_dir,
                   const std::optional<std::filesystem::path>& depth_dir = {});

}  // namespace sodbench
