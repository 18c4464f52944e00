#include "sodbench/pairing.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace sodbench {

namespace {

namespace fs = std::filesystem;

bool is_map_file(const fs::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext == ".png" || ext == ".pgm";
}

// stem -> path, rejecting duplicate stems (e.g. a.png next to a.pgm)
std::map<std::string, fs::path> scan_directory(const fs::path& dir,
                                               const char* side) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(std::string(side) + " directory " + dir.string() +
                             " does not exist or is not a directory");
  }
  std::map<std::string, fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_map_file(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    auto [it, inserted] = files.emplace(stem, entry.path());
    if (!inserted) {
      throw std::runtime_error(std::string(side) + " directory " +
                               dir.string() + ": duplicate stem '" + stem +
                               "' (" + it->second.filename().string() +
                               " vs " + entry.path().filename().string() +
                               ")");
    }
  }
  return files;
}

}  // namespace

PairSet pair_files(const std::filesystem::path& pred_dir,
                   const std::filesystem::path& gt_dir,
                   const std::optional<std::filesystem::path>& depth_dir) {
  const auto preds = scan_directory(pred_dir, "prediction");
  const auto gts = scan_directory(gt_dir, "ground-truth");
  std::map<std::string, std::filesystem::path> depths;
  if (depth_dir) depths = scan_directory(*depth_dir, "depth");

  PairSet set;
  for (const auto& [stem, pred_path] : preds) {
    const auto gt_it = gts.find(stem);
    if (gt_it == gts.end()) {
      set.unmatched_pred.push_back(stem);
      continue;
    }
    PairPaths pair{stem, pred_path, gt_it->second, std::nullopt};
    if (depth_dir) {
      const auto depth_it = depths.find(stem);
      if (depth_it != depths.end()) pair.depth = depth_it->second;
    }
    set.entries.push_back(std::move(pair));
  }
  for (const auto& [stem, path] : gts) {
    if (!preds.count(stem)) set.unmatched_gt.push_back(stem);
  }
  for (const auto& [stem, path] : depths) {
    if (!preds.count(stem) || !gts.count(stem)) {
      set.unmatched_depth.push_back(stem);
    }
  }
  if (set.entries.empty()) {
    throw std::runtime_error(
        "no common stems between " + pred_dir.string() + " and " +
        gt_dir.string());
  }
  // std::map iteration already yields stems in lexicographic order
  return set;
}

}  // namespace sodbench
