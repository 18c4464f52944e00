#pragma once

#include <filesystem>
#include <string>

#include "sodbench/maps.hpp"
#include "sodbench/tensor.hpp"

namespace sodbench {

enum class MapKind { kPrediction, kGroundTruth, kDepth };

// One decoded raster: 8-bit single-channel pixels scaled to [0,1].
struct MapRecord {
  std::string stem;
  MapKind kind = MapKind::kPrediction;
  Tensor image;  // (1,H,W)
};

// Decodes a PNG or binary PGM file. Color PNG input is reduced to luma;
// 16-bit input is rejected so metric results stay 8-bit exact. Errors name
// the offending path.
MapRecord load_gray_map(const std::filesystem::path& path,
                        MapKind kind = MapKind::kPrediction);

// Quantizes a single-channel [0,1] tensor to 8 bits and writes it.
void save_gray_png(const std::filesystem::path& path, const Tensor& image);
void save_gray_pgm(const std::filesystem::path& path, const Tensor& image);

// Min-max normalization to [0,1]; a constant map becomes all zeros.
DepthMap normalize_depth(const MapRecord& record);

// Foreground where the 8-bit level is >= 128.
GroundTruthMask binarize_ground_truth(const MapRecord& record);

SaliencyMap to_saliency(const MapRecord& record);

}  // namespace sodbench
