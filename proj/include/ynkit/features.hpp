#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace ynk {

// T x D row-major float32 feature frames, 10 ms frame shift.
struct FeatureMatrix {
  static constexpr int kFrameShiftMs = 10;

  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<float> data;  // frames * dim

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t t, std::size_t d)
      : frames(t), dim(d), data(t * d, 0.0f) {}

  float* row(std::size_t t) { return data.data() + t * dim; }
  const float* row(std::size_t t) const { return data.data() + t * dim; }
  double duration_seconds() const {
    return static_cast<double>(frames) * kFrameShiftMs / 1000.0;
  }
};

// Binary container: magic "YNF1", u32 T, u32 D (little-endian), then
// T*D float32 little-endian row-major. Round-trips bit-exactly.
void write_features(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

}  // namespace ynk
