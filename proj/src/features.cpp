#include "ynkit/features.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "ynkit/errors.hpp"

namespace ynk {

namespace {

constexpr char kMagic[4] = {'Y', 'N', 'F', '1'};

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_features(const FeatureMatrix& m, const std::filesystem::path& path) {
  if (m.frames < 1 || m.dim < 1)
    throw DimensionMismatch("feature matrix must be at least 1x1");
  std::string buf;
  buf.reserve(12 + m.data.size() * 4);
  buf.append(kMagic, 4);
  put_u32_le(buf, static_cast<std::uint32_t>(m.frames));
  put_u32_le(buf, static_cast<std::uint32_t>(m.dim));
  for (float f : m.data) put_u32_le(buf, std::bit_cast<std::uint32_t>(f));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path.string(), "write failed");
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw IoError(path.string(), "not a YNF1 feature file");
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data());
  const std::uint32_t t = get_u32_le(p + 4);
  const std::uint32_t d = get_u32_le(p + 8);
  if (t < 1 || d < 1)
    throw IoError(path.string(), "feature matrix must be at least 1x1");
  const std::size_t expected = 12 + static_cast<std::size_t>(t) * d * 4;
  if (buf.size() != expected)
    throw IoError(path.string(), "truncated or oversized feature payload");
  FeatureMatrix m(t, d);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const float f = std::bit_cast<float>(get_u32_le(p + 12 + i * 4));
    if (!std::isfinite(f))
      throw IoError(path.string(), "non-finite feature value");
    m.data[i] = f;
  }
  return m;
}

}  // namespace ynk
