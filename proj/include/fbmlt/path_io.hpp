#pragma once

#include "fbmlt/fbm_engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fbmlt {

/// In-memory image of an FBMP container: little-endian, 32-byte header
/// (magic "FBMP", u32 version, f64 H, u32 N, u32 count, u64 seed) followed by
/// count * (N + 1) f64 path values. The horizon is not stored; readers supply it.
struct PathFile {
  static constexpr std::uint32_t kVersion = 1;
  double H = 0.5;
  std::uint32_t N = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> paths;  // each of length N + 1
  bool operator==(const PathFile&) const = default;
};

PathFile to_path_file(const std::vector<FbmPath>& paths);
/// Rebuilds paths on [0, T]; method is reported as circulant since FBMP does not carry it.
std::vector<FbmPath> from_path_file(const PathFile& file, double T = 1.0);

std::string encode_fbmp(const PathFile& file);
/// Throws DomainError on a bad magic, version or truncated payload.
PathFile decode_fbmp(const std::string& bytes);

void write_fbmp(const std::string& filename, const PathFile& file);
PathFile read_fbmp(const std::string& filename);

/// CSV with header "path,t,value", one row per grid point.
std::string paths_to_csv(const std::vector<FbmPath>& paths);

std::string read_text_file(const std::string& filename);
/// Truncates and writes; I/O failures throw std::runtime_error naming the file.
void write_text_file(const std::string& filename, const std::string& contents);

}  // namespace fbmlt
