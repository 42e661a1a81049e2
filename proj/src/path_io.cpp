#include "fbmlt/path_io.hpp"

#include "fbmlt/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbmlt {

static_assert(std::endian::native == std::endian::little, "FBMP codec assumes a little-endian host");

namespace {

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DomainError("FBMP: truncated data");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

PathFile to_path_file(const std::vector<FbmPath>& paths) {
  if (paths.empty()) throw DomainError("FBMP: no paths to write");
  PathFile f;
  f.H = paths.front().H;
  f.N = static_cast<std::uint32_t>(paths.front().N);
  f.seed = paths.front().seed;
  for (const auto& p : paths) {
    if (p.N != f.N || p.H != f.H) throw DomainError("FBMP: paths must share H and N");
    f.paths.push_back(p.values);
  }
  return f;
}

std::vector<FbmPath> from_path_file(const PathFile& file, double T) {
  if (!(T > 0.0)) throw DomainError("horizon T must be positive");
  std::vector<FbmPath> out;
  for (std::size_t i = 0; i < file.paths.size(); ++i) {
    FbmPath p;
    p.H = file.H;
    p.T = T;
    p.N = file.N;
    p.values = file.paths[i];
    p.seed = file.seed;
    p.index = i;
    out.push_back(std::move(p));
  }
  return out;
}

std::string encode_fbmp(const PathFile& file) {
  std::string out;
  out.reserve(32 + file.paths.size() * (file.N + 1) * 8);
  out.append("FBMP", 4);
  put<std::uint32_t>(out, PathFile::kVersion);
  put<double>(out, file.H);
  put<std::uint32_t>(out, file.N);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.paths.size()));
  put<std::uint64_t>(out, file.seed);
  for (const auto& p : file.paths) {
    if (p.size() != file.N + std::size_t{1}) throw DomainError("FBMP: path length must be N + 1");
    for (double v : p) put<double>(out, v);
  }
  return out;
}

PathFile decode_fbmp(const std::string& bytes) {
  if (bytes.size() < 32 || bytes.compare(0, 4, "FBMP") != 0)
    throw DomainError("FBMP: bad magic or short header");
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != PathFile::kVersion)
    throw DomainError("FBMP: unsupported version " + std::to_string(version));
  PathFile f;
  f.H = get<double>(bytes, pos);
  f.N = get<std::uint32_t>(bytes, pos);
  const auto count = get<std::uint32_t>(bytes, pos);
  f.seed = get<std::uint64_t>(bytes, pos);
  const std::size_t need = 32 + std::size_t{count} * (f.N + std::size_t{1}) * 8;
  if (bytes.size() != need) throw DomainError("FBMP: payload size does not match header");
  f.paths.resize(count);
  for (auto& p : f.paths) {
    p.resize(f.N + std::size_t{1});
    for (double& v : p) v = get<double>(bytes, pos);
  }
  return f;
}

std::string read_text_file(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + filename + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& filename, const std::string& contents) {
  std::ofstream out(filename, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + filename + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write to '" + filename + "' failed");
}

void write_fbmp(const std::string& filename, const PathFile& file) {
  write_text_file(filename, encode_fbmp(file));
}

PathFile read_fbmp(const std::string& filename) { return decode_fbmp(read_text_file(filename)); }

std::string paths_to_csv(const std::vector<FbmPath>& paths) {
  std::ostringstream os;
  os.precision(17);
  os << "path,t,value\n";
  for (const auto& p : paths)
    for (std::size_t k = 0; k < p.values.size(); ++k)
      os << p.index << ',' << p.time(k) << ',' << p.values[k] << '\n';
  return os.str();
}

}  // namespace fbmlt
