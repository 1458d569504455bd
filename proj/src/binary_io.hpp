#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blip/error.hpp"

// Little-endian raw writers/readers shared by the binary file formats.
namespace blip::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw IoError("cannot open for writing: " + path.string());
  }

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out_) throw IoError("write failed: " + path_.string());
  }
  void magic(std::string_view m) { bytes(m.data(), m.size()); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i32(std::int32_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void f64s(std::span<const double> v) { bytes(v.data(), v.size_bytes()); }
  void complexes(std::span<const std::complex<double>> v) {
    // std::complex<double> is layout-compatible with double[2].
    bytes(v.data(), v.size_bytes());
  }
  void string(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open for reading: " + path.string());
  }

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw IoError("truncated file: " + path_.string());
  }
  void expect_magic(std::string_view m) {
    std::string got(m.size(), '\0');
    bytes(got.data(), got.size());
    if (got != m)
      throw IoError("bad magic in " + path_.string() + " (expected " +
                    std::string(m) + ")");
  }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
  std::int32_t i32() { std::int32_t v; bytes(&v, sizeof v); return v; }
  double f64() { double v; bytes(&v, sizeof v); return v; }
  std::vector<double> f64s(std::size_t n) {
    std::vector<double> v(n);
    bytes(v.data(), n * sizeof(double));
    return v;
  }
  std::vector<std::complex<double>> complexes(std::size_t n) {
    std::vector<std::complex<double>> v(n);
    bytes(v.data(), n * sizeof(std::complex<double>));
    return v;
  }
  std::string string(std::size_t max_len = 1u << 20) {
    const auto n = u64();
    if (n > max_len) throw IoError("implausible string length in " + path_.string());
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void expect_eof() {
    char c;
    in_.read(&c, 1);
    if (in_.gcount() != 0) throw IoError("trailing bytes in " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Guards against absurd sizes read from corrupt headers before allocating.
inline void check_size(std::uint64_t n, std::uint64_t limit, const char* what) {
  if (n > limit) throw IoError(std::string("implausible ") + what + " in header");
}

}  // namespace blip::detail
