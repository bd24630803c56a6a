// Little-endian binary I/O helpers for the on-disk formats. Every format
// starts with a 4-byte magic whose last byte is the version digit; readers
// reject anything they do not recognize.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "qds/error.hpp"

namespace qds::io {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ArgumentError("unexpected end of file");
  return value;
}

inline void write_magic(std::ostream& out, const char magic[5]) {
  out.write(magic, 4);
}

inline void expect_magic(std::istream& in, const char magic[5],
                         const std::string& what) {
  char got[4];
  in.read(got, 4);
  if (!in || std::memcmp(got, magic, 4) != 0)
    throw ArgumentError("not a " + what + " file (bad magic)");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot open for writing: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open for reading: " + path);
  return in;
}

}  // namespace qds::io
