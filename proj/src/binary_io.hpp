#pragma once

// Little-endian primitives for the table, dataset and model files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "uca/core.hpp"

namespace uca::io {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, std::string_view what) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw FormatError("truncated file while reading " + std::string(what));
  }
  return value;
}

inline void put_magic(std::ostream& out, std::string_view magic, std::uint8_t version) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
  put<std::uint8_t>(out, version);
}

inline void expect_magic(std::istream& in, std::string_view magic, std::uint8_t version) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw FormatError("bad magic, expected " + std::string(magic));
  }
  auto v = get<std::uint8_t>(in, "version");
  if (v != version) {
    throw FormatError("unsupported " + std::string(magic) + " version " + std::to_string(v));
  }
}

inline void expect_eof(std::istream& in, std::string_view what) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes in " + std::string(what));
  }
}

}  // namespace uca::io
