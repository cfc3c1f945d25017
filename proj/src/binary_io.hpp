#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "idlab/errors.hpp"

namespace idlab::detail {

static_assert(std::endian::native == std::endian::little, "binary containers are little-endian");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw Error(Errc::io, "cannot open " + path + " for writing");
  }

  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out_) throw Error(Errc::io, "write failed on " + path_);
  }
  template <class T>
  void value(T v) {
    bytes(&v, sizeof(T));
  }
  template <class T>
  void array(const T* data, std::size_t count) {
    bytes(data, count * sizeof(T));
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw Error(Errc::io, "cannot open " + path);
  }

  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw Error(Errc::io, "truncated file " + path_);
  }
  template <class T>
  T value() {
    T v{};
    bytes(&v, sizeof(T));
    return v;
  }
  template <class T>
  void array(T* data, std::size_t count) {
    bytes(data, count * sizeof(T));
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::ifstream in_;
  std::string path_;
};

}  // namespace idlab::detail
