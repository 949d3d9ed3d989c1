#pragma once

// Little-endian binary file helpers shared by the snapshot formats.

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "rtd3/error.hpp"

namespace rtd3::detail {

class Writer {
 public:
  explicit Writer(const std::string& path)
      : os_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!os_) throw IoError("cannot open '" + path + "' for writing");
  }
  void bytes(const void* p, std::size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(buf, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void finish() {
    os_.flush();
    if (!os_) throw IoError("write failed: '" + path_ + "'");
  }

 private:
  std::ofstream os_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path)
      : is_(path, std::ios::binary), path_(path) {
    if (!is_) throw IoError("cannot open '" + path + "'");
  }
  void bytes(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is_) throw IoError("truncated file '" + path_ + "'");
  }
  std::uint8_t u8() {
    std::uint8_t v = 0;
    bytes(&v, 1);
    return v;
  }
  std::uint64_t u64() {
    unsigned char buf[8];
    bytes(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t limit = 1 << 16) {
    const std::uint64_t n = u64();
    if (n > limit) throw IoError("corrupt string length in '" + path_ + "'");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::ifstream is_;
  std::string path_;
};

}  // namespace rtd3::detail
