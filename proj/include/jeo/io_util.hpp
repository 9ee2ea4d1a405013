#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "jeo/image.hpp"

namespace jeo {

// Explicit little-endian primitives so the on-disk formats do not depend
// on host byte order.

inline void write_u8(std::ostream& os, uint8_t v) { os.put(static_cast<char>(v)); }

inline void write_u16(std::ostream& os, uint16_t v) {
  for (int i = 0; i < 2; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_u32(std::ostream& os, uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_u64(std::ostream& os, uint64_t v) {
  for (int i = 0; i < 8; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void write_f32(std::ostream& os, float v) {
  uint32_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  __builtin_memcpy(&bits, &v, sizeof(bits));
  write_u32(os, bits);
}

inline void write_f64(std::ostream& os, double v) {
  uint64_t bits;
  __builtin_memcpy(&bits, &v, sizeof(bits));
  write_u64(os, bits);
}

inline uint8_t read_u8(std::istream& is) {
  const int c = is.get();
  if (c == EOF) throw std::runtime_error("unexpected end of file");
  return static_cast<uint8_t>(c);
}

inline uint16_t read_u16(std::istream& is) {
  uint16_t v = 0;
  for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(read_u8(is)) << (8 * i);
  return v;
}

inline uint32_t read_u32(std::istream& is) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(read_u8(is)) << (8 * i);
  return v;
}

inline uint64_t read_u64(std::istream& is) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(read_u8(is)) << (8 * i);
  return v;
}

inline float read_f32(std::istream& is) {
  const uint32_t bits = read_u32(is);
  float v;
  __builtin_memcpy(&v, &bits, sizeof(v));
  return v;
}

inline double read_f64(std::istream& is) {
  const uint64_t bits = read_u64(is);
  double v;
  __builtin_memcpy(&v, &bits, sizeof(v));
  return v;
}

/// Fixed float formatting for CSV outputs: 9 significant digits, "inf" for
/// infinities, so reruns are byte-identical.
inline std::string fmt_g9(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// 16-bit grayscale PGM (P5, maxval 65535, big-endian samples per the
/// format). Values are clamped to [0, scale] then mapped onto [0, 65535].
inline void write_pgm16(const std::string& path, const RealImage& img, double scale) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (double v : img.data) {
    double t = scale > 0.0 ? v / scale : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    const auto q = static_cast<uint16_t>(t * 65535.0 + 0.5);
    os.put(static_cast<char>((q >> 8) & 0xff));
    os.put(static_cast<char>(q & 0xff));
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace jeo
