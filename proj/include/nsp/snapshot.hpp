#pragma once

// Binary state snapshots. Layout (all little-endian):
//   "NSPS" | u32 version = 1 | u32 N1 | u32 N2 | u32 N3 | f64 L | f64 t
//   then rho, m1, m2, m3, E, each N1*N2*N3 f64 in index order
//   (i1*N2 + i2)*N3 + i3.
// The header is 36 bytes, so a file holds 36 + 40*N1*N2*N3 bytes.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "nsp/error.hpp"
#include "nsp/grid.hpp"
#include "nsp/integrator.hpp"

namespace nsp {

inline constexpr std::size_t snapshot_header_bytes = 36;
inline constexpr std::uint32_t snapshot_version = 1;

struct Snapshot {
  GridSpec grid;
  double t = 0.0;
  ScalarField3 rho;
  VectorField3 m;
  ScalarField3 E;
};

inline std::size_t snapshot_bytes(const GridSpec& g) { return snapshot_header_bytes + 5 * 8 * g.size(); }

namespace detail {

inline void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

inline void put_f64(std::vector<unsigned char>& b, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int k = 0; k < 8; ++k) b.push_back(static_cast<unsigned char>(v >> (8 * k)));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  return v;
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return std::bit_cast<double>(v);
}

inline Error format_error(std::size_t offset, const std::string& what) {
  return Error(Errc::FormatError, "at byte offset " + std::to_string(offset) + ": " + what);
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const GridSpec& g, double t, const ScalarField3& rho,
                                                  const VectorField3& m, const ScalarField3& E) {
  std::vector<unsigned char> b;
  b.reserve(snapshot_bytes(g));
  for (char c : {'N', 'S', 'P', 'S'}) b.push_back(static_cast<unsigned char>(c));
  detail::put_u32(b, snapshot_version);
  detail::put_u32(b, static_cast<std::uint32_t>(g.n1));
  detail::put_u32(b, static_cast<std::uint32_t>(g.n2));
  detail::put_u32(b, static_cast<std::uint32_t>(g.n3));
  detail::put_f64(b, g.L);
  detail::put_f64(b, t);
  for (const ScalarField3* f : {&rho, &m[0], &m[1], &m[2], &E}) {
    if (f->size() != g.size()) throw Error(Errc::InvalidParam, "snapshot field size does not match grid");
    for (double v : f->values()) detail::put_f64(b, v);
  }
  return b;
}

inline std::vector<unsigned char> encode_snapshot(const State& s) {
  return encode_snapshot(s.grid(), s.t, s.rho, s.m, s.E);
}

inline Snapshot decode_snapshot(const std::vector<unsigned char>& b) {
  if (b.size() < snapshot_header_bytes)
    throw detail::format_error(b.size(), "truncated header (" + std::to_string(b.size()) + " bytes)");
  if (std::memcmp(b.data(), "NSPS", 4) != 0) throw detail::format_error(0, "bad magic");
  const std::uint32_t version = detail::get_u32(b.data() + 4);
  if (version != snapshot_version) throw detail::format_error(4, "unsupported version " + std::to_string(version));
  Snapshot s;
  s.grid.n1 = detail::get_u32(b.data() + 8);
  s.grid.n2 = detail::get_u32(b.data() + 12);
  s.grid.n3 = detail::get_u32(b.data() + 16);
  s.grid.L = detail::get_f64(b.data() + 20);
  s.t = detail::get_f64(b.data() + 28);
  if (s.grid.n1 == 0 || s.grid.n2 == 0 || s.grid.n3 == 0) throw detail::format_error(8, "zero grid dimension");
  if (!(s.grid.L > 0.0) || !std::isfinite(s.grid.L)) throw detail::format_error(20, "L must be positive");
  const std::size_t want = snapshot_bytes(s.grid);
  if (b.size() != want)
    throw detail::format_error(std::min(b.size(), want), "length " + std::to_string(b.size()) + " != expected " +
                                                              std::to_string(want));
  // Fields are built directly: snapshots may carry grids (e.g. N1 < 8) that
  // GridSpec::make would refuse for simulation.
  const std::size_t n = s.grid.size();
  const unsigned char* p = b.data() + snapshot_header_bytes;
  auto read_field = [&](ScalarField3& f) {
    f = ScalarField3(s.grid);
    for (std::size_t i = 0; i < n; ++i, p += 8) f[i] = detail::get_f64(p);
  };
  read_field(s.rho);
  for (auto& c : s.m) read_field(c);
  read_field(s.E);
  return s;
}

inline void write_snapshot(const std::string& path, const State& s) {
  const auto b = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw Error(Errc::IoError, "write failed for " + path);
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::vector<unsigned char> b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(b);
}

}  // namespace nsp
