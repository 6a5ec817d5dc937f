// Small shared pieces: fixed-dimension vectors, lattice cell indices,
// 64-bit hashing/mixing used for seeding and fingerprints.
#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>

namespace lyapmc {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// The cast keeps D out of template deduction, so callers passing a Vec
// either spell the dimension or let another argument fix it.
template <int D>
using Vec = std::array<double, static_cast<std::size_t>(D)>;

template <int D>
using CellIndex = std::array<i64, static_cast<std::size_t>(D)>;

template <int D>
inline double dot(const Vec<D>& a, const Vec<D>& b) {
  double s = 0;
  for (int i = 0; i < D; ++i) s += a[i] * b[i];
  return s;
}

template <int D>
inline double norm_sq(const Vec<D>& a) {
  return dot<D>(a, a);
}

template <int D>
inline double norm(const Vec<D>& a) {
  return std::sqrt(norm_sq<D>(a));
}

template <int D>
inline Vec<D> sub(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = a[i] - b[i];
  return r;
}

template <int D>
inline Vec<D> add(const Vec<D>& a, const Vec<D>& b) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = a[i] + b[i];
  return r;
}

template <int D>
inline Vec<D> scaled(const Vec<D>& a, double c) {
  Vec<D> r;
  for (int i = 0; i < D; ++i) r[i] = a[i] * c;
  return r;
}

template <int D>
inline Vec<D> zero_vec() {
  Vec<D> r{};
  return r;
}

// Unit vector pointing from the origin toward a. Throws on the zero vector,
// there is no meaningful direction to return.
template <int D>
inline Vec<D> unit(const Vec<D>& a) {
  double n = norm<D>(a);
  if (!(n > 0)) throw std::invalid_argument("unit(): zero vector");
  return scaled<D>(a, 1.0 / n);
}

// splitmix64 finalizer (Vigna). Good avalanche, cheap, and stateless; we use
// it to turn structured ids (cell coordinates, path indices) into seeds.
inline u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline u64 hash_combine(u64 h, u64 v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL));
}

// FNV-1a, used for config fingerprints written into result manifests.
inline u64 fnv1a64(const void* data, std::size_t len, u64 h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline u64 fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

template <int D>
struct CellIndexHash {
  std::size_t operator()(const CellIndex<D>& c) const {
    u64 h = 0x51700c75a1feaa21ULL;
    for (int i = 0; i < D; ++i) h = hash_combine(h, static_cast<u64>(c[i]));
    return static_cast<std::size_t>(h);
  }
};

// Index of the half-open lattice cell [i*s, (i+1)*s) containing x.
inline i64 cell_of(double x, double s) {
  return static_cast<i64>(std::floor(x / s));
}

template <int D>
inline CellIndex<D> cell_of(const Vec<D>& x, double s) {
  CellIndex<D> c;
  for (int i = 0; i < D; ++i) c[i] = cell_of(x[i], s);
  return c;
}

// Volume and surface area of the unit ball in dimension d (1 <= d <= 3).
inline double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 3.14159265358979323846;
    case 3: return 4.0 * 3.14159265358979323846 / 3.0;
  }
  throw std::invalid_argument("unit_ball_volume: dim must be 1, 2 or 3");
}

inline double unit_sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * 3.14159265358979323846;
    case 3: return 4.0 * 3.14159265358979323846;
  }
  throw std::invalid_argument("unit_sphere_area: dim must be 1, 2 or 3");
}

// Locale-independent shortest round-trip formatting; the one double->text
// path used everywhere (CSV, fingerprints, manifests).
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Thrown when a Monte Carlo estimate is unusable (every path truncated,
// empirical mean collapsed to zero, too many excluded environments).
class EstimatorError : public std::runtime_error {
 public:
  explicit EstimatorError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lyapmc
