#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace fcgrow {

// A nonnegative integer that stays exact below 2^62 and degrades to a base-2
// logarithm above. Growth probes only need magnitudes, and doubly exponential
// programs would otherwise exhaust memory.
class Magnitude {
 public:
  static constexpr std::uint64_t kExactLimit = std::uint64_t(1) << 62;

  Magnitude() = default;
  static Magnitude of(std::uint64_t v) {
    if (v >= kExactLimit) return from_log2(std::log2(static_cast<double>(v)));
    Magnitude m;
    m.exact_ = true;
    m.v_ = v;
    return m;
  }
  static Magnitude from_log2(double lg) {
    Magnitude m;
    m.exact_ = false;
    m.lg_ = lg;
    return m;
  }

  bool is_exact() const { return exact_; }
  std::uint64_t value() const { return v_; }
  bool is_zero() const { return exact_ && v_ == 0; }

  // log2 of the value; -infinity for zero.
  double log2() const {
    if (!exact_) return lg_;
    if (v_ == 0) return -std::numeric_limits<double>::infinity();
    return std::log2(static_cast<double>(v_));
  }

  // The value as a count, saturating at `cap`.
  std::uint64_t clamp(std::uint64_t cap) const {
    if (!exact_) return cap;
    return v_ < cap ? v_ : cap;
  }

  friend Magnitude operator+(const Magnitude& a, const Magnitude& b) {
    if (a.exact_ && b.exact_) return of(a.v_ + b.v_);  // both < 2^62, no overflow
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    double x = a.log2(), y = b.log2();
    double hi = x > y ? x : y, lo = x > y ? y : x;
    return from_log2(hi + std::log2(1.0 + std::exp2(lo - hi)));
  }
  friend Magnitude operator*(const Magnitude& a, const Magnitude& b) {
    if (a.is_zero() || b.is_zero()) return of(0);
    if (a.exact_ && b.exact_) {
      unsigned __int128 p = static_cast<unsigned __int128>(a.v_) * b.v_;
      if (p < kExactLimit) return of(static_cast<std::uint64_t>(p));
    }
    return from_log2(a.log2() + b.log2());
  }

  friend bool operator==(const Magnitude& a, const Magnitude& b) {
    if (a.exact_ && b.exact_) return a.v_ == b.v_;
    if (a.exact_ != b.exact_) return false;
    return a.lg_ == b.lg_;
  }
  friend std::partial_ordering operator<=>(const Magnitude& a, const Magnitude& b) {
    if (a.exact_ && b.exact_) return a.v_ <=> b.v_;
    return a.log2() <=> b.log2();
  }

  std::string str() const {
    if (exact_) return std::to_string(v_);
    std::ostringstream os;
    os.precision(6);
    os << "2^" << lg_;
    return os.str();
  }

 private:
  bool exact_ = true;
  std::uint64_t v_ = 0;
  double lg_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, const Magnitude& m) { return os << m.str(); }

}  // namespace fcgrow
