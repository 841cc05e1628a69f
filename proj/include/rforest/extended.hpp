#pragma once

#include <compare>
#include <string>

#include "rforest/rational.hpp"

namespace rforest {

// A value in [0, inf]: the codomain of extended metrics. Addition saturates
// at infinity; comparisons are total with inf greater than every finite value.
class Ext {
public:
  Ext() : finite_(true), v_(0) {}
  explicit Ext(Rat v) : finite_(true), v_(std::move(v)) {}
  static Ext inf() {
    Ext e;
    e.finite_ = false;
    return e;
  }

  bool is_inf() const { return !finite_; }
  bool is_finite() const { return finite_; }
  // Only valid on finite values.
  const Rat& value() const {
    if (!finite_) throw Error(ErrorCode::InfiniteDistance, "infinite distance where finite required");
    return v_;
  }

  friend Ext operator+(const Ext& a, const Ext& b) {
    if (a.is_inf() || b.is_inf()) return inf();
    return Ext(a.v_ + b.v_);
  }
  Ext& operator+=(const Ext& o) { return *this = *this + o; }

  friend bool operator==(const Ext& a, const Ext& b) {
    if (a.finite_ != b.finite_) return false;
    return !a.finite_ || a.v_ == b.v_;
  }
  friend std::strong_ordering operator<=>(const Ext& a, const Ext& b) {
    if (a.finite_ && b.finite_) return a.v_ < b.v_ ? std::strong_ordering::less
                                                   : (a.v_ == b.v_ ? std::strong_ordering::equal
                                                                   : std::strong_ordering::greater);
    if (a.finite_) return std::strong_ordering::less;
    if (b.finite_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  // min(x, K): the K-truncation used by every clamped comparison.
  Rat clamp(const Rat& k) const {
    if (!finite_ || v_ > k) return k;
    return v_;
  }

  std::string str() const { return finite_ ? rat_str(v_) : "inf"; }

private:
  bool finite_;
  Rat v_;
};

inline Ext ext_min(const Ext& a, const Ext& b) { return a < b ? a : b; }
inline Ext ext_max(const Ext& a, const Ext& b) { return a < b ? b : a; }

}  // namespace rforest
