#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <compare>
#include <string>
#include <utility>

namespace ratdyn {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational angle p/q in [0, 1), stored reduced.
class Angle {
 public:
  Angle() = default;
  Angle(BigInt num, BigInt den);
  Angle(long long num, long long den) : Angle(BigInt(num), BigInt(den)) {}

  /// "p/q" or an integer ("0").
  static Angle parse(const std::string& s);

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }
  double value() const { return approx_; }
  std::string str() const;

  friend bool operator==(const Angle& a, const Angle& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Angle& a, const Angle& b);

 private:
  BigInt num_ = 0;
  BigInt den_ = 1;
  double approx_ = 0.0;
};

/// d t mod 1.
Angle angle_step(const Angle& t, int d);

/// (t + j) / d, the j-th preimage of t under multiplication by d.
Angle angle_lift(const Angle& t, int j, int d);

/// 1 - t mod 1.
Angle angle_negate(const Angle& t);

/// Smallest (preperiod, period) with d^(l+q) t = d^l t mod 1.
std::pair<int, int> angle_eventual_period(const Angle& t, int d);

}  // namespace ratdyn
