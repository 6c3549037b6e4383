#include "ratdyn/angle.hpp"

#include <map>

#include "ratdyn/poly.hpp"

namespace ratdyn {

Angle::Angle(BigInt num, BigInt den) {
  if (den <= 0) throw Error("Angle: denominator must be positive");
  num %= den;
  if (num < 0) num += den;
  const BigInt g = boost::multiprecision::gcd(num, den);
  num_ = g == 0 ? BigInt(0) : BigInt(num / g);
  den_ = g == 0 ? BigInt(1) : BigInt(den / g);
  if (num_ == 0) den_ = 1;
  // Scale down so both fit in a double before dividing.
  BigInt n = num_, q = den_;
  const unsigned shift = msb(q) > 60 ? static_cast<unsigned>(msb(q) - 60) : 0u;
  n >>= shift;
  q >>= shift;
  approx_ = n.convert_to<double>() / q.convert_to<double>();
}

Angle Angle::parse(const std::string& s) {
  try {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return Angle(BigInt(s), BigInt(1));
    return Angle(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  } catch (const std::runtime_error&) {
    throw Error("Angle: cannot parse '" + s + "'");
  }
}

std::string Angle::str() const {
  if (den_ == 1) return num_.str();
  return num_.str() + "/" + den_.str();
}

std::strong_ordering operator<=>(const Angle& a, const Angle& b) {
  const BigInt l = a.num_ * b.den_, r = b.num_ * a.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Angle angle_step(const Angle& t, int d) {
  if (d < 2) throw Error("angle_step: d must be at least 2");
  return Angle(t.num() * d, t.den());
}

Angle angle_lift(const Angle& t, int j, int d) {
  if (d < 2 || j < 0 || j >= d) throw Error("angle_lift: bad branch");
  return Angle(t.num() + BigInt(j) * t.den(), t.den() * d);
}

Angle angle_negate(const Angle& t) { return Angle(t.den() - t.num(), t.den()); }

std::pair<int, int> angle_eventual_period(const Angle& t, int d) {
  std::map<Angle, int> seen;
  Angle cur = t;
  for (int k = 0;; ++k) {
    auto [it, fresh] = seen.emplace(cur, k);
    if (!fresh) return {it->second, k - it->second};
    cur = angle_step(cur, d);
  }
}

}  // namespace ratdyn
