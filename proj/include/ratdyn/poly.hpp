#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ratdyn {

using cd = std::complex<double>;

/// Coefficients in ascending degree order.
using Poly = std::vector<cd>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input does not satisfy the hypotheses an operation screens for.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

namespace poly {

/// Index of the highest nonzero coefficient, or -1 for the zero polynomial.
int degree(std::span<const cd> p);

Poly trimmed(Poly p);

cd eval(std::span<const cd> p, cd z);

/// Value and first derivative by Horner's scheme.
std::pair<cd, cd> eval_with_derivative(std::span<const cd> p, cd z);

Poly derivative(std::span<const cd> p);
Poly add(std::span<const cd> a, std::span<const cd> b);
Poly sub(std::span<const cd> a, std::span<const cd> b);
Poly mul(std::span<const cd> a, std::span<const cd> b);
Poly scale(std::span<const cd> a, cd s);

/// Coefficients of p(a + u) as a polynomial in u.
Poly taylor_shift(std::span<const cd> p, cd a);

/// Pads with zeros up to `size` coefficients.
Poly padded(std::span<const cd> p, std::size_t size);

/// Quotient and remainder of a / b.
std::pair<Poly, Poly> divmod(std::span<const cd> a, std::span<const cd> b);

/// Resultant via the Sylvester determinant.
cd resultant(std::span<const cd> a, std::span<const cd> b);

double max_abs(std::span<const cd> p);

}  // namespace poly
}  // namespace ratdyn
