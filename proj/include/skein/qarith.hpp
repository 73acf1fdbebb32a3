/**
 * @file qarith.hpp
 * @brief Scalar layer: powers of q at an odd root of unity, quantum brackets,
 * Gauss sums, Chebychev polynomials, interpolation and matrix polynomials.
 *
 * Conventions: q = e^{4 i pi / N}, q^z = e^{4 i pi z / N} for complex z,
 * zeta = -e^{2 i pi / N} (so zeta^2 = q). Weights are carried exactly by
 * ExactWeight so that membership in (1/4)Z never depends on a float compare.
 */

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

namespace skein {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Rational = boost::rational<std::int64_t>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RootData {
  int N = 5;
  cd q;
  cd zeta;

  /// Throws unless N is odd and N >= 5.
  static RootData make(int N);
};

/**
 * A weight with an exact part: integer combination of named generic
 * parameters plus a rational offset. Symbols carry their numeric assignment;
 * ordering and equality only look at the exact part.
 */
class ExactWeight {
 public:
  ExactWeight() = default;
  explicit ExactWeight(Rational offset);
  static ExactWeight integer(std::int64_t k) { return ExactWeight(Rational(k)); }
  static ExactWeight generic(const std::string& name, cd value);
  /// Parses "3/10", "-2", "0.3" (exact decimal) or "irr:<name>=<value>".
  static ExactWeight parse(const std::string& text);

  const std::map<std::string, std::int64_t>& symbols() const { return coeffs_; }
  const Rational& offset() const { return offset_; }
  cd numeric() const { return numeric_; }

  bool is_rational() const { return coeffs_.empty(); }
  /// Exact test for membership in (1/4)Z.
  bool is_quarter_integral() const;
  bool is_integral() const;
  /// Membership in (N/4)Z.
  bool in_quarter_lattice(int N) const;
  /// The admissible set (C \ Z/4) u (N/4)Z of typical weights.
  bool is_admissible(int N) const;

  ExactWeight operator+(const ExactWeight& o) const;
  ExactWeight operator-(const ExactWeight& o) const;
  ExactWeight operator-() const;
  ExactWeight operator*(std::int64_t k) const;
  ExactWeight& operator+=(const ExactWeight& o) { return *this = *this + o; }

  bool operator==(const ExactWeight& o) const {
    return coeffs_ == o.coeffs_ && offset_ == o.offset_;
  }
  bool operator<(const ExactWeight& o) const;

  std::string str() const;

 private:
  void refresh();

  std::map<std::string, std::int64_t> coeffs_;
  std::map<std::string, cd> values_;
  Rational offset_{0};
  cd numeric_{0.0, 0.0};
};

/// Polynomial with complex coefficients in ascending degree.
struct Poly {
  std::vector<cd> coeffs;

  int degree() const { return coeffs.empty() ? -1 : static_cast<int>(coeffs.size()) - 1; }
  cd operator()(cd z) const;
  Poly derivative() const;
  /// Drops leading coefficients below rel_tol * max|c|.
  Poly trimmed(double rel_tol = 1e-12) const;
};

cd q_power(const RootData& root, cd z);
/// {z} = q^z - q^{-z}
cd qbrace(const RootData& root, cd z);
/// [z] = {z} / {1}
cd qbracket(const RootData& root, cd z);

/// Sum_{k=0}^{N-1} e^{-2 i pi k^2 / N}, i.e. Sum q^{-k^2/2}.
cd gauss_sum(int N);
inline cd gauss_sum(const RootData& root) { return gauss_sum(root.N); }

/// T_0 = 2, T_1 = z, T_{n+1} = z T_n - T_{n-1}.
Poly chebychev(int n);

struct InterpolationNode {
  cd point;
  cd value;
  std::optional<cd> derivative;
};

/// Minimal-degree polynomial matching all value and derivative constraints.
/// Throws Error("degenerate interpolation nodes") on coincident points.
Poly interpolate(std::span<const InterpolationNode> nodes);

/// P(A) by Horner's rule.
Mat matrix_poly(const Poly& p, const Mat& a);

}  // namespace skein
