#include "skein/qarith.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace skein {

namespace {

constexpr cd I{0.0, 1.0};

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::int64_t num = std::stoll(text.substr(0, slash));
    std::int64_t den = std::stoll(text.substr(slash + 1));
    if (den == 0) throw Error("zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rational(std::stoll(text));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::int64_t den = 1;
  for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
  return Rational(std::stoll(digits), den);
}

}  // namespace

RootData RootData::make(int N) {
  if (N < 5 || N % 2 == 0) throw Error(fmt::format("N must be odd and >= 5 (got {})", N));
  RootData r;
  r.N = N;
  r.q = std::exp(4.0 * std::numbers::pi * I / double(N));
  r.zeta = -std::exp(2.0 * std::numbers::pi * I / double(N));
  return r;
}

// ---------------------------------------------------------------------------
// ExactWeight

ExactWeight::ExactWeight(Rational offset) : offset_(offset) { refresh(); }

ExactWeight ExactWeight::generic(const std::string& name, cd value) {
  ExactWeight w;
  w.coeffs_[name] = 1;
  w.values_[name] = value;
  w.refresh();
  return w;
}

ExactWeight ExactWeight::parse(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text += c;
  if (text.rfind("irr:", 0) == 0) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw Error("generic weight needs 'irr:<name>=<value>': " + raw);
    std::string name = text.substr(4, eq - 4);
    std::string val = text.substr(eq + 1);
    auto comma = val.find(',');
    cd v = comma == std::string::npos
               ? cd(std::stod(val), 0.0)
               : cd(std::stod(val.substr(0, comma)), std::stod(val.substr(comma + 1)));
    return generic(name, v);
  }
  try {
    return ExactWeight(parse_rational(text));
  } catch (const std::logic_error&) {
    throw Error("cannot parse weight '" + raw + "'");
  }
}

void ExactWeight::refresh() {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (it->second == 0) {
      values_.erase(it->first);
      it = coeffs_.erase(it);
    } else {
      ++it;
    }
  }
  numeric_ = cd(boost::rational_cast<double>(offset_), 0.0);
  for (const auto& [name, c] : coeffs_) numeric_ += double(c) * values_.at(name);
}

bool ExactWeight::is_quarter_integral() const {
  return coeffs_.empty() && (offset_ * std::int64_t{4}).denominator() == 1;
}

bool ExactWeight::is_integral() const { return coeffs_.empty() && offset_.denominator() == 1; }

bool ExactWeight::in_quarter_lattice(int N) const {
  return coeffs_.empty() && (offset_ * std::int64_t{4} / std::int64_t{N}).denominator() == 1;
}

bool ExactWeight::is_admissible(int N) const {
  return !is_quarter_integral() || in_quarter_lattice(N);
}

ExactWeight ExactWeight::operator+(const ExactWeight& o) const {
  ExactWeight r = *this;
  for (const auto& [name, c] : o.coeffs_) {
    auto v = o.values_.at(name);
    auto found = r.values_.find(name);
    if (found != r.values_.end() && std::abs(found->second - v) > 1e-15 * (1 + std::abs(v)))
      throw Error("generic parameter '" + name + "' assigned two different values");
    r.values_[name] = v;
    r.coeffs_[name] += c;
  }
  r.offset_ += o.offset_;
  r.refresh();
  return r;
}

ExactWeight ExactWeight::operator-() const { return *this * -1; }

ExactWeight ExactWeight::operator-(const ExactWeight& o) const { return *this + (-o); }

ExactWeight ExactWeight::operator*(std::int64_t k) const {
  ExactWeight r = *this;
  for (auto& [name, c] : r.coeffs_) c *= k;
  r.offset_ *= k;
  r.refresh();
  return r;
}

bool ExactWeight::operator<(const ExactWeight& o) const {
  if (coeffs_ != o.coeffs_) return coeffs_ < o.coeffs_;
  return offset_ < o.offset_;
}

std::string ExactWeight::str() const {
  std::string s;
  for (const auto& [name, c] : coeffs_) {
    if (!s.empty()) s += c > 0 ? "+" : "-";
    else if (c < 0) s += "-";
    if (std::abs(c) != 1) s += std::to_string(std::abs(c));
    s += name;
  }
  if (offset_ != Rational(0) || s.empty()) {
    if (!s.empty() && offset_ > Rational(0)) s += "+";
    s += std::to_string(offset_.numerator());
    if (offset_.denominator() != 1) s += "/" + std::to_string(offset_.denominator());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Poly

cd Poly::operator()(cd z) const {
  cd acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Poly Poly::derivative() const {
  Poly d;
  for (std::size_t k = 1; k < coeffs.size(); ++k) d.coeffs.push_back(double(k) * coeffs[k]);
  return d;
}

Poly Poly::trimmed(double rel_tol) const {
  double scale = 0.0;
  for (auto c : coeffs) scale = std::max(scale, std::abs(c));
  Poly p = *this;
  while (!p.coeffs.empty() && std::abs(p.coeffs.back()) <= rel_tol * scale) p.coeffs.pop_back();
  return p;
}

// ---------------------------------------------------------------------------
// scalars

cd q_power(const RootData& root, cd z) {
  return std::exp(4.0 * std::numbers::pi * I * z / double(root.N));
}

cd qbrace(const RootData& root, cd z) { return q_power(root, z) - q_power(root, -z); }

cd qbracket(const RootData& root, cd z) { return qbrace(root, z) / qbrace(root, 1.0); }

cd gauss_sum(int N) {
  cd acc = 0.0;
  for (int k = 0; k < N; ++k) {
    // k^2 mod N keeps the phase argument small
    long long r = (static_cast<long long>(k) * k) % N;
    acc += std::exp(-2.0 * std::numbers::pi * I * double(r) / double(N));
  }
  return acc;
}

Poly chebychev(int n) {
  if (n < 0) throw Error("chebychev degree must be non-negative");
  std::vector<double> prev{2.0}, cur{0.0, 1.0};
  if (n == 0) return Poly{{cd(2.0)}};
  for (int k = 1; k < n; ++k) {
    std::vector<double> next(cur.size() + 1, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  Poly p;
  for (double c : cur) p.coeffs.emplace_back(c);
  return p;
}

Poly interpolate(std::span<const InterpolationNode> nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      if (std::abs(nodes[i].point - nodes[j].point) <= 1e-9)
        throw Error("degenerate interpolation nodes");

  // Hermite divided differences on the doubled node list.
  std::vector<cd> z, f;
  std::vector<int> src;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int reps = nodes[i].derivative ? 2 : 1;
    for (int r = 0; r < reps; ++r) {
      z.push_back(nodes[i].point);
      f.push_back(nodes[i].value);
      src.push_back(static_cast<int>(i));
    }
  }
  const std::size_t m = z.size();
  if (m == 0) return Poly{};
  std::vector<cd> newton(m);
  std::vector<cd> col = f;
  newton[0] = col[0];
  for (std::size_t order = 1; order < m; ++order) {
    std::vector<cd> next(m - order);
    for (std::size_t i = 0; i + order < m; ++i) {
      if (src[i] == src[i + order]) {
        next[i] = *nodes[src[i]].derivative;  // order 1 only: no triple nodes
      } else {
        next[i] = (col[i + 1] - col[i]) / (z[i + order] - z[i]);
      }
    }
    col = std::move(next);
    newton[order] = col[0];
  }
  // Expand sum_k newton[k] prod_{j<k} (x - z_j) into monomials.
  std::vector<cd> result(m, 0.0), basis{1.0};
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < basis.size(); ++i) result[i] += newton[k] * basis[i];
    std::vector<cd> nb(basis.size() + 1, 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      nb[i + 1] += basis[i];
      nb[i] -= z[k] * basis[i];
    }
    basis = std::move(nb);
  }
  return Poly{result}.trimmed(1e-14);
}

Mat matrix_poly(const Poly& p, const Mat& a) {
  if (a.rows() != a.cols()) throw Error("matrix_poly needs a square matrix");
  Mat acc = Mat::Zero(a.rows(), a.cols());
  for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) {
    acc = acc * a;
    acc.diagonal().array() += *it;
  }
  return acc;
}

}  // namespace skein
