#include "skein/repcat.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <unsupported/Eigen/KroneckerProduct>

namespace skein {

namespace {

Mat diag_of(const std::vector<cd>& d) {
  Mat m = Mat::Zero(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

std::string eps_suffix(int l) { return l == 0 ? "" : fmt::format("*eps^{}", l); }

// Groups basis indices by exact weight.
std::map<ExactWeight, std::vector<int>> weight_spaces(const std::vector<ExactWeight>& w) {
  std::map<ExactWeight, std::vector<int>> spaces;
  for (int i = 0; i < static_cast<int>(w.size()); ++i) spaces[w[i]].push_back(i);
  return spaces;
}

}  // namespace

// ---------------------------------------------------------------------------
// labels and characters

std::string Label::str() const {
  switch (kind) {
    case LabelKind::V: return "V(" + alpha.str() + ")";
    case LabelKind::S: return fmt::format("S({}){}", n, eps_suffix(l));
    case LabelKind::P: return fmt::format("P({}){}", n, eps_suffix(l));
    case LabelKind::Eps: return fmt::format("eps^{}", l);
    case LabelKind::Dual: return "D(" + parts.at(0).str() + ")";
    case LabelKind::Tensor: {
      std::string s = "(";
      for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " x " : "") + parts[i].str();
      return s + ")";
    }
    case LabelKind::Sum: {
      std::string s = "[";
      for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " + " : "") + parts[i].str();
      return s + "]";
    }
    case LabelKind::Custom: return name;
  }
  return name;
}

bool is_projective(const Label& l) { return l.kind == LabelKind::V || l.kind == LabelKind::P; }

int Character::total() const {
  int t = 0;
  for (const auto& [w, m] : terms) t += m;
  return t;
}

Character Character::operator*(const Character& o) const {
  Character r;
  for (const auto& [a, ma] : terms)
    for (const auto& [b, mb] : o.terms) r.terms[a + b] += ma * mb;
  return r;
}

Character Character::operator+(const Character& o) const {
  Character r = *this;
  for (const auto& [w, m] : o.terms) r.terms[w] += m;
  return r;
}

Character Character::operator-(const Character& o) const {
  Character r = *this;
  for (const auto& [w, m] : o.terms) {
    int& slot = r.terms[w];
    slot -= m;
    if (slot == 0) r.terms.erase(w);
  }
  return r;
}

Character Character::inverted() const {
  Character r;
  for (const auto& [w, m] : terms) r.terms[-w] = m;
  return r;
}

std::string Character::str() const {
  std::string s;
  for (const auto& [w, m] : terms) {
    if (!s.empty()) s += " + ";
    if (m != 1) s += std::to_string(m) + "*";
    s += "X^" + w.str();
  }
  return s.empty() ? "0" : s;
}

Character character(const WeightModule& m) {
  Character c;
  for (const auto& w : m.weights) c.terms[w] += 1;
  return c;
}

Character character_V(int N, const ExactWeight& alpha) {
  Character c;
  for (int j = 0; j < N; ++j) c.terms[alpha + ExactWeight::integer(N - 1 - 2 * j)] += 1;
  return c;
}

Character character_P(int N, int n, int l) {
  ExactWeight shift(Rational(std::int64_t{l} * N, 4));
  Character c;
  for (int j = 0; j < N; ++j) {
    c.terms[shift + ExactWeight::integer(2 * N - 2 - n - 2 * j)] += 1;
    c.terms[shift + ExactWeight::integer(n - 2 * j)] += 1;
  }
  return c;
}

Character character_S(int N, int n, int l) {
  ExactWeight shift(Rational(std::int64_t{l} * N, 4));
  Character c;
  for (int j = 0; j <= n; ++j) c.terms[shift + ExactWeight::integer(n - 2 * j)] += 1;
  return c;
}

// ---------------------------------------------------------------------------
// constructors

ModulePtr make_module(const RootData& root, Label label, std::vector<ExactWeight> weights, Mat E,
                      Mat F) {
  auto m = std::make_shared<WeightModule>();
  const int d = static_cast<int>(weights.size());
  std::vector<cd> h(d), k(d);
  for (int i = 0; i < d; ++i) {
    h[i] = weights[i].numeric();
    k[i] = q_power(root, h[i]);
  }
  m->label = std::move(label);
  m->weights = std::move(weights);
  m->E = std::move(E);
  m->F = std::move(F);
  m->H = diag_of(h);
  m->K = diag_of(k);
  return m;
}

ModulePtr make_V(const RootData& root, const ExactWeight& alpha) {
  if (!alpha.is_admissible(root.N)) throw Error("alpha not in admissible set: " + alpha.str());
  const int N = root.N;
  std::vector<ExactWeight> w;
  for (int j = 0; j < N; ++j) w.push_back(alpha + ExactWeight::integer(N - 1 - 2 * j));
  Mat E = Mat::Zero(N, N), F = Mat::Zero(N, N);
  const cd a = alpha.numeric();
  for (int j = 0; j + 1 < N; ++j) F(j + 1, j) = 1.0;
  for (int j = 1; j < N; ++j) E(j - 1, j) = qbracket(root, double(j)) * qbracket(root, a - double(j));
  return make_module(root, Label::V(alpha), std::move(w), std::move(E), std::move(F));
}

ModulePtr make_S(const RootData& root, int n) {
  if (n < 0 || n > root.N - 1) throw Error(fmt::format("S(n) needs 0 <= n <= {} (got {})", root.N - 1, n));
  const int d = n + 1;
  std::vector<ExactWeight> w;
  for (int j = 0; j <= n; ++j) w.push_back(ExactWeight::integer(n - 2 * j));
  Mat E = Mat::Zero(d, d), F = Mat::Zero(d, d);
  for (int j = 0; j < n; ++j) F(j + 1, j) = 1.0;
  for (int j = 1; j <= n; ++j)
    E(j - 1, j) = qbracket(root, double(j)) * qbracket(root, double(n + 1 - j));
  return make_module(root, Label::S(n), std::move(w), std::move(E), std::move(F));
}

ModulePtr make_P(const RootData& root, int n) {
  const int N = root.N;
  if (n < 0 || n > N - 2) throw Error(fmt::format("P(n) needs 0 <= n <= {} (got {})", N - 2, n));
  // x_j at index j, y_j at index N + j
  std::vector<ExactWeight> w(2 * N);
  for (int j = 0; j < N; ++j) {
    w[j] = ExactWeight::integer(2 * N - 2 - n - 2 * j);
    w[N + j] = ExactWeight::integer(n - 2 * j);
  }
  Mat E = Mat::Zero(2 * N, 2 * N), F = Mat::Zero(2 * N, 2 * N);
  for (int j = 0; j + 1 < N; ++j) {
    F(j + 1, j) = 1.0;
    F(N + j + 1, N + j) = 1.0;
  }
  for (int j = 1; j < N; ++j)
    E(j - 1, j) = -qbracket(root, double(j)) * qbracket(root, double(j + 1 + n));
  // E y_j = [j][n+1-j] y_{j-1} + x_{N-2-n+j}; the x-term runs over j = 0..n+1
  for (int j = 0; j <= n + 1; ++j) E(N - 2 - n + j, N + j) = 1.0;
  for (int j = 1; j < N; ++j)
    E(N + j - 1, N + j) = qbracket(root, double(j)) * qbracket(root, double(n + 1 - j));
  return make_module(root, Label::P(n), std::move(w), std::move(E), std::move(F));
}

ModulePtr make_eps(const RootData& root, int l) {
  std::vector<ExactWeight> w{ExactWeight(Rational(std::int64_t{l} * root.N, 4))};
  return make_module(root, Label::Eps(l), std::move(w), Mat::Zero(1, 1), Mat::Zero(1, 1));
}

ModulePtr dual(const RootData& root, const ModulePtr& m) {
  std::vector<ExactWeight> w;
  for (const auto& x : m->weights) w.push_back(-x);
  Mat kinv = m->K.inverse();
  Mat E = (-(m->E * kinv)).transpose();
  Mat F = (-(m->K * m->F)).transpose();
  Label l{LabelKind::Dual, {}, 0, 0, {m->label}, {}};
  return make_module(root, std::move(l), std::move(w), std::move(E), std::move(F));
}

ModulePtr tensor(const RootData& root, const ModulePtr& a, const ModulePtr& b) {
  std::vector<ExactWeight> w;
  w.reserve(a->dim() * b->dim());
  for (const auto& x : a->weights)
    for (const auto& y : b->weights) w.push_back(x + y);
  Mat ia = Mat::Identity(a->dim(), a->dim()), ib = Mat::Identity(b->dim(), b->dim());
  Mat E = Eigen::kroneckerProduct(ia, b->E).eval() + Eigen::kroneckerProduct(a->E, b->K).eval();
  Mat F = Eigen::kroneckerProduct(Mat(a->K.inverse()), b->F).eval() +
          Eigen::kroneckerProduct(a->F, ib).eval();
  Label l{LabelKind::Tensor, {}, 0, 0, {a->label, b->label}, {}};
  return make_module(root, std::move(l), std::move(w), std::move(E), std::move(F));
}

ModulePtr direct_sum(const RootData& root, const std::vector<ModulePtr>& parts) {
  int d = 0;
  for (const auto& p : parts) d += p->dim();
  Mat E = Mat::Zero(d, d), F = Mat::Zero(d, d);
  std::vector<ExactWeight> w;
  Label l{LabelKind::Sum, {}, 0, 0, {}, {}};
  int off = 0;
  for (const auto& p : parts) {
    E.block(off, off, p->dim(), p->dim()) = p->E;
    F.block(off, off, p->dim(), p->dim()) = p->F;
    w.insert(w.end(), p->weights.begin(), p->weights.end());
    l.parts.push_back(p->label);
    off += p->dim();
  }
  return make_module(root, std::move(l), std::move(w), std::move(E), std::move(F));
}

// ---------------------------------------------------------------------------
// checks

double relation_residual(const RootData& root, const WeightModule& m) {
  const cd q = root.q;
  const Mat& E = m.E;
  const Mat& F = m.F;
  const Mat& K = m.K;
  const Mat& H = m.H;
  Mat kinv = K.inverse();
  double r = 0.0;
  r = std::max(r, (K * E - q * q * E * K).norm());
  r = std::max(r, (K * F - F * K / (q * q)).norm());
  r = std::max(r, (H * E - E * H - 2.0 * E).norm());
  r = std::max(r, (H * F - F * H + 2.0 * F).norm());
  r = std::max(r, (H * K - K * H).norm());
  r = std::max(r, (E * F - F * E - (K - kinv) / (q - 1.0 / q)).norm());
  for (int i = 0; i < m.dim(); ++i) r = std::max(r, std::abs(K(i, i) - q_power(root, H(i, i))));
  return r;
}

double intertwiner_residual(const Mat& f, const WeightModule& src, const WeightModule& tgt) {
  double r = 0.0;
  r = std::max(r, (f * src.E - tgt.E * f).norm());
  r = std::max(r, (f * src.F - tgt.F * f).norm());
  r = std::max(r, (f * src.K - tgt.K * f).norm());
  r = std::max(r, (f * src.H - tgt.H * f).norm());
  return r;
}

std::vector<Mat> hom_space(const WeightModule& src, const WeightModule& tgt, double tol) {
  // Unknowns: entries f(a, b) between equal exact weights.
  auto src_spaces = weight_spaces(src.weights);
  std::vector<std::pair<int, int>> unknowns;
  std::map<std::pair<int, int>, int> index;
  for (int a = 0; a < tgt.dim(); ++a) {
    auto it = src_spaces.find(tgt.weights[a]);
    if (it == src_spaces.end()) continue;
    for (int b : it->second) {
      index[{a, b}] = static_cast<int>(unknowns.size());
      unknowns.emplace_back(a, b);
    }
  }
  const int nu = static_cast<int>(unknowns.size());
  if (nu == 0) return {};

  // Rows: entries (i, j) of f X_src - X_tgt f, only where the weight gap is +-2.
  std::vector<std::vector<std::pair<int, cd>>> rows;
  auto add_constraints = [&](const Mat& Xs, const Mat& Xt, int shift) {
    for (int i = 0; i < tgt.dim(); ++i) {
      for (int j = 0; j < src.dim(); ++j) {
        if (!(tgt.weights[i] == src.weights[j] + ExactWeight::integer(shift))) continue;
        std::map<int, cd> row;
        // (f Xs)(i, j) = sum_b f(i, b) Xs(b, j)
        for (int b = 0; b < src.dim(); ++b) {
          if (Xs(b, j) == cd(0.0)) continue;
          auto it = index.find({i, b});
          if (it != index.end()) row[it->second] += Xs(b, j);
        }
        // (Xt f)(i, j) = sum_a Xt(i, a) f(a, j)
        for (int a = 0; a < tgt.dim(); ++a) {
          if (Xt(i, a) == cd(0.0)) continue;
          auto it = index.find({a, j});
          if (it != index.end()) row[it->second] -= Xt(i, a);
        }
        if (!row.empty()) rows.emplace_back(row.begin(), row.end());
      }
    }
  };
  add_constraints(src.E, tgt.E, 2);
  add_constraints(src.F, tgt.F, -2);

  Mat basis;
  if (rows.empty()) {
    basis = Mat::Identity(nu, nu);
  } else {
    Mat A = Mat::Zero(static_cast<Eigen::Index>(rows.size()), nu);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (const auto& [c, v] : rows[r]) A(r, c) = v;
    Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    double smax = s.size() ? std::max(1.0, s(0)) : 1.0;
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (s(k) > tol * smax) ++rank;
    basis = svd.matrixV().rightCols(nu - rank);
  }
  std::vector<Mat> out;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    Mat f = Mat::Zero(tgt.dim(), src.dim());
    for (int u = 0; u < nu; ++u) f(unknowns[u].first, unknowns[u].second) = basis(u, k);
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<Mat> end_algebra(const WeightModule& m, double tol) { return hom_space(m, m, tol); }

// ---------------------------------------------------------------------------
// identification

namespace {

// Highest and lowest weights of a character whose weights share one symbolic part.
std::pair<ExactWeight, ExactWeight> extremes(const Character& chi) {
  const auto& first = chi.terms.begin()->first;
  ExactWeight top = first, bottom = first;
  for (const auto& [w, m] : chi.terms) {
    if (w.symbols() != first.symbols()) throw Error("unrecognized summand: mixed weight classes");
    if (top < w) top = w;
    if (w < bottom) bottom = w;
  }
  return {top, bottom};
}

// l with shift = l N / 4, or nullopt.
std::optional<int> eps_index(int N, const ExactWeight& shift) {
  if (!shift.is_rational()) return std::nullopt;
  Rational l = shift.offset() * std::int64_t{4} / std::int64_t{N};
  if (l.denominator() != 1) return std::nullopt;
  return static_cast<int>(l.numerator());
}

}  // namespace

Label identify(int N, const Character& chi) {
  if (chi.terms.empty()) throw Error("unrecognized summand: empty");
  const int d = chi.total();
  auto [top, bottom] = extremes(chi);
  if (d == N) {
    ExactWeight alpha = top - ExactWeight::integer(N - 1);
    if (alpha.is_admissible(N) && character_V(N, alpha) == chi) return Label::V(alpha);
  }
  if (top.is_rational() && bottom.is_rational()) {
    Rational mid = (top.offset() + bottom.offset()) / std::int64_t{2};
    auto l = eps_index(N, ExactWeight(mid));
    Rational span = top.offset() - bottom.offset();
    if (l && span.denominator() == 1) {
      auto width = span.numerator();
      if (d == 2 * N && (4 * N - 4 - width) % 2 == 0) {
        int n = static_cast<int>((4 * N - 4 - width) / 2);
        if (n >= 0 && n <= N - 2 && character_P(N, n, *l) == chi) return Label::P(n, *l);
      }
      if (d <= N && width == 2 * (d - 1)) {
        int n = d - 1;
        if (character_S(N, n, *l) == chi) return n == 0 && *l != 0 ? Label::Eps(*l) : Label::S(n, *l);
      }
    }
  }
  throw Error("unrecognized summand: " + chi.str());
}

std::vector<Label> decompose_projective_character(int N, Character chi) {
  std::vector<Label> out;
  auto contains = [&](const Character& part) {
    for (const auto& [w, m] : part.terms) {
      auto it = chi.terms.find(w);
      if (it == chi.terms.end() || it->second < m) return false;
    }
    return true;
  };
  while (!chi.terms.empty()) {
    // highest weight within the class of the first remaining weight
    const auto symbols = chi.terms.begin()->first.symbols();
    ExactWeight top = chi.terms.begin()->first;
    for (const auto& [w, m] : chi.terms)
      if (w.symbols() == symbols && top < w) top = w;

    ExactWeight alpha = top - ExactWeight::integer(N - 1);
    if (alpha.is_admissible(N) && contains(character_V(N, alpha))) {
      chi = chi - character_V(N, alpha);
      out.push_back(Label::V(alpha));
      continue;
    }
    bool found = false;
    if (top.is_rational()) {
      // top = 2N - 2 - n + l N / 4 with 0 <= n <= N - 2
      for (int n = 0; n <= N - 2 && !found; ++n) {
        auto l = eps_index(N, top - ExactWeight::integer(2 * N - 2 - n));
        if (!l) continue;
        auto part = character_P(N, n, *l);
        if (contains(part)) {
          chi = chi - part;
          out.push_back(Label::P(n, *l));
          found = true;
        }
      }
    }
    if (!found) throw Error("character is not a sum of projective characters near X^" + top.str());
  }
  return out;
}

std::vector<Label> Decomposition::labels() const {
  std::vector<Label> l;
  for (const auto& s : summands) l.push_back(s.label);
  return l;
}

// ---------------------------------------------------------------------------
// decomposition

Decomposition decompose(const RootData& root, const WeightModule& m, const DecomposeOptions& opt) {
  const int d = m.dim();
  auto basis = end_algebra(m);
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  Mat X = Mat::Zero(d, d);
  for (const auto& b : basis) X += cd(gauss(rng), gauss(rng)) * b;

  Eigen::ComplexEigenSolver<Mat> es(X, false);
  const auto& ev = es.eigenvalues();
  double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  double tol = opt.cluster_tol * scale;

  // single-linkage clustering of the spectrum
  std::vector<int> cluster(d, -1);
  int nclusters = 0;
  for (int i = 0; i < d; ++i) {
    if (cluster[i] >= 0) continue;
    std::vector<int> stack{i};
    cluster[i] = nclusters;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < d; ++b)
        if (cluster[b] < 0 && std::abs(ev(a) - ev(b)) <= tol) {
          cluster[b] = nclusters;
          stack.push_back(b);
        }
    }
    ++nclusters;
  }
  std::vector<cd> centers(nclusters, 0.0);
  std::vector<int> counts(nclusters, 0);
  for (int i = 0; i < d; ++i) {
    centers[cluster[i]] += ev(i);
    counts[cluster[i]]++;
  }
  for (int c = 0; c < nclusters; ++c) centers[c] /= double(counts[c]);

  auto spaces = weight_spaces(m.weights);
  Decomposition out;
  Character total;
  const Mat id = Mat::Identity(d, d);
  for (int c = 0; c < nclusters; ++c) {
    double gap = 2.0;
    for (int o = 0; o < nclusters; ++o)
      if (o != c) gap = std::min(gap, std::abs(centers[o] - centers[c]));
    // Riesz projector by the trapezoidal rule on a circle around the cluster.
    const double rho = 0.5 * gap;
    constexpr int M = 64;
    Mat P = Mat::Zero(d, d);
    for (int k = 0; k < M; ++k) {
      cd e = std::polar(1.0, 2.0 * std::numbers::pi * k / M);
      cd z = centers[c] + rho * e;
      P += rho * e * (z * id - X).partialPivLu().solve(id);
    }
    P /= double(M);

    Summand s;
    for (const auto& [w, idx] : spaces) {
      cd tr = 0.0;
      for (int i : idx) tr += P(i, i);
      int mult = static_cast<int>(std::lround(tr.real()));
      if (std::abs(tr - double(mult)) > 1e-6)
        throw Error("decompose: non-integral projector trace on weight " + w.str());
      if (mult > 0) s.character.terms[w] = mult;
    }
    const int r = s.character.total();
    if (r != counts[c]) throw Error("decompose: projector rank disagrees with cluster size");
    Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeFullU);
    s.embed = svd.matrixU().leftCols(r);
    s.project = s.embed.adjoint() * P;
    s.E = s.project * m.E * s.embed;
    s.F = s.project * m.F * s.embed;
    s.H = s.project * m.H * s.embed;
    s.label = identify(root.N, s.character);
    total = total + s.character;
    out.summands.push_back(std::move(s));
  }
  if (!(total == character(m))) throw Error("decompose: summand characters do not add up");

  std::sort(out.summands.begin(), out.summands.end(),
            [](const Summand& a, const Summand& b) { return a.label.str() < b.label.str(); });

  bool all_projective = std::all_of(out.summands.begin(), out.summands.end(),
                                    [](const Summand& s) { return is_projective(s.label); });
  if (all_projective) {
    auto by_char = decompose_projective_character(root.N, character(m));
    auto structural = out.labels();
    std::sort(by_char.begin(), by_char.end());
    std::sort(structural.begin(), structural.end());
    if (!(by_char == structural))
      throw Error("decompose: idempotent splitting disagrees with character subtraction");
    out.character_cross_checked = true;
  }
  return out;
}

namespace {

class ModuleParser {
 public:
  ModuleParser(const RootData& root, const std::string& text) : root_(root), text_(text) {}

  ModulePtr parse() {
    ModulePtr m = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing text");
    return m;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(fmt::format("module '{}': {} at offset {}", text_, msg, pos_));
  }
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool eat(const std::string& tok) {
    skip_space();
    if (text_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  std::string until_close() {
    std::size_t end = text_.find(')', pos_);
    if (end == std::string::npos) fail("missing ')'");
    std::string inner = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return inner;
  }
  int integer(const std::string& s) {
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) fail("bad integer '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad integer '" + s + "'");
    }
  }
  ModulePtr expr() {
    ModulePtr m = factor();
    while (eat("x") || eat("\u2297")) m = tensor(root_, m, factor());
    return m;
  }
  ModulePtr factor() {
    skip_space();
    if (eat("(")) {
      ModulePtr m = expr();
      if (!eat(")")) fail("missing ')'");
      return m;
    }
    if (eat("D(")) {
      ModulePtr m = expr();
      if (!eat(")")) fail("missing ')'");
      return dual(root_, m);
    }
    if (eat("V(")) return make_V(root_, ExactWeight::parse(until_close()));
    if (eat("S(")) return make_S(root_, integer(until_close()));
    if (eat("P(")) return make_P(root_, integer(until_close()));
    if (eat("eps^")) {
      std::size_t start = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return make_eps(root_, integer(text_.substr(start, pos_ - start)));
    }
    if (eat("S")) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected S(n) or Sn");
      return make_S(root_, integer(text_.substr(start, pos_ - start)));
    }
    fail("expected a module");
  }

  const RootData& root_;
  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

ModulePtr parse_module(const RootData& root, const std::string& text) { return ModuleParser(root, text).parse(); }

}  // namespace skein
