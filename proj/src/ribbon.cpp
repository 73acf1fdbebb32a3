#include "skein/ribbon.hpp"

#include <fmt/format.h>

namespace skein {

namespace {

std::string module_key(const WeightModule& m) {
  std::string key = m.label.str();
  for (const auto& w : m.weights) key += fmt::format("|{:.17g},{:.17g}", w.numeric().real(), w.numeric().imag());
  return key;
}

// Permutation V(x)W -> W(x)V applied on the left: rows (a,b) move to (b,a).
Mat flip_rows(const Mat& m, int dV, int dW) {
  Mat out(m.rows(), m.cols());
  for (int a = 0; a < dV; ++a)
    for (int b = 0; b < dW; ++b) out.row(b * dV + a) = m.row(a * dW + b);
  return out;
}

bool is_zero(const Mat& m) { return m.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

Ribbon::Ribbon(RootData root, Fault fault) : root_(root), fault_(fault) {}

Mat Ribbon::compute_braiding(const WeightModule& V, const WeightModule& W) const {
  const int dV = V.dim(), dW = W.dim();
  const cd q = root_.q;
  Mat R = Mat::Zero(dV * dW, dV * dW);
  Mat En = Mat::Identity(dV, dV), Fn = Mat::Identity(dW, dW);
  cd coef = 1.0;
  for (int n = 0; n < root_.N; ++n) {
    if (n > 0) {
      En = En * V.E;
      Fn = Fn * W.F;
      coef *= std::pow(q, n - 1) * (q - 1.0 / q) / qbracket(root_, double(n));
      if (is_zero(En) || is_zero(Fn)) break;
    }
    for (int a = 0; a < dV; ++a)
      for (int i = 0; i < dV; ++i) {
        if (En(a, i) == cd(0.0)) continue;
        for (int b = 0; b < dW; ++b)
          for (int j = 0; j < dW; ++j)
            if (Fn(b, j) != cd(0.0)) R(a * dW + b, i * dW + j) += coef * En(a, i) * Fn(b, j);
      }
  }
  const double sign = fault_ == Fault::CartanSign ? -1.0 : 1.0;
  for (int a = 0; a < dV; ++a)
    for (int b = 0; b < dW; ++b) {
      cd h = V.weights[a].numeric() * W.weights[b].numeric();
      R.row(a * dW + b) *= q_power(root_, sign * h / 2.0);
    }
  return flip_rows(R, dV, dW);
}

Mat Ribbon::braiding(const WeightModule& V, const WeightModule& W) const {
  std::string key = "c:" + module_key(V) + "#" + module_key(W);
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Mat c = compute_braiding(V, W);
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(c)).first->second;
}

Mat Ribbon::braiding_inv(const WeightModule& V, const WeightModule& W) const {
  std::string key = "ci:" + module_key(V) + "#" + module_key(W);
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Mat c = braiding(V, W).partialPivLu().inverse();
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(c)).first->second;
}

Mat Ribbon::compute_twist_inv(const WeightModule& V) const {
  const int d = V.dim();
  const cd q = root_.q;
  Mat antipode_F = -(V.K * V.F);
  Mat Sn = Mat::Identity(d, d), En = Mat::Identity(d, d);
  Mat gauss = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    cd l = V.weights[i].numeric();
    gauss(i, i) = q_power(root_, -l * l / 2.0);
  }
  Mat acc = Mat::Zero(d, d);
  cd coef = 1.0;
  for (int n = 0; n < root_.N; ++n) {
    if (n > 0) {
      Sn = Sn * antipode_F;
      En = En * V.E;
      coef *= std::pow(q, n - 1) * (q - 1.0 / q) / qbracket(root_, double(n));
      if (is_zero(En) || is_zero(Sn)) break;
    }
    acc += coef * Sn * gauss * En;
  }
  Mat kpow = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) kpow(i, i) = q_power(root_, double(root_.N - 1) * V.weights[i].numeric());
  return kpow * acc;
}

Mat Ribbon::twist_inv(const WeightModule& V) const {
  std::string key = "ti:" + module_key(V);
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Mat t = compute_twist_inv(V);
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(t)).first->second;
}

Mat Ribbon::twist(const WeightModule& V) const {
  std::string key = "t:" + module_key(V);
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto lu = twist_inv(V).fullPivLu();
  if (!lu.isInvertible()) throw Error("twist matrix is singular");
  Mat t = lu.inverse();
  std::lock_guard lock(mutex_);
  return cache_.emplace(key, std::move(t)).first->second;
}

Vec Ribbon::pivotal(const WeightModule& V) const {
  Vec g(V.dim());
  for (int i = 0; i < V.dim(); ++i) g(i) = q_power(root_, double(1 - root_.N) * V.weights[i].numeric());
  return g;
}

Mat Ribbon::ev(const WeightModule& V) const {
  const int d = V.dim();
  Mat m = Mat::Zero(1, d * d);
  for (int i = 0; i < d; ++i) m(0, i * d + i) = 1.0;
  return m;
}

Mat Ribbon::coev(const WeightModule& V) const {
  const int d = V.dim();
  Mat m = Mat::Zero(d * d, 1);
  for (int i = 0; i < d; ++i) m(i * d + i, 0) = 1.0;
  return m;
}

Mat Ribbon::ev_tilde(const WeightModule& V) const {
  const int d = V.dim();
  Vec g = pivotal(V);
  Mat m = Mat::Zero(1, d * d);
  for (int i = 0; i < d; ++i) m(0, i * d + i) = g(i);
  return m;
}

Mat Ribbon::coev_tilde(const WeightModule& V) const {
  const int d = V.dim();
  Vec g = pivotal(V);
  Mat m = Mat::Zero(d * d, 1);
  for (int i = 0; i < d; ++i) m(i * d + i, 0) = 1.0 / g(i);
  return m;
}

cd Ribbon::qtrace(const Mat& f, const WeightModule& V) const {
  Vec g = pivotal(V);
  cd t = 0.0;
  for (int i = 0; i < V.dim(); ++i) t += g(i) * f(i, i);
  return t;
}

cd Ribbon::qdim(const WeightModule& V) const { return pivotal(V).sum(); }

Mat Ribbon::partial_qtrace_left(const Mat& f, const WeightModule& V, const WeightModule& W) const {
  const int dV = V.dim(), dW = W.dim();
  Vec g = pivotal(V);
  Mat out = Mat::Zero(dW, dW);
  for (int i = 0; i < dV; ++i) out += f.block(i * dW, i * dW, dW, dW) / g(i);
  return out;
}

Mat Ribbon::partial_qtrace_right(const Mat& f, const WeightModule& V, const WeightModule& W) const {
  const int dV = V.dim(), dW = W.dim();
  Vec g = pivotal(W);
  Mat out = Mat::Zero(dV, dV);
  for (int a = 0; a < dV; ++a)
    for (int b = 0; b < dV; ++b)
      for (int c = 0; c < dW; ++c) out(a, b) += g(c) * f(a * dW + c, b * dW + c);
  return out;
}

Mat Ribbon::open_hopf(const WeightModule& V, const WeightModule& W) const {
  Mat double_braid = braiding(V, W) * braiding(W, V);  // End(W(x)V)
  return partial_qtrace_right(double_braid, W, V);
}

Mat Ribbon::open_hopf_poly(const Poly& p, const WeightModule& W) const {
  return matrix_poly(p, open_hopf(*make_S(root_, 1), W));
}

AmbidexterityReport Ribbon::ambidextrous_check(const WeightModule& V) const {
  auto VV = tensor(root_, std::make_shared<WeightModule>(V), std::make_shared<WeightModule>(V));
  auto basis = end_algebra(*VV);
  Mat c = braiding(V, V);
  AmbidexterityReport rep;
  rep.basis_size = static_cast<int>(basis.size());
  for (const auto& f : basis) {
    Mat tl = partial_qtrace_left(f, V, V);
    Mat tr = partial_qtrace_right(f, V, V);
    rep.trace_deviation = std::max(rep.trace_deviation, (tl - tr).norm());
    rep.braiding_commutator = std::max(rep.braiding_commutator, (c * f - f * c).norm());
  }
  return rep;
}

cd modified_dim(const RootData& root, const ExactWeight& alpha) {
  if (alpha.in_quarter_lattice(root.N)) {
    cd a = alpha.numeric();
    cd na = double(root.N) * a;
    return (q_power(root, a) + q_power(root, -a)) /
           (double(root.N) * (q_power(root, na) + q_power(root, -na)));
  }
  if (alpha.is_quarter_integral()) throw Error("modified dimension pole at " + alpha.str());
  return modified_dim(root, alpha.numeric());
}

cd modified_dim(const RootData& root, cd alpha) {
  cd den = qbrace(root, double(root.N) * alpha);
  if (std::abs(den) < 1e-12) throw Error("modified dimension pole");
  return qbrace(root, alpha) / den;
}

cd scalar_part(const Mat& f, double* deviation) {
  if (f.rows() != f.cols() || f.rows() == 0) throw Error("scalar_part needs a non-empty square matrix");
  cd lambda = f.trace() / double(f.rows());
  if (deviation) {
    Mat id = Mat::Identity(f.rows(), f.cols());
    *deviation = (f - lambda * id).cwiseAbs().maxCoeff();
  }
  return lambda;
}

}  // namespace skein
