/**
 * @file ribbon.hpp
 * @brief Braiding, twist, pivotal maps, quantum traces and open Hopf operators
 * on weight modules.
 *
 * All maps are plain matrices in the module bases. On a tensor V(x)W the basis
 * index of v_i (x) w_j is i * dim(W) + j. The pivotal element is g = K^{1-N}:
 *   coev: C -> V(x)V*,  1 |-> sum v_i (x) v_i*
 *   ev:   V*(x)V -> C,  f (x) v |-> f(v)
 *   ev~:  V(x)V* -> C,  v (x) f |-> f(g v)
 *   coev~: C -> V*(x)V, 1 |-> sum v_i* (x) g^{-1} v_i
 */

#pragma once

#include <map>
#include <mutex>
#include <string>

#include "skein/repcat.hpp"

namespace skein {

/// Deliberate corruptions used by mutation tests.
enum class Fault { None, CartanSign };

struct AmbidexterityReport {
  double trace_deviation = 0.0;     // max ||t_L(f) - t_R(f)||
  double braiding_commutator = 0.0;  // max ||c_{V,V} f - f c_{V,V}||
  int basis_size = 0;
};

class Ribbon {
 public:
  explicit Ribbon(RootData root, Fault fault = Fault::None);

  const RootData& root() const { return root_; }
  int N() const { return root_.N; }

  /// c_{V,W}: V(x)W -> W(x)V.
  Mat braiding(const WeightModule& V, const WeightModule& W) const;
  /// Inverse of c_{V,W}: W(x)V -> V(x)W.
  Mat braiding_inv(const WeightModule& V, const WeightModule& W) const;

  Mat twist(const WeightModule& V) const;
  Mat twist_inv(const WeightModule& V) const;

  /// Diagonal of g = K^{1-N}.
  Vec pivotal(const WeightModule& V) const;

  Mat ev(const WeightModule& V) const;
  Mat coev(const WeightModule& V) const;
  Mat ev_tilde(const WeightModule& V) const;
  Mat coev_tilde(const WeightModule& V) const;

  cd qtrace(const Mat& f, const WeightModule& V) const;
  cd qdim(const WeightModule& V) const;

  /// Closes the first factor: End(V(x)W) -> End(W), sum_i g^{-1}_i f[(i,a),(i,b)].
  Mat partial_qtrace_left(const Mat& f, const WeightModule& V, const WeightModule& W) const;
  /// Closes the second factor: End(V(x)W) -> End(V), sum_c g_c f[(a,c),(b,c)].
  Mat partial_qtrace_right(const Mat& f, const WeightModule& V, const WeightModule& W) const;

  /// Phi_{V,W} in End(W): the V-strand of c_{V,W} c_{W,V} closed up.
  Mat open_hopf(const WeightModule& V, const WeightModule& W) const;
  /// Phi_{P(S_1),W} = P(Phi_{S_1,W}).
  Mat open_hopf_poly(const Poly& p, const WeightModule& W) const;

  AmbidexterityReport ambidextrous_check(const WeightModule& V) const;

 private:
  Mat compute_braiding(const WeightModule& V, const WeightModule& W) const;
  Mat compute_twist_inv(const WeightModule& V) const;

  RootData root_;
  Fault fault_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, Mat> cache_;
};

/// d(alpha) = {alpha} / {N alpha}, with the limit value on (N/4)Z (d(0) = 1/N).
/// Throws Error("modified dimension pole") on the rest of (1/4)Z.
cd modified_dim(const RootData& root, const ExactWeight& alpha);
/// Numeric form for weights known to be off (1/4)Z.
cd modified_dim(const RootData& root, cd alpha);

/// Identity-matrix check helper: max |f - lambda Id| with lambda = mean diagonal.
cd scalar_part(const Mat& f, double* deviation = nullptr);

}  // namespace skein
