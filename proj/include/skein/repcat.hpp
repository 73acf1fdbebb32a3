/**
 * @file repcat.hpp
 * @brief Weight modules of the unrolled quantum group at an odd root of unity.
 *
 * A WeightModule stores explicit action matrices for E, F, K, H in a basis of
 * weight vectors (H diagonal). The library modules V(alpha), S(n), P(n) and
 * eps^l follow the standard bases: v_j / e_j / x_j, y_j / v. Tensor products
 * use the coproduct Delta(E) = 1(x)E + E(x)K, Delta(F) = K^-1(x)F + F(x)1
 * (compatible with the antipode S(E) = -EK^-1, S(F) = -KF) and basis index
 * i * dim(W) + j for v_i (x) w_j.
 */

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "skein/qarith.hpp"

namespace skein {

enum class LabelKind { V, S, P, Eps, Dual, Tensor, Sum, Custom };

/// Structured module name. P(N-1) is written as V(0) (the two coincide).
struct Label {
  LabelKind kind = LabelKind::Custom;
  ExactWeight alpha;  // V
  int n = 0;          // S, P
  int l = 0;          // eps twist, also carried by S/P summands
  std::vector<Label> parts;
  std::string name;  // Custom

  static Label V(const ExactWeight& a) { return {LabelKind::V, a, 0, 0, {}, {}}; }
  static Label S(int n, int l = 0) { return {LabelKind::S, {}, n, l, {}, {}}; }
  static Label P(int n, int l = 0) { return {LabelKind::P, {}, n, l, {}, {}}; }
  static Label Eps(int l) { return {LabelKind::Eps, {}, 0, l, {}, {}}; }

  std::string str() const;
  bool operator==(const Label& o) const { return str() == o.str(); }
  bool operator<(const Label& o) const { return str() < o.str(); }
};

struct WeightModule {
  Label label;
  std::vector<ExactWeight> weights;
  Mat E, F, K, H;

  int dim() const { return static_cast<int>(weights.size()); }
};

using ModulePtr = std::shared_ptr<const WeightModule>;

/// Formal sum of weights with multiplicities.
struct Character {
  std::map<ExactWeight, int> terms;

  int total() const;
  Character operator*(const Character& o) const;
  Character operator+(const Character& o) const;
  Character operator-(const Character& o) const;
  bool operator==(const Character& o) const { return terms == o.terms; }
  /// Character of the dual: X -> X^{-1}.
  Character inverted() const;
  std::string str() const;
};

struct Morphism {
  ModulePtr source;
  ModulePtr target;
  Mat matrix;
};

ModulePtr make_V(const RootData& root, const ExactWeight& alpha);
ModulePtr make_S(const RootData& root, int n);
ModulePtr make_P(const RootData& root, int n);
ModulePtr make_eps(const RootData& root, int l);
/// Builds a module from E/F and exact weights (K and H are derived).
ModulePtr make_module(const RootData& root, Label label, std::vector<ExactWeight> weights,
                      Mat E, Mat F);

/// Parses "S(1)" (or "S1"), "V(3/10)", "P(2)", "eps^3", "D(<expr>)", parentheses
/// and tensor products "A x B". Throws Error on malformed input.
ModulePtr parse_module(const RootData& root, const std::string& text);

ModulePtr dual(const RootData& root, const ModulePtr& m);
ModulePtr tensor(const RootData& root, const ModulePtr& a, const ModulePtr& b);
/// External direct sum; the label is the list of part labels.
ModulePtr direct_sum(const RootData& root, const std::vector<ModulePtr>& parts);

Character character(const WeightModule& m);
/// Character of V(alpha): multiplicity one at alpha + N - 1 - 2j.
Character character_V(int N, const ExactWeight& alpha);
Character character_P(int N, int n, int l);
Character character_S(int N, int n, int l);

/// Max residual over KE=q^2EK, KF=q^-2FK, [H,E]=2E, [H,F]=-2F, [H,K]=0,
/// [E,F]=(K-K^-1)/(q-q^-1); also K = q^H on the diagonal.
double relation_residual(const RootData& root, const WeightModule& m);

/// Max over X in {E,F,K,H} of ||f X_src - X_tgt f||.
double intertwiner_residual(const Mat& f, const WeightModule& src, const WeightModule& tgt);

/// Basis of End(M) (orthonormal in the Frobenius inner product).
std::vector<Mat> end_algebra(const WeightModule& m, double tol = 1e-9);
/// Basis of Hom(src, tgt).
std::vector<Mat> hom_space(const WeightModule& src, const WeightModule& tgt, double tol = 1e-9);

struct Summand {
  Label label;
  Character character;
  Mat embed;    // dim(M) x d, columns span the summand
  Mat project;  // d x dim(M), project * embed = Id
  /// Action restricted to the summand, in the embed basis.
  Mat E, F, H;
};

struct DecomposeOptions {
  std::uint64_t seed = 0xC9A1;
  double cluster_tol = 1e-7;
};

struct Decomposition {
  std::vector<Summand> summands;
  /// Set when every summand is projective and the labels were re-derived by
  /// character subtraction alone.
  bool character_cross_checked = false;

  std::vector<Label> labels() const;
};

/// Splits M into indecomposable summands using idempotents of End(M).
Decomposition decompose(const RootData& root, const WeightModule& m, const DecomposeOptions& opt = {});

/// Identifies an indecomposable from its character. Throws "unrecognized summand".
Label identify(int N, const Character& chi);

/// Greedy peeling by highest weight, valid when the module is projective.
/// Throws if the character is not a sum of projective characters.
std::vector<Label> decompose_projective_character(int N, Character chi);

bool is_projective(const Label& l);

}  // namespace skein
