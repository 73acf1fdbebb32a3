/**
 * @file skeinmap.hpp
 * @brief The map f_omega from framed links in a surgery presentation to
 * complex numbers, its Kauffman bracket relations, threading by T_N, the
 * interpolation polynomials Q_alpha and R_{alpha,beta,+-}, and a nonvanishing
 * witness link for every presentation.
 *
 * Link components are colored by S_1 and f_omega(L) = (-1)^{#L} Z_N(M, omega, L).
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skein/cgp.hpp"

namespace skein {

/// Sum a_j S_j with sum a_j U_j(z) = p(z), U_j the Chebyshev polynomials of
/// the second kind (U_0 = 1, U_1 = z). A circle colored by the result acts
/// as p(Phi_{S_1, -}). Requires deg p <= N - 1.
FormalColor chebychev_u_color(const RootData& root, const Poly& p);

/// (-1)^{#L} Z_N with every non-surgery component recolored S_1.
cd f_omega(const Ribbon& rb, const SurgeryData& sd, const EvalOptions& opt = {});
/// Same with `bare_link` juxtaposed to the right of the presentation.
cd f_omega(const Ribbon& rb, const SurgeryData& sd, const MorseDiagram& bare_link,
           const EvalOptions& opt = {});

struct KauffmanTriple {
  SurgeryData crossing;    // L_x
  SurgeryData zero;        // L_0
  SurgeryData infinity;    // L_inf
  std::size_t row = 0;     // crossing row of L_x
};

/// Builds (L_x, L_0, L_inf) at crossing row `row` of a link crossing, so that
/// f(L_x) = zeta f(L_0) + zeta^{-1} f(L_inf). For pos L_0 is the vertical
/// smoothing, for neg the horizontal one.
KauffmanTriple kauffman_triple(const SurgeryData& sd, std::size_t row);

struct KauffmanReport {
  cd fx, f0, finf;
  double residual = 0.0;  // |fx - zeta f0 - zeta^{-1} finf| / max of the three terms
};

/// Throws Error("disk-mismatch") unless the three diagrams agree outside the
/// rows replacing the crossing.
KauffmanReport verify_kauffman(const Ribbon& rb, const KauffmanTriple& t, const EvalOptions& opt = {});

struct ShadowReport {
  cd lhs;        // f(L cup T_N(K))
  cd rhs;        // -(e^{4 i pi omega(K)} + e^{-4 i pi omega(K)}) f(L)
  cd f_link;     // f(L)
  ExactWeight omega;
  double residual = 0.0;  // |lhs - rhs| / |f(L)|
  std::optional<cd> lhs_cabled;  // lhs with T_N expanded into N-strand cables
};

/// Threads T_N along the link component `target`, through the recursion
/// T_N(z) = z T_{N-1}(z) - T_{N-2}(z) realized by a 2-cable. With
/// `cabled_route` the lhs is also computed from parallel copies weighted by
/// the coefficients of T_N, which needs 2^N-dimensional cables. An explicit
/// omega must agree with the linking computation mod Z.
ShadowReport thread_chebychev(const Ribbon& rb, const SurgeryData& sd, int target,
                              const std::optional<ExactWeight>& omega = std::nullopt,
                              const EvalOptions& opt = {}, bool cabled_route = false);

struct GadgetPolynomial {
  Poly poly;
  double residual = 0.0;  // max deviation of the operator identity it solves
  bool hermite = false;   // derivative conditions were needed
};

/// Q_alpha: Q(q^{alpha+i} + q^{-alpha-i}) = delta_{i0} / d(alpha), i = 0..N-1.
/// The residual is max_i ||d(alpha+i) Phi_{Q(S_1), V(alpha+i)} - delta_{i0} Id||.
GadgetPolynomial q_polynomial(const Ribbon& rb, const ExactWeight& alpha);

/// R with Phi_{R(S_1), X(x)Y} = (c_{Y,X} c_{X,Y})^{sign}. Interpolation data
/// come from the summands of X(x)Y: on each one Phi_{S_1} = a + b h with h
/// nilpotent, and the target is read off as value and derivative at a.
GadgetPolynomial r_polynomial(const Ribbon& rb, const ModulePtr& X, const ModulePtr& Y, int sign);
GadgetPolynomial r_polynomial(const Ribbon& rb, const ExactWeight& alpha, const ExactWeight& beta, int sign);

struct WitnessLink {
  MorseDiagram diagram;            // presentation with meridians and circles
  ColorAssignment colors;          // Kirby, Q and R colors
  std::vector<int> meridians;      // one per surgery component
  std::vector<int> circles;        // one per switched crossing
  std::vector<std::size_t> switched;  // crossing rows of the input diagram
  std::vector<int> chain;          // surgery components in chain order
  int cut = -1;
  cd certificate;                  // F_N of the witness
};

/// Adds a Q-colored meridian to every surgery component and R-colored
/// circles at the crossings that must change for the components to form an
/// unknotted chain of Hopf clasps. Throws Error("witness evaluation vanished")
/// when |F| <= 1e-6.
WitnessLink surjectivity_witness(const Ribbon& rb, const SurgeryData& sd, const EvalOptions& opt = {});

/// The presentation with the chosen crossings switched and only the Q
/// meridians added: evaluates to the same F as the witness.
cd switched_chain_value(const Ribbon& rb, const SurgeryData& sd, const WitnessLink& w,
                        const EvalOptions& opt = {});

}  // namespace skein
