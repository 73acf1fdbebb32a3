/**
 * @file cgp.hpp
 * @brief Surgery presentations with a cohomology class, Kirby colors, the
 * normalizing constants Delta_+- and the renormalized 3-manifold invariant Z_N.
 *
 * A surgery presentation and the colored link live in one Morse diagram.
 * Each surgery component i carries a lift w_i of the value of omega on its
 * meridian; the other components carry colors.
 */

#pragma once

#include <string>
#include <vector>

#include "skein/diagram.hpp"

namespace skein {

struct SurgeryData {
  RootData root = RootData::make(5);
  MorseDiagram diagram;
  std::vector<int> surgery;         // surgery component ids, ascending
  std::vector<ExactWeight> omega;   // lifts w_i, aligned with `surgery`
  ColorAssignment link_colors;      // every non-surgery component

  std::size_t surgery_index(int comp) const;  // throws if comp is not a surgery component
  std::vector<int> link_components() const;
};

/**
 * JSON form:
 *   {"N": 5,
 *    "surgery": {"diagram": <diagram>, "omega": ["3/10", ...] or {"K": "3/10"}},
 *    "link": {"components": ["L"], "diagram": <diagram>, "colors": {"L": "S(1)"}}}
 * "link.components" names link components drawn inside the surgery diagram;
 * "link.diagram" is juxtaposed to the right. Colors default to S(1). A
 * diagram is a JSON object, or the text form as one string or a list of
 * lines. A bare
 * diagram (no "surgery" key) is read as a surgery diagram with omega from
 * the "omega" key.
 */
SurgeryData parse_surgery(const std::string& text);

struct ValidationProblem {
  std::string reason;  // machine-readable code
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationProblem> problems;
  Eigen::MatrixXi B;  // linking matrix of the surgery components
  int positive = 0;
  int negative = 0;
  int nullity = 0;
};

/// Reasons: "uncolored component", "omega count mismatch", "homology inconsistent",
/// "omega in quarter lattice", "incompatible color", "omega integral".
ValidationReport validate(const SurgeryData& sd);

struct KirbyColor {
  ExactWeight alpha;
  FormalColor terms;  // d(alpha + i) V(alpha + i), i = 0..N-1
};

/// Throws Error("omega in quarter lattice") when alpha lies in (1/4)Z.
KirbyColor kirby_color(const RootData& root, const ExactWeight& alpha);

/// q^{3/2} G_N.
cd delta_minus(const RootData& root);

/**
 * Normalized Kirby-colored unknot with framing `sign` (+-1) linked once with
 * a 0-framed meridian colored V(beta), cut at the meridian:
 *   theta_{V(beta)}^{sign} F(U cup m) / d(beta).
 * Independent of beta; equals Delta_+ for sign = +1 and Delta_- for sign = -1.
 */
cd delta_from_diagram(const Ribbon& rb, int sign, const ExactWeight& beta, const EvalOptions& opt = {});

/// Delta_+ computed once per N from the diagram above and cached.
cd delta_plus(const RootData& root);

struct ZResult {
  cd value;
  cd F;  // unnormalized F_N of the colored link
  int positive = 0;
  int negative = 0;
  int cut = -1;  // component opened for F_N
};

/// Z_N(M, omega, L). Throws Error with the first validation reason on invalid data.
ZResult z_invariant(const Ribbon& rb, const SurgeryData& sd, const EvalOptions& opt = {});
cd z_value(const SurgeryData& sd, const EvalOptions& opt = {});

/// Blow-up next to component `comp`: adds a `sign`-framed unknot encircling
/// one of its strands and a compensating `sign` kink on the strand, so the
/// presented manifold and omega are unchanged.
SurgeryData blow_up(const SurgeryData& sd, int comp, int sign);

/// Replaces w_i by w_i + k.
SurgeryData shift_lift(const SurgeryData& sd, int comp, int k);

/// omega evaluated on a closed component K of the diagram:
/// sum_i lk(K, L_i) w_i, plus the gradings of linked colored components.
ExactWeight omega_on(const SurgeryData& sd, int comp);

/// Grading class (mod Z) of a formal color, taken from its module terms.
/// Throws if the terms disagree mod Z.
ExactWeight color_grading(const FormalColor& c);

}  // namespace skein
