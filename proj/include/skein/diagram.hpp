/**
 * @file diagram.hpp
 * @brief Morse-form framed oriented tangle diagrams and their evaluation.
 *
 * A diagram is a list of bottom strands followed by rows, read bottom to top.
 * Each row is one elementary generator acting at strand position `at`:
 *   cup        (left up, right down)   coev
 *   cup_tilde  (left down, right up)   coev~
 *   cap        (left down, right up)   ev
 *   cap_tilde  (left up, right down)   ev~
 *   pos_crossing  bottom-left strand passes over       c_{X,Y}
 *   neg_crossing  bottom-right strand passes over      c^{-1}_{Y,X}
 * Downward strands carry the dual of their component's color. Framing is the
 * blackboard framing.
 */

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "skein/ribbon.hpp"

namespace skein {

enum class Gen { Cup, CupTilde, Cap, CapTilde, Pos, Neg };

std::string gen_name(Gen g);
Gen parse_gen(const std::string& name);

struct Strand {
  int comp = 0;
  bool up = true;
  bool operator==(const Strand&) const = default;
};

struct Row {
  Gen gen = Gen::Pos;
  int at = 0;
  int comp = -1;  // cups only
  bool operator==(const Row&) const = default;
};

class DiagramError : public Error {
 public:
  DiagramError(const std::string& what, int row = -1);
  int row() const { return row_; }

 private:
  int row_;
};

struct MorseDiagram {
  std::map<int, std::string> components;
  std::vector<Strand> bottom;
  std::vector<Row> rows;

  /// Strands at boundary b (0 = bottom, rows.size() = top). Assumes validity.
  std::vector<Strand> boundary(std::size_t b) const;
  std::vector<std::vector<Strand>> boundaries() const;
  std::vector<Strand> top() const { return boundary(rows.size()); }
  std::vector<int> width_profile() const;
  bool closed() const;
  int next_component_id() const;
  std::vector<int> component_ids() const;
};

/// Checks arities, orientations and that each component id names exactly
/// one connected curve. Throws DiagramError with the offending row.
void validate(const MorseDiagram& d);

MorseDiagram parse_json(const std::string& text);
/// Line-oriented text form: "bottom K:up L:down", "cup 0 K", "cup~ 0 K",
/// "cap 0", "cap~ 0", "x+ 1", "x- 1", "# comment". Component ids follow the
/// order of first appearance.
MorseDiagram parse_dsl(const std::string& text);
/// JSON if the first non-blank character is '{', otherwise the text form.
MorseDiagram parse_diagram(const std::string& text);
std::string to_json(const MorseDiagram& d);
/// Text form accepted by parse_dsl (component names must be unique words).
std::string to_dsl(const MorseDiagram& d);

/// Juxtaposes b to the right of a (components of b are renumbered).
MorseDiagram juxtapose(const MorseDiagram& a, const MorseDiagram& b,
                       std::map<int, int>* renumbering = nullptr);

/**
 * Rebuilds orientations and component ids from geometry. Cup/cap tildes of
 * the input are ignored. Each traced curve takes the orientation and id that
 * best agree with `hints` (per-boundary strand data, possibly partial);
 * curves without hints get fresh ids and a left-up start.
 */
MorseDiagram orient(std::size_t bottom_width, const std::vector<Row>& rows,
                    const std::vector<std::vector<Strand>>& hints,
                    const std::map<int, std::string>& names);

/// Reverses the orientation of one component.
MorseDiagram reverse_component(const MorseDiagram& d, int comp);

struct LinkingData {
  std::vector<int> ids;  // component order
  Eigen::MatrixXi B;
  int positive = 0;
  int negative = 0;
  int nullity = 0;
};

struct CrossingPass {
  std::size_t row;
  bool over;
};

/// Crossing passes of one component in traversal order. For pos the strand
/// from the lower left passes over, for neg the one from the lower right.
std::vector<CrossingPass> crossing_passes(const MorseDiagram& d, int comp);

/// Signed crossing of row r: +1 or -1 (requires a crossing row).
int crossing_sign(const MorseDiagram& d, std::size_t r);
LinkingData linking(const MorseDiagram& d);
/// Linking number between two distinct components.
int linking_number(const MorseDiagram& d, int a, int b);

// ---------------------------------------------------------------------------
// transforms

/// Replaces component `comp` by k parallel copies (blackboard framing).
/// Copies get ids `first_id`, `first_id + 1`, ... (copy 0 innermost on the
/// left of upward strands). k = 0 removes the component.
MorseDiagram cable(const MorseDiagram& d, int comp, int k, int first_id);

/// Vertical smoothing: deletes crossing row r.
MorseDiagram smooth_vertical(const MorseDiagram& d, std::size_t r);
/// Horizontal smoothing: replaces crossing row r by a cap and a cup.
MorseDiagram smooth_horizontal(const MorseDiagram& d, std::size_t r);

/// Inserts a small circle encircling strands [p, p + width) just above row
/// index `after_row` (-1 = at the bottom). The circle passes over in front
/// and under behind, oriented to link the strand at p positively. Returns the
/// new component id.
int insert_meridian(MorseDiagram& d, int after_row, int p, int width, const std::string& name);

/// Inserts a crossing-change circle around strands p and p+1 just below row r.
int insert_crossing_circle(MorseDiagram& d, std::size_t r, const std::string& name);

/// Adds `count` kinks (sign +-1 each) on the strand at position p above row
/// `after_row`.
void insert_kinks(MorseDiagram& d, int after_row, int p, int count);

/// Flips crossing row r between pos and neg.
void switch_crossing(MorseDiagram& d, std::size_t r);

// ---------------------------------------------------------------------------
// colors and evaluation

struct ColorTerm {
  cd coef{1.0, 0.0};
  ModulePtr module;  // null for a cable term
  int cable = 0;     // power of S_1 realized by parallel copies
};

using FormalColor = std::vector<ColorTerm>;
using ColorAssignment = std::map<int, FormalColor>;
using PureColoring = std::map<int, ModulePtr>;

FormalColor pure(ModulePtr m);
/// sum c_k S_1^{(x)k} realized by cabling.
FormalColor cabled_poly(const Poly& p);

struct EvalOptions {
  std::size_t max_dim = 1'000'000;  // guard on the product of strand dimensions
  int jobs = 1;
  bool fold_blocks = true;  // precompute small cup-crossings-cap blocks on their enclosed strands
};

/// RT evaluation of a purely colored diagram: matrix from the tensor product
/// of bottom strands to that of top strands (1x1 when closed).
Mat evaluate(const Ribbon& rb, const MorseDiagram& d, const PureColoring& colors,
             const EvalOptions& opt = {});

/// Multilinear evaluation over formal colors (cable terms expand the diagram).
Mat rt_evaluate(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors,
                const EvalOptions& opt = {});

/// Cuts closed component e (color V(alpha)) at its lowest cup and returns
/// the scalar of the resulting endomorphism of V(alpha).
cd cut_and_evaluate(const Ribbon& rb, const MorseDiagram& d, const PureColoring& colors, int e,
                    const EvalOptions& opt = {});

/// F = d(alpha) * <cut at e>, expanded multilinearly over formal colors. Every
/// term on e must be a typical module V(alpha).
cd f_invariant(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors, int e,
               const EvalOptions& opt = {});

/// Calls `fn` for every pure coloring in the multilinear expansion with its
/// coefficient; cable terms are applied to the diagram passed to `fn`.
void expand_colors(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors,
                   const std::function<void(cd, const MorseDiagram&, const PureColoring&)>& fn);

}  // namespace skein
