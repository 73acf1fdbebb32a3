#include "skein/skeinmap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

namespace skein {

namespace {

ModulePtr s1_module(const RootData& root) { return make_S(root, 1); }

SurgeryData with_s1_link(const SurgeryData& sd) {
  SurgeryData out = sd;
  out.link_colors.clear();
  for (int id : out.link_components()) out.link_colors[id] = pure(s1_module(sd.root));
  return out;
}

double sign_of_count(std::size_t n) { return n % 2 == 0 ? 1.0 : -1.0; }

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Unoriented shape of a row: cups, caps and the two crossings.
std::pair<int, int> shape(const Row& r) {
  int kind = r.gen == Gen::Pos ? 2 : r.gen == Gen::Neg ? 3 : (r.gen == Gen::Cup || r.gen == Gen::CupTilde) ? 0 : 1;
  return {kind, r.at};
}

// Rows `disk` of b replace row `r` of a; everything else must coincide.
bool same_outside(const MorseDiagram& a, const MorseDiagram& b, std::size_t r, std::size_t disk) {
  if (a.bottom.size() != b.bottom.size() || b.rows.size() + 1 != a.rows.size() + disk) return false;
  for (std::size_t i = 0; i < r; ++i)
    if (shape(a.rows[i]) != shape(b.rows[i])) return false;
  for (std::size_t i = r + 1; i < a.rows.size(); ++i)
    if (shape(a.rows[i]) != shape(b.rows[i - 1 + disk])) return false;
  if (disk == 2) {
    const int p = a.rows[r].at;
    if (shape(b.rows[r]) != std::pair{1, p} || shape(b.rows[r + 1]) != std::pair{0, p}) return false;
  }
  return true;
}

SurgeryData smoothed(const SurgeryData& sd, MorseDiagram d) {
  SurgeryData out = sd;
  out.diagram = std::move(d);
  for (int id : sd.surgery)
    if (!out.diagram.components.count(id)) throw Error("smoothing changed a surgery component");
  return with_s1_link(out);
}

}  // namespace

// ---------------------------------------------------------------------------
// colors

FormalColor chebychev_u_color(const RootData& root, const Poly& p) {
  if (p.degree() > root.N - 1) throw Error("polynomial color of degree above N - 1");
  // Horner in the U basis: z U_j = U_{j+1} + U_{j-1}.
  std::vector<cd> b;
  for (int k = p.degree(); k >= 0; --k) {
    std::vector<cd> next(b.size() + 1, 0.0);
    for (std::size_t j = 0; j < b.size(); ++j) {
      next[j + 1] += b[j];
      if (j > 0) next[j - 1] += b[j];
    }
    next[0] += p.coeffs[k];
    b = std::move(next);
  }
  double scale = 0.0;
  for (cd c : b) scale = std::max(scale, std::abs(c));
  FormalColor out;
  for (std::size_t j = 0; j < b.size(); ++j)
    if (std::abs(b[j]) > 1e-14 * scale) out.push_back({b[j], make_S(root, static_cast<int>(j)), 0});
  return out;
}

// ---------------------------------------------------------------------------
// f_omega and the Kauffman relations

cd f_omega(const Ribbon& rb, const SurgeryData& sd, const EvalOptions& opt) {
  SurgeryData s = with_s1_link(sd);
  return sign_of_count(s.link_components().size()) * z_invariant(rb, s, opt).value;
}

cd f_omega(const Ribbon& rb, const SurgeryData& sd, const MorseDiagram& bare_link, const EvalOptions& opt) {
  SurgeryData s = sd;
  s.diagram = juxtapose(sd.diagram, bare_link);
  return f_omega(rb, s, opt);
}

KauffmanTriple kauffman_triple(const SurgeryData& sd, std::size_t row) {
  const MorseDiagram& d = sd.diagram;
  if (row >= d.rows.size() || (d.rows[row].gen != Gen::Pos && d.rows[row].gen != Gen::Neg))
    throw Error(fmt::format("row {} is not a crossing", row));
  auto here = d.boundary(row);
  const int p = d.rows[row].at;
  for (int k : {p, p + 1})
    if (std::find(sd.surgery.begin(), sd.surgery.end(), here[k].comp) != sd.surgery.end())
      throw Error("crossing involves a surgery component");
  KauffmanTriple t;
  t.row = row;
  t.crossing = with_s1_link(sd);
  SurgeryData vertical = smoothed(sd, smooth_vertical(d, row));
  SurgeryData horizontal = smoothed(sd, smooth_horizontal(d, row));
  const bool pos = d.rows[row].gen == Gen::Pos;
  t.zero = pos ? vertical : horizontal;
  t.infinity = pos ? horizontal : vertical;
  return t;
}

KauffmanReport verify_kauffman(const Ribbon& rb, const KauffmanTriple& t, const EvalOptions& opt) {
  const MorseDiagram& x = t.crossing.diagram;
  const std::size_t r = t.row;
  if (r >= x.rows.size() || (x.rows[r].gen != Gen::Pos && x.rows[r].gen != Gen::Neg))
    throw Error("disk-mismatch: no crossing at the declared row");
  const bool pos = x.rows[r].gen == Gen::Pos;
  if (!same_outside(x, t.zero.diagram, r, pos ? 0 : 2) || !same_outside(x, t.infinity.diagram, r, pos ? 2 : 0))
    throw Error("disk-mismatch");
  KauffmanReport rep;
  rep.fx = f_omega(rb, t.crossing, opt);
  rep.f0 = f_omega(rb, t.zero, opt);
  rep.finf = f_omega(rb, t.infinity, opt);
  const cd z = rb.root().zeta;
  double scale = std::max({std::abs(rep.fx), std::abs(z * rep.f0), std::abs(rep.finf / z)});
  rep.residual = scale == 0.0 ? 0.0 : std::abs(rep.fx - z * rep.f0 - rep.finf / z) / scale;
  return rep;
}

// ---------------------------------------------------------------------------
// threading

ShadowReport thread_chebychev(const Ribbon& rb, const SurgeryData& sd, int target,
                              const std::optional<ExactWeight>& omega, const EvalOptions& opt,
                              bool cabled_route) {
  if (!sd.diagram.components.count(target)) throw Error(fmt::format("unknown component {}", target));
  if (std::find(sd.surgery.begin(), sd.surgery.end(), target) != sd.surgery.end())
    throw Error("threading target must be a link component");
  ShadowReport rep;
  rep.omega = omega_on(sd, target);
  if (omega) {
    if (!(*omega - rep.omega).is_integral())
      throw Error(fmt::format("omega override {} disagrees with the linking value {}", omega->str(), rep.omega.str()));
    rep.omega = *omega;
  }

  SurgeryData rest = sd;
  rest.diagram = cable(sd.diagram, target, 0, sd.diagram.next_component_id());
  rest.link_colors.erase(target);
  rep.f_link = f_omega(rb, rest, opt);

  // The target counts as an S_1 strand in f, so it carries T_N(-S_1) = -T_N(S_1)
  // = -S_1 (x) T_{N-1}(S_1) + T_{N-2}(S_1). Both factors have degree < N and
  // are exact sums of simples, so only a 2-cable is needed.
  const int N = rb.N();
  SurgeryData base = with_s1_link(sd);
  SurgeryData lower = base;
  lower.link_colors[target] = chebychev_u_color(sd.root, chebychev(N - 2));
  SurgeryData upper = base;
  const int first = sd.diagram.next_component_id();
  upper.diagram = cable(sd.diagram, target, 2, first);
  upper.link_colors.erase(target);
  upper.link_colors[first] = pure(make_S(sd.root, 1));
  upper.link_colors[first + 1] = chebychev_u_color(sd.root, chebychev(N - 1));
  const cd z = z_invariant(rb, lower, opt).value - z_invariant(rb, upper, opt).value;
  const cd sign = sign_of_count(rest.link_components().size());
  rep.lhs = sign * z;
  if (cabled_route) {
    // each S_1 copy of the cable contributes a sign to f
    Poly t = chebychev(N);
    for (std::size_t k = 1; k < t.coeffs.size(); k += 2) t.coeffs[k] = -t.coeffs[k];
    SurgeryData cabled = base;
    cabled.link_colors[target] = cabled_poly(t);
    rep.lhs_cabled = sign * z_invariant(rb, cabled, opt).value;
  }

  const cd qn = q_power(rb.root(), static_cast<double>(rb.N()) * rep.omega.numeric());
  rep.rhs = -(qn + 1.0 / qn) * rep.f_link;
  rep.residual = std::abs(rep.f_link) == 0.0 ? std::abs(rep.lhs - rep.rhs)
                                             : std::abs(rep.lhs - rep.rhs) / std::abs(rep.f_link);
  return rep;
}

// ---------------------------------------------------------------------------
// interpolation gadgets

GadgetPolynomial q_polynomial(const Ribbon& rb, const ExactWeight& alpha) {
  const RootData& root = rb.root();
  if (alpha.is_quarter_integral()) throw Error("q_polynomial needs alpha outside (1/4)Z");
  std::vector<InterpolationNode> nodes;
  const cd d0 = modified_dim(root, alpha);
  for (int i = 0; i < root.N; ++i) {
    cd a = alpha.numeric() + static_cast<double>(i);
    nodes.push_back({q_power(root, a) + q_power(root, -a), i == 0 ? 1.0 / d0 : cd(0.0), std::nullopt});
  }
  GadgetPolynomial g;
  g.poly = interpolate(nodes);
  for (int i = 0; i < root.N; ++i) {
    ExactWeight a = alpha + ExactWeight::integer(i);
    auto V = make_V(root, a);
    Mat phi = modified_dim(root, a) * rb.open_hopf_poly(g.poly, *V);
    if (i == 0) phi -= Mat::Identity(V->dim(), V->dim());
    g.residual = std::max(g.residual, max_abs(phi));
  }
  return g;
}

GadgetPolynomial r_polynomial(const Ribbon& rb, const ModulePtr& X, const ModulePtr& Y, int sign) {
  if (sign != 1 && sign != -1) throw Error("r_polynomial sign must be +1 or -1");
  const RootData& root = rb.root();
  ModulePtr W = tensor(root, X, Y);
  Mat target = sign > 0 ? Mat(rb.braiding(*Y, *X) * rb.braiding(*X, *Y))
                        : Mat(rb.braiding_inv(*X, *Y) * rb.braiding_inv(*Y, *X));
  Mat phi = rb.open_hopf(*s1_module(root), *W);

  GadgetPolynomial g;
  std::vector<InterpolationNode> nodes;
  for (const Summand& s : decompose(root, *W).summands) {
    const Eigen::Index n = s.embed.cols();
    const Mat id = Mat::Identity(n, n);
    Mat a = s.project * phi * s.embed;
    Mat t = s.project * target * s.embed;
    const cd point = a.trace() / static_cast<double>(n);
    const cd value = t.trace() / static_cast<double>(n);
    Mat nil = a - point * id;
    InterpolationNode node{point, value, std::nullopt};
    if (max_abs(nil) > 1e-8) {
      // R(a + b h) = R(a) + R'(a) b h on a summand with (b h)^2 = 0
      Mat rest = t - value * id;
      node.derivative = nil.conjugate().cwiseProduct(rest).sum() / nil.squaredNorm();
      g.hermite = true;
    }
    auto same = std::find_if(nodes.begin(), nodes.end(),
                             [&](const InterpolationNode& o) { return std::abs(o.point - point) < 1e-8; });
    if (same == nodes.end()) {
      nodes.push_back(node);
      continue;
    }
    bool values_agree = std::abs(same->value - node.value) < 1e-8 * std::max(1.0, std::abs(node.value));
    bool derivs_agree = !same->derivative || !node.derivative ||
                        std::abs(*same->derivative - *node.derivative) < 1e-8 * std::max(1.0, std::abs(*node.derivative));
    if (!values_agree || !derivs_agree) throw Error("node collision");
    if (!same->derivative) same->derivative = node.derivative;
  }
  g.poly = interpolate(nodes);
  g.residual = max_abs(matrix_poly(g.poly, phi) - target) / std::max(1.0, max_abs(target));
  return g;
}

GadgetPolynomial r_polynomial(const Ribbon& rb, const ExactWeight& alpha, const ExactWeight& beta, int sign) {
  if (alpha.is_quarter_integral() || beta.is_quarter_integral())
    throw Error("r_polynomial needs alpha and beta outside (1/4)Z");
  return r_polynomial(rb, make_V(rb.root(), alpha), make_V(rb.root(), beta), sign);
}

// ---------------------------------------------------------------------------
// surjectivity witness

namespace {

struct CrossingInfo {
  std::size_t row;
  int a, b;        // components at positions p and p+1
  int over;        // component passing over (a == b: see self_over)
  int sign;        // oriented crossing sign
};

struct SwitchPlan {
  std::vector<std::size_t> rows;
  std::vector<int> chain;
};

// Crossing rows to switch so that every component is ascending from some
// base point and the components are stacked in chain order, except for one
// crossing per pair of chain neighbours where the lower one passes over.
SwitchPlan plan_switches(const MorseDiagram& d, const std::vector<int>& comps) {
  std::map<std::size_t, CrossingInfo> info;
  std::map<int, std::vector<CrossingPass>> passes;
  for (int c : comps) passes[c] = crossing_passes(d, c);
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const Row& row = d.rows[r];
    if (row.gen != Gen::Pos && row.gen != Gen::Neg) continue;
    auto here = d.boundary(r);
    CrossingInfo ci{r, here[row.at].comp, here[row.at + 1].comp, -1, crossing_sign(d, r)};
    for (int c : {ci.a, ci.b})
      for (const auto& ps : passes[c])
        if (ps.row == r && ps.over) ci.over = c;
    info[r] = ci;
  }

  std::set<std::size_t> self_switch;
  for (int c : comps) {
    const auto& ps = passes[c];
    const int m = static_cast<int>(ps.size());
    std::map<std::size_t, std::vector<int>> visits;
    for (int t = 0; t < m; ++t) visits[ps[t].row].push_back(t);
    std::set<std::size_t> best;
    bool have = false;
    for (int dir : {1, -1})
      for (int base = 0; base < std::max(m, 1); ++base) {
        std::set<std::size_t> sw;
        for (const auto& [r, ts] : visits) {
          if (ts.size() != 2) continue;
          auto height = [&](int t) { return ((dir * (t - base)) % m + m) % m; };
          int higher = height(ts[0]) > height(ts[1]) ? ts[0] : ts[1];
          if (!ps[higher].over) sw.insert(r);
        }
        if (!have || sw.size() < best.size()) {
          best = sw;
          have = true;
        }
      }
    self_switch.insert(best.begin(), best.end());
  }

  // chain order: fewest switches among orders admitting every clasp
  std::vector<int> order = comps;
  std::sort(order.begin(), order.end());
  std::optional<std::pair<std::size_t, SwitchPlan>> best;
  do {
    std::map<int, int> rank;
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
    std::set<std::size_t> sw;
    bool feasible = true;
    std::map<std::pair<int, int>, std::vector<const CrossingInfo*>> between;
    for (const auto& [r, ci] : info)
      if (ci.a != ci.b) between[{std::min(rank[ci.a], rank[ci.b]), std::max(rank[ci.a], rank[ci.b])}].push_back(&ci);
    for (const auto& [key, list] : between) {
      const int top = order[key.first];
      std::set<std::size_t> clasp;
      if (key.second == key.first + 1) {
        // one crossing where the lower component passes over, preferably
        // one that already does
        auto under_top = std::find_if(list.begin(), list.end(), [&](const CrossingInfo* ci) { return ci->over != top; });
        clasp = {(under_top != list.end() ? *under_top : list.front())->row};
        if (clasp.empty()) feasible = false;
      }
      for (const auto* ci : list) {
        bool want_top = !clasp.count(ci->row);
        if ((ci->over == top) != want_top) sw.insert(ci->row);
      }
    }
    if (order.size() > 1)
      for (std::size_t i = 0; i + 1 < order.size(); ++i)
        if (!between.count({static_cast<int>(i), static_cast<int>(i) + 1})) feasible = false;
    if (!feasible) continue;
    sw.insert(self_switch.begin(), self_switch.end());
    if (!best || sw.size() < best->first) best = {sw.size(), {std::vector<std::size_t>(sw.begin(), sw.end()), order}};
  } while (order.size() <= 6 && std::next_permutation(order.begin(), order.end()));
  if (!best) throw Error("no chain order: the surgery components do not cross in a path");
  return best->second;
}

ModulePtr strand_module(const RootData& root, const SurgeryData& sd, const Strand& s) {
  ModulePtr v = make_V(root, sd.omega[sd.surgery_index(s.comp)]);
  return s.up ? v : dual(root, v);
}

MorseDiagram without_link(const SurgeryData& sd) {
  MorseDiagram d = sd.diagram;
  for (int id : sd.link_components()) d = cable(d, id, 0, d.next_component_id());
  return d;
}

// Adds one meridian per surgery component at its lowest boundary.
std::vector<int> add_meridians(MorseDiagram& d, const SurgeryData& sd, const Ribbon& rb, ColorAssignment& colors) {
  std::vector<int> ids;
  for (std::size_t i = 0; i < sd.surgery.size(); ++i) {
    auto bounds = d.boundaries();
    int after = -2, p = -1;
    for (std::size_t b = 0; b < bounds.size() && p < 0; ++b)
      for (std::size_t k = 0; k < bounds[b].size(); ++k)
        if (bounds[b][k].comp == sd.surgery[i]) {
          after = static_cast<int>(b) - 1;
          p = static_cast<int>(k);
          break;
        }
    int id = insert_meridian(d, after, p, 1, fmt::format("Q{}", i));
    colors[id] = chebychev_u_color(sd.root, q_polynomial(rb, sd.omega[i]).poly);
    ids.push_back(id);
  }
  return ids;
}

}  // namespace

WitnessLink surjectivity_witness(const Ribbon& rb, const SurgeryData& sd, const EvalOptions& opt) {
  ValidationReport rep = validate(sd);
  if (!rep.ok) throw Error(rep.problems.front().reason + ": " + rep.problems.front().detail);
  if (sd.surgery.empty()) throw Error("witness needs a surgery component");
  const RootData& root = sd.root;
  WitnessLink w;
  w.diagram = without_link(sd);
  SwitchPlan plan = plan_switches(w.diagram, sd.surgery);
  w.switched = plan.rows;
  w.chain = plan.chain;

  const MorseDiagram base = w.diagram;
  std::map<std::string, FormalColor> cache;
  for (auto it = plan.rows.rbegin(); it != plan.rows.rend(); ++it) {
    const std::size_t r = *it;
    auto here = base.boundary(r);
    const int p = base.rows[r].at;
    ModulePtr X = strand_module(root, sd, here[p]);
    ModulePtr Y = strand_module(root, sd, here[p + 1]);
    // a circle with Phi = (c_{Y,X} c_{X,Y})^{-+1} turns pos into neg and back
    const int sign = base.rows[r].gen == Gen::Pos ? -1 : 1;
    std::string key = fmt::format("{}|{}|{}", X->label.str(), Y->label.str(), sign);
    if (!cache.count(key)) cache[key] = chebychev_u_color(root, r_polynomial(rb, X, Y, sign).poly);
    int id = insert_crossing_circle(w.diagram, r, fmt::format("R{}", w.circles.size()));
    w.colors[id] = cache[key];
    w.circles.push_back(id);
  }
  for (std::size_t i = 0; i < sd.surgery.size(); ++i) w.colors[sd.surgery[i]] = kirby_color(root, sd.omega[i]).terms;
  w.meridians = add_meridians(w.diagram, sd, rb, w.colors);
  w.cut = sd.surgery.front();
  w.certificate = f_invariant(rb, w.diagram, w.colors, w.cut, opt);
  if (std::abs(w.certificate) <= 1e-6)
    throw Error(fmt::format("witness evaluation vanished: |F| = {:.3e}", std::abs(w.certificate)));
  return w;
}

cd switched_chain_value(const Ribbon& rb, const SurgeryData& sd, const WitnessLink& w, const EvalOptions& opt) {
  MorseDiagram d = without_link(sd);
  for (std::size_t r : w.switched) switch_crossing(d, r);
  ColorAssignment colors;
  for (std::size_t i = 0; i < sd.surgery.size(); ++i) colors[sd.surgery[i]] = kirby_color(sd.root, sd.omega[i]).terms;
  add_meridians(d, sd, rb, colors);
  return f_invariant(rb, d, colors, sd.surgery.front(), opt);
}

}  // namespace skein
