#include "skein/cgp.hpp"

#include <algorithm>
#include <mutex>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace skein {

namespace {

using json = nlohmann::json;

// w minus the integer part of its rational offset.
ExactWeight fractional(const ExactWeight& w) {
  const Rational& r = w.offset();
  std::int64_t fl = r.numerator() / r.denominator();
  if (r.numerator() < 0 && r.numerator() % r.denominator() != 0) --fl;
  return w - ExactWeight::integer(fl);
}

int find_component(const MorseDiagram& d, const std::string& name) {
  int found = -1;
  for (const auto& [id, n] : d.components)
    if (n == name) {
      if (found >= 0) throw Error(fmt::format("component name '{}' is ambiguous", name));
      found = id;
    }
  if (found < 0) throw Error(fmt::format("no component named '{}'", name));
  return found;
}

ExactWeight parse_weight(const json& v) {
  if (v.is_string()) return ExactWeight::parse(v.get<std::string>());
  if (v.is_number()) return ExactWeight::parse(v.dump());
  throw Error("omega values must be strings or numbers");
}

MorseDiagram diagram_from(const json& v) {
  if (v.is_string()) return parse_dsl(v.get<std::string>());
  if (v.is_array()) {
    std::string text;
    for (const auto& line : v) text += line.get<std::string>() + "\n";
    return parse_dsl(text);
  }
  return parse_json(v.dump());
}

int linking_entry(const LinkingData& ld, int a, int b) {
  auto ia = std::find(ld.ids.begin(), ld.ids.end(), a) - ld.ids.begin();
  auto ib = std::find(ld.ids.begin(), ld.ids.end(), b) - ld.ids.begin();
  return ld.B(ia, ib);
}

// sum over components j != skip of lk(comp, j) * (w_j or grading of j's color)
ExactWeight linked_omega(const SurgeryData& sd, const LinkingData& ld, int comp, int skip) {
  ExactWeight acc;
  for (std::size_t i = 0; i < sd.surgery.size(); ++i)
    if (sd.surgery[i] != skip) acc += sd.omega[i] * linking_entry(ld, comp, sd.surgery[i]);
  for (const auto& [id, color] : sd.link_colors)
    if (id != skip && id != comp) acc += color_grading(color) * linking_entry(ld, comp, id);
  return acc;
}

}  // namespace

std::size_t SurgeryData::surgery_index(int comp) const {
  auto it = std::find(surgery.begin(), surgery.end(), comp);
  if (it == surgery.end()) throw Error(fmt::format("component {} is not a surgery component", comp));
  return static_cast<std::size_t>(it - surgery.begin());
}

std::vector<int> SurgeryData::link_components() const {
  std::vector<int> out;
  for (int id : diagram.component_ids())
    if (std::find(surgery.begin(), surgery.end(), id) == surgery.end()) out.push_back(id);
  return out;
}

SurgeryData parse_surgery(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("surgery JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("surgery JSON must be an object");
  SurgeryData sd;
  sd.root = RootData::make(j.value("N", 5));
  const json& surgery = j.contains("surgery") ? j.at("surgery") : j;
  if (!surgery.contains("diagram")) throw Error("surgery JSON needs a diagram");
  sd.diagram = diagram_from(surgery.at("diagram"));

  std::vector<std::string> link_names;
  json colors = json::object();
  if (j.contains("link")) {
    const json& link = j.at("link");
    if (link.contains("components"))
      for (const auto& n : link.at("components")) link_names.push_back(n.get<std::string>());
    if (link.contains("diagram")) {
      MorseDiagram extra = diagram_from(link.at("diagram"));
      std::map<int, int> renum;
      MorseDiagram both = juxtapose(sd.diagram, extra, &renum);
      for (const auto& [old_id, new_id] : renum) link_names.push_back(both.components.at(new_id));
      sd.diagram = std::move(both);
    }
    if (link.contains("colors")) colors = link.at("colors");
  }
  std::vector<int> link_ids;
  for (const auto& n : link_names) link_ids.push_back(find_component(sd.diagram, n));
  for (int id : sd.diagram.component_ids())
    if (std::find(link_ids.begin(), link_ids.end(), id) == link_ids.end()) sd.surgery.push_back(id);
  for (int id : link_ids) {
    const std::string& name = sd.diagram.components.at(id);
    std::string color = colors.contains(name) ? colors.at(name).get<std::string>() : "S(1)";
    sd.link_colors[id] = pure(parse_module(sd.root, color));
  }

  if (surgery.contains("omega")) {
    const json& om = surgery.at("omega");
    if (om.is_array()) {
      for (const auto& v : om) sd.omega.push_back(parse_weight(v));
    } else if (om.is_object()) {
      sd.omega.resize(sd.surgery.size());
      std::vector<bool> seen(sd.surgery.size(), false);
      for (const auto& [name, v] : om.items()) {
        std::size_t i = sd.surgery_index(find_component(sd.diagram, name));
        sd.omega[i] = parse_weight(v);
        seen[i] = true;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw Error("omega is missing a surgery component");
    } else {
      throw Error("omega must be a list or an object");
    }
  }
  return sd;
}

ExactWeight color_grading(const FormalColor& c) {
  std::optional<ExactWeight> g;
  for (const auto& t : c) {
    ExactWeight here = t.module ? fractional(t.module->weights.at(0)) : ExactWeight();
    if (t.module)
      for (const auto& w : t.module->weights)
        if (!(w - t.module->weights[0]).is_integral()) throw Error("incompatible color: module is not graded");
    if (g && !(*g - here).is_integral()) throw Error("incompatible color: terms in different gradings");
    if (!g) g = here;
  }
  return g.value_or(ExactWeight());
}

ExactWeight omega_on(const SurgeryData& sd, int comp) {
  LinkingData ld = linking(sd.diagram);
  return linked_omega(sd, ld, comp, -1);
}

ValidationReport validate(const SurgeryData& sd) {
  ValidationReport rep;
  auto problem = [&](const std::string& reason, const std::string& detail) {
    rep.ok = false;
    rep.problems.push_back({reason, detail});
  };
  auto name = [&](int id) { return sd.diagram.components.at(id); };
  for (int id : sd.link_components())
    if (!sd.link_colors.count(id)) problem("uncolored component", name(id));
  if (sd.omega.size() != sd.surgery.size()) {
    problem("omega count mismatch",
            fmt::format("{} surgery components, {} omega values", sd.surgery.size(), sd.omega.size()));
    return rep;
  }
  bool colors_ok = true;
  for (const auto& [id, c] : sd.link_colors) {
    try {
      color_grading(c);
    } catch (const Error& e) {
      problem("incompatible color", fmt::format("{}: {}", name(id), e.what()));
      colors_ok = false;
    }
  }
  LinkingData ld = linking(sd.diagram);
  const int n = static_cast<int>(sd.surgery.size());
  rep.B.resize(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) rep.B(a, b) = linking_entry(ld, sd.surgery[a], sd.surgery[b]);
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.B.cast<double>());
    for (int i = 0; i < n; ++i) {
      double ev = es.eigenvalues()(i);
      if (ev > 1e-9) ++rep.positive;
      else if (ev < -1e-9) ++rep.negative;
      else ++rep.nullity;
    }
  }
  if (!colors_ok) return rep;
  bool non_integral = false;
  // lattice problems first: they are the more specific reason
  for (int i = 0; i < n; ++i) {
    if (sd.omega[i].is_quarter_integral())
      problem("omega in quarter lattice", fmt::format("{}: {}", name(sd.surgery[i]), sd.omega[i].str()));
    else
      non_integral = true;
  }
  for (int i = 0; i < n; ++i) {
    ExactWeight total = linked_omega(sd, ld, sd.surgery[i], -1);
    if (!total.is_integral())
      problem("homology inconsistent", fmt::format("{}: sum of lk * omega is {}", name(sd.surgery[i]), total.str()));
  }
  for (const auto& [id, c] : sd.link_colors)
    if (!color_grading(c).is_quarter_integral()) non_integral = true;
  if (!non_integral) problem("omega integral", "omega takes values in (1/4)Z on every meridian");
  return rep;
}

KirbyColor kirby_color(const RootData& root, const ExactWeight& alpha) {
  if (alpha.is_quarter_integral()) throw Error("omega in quarter lattice: " + alpha.str());
  KirbyColor k{alpha, {}};
  for (int i = 0; i < root.N; ++i) {
    ExactWeight a = alpha + ExactWeight::integer(i);
    k.terms.push_back({modified_dim(root, a), make_V(root, a), 0});
  }
  return k;
}

cd delta_minus(const RootData& root) { return q_power(root, 1.5) * gauss_sum(root); }

cd delta_from_diagram(const Ribbon& rb, int sign, const ExactWeight& beta, const EvalOptions& opt) {
  if (sign != 1 && sign != -1) throw Error("framing sign must be +1 or -1");
  const RootData& r = rb.root();
  MorseDiagram d = parse_dsl("cup 0 M\ncap~ 0\n");
  const int m = 0;
  const int u = insert_meridian(d, 0, 0, 1, "U");
  insert_kinks(d, 1, 0, sign);
  auto vb = make_V(r, beta);
  ColorAssignment colors{{m, pure(vb)}, {u, kirby_color(r, -beta * sign).terms}};
  cd F = f_invariant(rb, d, colors, m, opt);
  double dev = 0.0;
  cd theta = scalar_part(rb.twist(*vb), &dev);
  if (dev > 1e-9) throw Error("twist on a typical module is not scalar");
  return std::pow(theta, sign) * F / modified_dim(r, beta);
}

cd delta_plus(const RootData& root) {
  static std::mutex mutex;
  static std::map<int, cd> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(root.N);
  if (it != cache.end()) return it->second;
  Ribbon rb(root);
  cd v = delta_from_diagram(rb, 1, ExactWeight::parse("3/10"));
  cache.emplace(root.N, v);
  return v;
}

ZResult z_invariant(const Ribbon& rb, const SurgeryData& sd, const EvalOptions& opt) {
  if (sd.root.N != rb.N()) throw Error("surgery data and ribbon structure use different N");
  ValidationReport rep = validate(sd);
  if (!rep.ok) throw Error(rep.problems.front().reason + ": " + rep.problems.front().detail);
  ColorAssignment colors = sd.link_colors;
  for (std::size_t i = 0; i < sd.surgery.size(); ++i)
    colors[sd.surgery[i]] = kirby_color(sd.root, sd.omega[i]).terms;
  ZResult z;
  if (!sd.surgery.empty()) {
    z.cut = sd.surgery.front();
  } else {
    for (const auto& [id, c] : sd.link_colors) {
      bool typical = std::all_of(c.begin(), c.end(), [](const ColorTerm& t) {
        return t.module && t.module->label.kind == LabelKind::V;
      });
      if (typical) {
        z.cut = id;
        break;
      }
    }
    if (z.cut < 0) throw Error("no typical component to cut");
  }
  z.F = f_invariant(rb, sd.diagram, colors, z.cut, opt);
  z.positive = rep.positive;
  z.negative = rep.negative;
  z.value = z.F / (std::pow(delta_plus(sd.root), rep.positive) * std::pow(delta_minus(sd.root), rep.negative));
  return z;
}

cd z_value(const SurgeryData& sd, const EvalOptions& opt) {
  Ribbon rb(sd.root);
  return z_invariant(rb, sd, opt).value;
}

SurgeryData blow_up(const SurgeryData& sd, int comp, int sign) {
  if (sign != 1 && sign != -1) throw Error("blow-up sign must be +1 or -1");
  sd.surgery_index(comp);
  auto bounds = sd.diagram.boundaries();
  int after_row = -2, p = -1;
  for (std::size_t b = 0; b < bounds.size() && p < 0; ++b)
    for (std::size_t k = 0; k < bounds[b].size(); ++k)
      if (bounds[b][k].comp == comp) {
        after_row = static_cast<int>(b) - 1;
        p = static_cast<int>(k);
        break;
      }
  if (p < 0) throw Error("component has no strand");
  SurgeryData out = sd;
  insert_kinks(out.diagram, after_row, p, sign);
  const int meridian_row = after_row + 3;
  int name_index = 0;
  std::string name;
  do {
    name = fmt::format("U{}", ++name_index);
  } while (std::any_of(out.diagram.components.begin(), out.diagram.components.end(),
                       [&](const auto& kv) { return kv.second == name; }));
  const int u = insert_meridian(out.diagram, meridian_row, p, 1, name);
  insert_kinks(out.diagram, meridian_row + 1, p, sign);
  LinkingData ld = linking(out.diagram);
  ExactWeight w_u = -(linked_omega(out, ld, u, u) * sign);
  // keep the surgery list ascending
  auto pos = std::upper_bound(out.surgery.begin(), out.surgery.end(), u) - out.surgery.begin();
  out.surgery.insert(out.surgery.begin() + pos, u);
  out.omega.insert(out.omega.begin() + pos, w_u);
  return out;
}

SurgeryData shift_lift(const SurgeryData& sd, int comp, int k) {
  SurgeryData out = sd;
  out.omega[out.surgery_index(comp)] += ExactWeight::integer(k);
  return out;
}

}  // namespace skein
