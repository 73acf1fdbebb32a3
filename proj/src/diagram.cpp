#include "skein/diagram.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <Eigen/SparseCore>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace skein {

DiagramError::DiagramError(const std::string& what, int row)
    : Error(row >= 0 ? fmt::format("row {}: {}", row, what) : what), row_(row) {}

std::string gen_name(Gen g) {
  switch (g) {
    case Gen::Cup: return "cup";
    case Gen::CupTilde: return "cup_tilde";
    case Gen::Cap: return "cap";
    case Gen::CapTilde: return "cap_tilde";
    case Gen::Pos: return "pos_crossing";
    case Gen::Neg: return "neg_crossing";
  }
  return "?";
}

Gen parse_gen(const std::string& name) {
  if (name == "cup") return Gen::Cup;
  if (name == "cup_tilde" || name == "cup~") return Gen::CupTilde;
  if (name == "cap") return Gen::Cap;
  if (name == "cap_tilde" || name == "cap~") return Gen::CapTilde;
  if (name == "pos_crossing" || name == "x+") return Gen::Pos;
  if (name == "neg_crossing" || name == "x-") return Gen::Neg;
  throw DiagramError("unknown generator '" + name + "'");
}

namespace {

bool is_cup(Gen g) { return g == Gen::Cup || g == Gen::CupTilde; }
bool is_cap(Gen g) { return g == Gen::Cap || g == Gen::CapTilde; }
bool is_crossing(Gen g) { return g == Gen::Pos || g == Gen::Neg; }

std::string dsl_name(Gen g) {
  switch (g) {
    case Gen::Cup: return "cup";
    case Gen::CupTilde: return "cup~";
    case Gen::Cap: return "cap";
    case Gen::CapTilde: return "cap~";
    case Gen::Pos: return "x+";
    case Gen::Neg: return "x-";
  }
  return "?";
}

// Applies one row to a boundary, checking arity and orientation.
void step(std::vector<Strand>& s, const Row& row, int index) {
  const int w = static_cast<int>(s.size());
  const int p = row.at;
  if (is_cup(row.gen)) {
    if (p < 0 || p > w) throw DiagramError(fmt::format("cup position {} outside width {}", p, w), index);
    bool left_up = row.gen == Gen::Cup;
    s.insert(s.begin() + p, {Strand{row.comp, left_up}, Strand{row.comp, !left_up}});
    return;
  }
  if (p < 0 || p + 1 >= w)
    throw DiagramError(fmt::format("{} at {} needs two strands (width {})", gen_name(row.gen), p, w), index);
  if (is_cap(row.gen)) {
    bool left_up = row.gen == Gen::CapTilde;
    if (s[p].up != left_up || s[p + 1].up == left_up)
      throw DiagramError(fmt::format("orientation conflict at {} column {}", gen_name(row.gen), p), index);
    if (s[p].comp != s[p + 1].comp)
      throw DiagramError(fmt::format("cap at column {} joins components {} and {}", p, s[p].comp, s[p + 1].comp),
                         index);
    s.erase(s.begin() + p, s.begin() + p + 2);
    return;
  }
  std::swap(s[p], s[p + 1]);
}

// Neighbor structure of strand segments (nodes) between rows.
struct Tracer {
  std::vector<int> offset;  // node id of (b, 0)
  std::vector<int> width;
  std::vector<int> lower, upper;

  int node(std::size_t b, int k) const { return offset[b] + k; }
  std::size_t boundary_of(int n) const {
    return static_cast<std::size_t>(std::upper_bound(offset.begin(), offset.end(), n) - offset.begin() - 1);
  }

  Tracer(std::size_t bottom_width, const std::vector<Row>& rows) {
    width.push_back(static_cast<int>(bottom_width));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      int w = width.back();
      if (is_cup(rows[r].gen)) w += 2;
      else if (is_cap(rows[r].gen)) w -= 2;
      if (w < 0) throw DiagramError("negative width", static_cast<int>(r));
      width.push_back(w);
    }
    offset.resize(width.size() + 1, 0);
    for (std::size_t b = 0; b < width.size(); ++b) offset[b + 1] = offset[b] + width[b];
    offset.pop_back();
    int total = offset.back() + width.back();
    lower.assign(total, -1);
    upper.assign(total, -1);
    auto link = [&](int lo, int hi) {
      upper[lo] = hi;
      lower[hi] = lo;
    };
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const int p = rows[r].at, w = width[r];
      const Gen g = rows[r].gen;
      if (is_cup(g)) {
        if (p < 0 || p > w) throw DiagramError("cup outside the diagram", static_cast<int>(r));
        for (int k = 0; k < w; ++k) link(node(r, k), node(r + 1, k < p ? k : k + 2));
        lower[node(r + 1, p)] = node(r + 1, p + 1);
        lower[node(r + 1, p + 1)] = node(r + 1, p);
      } else if (is_cap(g)) {
        if (p < 0 || p + 1 >= w) throw DiagramError("cap outside the diagram", static_cast<int>(r));
        for (int k = 0; k < w; ++k)
          if (k < p) link(node(r, k), node(r + 1, k));
          else if (k >= p + 2) link(node(r, k), node(r + 1, k - 2));
        upper[node(r, p)] = node(r, p + 1);
        upper[node(r, p + 1)] = node(r, p);
      } else {
        if (p < 0 || p + 1 >= w) throw DiagramError("crossing outside the diagram", static_cast<int>(r));
        for (int k = 0; k < w; ++k) {
          int k2 = k == p ? p + 1 : (k == p + 1 ? p : k);
          link(node(r, k), node(r + 1, k2));
        }
      }
    }
  }

  int size() const { return static_cast<int>(lower.size()); }

  // Traverses the curve through `start`; returns nodes with their direction.
  std::vector<std::pair<int, bool>> trace(int start) const {
    // Walk backwards first to find an open end if there is one.
    int n = start;
    bool up = true;
    int guard = 0;
    while (true) {
      int m = up ? lower[n] : upper[n];  // reverse direction
      if (m < 0) break;
      bool same_level = boundary_of(m) == boundary_of(n);
      bool next_up = same_level ? !up : up;
      n = m;
      up = next_up;
      if (n == start || ++guard > size() + 2) break;
    }
    std::vector<std::pair<int, bool>> out;
    int first = n;
    bool first_up = up;
    if (n == start && (up ? lower[n] : upper[n]) >= 0) {
      // closed curve: restart from the start going up
      first = start;
      first_up = true;
    }
    n = first;
    up = first_up;
    while (true) {
      out.emplace_back(n, up);
      int m = up ? upper[n] : lower[n];
      if (m < 0 || m == first) break;
      bool same_level = boundary_of(m) == boundary_of(n);
      up = same_level ? !up : up;
      n = m;
      if (out.size() > static_cast<std::size_t>(size())) throw Error("curve tracing did not terminate");
    }
    return out;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// MorseDiagram

std::vector<Strand> MorseDiagram::boundary(std::size_t b) const {
  std::vector<Strand> s = bottom;
  for (std::size_t r = 0; r < b && r < rows.size(); ++r) step(s, rows[r], static_cast<int>(r));
  return s;
}

std::vector<std::vector<Strand>> MorseDiagram::boundaries() const {
  std::vector<std::vector<Strand>> out{bottom};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.push_back(out.back());
    step(out.back(), rows[r], static_cast<int>(r));
  }
  return out;
}

std::vector<int> MorseDiagram::width_profile() const {
  std::vector<int> w{static_cast<int>(bottom.size())};
  for (const auto& r : rows) w.push_back(w.back() + (is_cup(r.gen) ? 2 : is_cap(r.gen) ? -2 : 0));
  return w;
}

bool MorseDiagram::closed() const { return bottom.empty() && width_profile().back() == 0; }

int MorseDiagram::next_component_id() const {
  int m = -1;
  for (const auto& [id, name] : components) m = std::max(m, id);
  return m + 1;
}

std::vector<int> MorseDiagram::component_ids() const {
  std::vector<int> ids;
  for (const auto& [id, name] : components) ids.push_back(id);
  return ids;
}

void validate(const MorseDiagram& d) {
  for (const auto& s : d.bottom)
    if (!d.components.count(s.comp)) throw DiagramError(fmt::format("bottom strand of unknown component {}", s.comp));
  std::vector<Strand> s = d.bottom;
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const auto& row = d.rows[r];
    if (is_cup(row.gen) && !d.components.count(row.comp))
      throw DiagramError(fmt::format("cup of unknown component {}", row.comp), static_cast<int>(r));
    step(s, row, static_cast<int>(r));
  }
  // each component id is one connected curve
  Tracer t(d.bottom.size(), d.rows);
  auto bounds = d.boundaries();
  std::vector<bool> seen(t.size(), false);
  std::map<int, int> curves_per_comp;
  for (int n = 0; n < t.size(); ++n) {
    if (seen[n]) continue;
    auto curve = t.trace(n);
    std::set<int> comps;
    for (auto [m, up] : curve) {
      seen[m] = true;
      auto b = t.boundary_of(m);
      comps.insert(bounds[b][m - t.offset[b]].comp);
    }
    if (comps.size() != 1) throw DiagramError("one curve carries several component ids");
    curves_per_comp[*comps.begin()]++;
  }
  for (const auto& [c, count] : curves_per_comp)
    if (count > 1) throw DiagramError(fmt::format("component {} consists of {} separate curves", c, count));
}

std::vector<CrossingPass> crossing_passes(const MorseDiagram& d, int comp) {
  Tracer t(d.bottom.size(), d.rows);
  auto bounds = d.boundaries();
  int start = -1;
  for (std::size_t b = 0; b < bounds.size() && start < 0; ++b)
    for (std::size_t k = 0; k < bounds[b].size(); ++k)
      if (bounds[b][k].comp == comp) {
        start = t.node(b, static_cast<int>(k));
        break;
      }
  if (start < 0) throw DiagramError(fmt::format("unknown component {}", comp));
  auto curve = t.trace(start);
  const auto [last, last_up] = curve.back();
  const bool closed = (last_up ? t.upper[last] : t.lower[last]) == curve.front().first;
  std::vector<CrossingPass> out;
  auto visit = [&](int a, int b) {
    auto ba = t.boundary_of(a), bb = t.boundary_of(b);
    if (ba == bb) return;
    int lo = ba < bb ? a : b;
    std::size_t r = std::min(ba, bb);
    const Row& row = d.rows[r];
    if (!is_crossing(row.gen)) return;
    int k = lo - t.offset[r];
    if (k != row.at && k != row.at + 1) return;
    out.push_back({r, row.gen == Gen::Pos ? k == row.at : k == row.at + 1});
  };
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) visit(curve[i].first, curve[i + 1].first);
  if (closed) visit(last, curve.front().first);
  return out;
}

// ---------------------------------------------------------------------------
// orientation from geometry

MorseDiagram orient(std::size_t bottom_width, const std::vector<Row>& rows,
                    const std::vector<std::vector<Strand>>& hints,
                    const std::map<int, std::string>& names) {
  Tracer t(bottom_width, rows);
  const int n = t.size();
  auto hint_at = [&](int node) -> const Strand* {
    auto b = t.boundary_of(node);
    int k = node - t.offset[b];
    if (b >= hints.size() || k >= static_cast<int>(hints[b].size()) || hints[b][k].comp < 0) return nullptr;
    return &hints[b][k];
  };

  struct Curve {
    std::vector<std::pair<int, bool>> nodes;
    std::map<int, int> votes;
    int id = -1;
  };
  std::vector<Curve> curves;
  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    Curve c;
    c.nodes = t.trace(s);
    int agree = 0, disagree = 0;
    for (auto [m, up] : c.nodes) {
      seen[m] = true;
      if (const Strand* h = hint_at(m)) {
        (h->up == up ? agree : disagree)++;
        c.votes[h->comp]++;
      }
    }
    if (disagree > agree)
      for (auto& [m, up] : c.nodes) up = !up;
    curves.push_back(std::move(c));
  }

  // ids: strongest claim first, fresh ids for the rest
  int fresh = 0;
  for (const auto& [id, name] : names) fresh = std::max(fresh, id + 1);
  for (const auto& c : curves)
    for (const auto& [id, v] : c.votes) fresh = std::max(fresh, id + 1);
  std::vector<std::size_t> order(curves.size());
  std::iota(order.begin(), order.end(), 0);
  auto best = [](const Curve& c) {
    std::pair<int, int> b{0, -1};
    for (const auto& [id, v] : c.votes)
      if (v > b.first) b = {v, id};
    return b;
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return best(curves[a]).first > best(curves[b]).first; });
  std::set<int> taken;
  MorseDiagram d;
  for (auto i : order) {
    auto [votes, id] = best(curves[i]);
    std::string name;
    if (votes > 0 && !taken.count(id)) {
      curves[i].id = id;
      auto it = names.find(id);
      name = it != names.end() ? it->second : fmt::format("c{}", id);
    } else {
      curves[i].id = fresh++;
      auto it = votes > 0 ? names.find(id) : names.end();
      name = it != names.end() ? it->second + "'" : fmt::format("c{}", curves[i].id);
      while (std::any_of(d.components.begin(), d.components.end(),
                         [&](const auto& kv) { return kv.second == name; }))
        name += "'";
    }
    taken.insert(curves[i].id);
    d.components[curves[i].id] = name;
  }

  std::vector<bool> node_up(n);
  std::vector<int> node_comp(n);
  for (const auto& c : curves)
    for (auto [m, up] : c.nodes) {
      node_up[m] = up;
      node_comp[m] = c.id;
    }
  for (std::size_t k = 0; k < bottom_width; ++k) d.bottom.push_back({node_comp[k], node_up[k]});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Row row = rows[r];
    row.comp = -1;
    if (is_cup(row.gen)) {
      int left = t.node(r + 1, row.at);
      row.gen = node_up[left] ? Gen::Cup : Gen::CupTilde;
      row.comp = node_comp[left];
    } else if (is_cap(row.gen)) {
      int left = t.node(r, row.at);
      row.gen = node_up[left] ? Gen::CapTilde : Gen::Cap;
    }
    d.rows.push_back(row);
  }
  return d;
}

MorseDiagram reverse_component(const MorseDiagram& d, int comp) {
  auto hints = d.boundaries();
  for (auto& b : hints)
    for (auto& s : b)
      if (s.comp == comp) s.up = !s.up;
  return orient(d.bottom.size(), d.rows, hints, d.components);
}

// ---------------------------------------------------------------------------
// serialization

MorseDiagram parse_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DiagramError(std::string("malformed diagram JSON: ") + e.what());
  }
  try {
    if (j.value("version", 1) != 1) throw DiagramError("unsupported diagram version");
    MorseDiagram d;
    if (j.contains("components"))
      for (auto& [key, val] : j.at("components").items()) d.components[std::stoi(key)] = val.get<std::string>();
    if (j.contains("bottom"))
      for (const auto& s : j.at("bottom")) d.bottom.push_back({s.at("comp").get<int>(), s.value("up", true)});
    int index = 0;
    for (const auto& r : j.at("rows")) {
      Row row;
      try {
        row.gen = parse_gen(r.at("gen").get<std::string>());
      } catch (const DiagramError& e) {
        throw DiagramError(e.what(), index);
      }
      row.at = r.at("at").get<int>();
      if (is_cup(row.gen)) {
        if (!r.contains("comp")) throw DiagramError("cup without component", index);
        row.comp = r.at("comp").get<int>();
      }
      d.rows.push_back(row);
      ++index;
    }
    validate(d);
    if (j.contains("width_profile")) {
      auto declared = j.at("width_profile").get<std::vector<int>>();
      if (declared != d.width_profile()) throw DiagramError("width_profile does not match the rows");
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw DiagramError(std::string("diagram JSON: ") + e.what());
  }
}

MorseDiagram parse_dsl(const std::string& text) {
  MorseDiagram d;
  std::map<std::string, int> ids;
  auto comp_id = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    int id = static_cast<int>(ids.size());
    ids[name] = id;
    d.components[id] = name;
    return id;
  };
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string op;
    if (!(ls >> op)) continue;
    auto fail = [&](const std::string& msg) {
      throw DiagramError(fmt::format("line {}: {}", lineno, msg), static_cast<int>(d.rows.size()));
    };
    if (op == "component") {
      std::string name;
      if (!(ls >> name)) fail("component needs a name");
      comp_id(name);
    } else if (op == "bottom") {
      std::string tok;
      while (ls >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) fail("bottom strands are written name:up or name:down");
        std::string dir = tok.substr(colon + 1);
        if (dir != "up" && dir != "down") fail("strand direction must be up or down");
        d.bottom.push_back({comp_id(tok.substr(0, colon)), dir == "up"});
      }
    } else {
      Row row;
      try {
        row.gen = parse_gen(op);
      } catch (const DiagramError&) {
        fail("unknown generator '" + op + "'");
      }
      if (!(ls >> row.at)) fail("missing position");
      if (is_cup(row.gen)) {
        std::string name;
        if (!(ls >> name)) fail("cup needs a component name");
        row.comp = comp_id(name);
      }
      d.rows.push_back(row);
    }
  }
  validate(d);
  return d;
}

std::string to_dsl(const MorseDiagram& d) {
  std::set<std::string> names;
  for (const auto& [id, name] : d.components) {
    bool word = !name.empty() && std::none_of(name.begin(), name.end(), [](char c) {
      return std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == ':';
    });
    if (!word || !names.insert(name).second) throw DiagramError("component names must be unique words: '" + name + "'");
  }
  std::string out;
  for (int id : d.component_ids()) out += "component " + d.components.at(id) + "\n";
  if (!d.bottom.empty()) {
    out += "bottom";
    for (const auto& s : d.bottom) out += " " + d.components.at(s.comp) + (s.up ? ":up" : ":down");
    out += "\n";
  }
  for (const auto& r : d.rows) {
    out += fmt::format("{} {}", dsl_name(r.gen), r.at);
    if (is_cup(r.gen)) out += " " + d.components.at(r.comp);
    out += "\n";
  }
  return out;
}

MorseDiagram parse_diagram(const std::string& text) {
  auto pos = text.find_first_not_of(" \t\r\n");
  if (pos != std::string::npos && text[pos] == '{') return parse_json(text);
  return parse_dsl(text);
}

std::string to_json(const MorseDiagram& d) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  nlohmann::ordered_json comps = nlohmann::ordered_json::object();
  for (const auto& [id, name] : d.components) comps[std::to_string(id)] = name;
  j["components"] = comps;
  j["bottom"] = nlohmann::ordered_json::array();
  for (const auto& s : d.bottom) j["bottom"].push_back({{"comp", s.comp}, {"up", s.up}});
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : d.rows) {
    nlohmann::ordered_json row{{"gen", gen_name(r.gen)}, {"at", r.at}};
    if (is_cup(r.gen)) row["comp"] = r.comp;
    j["rows"].push_back(row);
  }
  j["width_profile"] = d.width_profile();
  return j.dump(1);
}

MorseDiagram juxtapose(const MorseDiagram& a, const MorseDiagram& b, std::map<int, int>* renumbering) {
  if (!a.bottom.empty() || !b.bottom.empty()) throw DiagramError("juxtapose needs closed diagrams");
  MorseDiagram d = a;
  std::map<int, int> ren;
  int next = a.next_component_id();
  for (const auto& [id, name] : b.components) {
    ren[id] = next;
    d.components[next++] = name;
  }
  for (auto row : b.rows) {
    if (is_cup(row.gen)) row.comp = ren.at(row.comp);
    d.rows.push_back(row);
  }
  if (renumbering) *renumbering = ren;
  return d;
}

// ---------------------------------------------------------------------------
// linking data

int crossing_sign(const MorseDiagram& d, std::size_t r) {
  const Row& row = d.rows.at(r);
  if (!is_crossing(row.gen)) throw DiagramError("not a crossing", static_cast<int>(r));
  auto s = d.boundary(r);
  int geometric = row.gen == Gen::Pos ? 1 : -1;
  return s[row.at].up == s[row.at + 1].up ? geometric : -geometric;
}

LinkingData linking(const MorseDiagram& d) {
  LinkingData L;
  L.ids = d.component_ids();
  std::map<int, int> index;
  for (std::size_t i = 0; i < L.ids.size(); ++i) index[L.ids[i]] = static_cast<int>(i);
  const int n = static_cast<int>(L.ids.size());
  Eigen::MatrixXi twice = Eigen::MatrixXi::Zero(n, n);
  auto bounds = d.boundaries();
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const Row& row = d.rows[r];
    if (!is_crossing(row.gen)) continue;
    const auto& s = bounds[r];
    int geometric = row.gen == Gen::Pos ? 1 : -1;
    int sign = s[row.at].up == s[row.at + 1].up ? geometric : -geometric;
    int a = index.at(s[row.at].comp), b = index.at(s[row.at + 1].comp);
    if (a == b) {
      twice(a, a) += 2 * sign;
    } else {
      twice(a, b) += sign;
      twice(b, a) += sign;
    }
  }
  L.B = Eigen::MatrixXi::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (twice(i, j) % 2 != 0) throw DiagramError("odd crossing count between two components of a closed diagram");
      L.B(i, j) = twice(i, j) / 2;
    }
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.B.cast<double>());
    for (Eigen::Index k = 0; k < n; ++k) {
      double ev = es.eigenvalues()(k);
      if (ev > 1e-9) ++L.positive;
      else if (ev < -1e-9) ++L.negative;
      else ++L.nullity;
    }
  }
  return L;
}

int linking_number(const MorseDiagram& d, int a, int b) {
  if (a == b) throw DiagramError("linking number needs two distinct components");
  auto L = linking(d);
  auto ia = std::find(L.ids.begin(), L.ids.end(), a) - L.ids.begin();
  auto ib = std::find(L.ids.begin(), L.ids.end(), b) - L.ids.begin();
  if (ia == static_cast<long>(L.ids.size()) || ib == static_cast<long>(L.ids.size()))
    throw DiagramError("unknown component");
  return L.B(ia, ib);
}

// ---------------------------------------------------------------------------
// transforms

MorseDiagram cable(const MorseDiagram& d, int comp, int k, int first_id) {
  if (!d.components.count(comp)) throw DiagramError(fmt::format("unknown component {}", comp));
  if (k < 0) throw DiagramError("negative cable multiplicity");
  MorseDiagram out;
  for (const auto& [id, name] : d.components)
    if (id != comp) out.components[id] = name;
  for (int c = 0; c < k; ++c) {
    if (out.components.count(first_id + c)) throw DiagramError("cable copy id already in use");
    out.components[first_id + c] = fmt::format("{}#{}", d.components.at(comp), c);
  }
  auto copies = [&](bool up) {
    std::vector<Strand> v;
    for (int c = 0; c < k; ++c) v.push_back({first_id + (up ? c : k - 1 - c), up});
    return v;
  };
  for (const auto& s : d.bottom) {
    if (s.comp == comp) {
      auto v = copies(s.up);
      out.bottom.insert(out.bottom.end(), v.begin(), v.end());
    } else {
      out.bottom.push_back(s);
    }
  }
  std::vector<Strand> s = d.bottom;
  auto mult = [&](const Strand& x) { return x.comp == comp ? k : 1; };
  auto newpos = [&](int p) {
    int q = 0;
    for (int i = 0; i < p; ++i) q += mult(s[i]);
    return q;
  };
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const Row& row = d.rows[r];
    const int P = newpos(row.at);
    if (is_cup(row.gen) && row.comp == comp) {
      bool left_up = row.gen == Gen::Cup;
      for (int i = 0; i < k; ++i) out.rows.push_back({row.gen, P + i, first_id + (left_up ? i : k - 1 - i)});
    } else if (is_cap(row.gen) && s[row.at].comp == comp) {
      for (int i = k - 1; i >= 0; --i) out.rows.push_back({row.gen, P + i, -1});
    } else if (is_crossing(row.gen)) {
      int a = mult(s[row.at]), b = mult(s[row.at + 1]);
      for (int i = a - 1; i >= 0; --i)
        for (int j = 0; j < b; ++j) out.rows.push_back({row.gen, P + i + j, -1});
    } else {
      out.rows.push_back({row.gen, P, row.comp});
    }
    step(s, row, static_cast<int>(r));
  }
  validate(out);
  return out;
}

namespace {

MorseDiagram rebuild(const MorseDiagram& d, const std::vector<Row>& rows,
                     const std::vector<std::vector<Strand>>& hints) {
  auto out = orient(d.bottom.size(), rows, hints, d.components);
  validate(out);
  return out;
}

}  // namespace

namespace {

// Per-boundary hints for the diagram obtained by replacing row r with
// `replacement`. Strands are matched to the original by identity labels.
std::vector<std::vector<Strand>> replacement_hints(const MorseDiagram& d, std::size_t r,
                                                   const std::vector<Row>& replacement) {
  auto bounds = d.boundaries();
  auto cup_label = [](std::size_t row, int side) { return 1'000'000 + 2 * static_cast<int>(row) + side; };
  auto apply = [&](std::vector<int>& lab, const Row& row, std::size_t index, bool fresh) {
    if (is_cup(row.gen)) {
      int a = fresh ? -1 : cup_label(index, 0), b = fresh ? -1 : cup_label(index, 1);
      lab.insert(lab.begin() + row.at, {a, b});
    } else if (is_cap(row.gen)) {
      lab.erase(lab.begin() + row.at, lab.begin() + row.at + 2);
    } else {
      std::swap(lab[row.at], lab[row.at + 1]);
    }
  };
  std::vector<std::vector<int>> old_labels;
  std::vector<int> lab(d.bottom.size());
  std::iota(lab.begin(), lab.end(), 0);
  old_labels.push_back(lab);
  for (std::size_t t = 0; t < d.rows.size(); ++t) {
    apply(lab, d.rows[t], t, false);
    old_labels.push_back(lab);
  }
  auto lookup = [&](const std::vector<int>& labels, std::size_t old_b) {
    std::vector<Strand> h;
    for (int l : labels) {
      Strand s{-1, true};
      const auto& ol = old_labels[old_b];
      auto it = l < 0 ? ol.end() : std::find(ol.begin(), ol.end(), l);
      if (it != ol.end()) s = bounds[old_b][it - ol.begin()];
      h.push_back(s);
    }
    return h;
  };
  std::vector<std::vector<Strand>> hints(bounds.begin(), bounds.begin() + r + 1);
  lab = old_labels[r];
  for (const auto& row : replacement) {
    apply(lab, row, 0, true);
    hints.push_back(lookup(lab, r));
  }
  for (std::size_t t = r + 1; t < d.rows.size(); ++t) {
    apply(lab, d.rows[t], t, false);
    hints.push_back(lookup(lab, t + 1));
  }
  return hints;
}

MorseDiagram replace_row(const MorseDiagram& d, std::size_t r, const std::vector<Row>& replacement) {
  if (r >= d.rows.size() || !is_crossing(d.rows[r].gen))
    throw DiagramError("smoothing needs a crossing row", static_cast<int>(r));
  auto hints = replacement_hints(d, r, replacement);
  std::vector<Row> rows(d.rows.begin(), d.rows.begin() + r);
  rows.insert(rows.end(), replacement.begin(), replacement.end());
  rows.insert(rows.end(), d.rows.begin() + r + 1, d.rows.end());
  return rebuild(d, rows, hints);
}

}  // namespace

MorseDiagram smooth_vertical(const MorseDiagram& d, std::size_t r) { return replace_row(d, r, {}); }

MorseDiagram smooth_horizontal(const MorseDiagram& d, std::size_t r) {
  if (r >= d.rows.size()) throw DiagramError("smoothing needs a crossing row", static_cast<int>(r));
  const int p = d.rows[r].at;
  return replace_row(d, r, {{Gen::Cap, p, -1}, {Gen::Cup, p, -1}});
}

namespace {

// Inserts `extra` rows after row index `after_row` (-1 = bottom); the inserted
// boundaries carry no hints. Returns the rebuilt diagram.
MorseDiagram insert_rows(const MorseDiagram& d, int after_row, const std::vector<Row>& extra) {
  auto bounds = d.boundaries();
  const std::size_t cut = static_cast<std::size_t>(after_row + 1);
  if (cut > d.rows.size()) throw DiagramError("insertion point beyond the last row");
  std::vector<Row> rows(d.rows.begin(), d.rows.begin() + cut);
  rows.insert(rows.end(), extra.begin(), extra.end());
  rows.insert(rows.end(), d.rows.begin() + cut, d.rows.end());
  std::vector<std::vector<Strand>> hints(bounds.begin(), bounds.begin() + cut + 1);
  for (std::size_t i = 0; i < extra.size(); ++i) hints.emplace_back();
  for (std::size_t b = cut + 1; b < bounds.size(); ++b) hints.push_back(bounds[b]);
  // the boundary just after the inserted rows equals bounds[cut]
  hints[cut + extra.size()] = bounds[cut];
  return rebuild(d, rows, hints);
}

}  // namespace

int insert_meridian(MorseDiagram& d, int after_row, int p, int width, const std::string& name) {
  auto bounds = d.boundaries();
  const auto& here = bounds.at(static_cast<std::size_t>(after_row + 1));
  if (p < 0 || width < 1 || p + width > static_cast<int>(here.size()))
    throw DiagramError("meridian range outside the diagram", after_row + 1);
  std::vector<Row> extra{{Gen::Cup, p, -1}};
  for (int k = p + 1; k <= p + width; ++k) extra.push_back({Gen::Pos, k, -1});
  for (int k = p + width; k >= p + 1; --k) extra.push_back({Gen::Pos, k, -1});
  extra.push_back({Gen::Cap, p, -1});
  auto before = d.component_ids();
  d = insert_rows(d, after_row, extra);
  for (int id : d.component_ids())
    if (std::find(before.begin(), before.end(), id) == before.end()) {
      d.components[id] = name;
      // orient so that the circle links the strand at p positively
      if (crossing_sign(d, static_cast<std::size_t>(after_row + 2)) < 0) d = reverse_component(d, id);
      return id;
    }
  throw Error("meridian insertion lost the new component");
}

int insert_crossing_circle(MorseDiagram& d, std::size_t r, const std::string& name) {
  if (r >= d.rows.size() || !is_crossing(d.rows[r].gen)) throw DiagramError("not a crossing", static_cast<int>(r));
  return insert_meridian(d, static_cast<int>(r) - 1, d.rows[r].at, 2, name);
}

void insert_kinks(MorseDiagram& d, int after_row, int p, int count) {
  auto bounds = d.boundaries();
  const auto& here = bounds.at(static_cast<std::size_t>(after_row + 1));
  if (p < 0 || p >= static_cast<int>(here.size())) throw DiagramError("kink position outside the diagram", after_row + 1);
  std::vector<Row> extra;
  Gen g = count > 0 ? Gen::Pos : Gen::Neg;
  for (int i = 0; i < std::abs(count); ++i) {
    extra.push_back({Gen::Cup, p + 1, -1});
    extra.push_back({g, p, -1});
    extra.push_back({Gen::Cap, p + 1, -1});
  }
  auto names = d.components;
  d = insert_rows(d, after_row, extra);
  d.components = names;
}

void switch_crossing(MorseDiagram& d, std::size_t r) {
  if (r >= d.rows.size() || !is_crossing(d.rows[r].gen)) throw DiagramError("not a crossing", static_cast<int>(r));
  d.rows[r].gen = d.rows[r].gen == Gen::Pos ? Gen::Neg : Gen::Pos;
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

using RowMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tensor state: sites left to right, batch index innermost.
struct State {
  std::vector<int> dims;
  std::size_t batch = 1;
  std::vector<cd> data;
};

std::size_t product(const std::vector<int>& dims, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t i = from; i < to; ++i) p *= static_cast<std::size_t>(dims[i]);
  return p;
}

void check_size(const std::vector<int>& dims, std::size_t batch, std::size_t max_dim, int row) {
  std::size_t total = product(dims, 0, dims.size());
  if (total > max_dim)
    throw DiagramError(fmt::format("width guard: state dimension {} exceeds {}", total, max_dim), row);
  (void)batch;
}

// Replaces sites [pos, pos + k_in) by sites `out_dims` through `op`.
void apply_local(State& st, int pos, int k_in, const Mat& op, const std::vector<int>& out_dims,
                 std::size_t max_dim, int row) {
  const std::size_t A = product(st.dims, 0, pos);
  const std::size_t M = product(st.dims, pos, pos + k_in);
  const std::size_t B = product(st.dims, pos + k_in, st.dims.size()) * st.batch;
  const std::size_t M2 = static_cast<std::size_t>(op.rows());
  if (static_cast<std::size_t>(op.cols()) != M) throw Error("local operator has the wrong input dimension");
  std::vector<int> dims(st.dims.begin(), st.dims.begin() + pos);
  dims.insert(dims.end(), out_dims.begin(), out_dims.end());
  dims.insert(dims.end(), st.dims.begin() + pos + k_in, st.dims.end());
  check_size(dims, st.batch, max_dim, row);
  std::vector<cd> out(A * M2 * B);
  // braidings, cups and caps preserve weights and are mostly zero
  const auto nonzeros = (op.array() != cd(0.0)).count();
  const bool sparse = nonzeros * 4 < op.size();
  Eigen::SparseMatrix<cd, Eigen::RowMajor> sop;
  if (sparse) sop = op.sparseView();
  for (std::size_t a = 0; a < A; ++a) {
    Eigen::Map<const RowMat> in(st.data.data() + a * M * B, M, B);
    Eigen::Map<RowMat> res(out.data() + a * M2 * B, M2, B);
    if (sparse)
      res.noalias() = sop * in;
    else
      res.noalias() = op * in;
  }
  st.dims = std::move(dims);
  st.data = std::move(out);
}

// Inserts the pair v_i (x) v_i^* (or v_i^* (x) v_i) at `pos`, one batch column per i.
void insert_cut_pair(State& st, int pos, int d) {
  const std::size_t A = product(st.dims, 0, pos);
  const std::size_t B = product(st.dims, pos, st.dims.size());
  const std::size_t nb = st.batch * static_cast<std::size_t>(d);
  const std::size_t M2 = static_cast<std::size_t>(d) * d;
  std::vector<cd> out(A * M2 * B * nb, cd(0.0));
  for (std::size_t a = 0; a < A; ++a)
    for (int i = 0; i < d; ++i)
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < st.batch; ++c) {
          std::size_t m = static_cast<std::size_t>(i) * d + i;
          out[((a * M2 + m) * B + b) * nb + c * d + i] = st.data[(a * B + b) * st.batch + c];
        }
  st.dims.insert(st.dims.begin() + pos, {d, d});
  st.batch = nb;
  st.data = std::move(out);
}

struct ModuleTable {
  const Ribbon& rb;
  const PureColoring& colors;
  std::map<int, ModulePtr> duals;

  const WeightModule& get(const Strand& s) {
    auto it = colors.find(s.comp);
    if (it == colors.end() || !it->second) throw DiagramError(fmt::format("component {} has no color", s.comp));
    if (s.up) return *it->second;
    auto d = duals.find(s.comp);
    if (d == duals.end()) d = duals.emplace(s.comp, dual(rb.root(), it->second)).first;
    return *d->second;
  }
};

Mat state_matrix(const State& st) {
  const std::size_t rows = product(st.dims, 0, st.dims.size());
  Eigen::Map<const RowMat> m(st.data.data(), rows, st.batch);
  return Mat(m);
}

// Applies one row to `st`, whose site 0 is site `shift` of the full strand
// list `s`; advances `s`.
void apply_row(const Ribbon& rb, ModuleTable& table, State& st, std::vector<Strand>& s, const Row& row, int ri,
               int shift, std::size_t max_dim) {
  const int p = row.at;
  if (is_cup(row.gen)) {
    const WeightModule& M = table.get({row.comp, true});
    Mat op = row.gen == Gen::Cup ? rb.coev(M) : rb.coev_tilde(M);
    apply_local(st, p - shift, 0, op, {M.dim(), M.dim()}, max_dim, ri);
  } else if (is_cap(row.gen)) {
    if (p + 1 >= static_cast<int>(s.size())) throw DiagramError("cap outside the diagram", ri);
    const WeightModule& M = table.get({s[p].comp, true});
    Mat op = row.gen == Gen::Cap ? rb.ev(M) : rb.ev_tilde(M);
    apply_local(st, p - shift, 2, op, {}, max_dim, ri);
  } else {
    if (p + 1 >= static_cast<int>(s.size())) throw DiagramError("crossing outside the diagram", ri);
    const WeightModule& X = table.get(s[p]);
    const WeightModule& Y = table.get(s[p + 1]);
    Mat op = row.gen == Gen::Pos ? rb.braiding(X, Y) : rb.braiding_inv(Y, X);
    apply_local(st, p - shift, 2, op, {Y.dim(), X.dim()}, max_dim, ri);
  }
  step(s, row, ri);
}

// A cup, then crossings, then a cap, all inside a window of at most three
// enclosed strands (kinks, meridians, crossing circles): the cap row and the
// enclosed strands [lo, lo + k).
struct LocalBlock {
  std::size_t end = 0;
  int lo = 0;
  int k = 0;
};

std::optional<LocalBlock> local_block(const MorseDiagram& d, std::size_t r) {
  if (!is_cup(d.rows[r].gen)) return std::nullopt;
  int lo = d.rows[r].at, hi = d.rows[r].at + 2;
  std::size_t e = r + 1;
  for (; e < d.rows.size() && is_crossing(d.rows[e].gen); ++e) {
    lo = std::min(lo, d.rows[e].at);
    hi = std::max(hi, d.rows[e].at + 2);
  }
  if (e >= d.rows.size() || !is_cap(d.rows[e].gen) || e == r + 1) return std::nullopt;
  lo = std::min(lo, d.rows[e].at);
  hi = std::max(hi, d.rows[e].at + 2);
  const int k = hi - lo - 2;
  if (k < 1 || k > 3) return std::nullopt;
  return LocalBlock{e, lo, k};
}

// Runs the rows of d; `cut_row` (if >= 0) is a cup replaced by an open pair.
State run(const Ribbon& rb, const MorseDiagram& d, const PureColoring& colors, const EvalOptions& opt,
          int cut_row) {
  ModuleTable table{rb, colors, {}};
  State st;
  for (const auto& s : d.bottom) st.dims.push_back(table.get(s).dim());
  st.batch = product(st.dims, 0, st.dims.size());
  check_size(st.dims, st.batch, opt.max_dim, -1);
  st.data.assign(st.batch * st.batch, cd(0.0));
  for (std::size_t i = 0; i < st.batch; ++i) st.data[i * st.batch + i] = 1.0;

  std::vector<Strand> s = d.bottom;
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    const Row& row = d.rows[r];
    const int ri = static_cast<int>(r);
    if (ri == cut_row) {
      insert_cut_pair(st, row.at, table.get({row.comp, true}).dim());
      step(s, row, ri);
      continue;
    }
    auto block = opt.fold_blocks ? local_block(d, r) : std::nullopt;
    if (block && !(cut_row > ri && cut_row <= static_cast<int>(block->end))) {
      // evaluate the block on its enclosed strands alone, then apply it
      State local;
      local.dims.assign(st.dims.begin() + block->lo, st.dims.begin() + block->lo + block->k);
      local.batch = product(local.dims, 0, local.dims.size());
      local.data.assign(local.batch * local.batch, cd(0.0));
      for (std::size_t i = 0; i < local.batch; ++i) local.data[i * local.batch + i] = 1.0;
      for (std::size_t e = r; e <= block->end; ++e)
        apply_row(rb, table, local, s, d.rows[e], static_cast<int>(e), block->lo, opt.max_dim);
      Mat op = state_matrix(local);
      apply_local(st, block->lo, block->k, op, local.dims, opt.max_dim, ri);
      r = block->end;
      continue;
    }
    apply_row(rb, table, st, s, row, ri, 0, opt.max_dim);
  }
  return st;
}


template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, int jobs, Fn fn) {
  std::vector<T> out(n);
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct WorkItem {
  cd coef;
  MorseDiagram diagram;
  PureColoring colors;
};

std::vector<WorkItem> collect(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors) {
  std::vector<WorkItem> items;
  expand_colors(rb, d, colors, [&](cd c, const MorseDiagram& dd, const PureColoring& pc) {
    items.push_back({c, dd, pc});
  });
  return items;
}

}  // namespace

FormalColor pure(ModulePtr m) { return {ColorTerm{1.0, std::move(m), 0}}; }

FormalColor cabled_poly(const Poly& p) {
  FormalColor f;
  for (std::size_t k = 0; k < p.coeffs.size(); ++k)
    if (p.coeffs[k] != cd(0.0)) f.push_back({p.coeffs[k], nullptr, static_cast<int>(k)});
  return f;
}

void expand_colors(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors,
                   const std::function<void(cd, const MorseDiagram&, const PureColoring&)>& fn) {
  std::vector<int> ids = d.component_ids();
  for (int id : ids)
    if (!colors.count(id)) throw DiagramError(fmt::format("component {} ('{}') has no color", id, d.components.at(id)));
  auto s1 = make_S(rb.root(), 1);
  std::vector<std::size_t> choice(ids.size(), 0);
  while (true) {
    cd coef = 1.0;
    MorseDiagram dd = d;
    PureColoring pc;
    bool skip = false;
    for (std::size_t i = 0; i < ids.size() && !skip; ++i) {
      const ColorTerm& t = colors.at(ids[i])[choice[i]];
      coef *= t.coef;
      if (t.coef == cd(0.0)) skip = true;
      if (t.module) {
        pc[ids[i]] = t.module;
      } else {
        for (const auto& s : d.bottom)
          if (s.comp == ids[i]) throw DiagramError("cable colors need a closed component");
        int first = std::max(dd.next_component_id(), d.next_component_id());
        dd = cable(dd, ids[i], t.cable, first);
        for (int c = 0; c < t.cable; ++c) pc[first + c] = s1;
      }
    }
    if (!skip) fn(coef, dd, pc);
    std::size_t i = 0;
    while (i < ids.size() && ++choice[i] == colors.at(ids[i]).size()) choice[i++] = 0;
    if (i == ids.size()) break;
  }
}

Mat evaluate(const Ribbon& rb, const MorseDiagram& d, const PureColoring& colors, const EvalOptions& opt) {
  return state_matrix(run(rb, d, colors, opt, -1));
}

Mat rt_evaluate(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors, const EvalOptions& opt) {
  for (const auto& [id, f] : colors)
    if (f.empty()) throw DiagramError(fmt::format("component {} has an empty formal color", id));
  auto items = collect(rb, d, colors);
  auto parts = parallel_map<Mat>(items.size(), opt.jobs, [&](std::size_t i) {
    return Mat(items[i].coef * evaluate(rb, items[i].diagram, items[i].colors, opt));
  });
  if (parts.empty()) throw DiagramError("no color terms to evaluate");
  Mat acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc += parts[i];
  return acc;
}

cd cut_and_evaluate(const Ribbon& rb, const MorseDiagram& d, const PureColoring& colors, int e,
                    const EvalOptions& opt) {
  if (!d.closed()) throw DiagramError("cutting needs a closed diagram");
  auto it = colors.find(e);
  if (it == colors.end() || !it->second || it->second->label.kind != LabelKind::V)
    throw Error("cut component not simple-projective");
  const WeightModule& M = *it->second;
  int cut_row = -1;
  for (std::size_t r = 0; r < d.rows.size() && cut_row < 0; ++r)
    if (is_cup(d.rows[r].gen) && d.rows[r].comp == e) cut_row = static_cast<int>(r);
  if (cut_row < 0) throw DiagramError(fmt::format("component {} has no cup", e));
  State st = run(rb, d, colors, opt, cut_row);
  Mat lambda = state_matrix(st);  // 1 x dim(M)
  Vec g = rb.pivotal(M);
  const bool coev_cup = d.rows[cut_row].gen == Gen::Cup;
  Vec t(M.dim());
  for (int i = 0; i < M.dim(); ++i) t(i) = coev_cup ? lambda(0, i) / g(i) : lambda(0, i);
  cd mean = t.mean();
  double spread = (t.array() - mean).abs().maxCoeff();
  if (spread > 1e-8 * std::max(1.0, std::abs(mean))) throw Error("non-scalar endomorphism on the cut component");
  return mean;
}

cd f_invariant(const Ribbon& rb, const MorseDiagram& d, const ColorAssignment& colors, int e,
               const EvalOptions& opt) {
  auto items = collect(rb, d, colors);
  auto parts = parallel_map<cd>(items.size(), opt.jobs, [&](std::size_t i) {
    const auto& m = items[i].colors.at(e);
    if (!m || m->label.kind != LabelKind::V) throw Error("cut component not simple-projective");
    return items[i].coef * modified_dim(rb.root(), m->label.alpha) *
           cut_and_evaluate(rb, items[i].diagram, items[i].colors, e, opt);
  });
  cd acc = 0.0;
  for (auto v : parts) acc += v;
  return acc;
}

}  // namespace skein
