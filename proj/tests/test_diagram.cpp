#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "skein/diagram.hpp"

using namespace skein;

namespace {

constexpr const char* kUnknot = "cup 0 K\ncap~ 0\n";
constexpr const char* kPosKink = "cup 0 K\ncup 1 K\nx+ 0\ncap~ 1\ncap~ 0\n";
constexpr const char* kNegKink = "cup 0 K\ncup 1 K\nx- 0\ncap~ 1\ncap~ 0\n";
// two crossings of the same generator between K and L
constexpr const char* kHopfA = "cup 0 K\ncup 2 L\nx+ 1\nx+ 1\ncap~ 2\ncap~ 0\n";
constexpr const char* kHopfB = "cup 0 K\ncup 2 L\nx- 1\nx- 1\ncap~ 2\ncap~ 0\n";

ExactWeight w(const char* s) { return ExactWeight::parse(s); }

PureColoring all_colored(const MorseDiagram& d, ModulePtr m) {
  PureColoring pc;
  for (int id : d.component_ids()) pc[id] = m;
  return pc;
}

cd closed_value(const Ribbon& rb, const MorseDiagram& d, const PureColoring& pc) {
  Mat m = evaluate(rb, d, pc);
  REQUIRE(m.rows() == 1);
  REQUIRE(m.cols() == 1);
  return m(0, 0);
}

}  // namespace

TEST_CASE("text form parses, validates and round-trips through JSON") {
  auto d = parse_dsl("# Hopf link\n" + std::string(kHopfA));
  CHECK(d.rows.size() == 6);
  CHECK(d.closed());
  CHECK(d.width_profile() == std::vector<int>{0, 2, 4, 4, 4, 2, 0});
  CHECK(d.components.at(0) == "K");
  CHECK(d.components.at(1) == "L");
  auto back = parse_json(to_json(d));
  CHECK(back.rows == d.rows);
  CHECK(back.bottom == d.bottom);
  CHECK(back.components == d.components);
  CHECK(parse_diagram(to_json(d)).rows == d.rows);
  CHECK(parse_diagram(kHopfA).rows == d.rows);
}

TEST_CASE("malformed diagrams are rejected with the offending row") {
  CHECK_THROWS_AS(parse_dsl("cup 0 K\nfrob 0\n"), DiagramError);
  try {
    parse_dsl("cup 0 K\ncup 1 K\nx+ 0\ncap 1\ncap~ 0\n");
    FAIL("expected an orientation error");
  } catch (const DiagramError& e) {
    CHECK(e.row() == 3);
  }
  CHECK_THROWS_AS(parse_dsl("cup 0 K\ncap~ 1\n"), DiagramError);
  CHECK_THROWS_AS(parse_dsl("bottom K:sideways\n"), DiagramError);
  // one id naming two separate curves
  CHECK_THROWS_AS(parse_dsl("cup 0 K\ncup 2 K\ncap~ 2\ncap~ 0\n"), DiagramError);
  CHECK_THROWS_AS(parse_json("{\"bottom\": 3}"), Error);
}

TEST_CASE("linking matrix of the Hopf link") {
  auto d = parse_dsl(kHopfA);
  CHECK(std::abs(linking_number(d, 0, 1)) == 1);
  auto mirror = parse_dsl(kHopfB);
  CHECK(linking_number(mirror, 0, 1) == -linking_number(d, 0, 1));
  auto ld = linking(d);
  CHECK(ld.ids == std::vector<int>{0, 1});
  CHECK(ld.B(0, 1) == ld.B(1, 0));
  CHECK(ld.B(0, 0) == 0);
  auto rev = reverse_component(d, 1);
  CHECK(linking_number(rev, 0, 1) == -linking_number(d, 0, 1));
  auto kink = parse_dsl(kPosKink);
  CHECK(crossing_sign(kink, 2) == 1);
  CHECK(linking(kink).B(0, 0) == 1);
}

TEST_CASE("unknot and kink values") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    auto s1 = make_S(r, 1);
    const cd loop = r.q + 1.0 / r.q;
    auto unknot = parse_dsl(kUnknot);
    CHECK(std::abs(closed_value(rb, unknot, {{0, s1}}) - loop) < 1e-12);
    auto reversed = reverse_component(unknot, 0);
    CHECK(std::abs(closed_value(rb, reversed, {{0, s1}}) - loop) < 1e-12);
    const cd pos = closed_value(rb, parse_dsl(kPosKink), {{0, s1}});
    const cd neg = closed_value(rb, parse_dsl(kNegKink), {{0, s1}});
    CHECK(std::abs(pos - q_power(r, 1.5) * loop) < 1e-12);
    CHECK(std::abs(neg - q_power(r, -1.5) * loop) < 1e-12);
    // a typical module has vanishing quantum dimension
    auto va = make_V(r, w("3/10"));
    CHECK(std::abs(closed_value(rb, unknot, {{0, va}})) < 1e-10);
  }
}

TEST_CASE("inserted kinks multiply by the twist scalar") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto s1 = make_S(r, 1);
  auto d = parse_dsl(kUnknot);
  insert_kinks(d, 0, 0, -2);
  CHECK(d.components.at(0) == "K");
  const cd loop = r.q + 1.0 / r.q;
  CHECK(std::abs(closed_value(rb, d, all_colored(d, s1)) - q_power(r, -3.0) * loop) < 1e-12);
}

TEST_CASE("Reidemeister II and III on open strands") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto s1 = make_S(r, 1);
  auto va = make_V(r, w("3/10"));
  auto vb = make_V(r, w("41/100"));
  PureColoring pc{{0, va}, {1, s1}, {2, vb}};
  auto r2 = parse_dsl("bottom A:up B:down\nx+ 0\nx- 0\n");
  Mat m2 = evaluate(rb, r2, pc);
  CHECK((m2 - Mat::Identity(m2.rows(), m2.cols())).norm() < 1e-10);
  auto lhs = parse_dsl("bottom A:up B:up C:down\nx+ 0\nx+ 1\nx+ 0\n");
  auto rhs = parse_dsl("bottom A:up B:up C:down\nx+ 1\nx+ 0\nx+ 1\n");
  CHECK((evaluate(rb, lhs, pc) - evaluate(rb, rhs, pc)).norm() < 1e-9);
}

TEST_CASE("Kauffman smoothing convention for S1") {
  // f = (-1)^{#components} <L>; a pos generator has L_0 vertical, a neg one horizontal
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto s1 = make_S(r, 1);
  const cd zeta = -std::exp(cd(0.0, 2.0 * std::numbers::pi / 5));
  auto f = [&](const MorseDiagram& d) {
    double sign = d.component_ids().size() % 2 ? -1.0 : 1.0;
    return sign * closed_value(rb, d, all_colored(d, s1));
  };
  int checked = 0;
  for (const char* text : {kHopfA, kHopfB, kPosKink, kNegKink}) {
    auto d = parse_dsl(text);
    for (std::size_t row = 0; row < d.rows.size(); ++row) {
      Gen g = d.rows[row].gen;
      if (g != Gen::Pos && g != Gen::Neg) continue;
      auto v = smooth_vertical(d, row);
      auto h = smooth_horizontal(d, row);
      const cd l0 = g == Gen::Pos ? f(v) : f(h);
      const cd linf = g == Gen::Pos ? f(h) : f(v);
      CHECK(std::abs(f(d) - zeta * l0 - linf / zeta) < 1e-10);
      ++checked;
    }
  }
  CHECK(checked == 6);
}

TEST_CASE("Hopf link with typical colors") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto va = make_V(r, w("3/10"));
  auto vb = make_V(r, w("7/10"));
  const double ab = 0.3 * 0.7;
  for (const char* text : {kHopfA, kHopfB}) {
    auto d = parse_dsl(text);
    const int lk = linking_number(d, 0, 1);
    ColorAssignment c{{0, pure(va)}, {1, pure(vb)}};
    cd cut0 = f_invariant(rb, d, c, 0);
    cd cut1 = f_invariant(rb, d, c, 1);
    CHECK(std::abs(cut0 - cut1) < 1e-10);
    CHECK(std::abs(cut0 - q_power(r, lk * ab)) < 1e-10);
  }
  // unknot: F = d(alpha)
  auto u = parse_dsl(kUnknot);
  CHECK(std::abs(f_invariant(rb, u, {{0, pure(va)}}, 0) - modified_dim(r, w("3/10"))) < 1e-12);
  auto tilde = reverse_component(u, 0);
  CHECK(std::abs(f_invariant(rb, tilde, {{0, pure(va)}}, 0) - modified_dim(r, w("3/10"))) < 1e-12);
}

TEST_CASE("cutting needs a typical color") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto u = parse_dsl(kUnknot);
  CHECK_THROWS_AS(cut_and_evaluate(rb, u, {{0, make_S(r, 1)}}, 0), Error);
  auto open = parse_dsl("bottom K:up\n");
  CHECK_THROWS_AS(cut_and_evaluate(rb, open, {{0, make_V(r, w("3/10"))}}, 0), DiagramError);
}

TEST_CASE("meridian gadget equals the open Hopf operator") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    auto va = make_V(r, w("3/10"));
    auto vb = make_V(r, w("7/10"));
    auto s1 = make_S(r, 1);
    auto up = parse_dsl("bottom K:up\n");
    int m = insert_meridian(up, -1, 0, 1, "M");
    CHECK(up.components.at(m) == "M");
    CHECK(linking_number(up, 0, m) == 1);
    CHECK((evaluate(rb, up, {{0, va}, {m, vb}}) - rb.open_hopf(*vb, *va)).norm() < 1e-10);
    CHECK((evaluate(rb, up, {{0, va}, {m, s1}}) - rb.open_hopf(*s1, *va)).norm() < 1e-10);
    auto down = parse_dsl("bottom K:down\n");
    int m2 = insert_meridian(down, -1, 0, 1, "M");
    CHECK(linking_number(down, 0, m2) == 1);
    CHECK((evaluate(rb, down, {{0, va}, {m2, vb}}) - rb.open_hopf(*dual(r, vb), *dual(r, va))).norm() < 1e-10);
  }
}

TEST_CASE("cabled Chebychev color around a typical strand") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    auto va = make_V(r, w("3/10"));
    auto d = parse_dsl("bottom K:up\n");
    int m = insert_meridian(d, -1, 0, 1, "M");
    Poly tn = chebychev(N);
    Mat got = rt_evaluate(rb, d, {{0, pure(va)}, {m, cabled_poly(tn)}});
    CHECK((got - rb.open_hopf_poly(tn, *va)).norm() < 1e-9);
    const double expected = 2.0 * std::cos(4.0 * std::numbers::pi * 0.3);
    CHECK((got - expected * Mat::Identity(got.rows(), got.cols())).norm() < 1e-9);
  }
}

TEST_CASE("cables of the unknot") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto s1 = make_S(r, 1);
  const cd loop = r.q + 1.0 / r.q;
  auto u = parse_dsl(kUnknot);
  for (int k = 0; k <= 3; ++k) {
    auto c = cable(u, 0, k, 10);
    CHECK(c.component_ids().size() == static_cast<std::size_t>(k));
    if (k == 0) continue;
    CHECK(std::abs(closed_value(rb, c, all_colored(c, s1)) - std::pow(loop, k)) < 1e-10);
  }
  // copies of a framing-1 knot link each other once and keep framing 1
  auto kink = parse_dsl(kPosKink);
  auto c2 = cable(kink, 0, 2, 10);
  auto ld = linking(c2);
  CHECK(ld.B(0, 1) == 1);
  CHECK(ld.B(0, 0) == 1);
}

TEST_CASE("crossing circles and switching") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto d = parse_dsl(kHopfA);
  const int before = linking_number(d, 0, 1);
  switch_crossing(d, 2);
  switch_crossing(d, 3);
  CHECK(linking_number(d, 0, 1) == -before);
  auto e = parse_dsl(kHopfA);
  int c = insert_crossing_circle(e, 2, "C");
  CHECK(e.component_ids().size() == 3);
  CHECK(std::abs(linking_number(e, 0, c)) + std::abs(linking_number(e, 1, c)) == 2);
  CHECK_THROWS_AS(insert_crossing_circle(e, 0, "D"), DiagramError);
}

TEST_CASE("juxtaposition multiplies closed evaluations") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto s1 = make_S(r, 1);
  auto a = parse_dsl(kPosKink);
  auto b = parse_dsl(kHopfA);
  std::map<int, int> renum;
  auto ab = juxtapose(a, b, &renum);
  CHECK(ab.component_ids().size() == 3);
  CHECK(renum.size() == 2);
  cd va = closed_value(rb, a, all_colored(a, s1));
  cd vb = closed_value(rb, b, all_colored(b, s1));
  CHECK(std::abs(closed_value(rb, ab, all_colored(ab, s1)) - va * vb) < 1e-10);
}

TEST_CASE("formal colors expand multilinearly and in parallel") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto s1 = make_S(r, 1);
  auto va = make_V(r, w("3/10"));
  auto d = parse_dsl(kHopfA);
  Poly p{{cd(0.5), cd(-1.0), cd(0.0, 2.0)}};
  ColorAssignment c{{0, pure(va)}, {1, cabled_poly(p)}};
  int terms = 0;
  expand_colors(rb, d, c, [&](cd, const MorseDiagram&, const PureColoring&) { ++terms; });
  CHECK(terms == 3);
  EvalOptions serial, parallel;
  parallel.jobs = 4;
  cd a = f_invariant(rb, d, c, 0, serial);
  cd b = f_invariant(rb, d, c, 0, parallel);
  CHECK(std::abs(a - b) < 1e-12);
  // the cable route agrees with the polynomial in the open Hopf operator
  auto open = parse_dsl("bottom K:up\n");
  int m = insert_meridian(open, -1, 0, 1, "M");
  Mat viaCable = rt_evaluate(rb, open, {{0, pure(va)}, {m, cabled_poly(p)}});
  CHECK((viaCable - rb.open_hopf_poly(p, *va)).norm() < 1e-10);
  CHECK_THROWS_AS(rt_evaluate(rb, d, {{0, pure(s1)}}), DiagramError);
}

TEST_CASE("width guard") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto d = parse_dsl(kHopfA);
  auto p0 = make_P(r, 0);
  EvalOptions tight;
  tight.max_dim = 100;
  CHECK_THROWS_AS(evaluate(rb, d, all_colored(d, p0), tight), DiagramError);
  CHECK_NOTHROW(evaluate(rb, d, all_colored(d, p0)));
}

TEST_CASE("folding small blocks does not change values") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto va = make_V(r, w("3/10"));
  auto vb = make_V(r, w("-1/5"));
  auto s2 = make_S(r, 2);
  auto d = parse_dsl(kHopfA);
  int c = insert_crossing_circle(d, 2, "C");
  insert_kinks(d, 0, 0, 2);
  insert_kinks(d, 0, 1, -1);
  int m = insert_meridian(d, 0, 0, 1, "M");
  PureColoring pc{{0, va}, {1, vb}, {c, s2}, {m, s2}};
  EvalOptions plain;
  plain.fold_blocks = false;
  cd folded = cut_and_evaluate(rb, d, pc, 0);
  cd unfolded = cut_and_evaluate(rb, d, pc, 0, plain);
  CHECK(std::abs(folded) > 1e-6);
  CHECK(std::abs(folded - unfolded) < 1e-10 * std::abs(unfolded));
  auto open = parse_dsl("bottom K:up L:down\ncup 2 M\nx+ 1\nx+ 0\nx- 0\nx- 1\ncap~ 2\n");
  PureColoring po{{0, va}, {1, vb}, {2, s2}};
  CHECK((evaluate(rb, open, po) - evaluate(rb, open, po, plain)).norm() < 1e-10);
}
