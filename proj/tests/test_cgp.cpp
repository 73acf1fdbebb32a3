#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "skein/cgp.hpp"
#include "skein/fixtures.hpp"

using namespace skein;

namespace {

ExactWeight w(const char* s) { return ExactWeight::parse(s); }

double rel_diff(cd a, cd b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

SurgeryData unknot_surgery(int framing, const char* omega, int N = 5) {
  std::string text = "cup 0 K\n";
  for (int i = 0; i < std::abs(framing); ++i) text += framing > 0 ? "cup 1 K\nx+ 0\ncap~ 1\n" : "cup 1 K\nx- 0\ncap~ 1\n";
  text += "cap~ 0\n";
  SurgeryData sd;
  sd.root = RootData::make(N);
  sd.diagram = parse_dsl(text);
  sd.surgery = {0};
  sd.omega = {w(omega)};
  return sd;
}

bool has_reason(const ValidationReport& rep, const std::string& reason) {
  for (const auto& p : rep.problems)
    if (p.reason == reason) return true;
  return false;
}

cd sum_of_squared_dims(const RootData& r, const ExactWeight& alpha) {
  cd acc = 0.0;
  for (int i = 0; i < r.N; ++i) {
    cd d = modified_dim(r, alpha + ExactWeight::integer(i));
    acc += d * d;
  }
  return acc;
}

}  // namespace

TEST_CASE("validation of surgery data") {
  auto s1s2 = validate(unknot_surgery(0, "3/10"));
  CHECK(s1s2.ok);
  CHECK(s1s2.B(0, 0) == 0);
  CHECK(s1s2.nullity == 1);
  auto lens = validate(unknot_surgery(5, "1/5"));
  CHECK(lens.ok);
  CHECK(lens.B(0, 0) == 5);
  CHECK(lens.positive == 1);
  auto quarter = validate(unknot_surgery(5, "1/4"));
  CHECK_FALSE(quarter.ok);
  CHECK(has_reason(quarter, "omega in quarter lattice"));
  auto inconsistent = validate(unknot_surgery(5, "3/10"));
  CHECK_FALSE(inconsistent.ok);
  CHECK(has_reason(inconsistent, "homology inconsistent"));
  auto count = unknot_surgery(0, "3/10");
  count.omega.clear();
  CHECK(has_reason(validate(count), "omega count mismatch"));

  // S^3 with an S1-colored unknot: omega is forced to be integral
  SurgeryData s3;
  s3.diagram = parse_dsl("cup 0 L\ncap~ 0\n");
  s3.link_colors[0] = pure(make_S(s3.root, 1));
  auto rep = validate(s3);
  CHECK_FALSE(rep.ok);
  CHECK(has_reason(rep, "omega integral"));
  CHECK_THROWS_AS(z_value(s3), Error);

  // mixed gradings on one component
  SurgeryData mixed = unknot_surgery(0, "3/10");
  MorseDiagram two = juxtapose(mixed.diagram, parse_dsl("cup 0 L\ncap~ 0\n"));
  mixed.diagram = two;
  mixed.link_colors[1] = {{1.0, make_V(mixed.root, w("1/3")), 0}, {1.0, make_S(mixed.root, 1), 0}};
  CHECK(has_reason(validate(mixed), "incompatible color"));
}

TEST_CASE("Kirby colors") {
  auto r = RootData::make(5);
  auto k = kirby_color(r, w("3/10"));
  REQUIRE(k.terms.size() == 5);
  for (int i = 0; i < 5; ++i) {
    ExactWeight a = w("3/10") + ExactWeight::integer(i);
    CHECK(std::abs(k.terms[i].coef - modified_dim(r, a)) < 1e-15);
    CHECK(k.terms[i].module->label.alpha == a);
  }
  CHECK((color_grading(k.terms) - w("3/10")).is_integral());
  CHECK_THROWS_AS(kirby_color(r, w("1/4")), Error);
  CHECK_THROWS_AS(kirby_color(r, w("-3/2")), Error);
}

TEST_CASE("Delta_- closed form and its diagrammatic cross-check") {
  auto r5 = RootData::make(5);
  auto r7 = RootData::make(7);
  CHECK(std::abs(delta_minus(r5) - q_power(r5, 1.5) * std::sqrt(5.0)) < 1e-12);
  CHECK(std::abs(delta_minus(r7) - q_power(r7, 1.5) * cd(0.0, -std::sqrt(7.0))) < 1e-12);
  for (const auto& r : {r5, r7}) {
    Ribbon rb(r);
    for (const char* beta : {"3/10", "41/100"})
      CHECK(std::abs(delta_from_diagram(rb, -1, w(beta)) - delta_minus(r)) < 1e-10);
  }
}

TEST_CASE("Delta_+ is independent of the probe weight") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    cd a = delta_from_diagram(rb, 1, w("3/10"));
    cd b = delta_from_diagram(rb, 1, w("41/100"));
    cd c = delta_from_diagram(rb, 1, ExactWeight::parse("irr:t=0.1234"));
    CHECK(std::abs(a - b) < 1e-10);
    CHECK(std::abs(a - c) < 1e-10);
    CHECK(std::abs(delta_plus(r) - a) < 1e-12);
    // oracle: the complex conjugate of Delta_-
    CHECK(std::abs(delta_plus(r) - std::conj(delta_minus(r))) < 1e-10);
  }
  // frozen value at N = 5
  CHECK(std::abs(delta_plus(RootData::make(5)) - cd(-1.8090169943749472, 1.3143277802978337)) < 1e-10);
}

TEST_CASE("Z_N of S1 x S2") {
  auto sd = unknot_surgery(0, "3/10");
  auto r = sd.root;
  Ribbon rb(r);
  auto z = z_invariant(rb, sd);
  CHECK(z.positive == 0);
  CHECK(z.negative == 0);
  CHECK(z.cut == 0);
  // the cut unknot contributes 1, so Z = sum_i d(alpha + i)^2
  CHECK(std::abs(z.value - sum_of_squared_dims(r, w("3/10"))) < 1e-10);
  // regression constant
  CHECK(std::abs(z.value - cd(7.2360679774998236, 0.0)) < 1e-9);
  CHECK(std::abs(z_value(unknot_surgery(0, "41/100")) - sum_of_squared_dims(r, w("41/100"))) < 1e-10);
}

TEST_CASE("stabilization and lift invariance") {
  for (const auto& sd : {unknot_surgery(0, "3/10"), unknot_surgery(5, "2/5")}) {
    cd z = z_value(sd);
    REQUIRE(std::abs(z) > 1e-3);
    for (int sign : {1, -1}) {
      auto bigger = blow_up(sd, 0, sign);
      CHECK(validate(bigger).ok);
      CHECK(bigger.surgery.size() == 2);
      CHECK(rel_diff(z_value(bigger), z) < 1e-6);
    }
    CHECK(rel_diff(z_value(shift_lift(sd, 0, 1)), z) < 1e-6);
    CHECK(rel_diff(z_value(shift_lift(sd, 0, -2)), z) < 1e-6);
  }
}

TEST_CASE("L(5,1) with omega = 1/5 has vanishing Z") {
  auto lens = unknot_surgery(5, "1/5");
  CHECK(std::abs(z_value(lens)) < 1e-10);
  CHECK(std::abs(z_value(blow_up(lens, 0, 1))) < 1e-10);
}

TEST_CASE("handle-slide fixture pair") {
  auto a = load_fixture("hopf_2_3");
  auto b = load_fixture(a.kirby_partner);
  CHECK(b.kirby_partner == a.name);
  auto ra = validate(a.data);
  auto rb = validate(b.data);
  REQUIRE(ra.ok);
  REQUIRE(rb.ok);
  CHECK(std::abs(ra.B.cast<double>().determinant()) == doctest::Approx(5.0));
  CHECK(std::abs(rb.B.cast<double>().determinant()) == doctest::Approx(5.0));
  cd za = z_value(a.data);
  cd zb = z_value(b.data);
  REQUIRE(std::abs(za) > 1e-3);
  CHECK(rel_diff(za, zb) < 1e-6);
}

TEST_CASE("stabilization at N = 7") {
  auto sd = unknot_surgery(0, "3/10", 7);
  cd z = z_value(sd);
  CHECK(std::abs(z - sum_of_squared_dims(sd.root, w("3/10"))) < 1e-9);
  CHECK(rel_diff(z_value(blow_up(sd, 0, 1)), z) < 1e-6);
  CHECK(rel_diff(z_value(blow_up(sd, 0, -1)), z) < 1e-6);
}

TEST_CASE("surgery JSON forms") {
  auto sd = parse_surgery(R"({"N": 5, "surgery": {"diagram": "cup 0 K\ncap~ 0\n", "omega": ["3/10"]}})");
  CHECK(sd.surgery == std::vector<int>{0});
  CHECK(sd.omega[0] == w("3/10"));
  auto bare = parse_surgery(R"({"diagram": ["cup 0 K", "cap~ 0"], "omega": {"K": 0.3}})");
  CHECK(bare.omega[0] == w("3/10"));
  auto withlink = parse_surgery(R"json({"N": 7,
    "surgery": {"diagram": ["cup 0 K", "cap~ 0"], "omega": {"K": "3/10"}},
    "link": {"diagram": ["cup 0 L", "cap~ 0"], "colors": {"L": "S(2)"}}})json");
  CHECK(withlink.root.N == 7);
  CHECK(withlink.link_components() == std::vector<int>{1});
  CHECK(withlink.link_colors.at(1).front().module->label.str() == "S(2)");
  CHECK(validate(withlink).ok);
  // a split S(2) unknot multiplies Z by its quantum dimension
  auto r7 = withlink.root;
  cd qdim2 = q_power(r7, 2.0) + 1.0 + q_power(r7, -2.0);
  CHECK(std::abs(z_value(withlink) - qdim2 * z_value(unknot_surgery(0, "3/10", 7))) < 1e-9);
  CHECK_THROWS_AS(parse_surgery("[1, 2]"), Error);
  CHECK_THROWS_AS(parse_surgery(R"({"surgery": {"diagram": ["cup 0 K", "cap~ 0"], "omega": {"Q": "1/3"}}})"), Error);
}

TEST_CASE("parallel evaluation agrees with serial") {
  auto sd = load_fixture("hopf_2_3").data;
  Ribbon rb(sd.root);
  EvalOptions par;
  par.jobs = 4;
  CHECK(std::abs(z_invariant(rb, sd).value - z_invariant(rb, sd, par).value) < 1e-12);
}

TEST_CASE("omega on curves") {
  auto f = load_fixture("shadow_linked_meridian");
  int target = find_if(f.data.diagram.components.begin(), f.data.diagram.components.end(),
                       [&](const auto& kv) { return kv.second == f.shadow_target; })->first;
  REQUIRE(f.shadow_omega);
  CHECK(omega_on(f.data, target) == *f.shadow_omega);
}
