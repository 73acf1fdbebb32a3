#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "skein/fixtures.hpp"
#include "skein/skeinmap.hpp"

using namespace skein;

namespace {

ExactWeight w(const char* s) { return ExactWeight::parse(s); }

int component_named(const MorseDiagram& d, const std::string& name) {
  for (const auto& [id, n] : d.components)
    if (n == name) return id;
  FAIL("no component " << name);
  return -1;
}

cd twist_scalar(const Ribbon& rb, const ExactWeight& a) { return scalar_part(rb.twist(*make_V(rb.root(), a))); }

double rel_diff(cd a, cd b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// F of the surgery link itself with pure colors V(w_i): what the Q meridians
// should select from the Kirby colors.
cd pure_chain_value(const Ribbon& rb, const SurgeryData& sd, const std::vector<std::size_t>& switched) {
  MorseDiagram d = sd.diagram;
  for (std::size_t r : switched) switch_crossing(d, r);
  ColorAssignment colors;
  for (std::size_t i = 0; i < sd.surgery.size(); ++i) colors[sd.surgery[i]] = pure(make_V(sd.root, sd.omega[i]));
  return f_invariant(rb, d, colors, sd.surgery.front());
}

}  // namespace

TEST_CASE("polynomial colors in the U basis act as the polynomial") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    auto va = make_V(r, w("3/10"));
    auto open = parse_dsl("bottom K:up\n");
    int m = insert_meridian(open, -1, 0, 1, "M");
    Poly p{{cd(0.5), cd(-1.0), cd(0.0, 2.0), cd(0.25)}};
    Mat viaU = rt_evaluate(rb, open, {{0, pure(va)}, {m, chebychev_u_color(r, p)}});
    Mat viaCable = rt_evaluate(rb, open, {{0, pure(va)}, {m, cabled_poly(p)}});
    CHECK((viaU - rb.open_hopf_poly(p, *va)).norm() < 1e-9);
    CHECK((viaU - viaCable).norm() < 1e-9);
    // z^2 = U_2 + U_0
    auto sq = chebychev_u_color(r, Poly{{cd(0.0), cd(0.0), cd(1.0)}});
    REQUIRE(sq.size() == 2);
    CHECK(sq[0].module->label.str() == "S(0)");
    CHECK(sq[1].module->label.str() == "S(2)");
  }
  CHECK_THROWS_AS(chebychev_u_color(RootData::make(5), chebychev(5)), Error);
}

TEST_CASE("Q_alpha selects one summand of the Kirby color") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    for (const char* a : {"3/10", "41/100", "-7/20"}) {
      auto g = q_polynomial(rb, w(a));
      CHECK(g.poly.degree() <= N - 1);
      CHECK(g.residual < 1e-8);
      const ExactWeight alpha = w(a);
      for (int i = 0; i < N; ++i) {
        cd x = alpha.numeric() + static_cast<double>(i);
        cd value = g.poly(q_power(r, x) + q_power(r, -x));
        cd expected = i == 0 ? 1.0 / modified_dim(r, alpha) : cd(0.0);
        CHECK(std::abs(value - expected) < 1e-9);
      }
    }
  }
  CHECK(q_polynomial(Ribbon(RootData::make(5)), w("3/10")).poly.degree() == 4);
  CHECK_THROWS_AS(q_polynomial(Ribbon(RootData::make(5)), w("1/4")), Error);
}

TEST_CASE("R polynomial, generic weights") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    const ExactWeight a = w("3/10"), b = w("41/100");
    for (int sign : {1, -1}) {
      auto g = r_polynomial(rb, a, b, sign);
      CHECK_FALSE(g.hermite);
      CHECK(g.poly.degree() <= N - 1);
      CHECK(g.residual < 1e-7);
      // oracle: on V(gamma), gamma = a + b + k with k in {N-1, N-3, ..., 1-N},
      // the double braiding is theta_gamma / (theta_a theta_b)
      for (int k = N - 1; k >= 1 - N; k -= 2) {
        ExactWeight gamma = a + b + ExactWeight::integer(k);
        cd node = q_power(r, gamma.numeric()) + q_power(r, -gamma.numeric());
        cd ratio = twist_scalar(rb, gamma) / (twist_scalar(rb, a) * twist_scalar(rb, b));
        CHECK(std::abs(g.poly(node) - (sign > 0 ? ratio : 1.0 / ratio)) < 1e-8);
      }
    }
  }
}

TEST_CASE("R polynomial, degenerate weights need Hermite data") {
  for (int N : {5, 7}) {
    auto r = RootData::make(N);
    Ribbon rb(r);
    for (auto [a, b] : {std::pair{"3/10", "-3/10"}, {"3/10", "-1/20"}, {"41/100", "-41/100"}}) {
      auto plus = r_polynomial(rb, w(a), w(b), 1);
      auto minus = r_polynomial(rb, w(a), w(b), -1);
      CHECK(plus.hermite);
      CHECK(plus.residual < 1e-7);
      CHECK(minus.residual < 1e-7);
      // the two signs are inverse operators
      ModulePtr W = tensor(r, make_V(r, w(a)), make_V(r, w(b)));
      Mat phi = rb.open_hopf(*make_S(r, 1), *W);
      Mat prod = matrix_poly(minus.poly, phi) * matrix_poly(plus.poly, phi);
      CHECK((prod - Mat::Identity(W->dim(), W->dim())).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
  CHECK_THROWS_AS(r_polynomial(Ribbon(RootData::make(5)), w("1/4"), w("3/10"), 1), Error);
}

TEST_CASE("R polynomial on dual strands") {
  auto r = RootData::make(5);
  Ribbon rb(r);
  auto va = make_V(r, w("3/10"));
  auto vb = make_V(r, w("41/100"));
  for (int sign : {1, -1}) {
    CHECK(r_polynomial(rb, va, dual(r, vb), sign).residual < 1e-7);
    CHECK(r_polynomial(rb, dual(r, va), dual(r, vb), sign).residual < 1e-7);
  }
}

TEST_CASE("f_omega: empty link, split unknots and kinks") {
  auto sd = load_fixture("s1xs2").data;
  Ribbon rb(sd.root);
  const RootData& r = sd.root;
  const cd z = z_value(sd);
  CHECK(std::abs(f_omega(rb, sd) - z) < 1e-12);
  const cd loop = -(r.zeta * r.zeta + 1.0 / (r.zeta * r.zeta));
  CHECK(std::abs(loop + r.q + 1.0 / r.q) < 1e-12);
  const cd one = f_omega(rb, sd, parse_dsl("cup 0 L\ncap~ 0\n"));
  CHECK(std::abs(one - loop * z) < 1e-10);
  const cd two = f_omega(rb, sd, parse_dsl("cup 0 L\ncap~ 0\ncup 0 M\ncap~ 0\n"));
  CHECK(std::abs(two - loop * loop * z) < 1e-10);
  // the loop value as a Kauffman residual: f(L u O) + (zeta^2 + zeta^-2) f(L)
  CHECK(std::abs(one + (r.zeta * r.zeta + 1.0 / (r.zeta * r.zeta)) * z) / std::abs(one) < 1e-8);
  const cd pos = f_omega(rb, sd, parse_dsl("cup 0 L\ncup 1 L\nx+ 0\ncap~ 1\ncap~ 0\n"));
  const cd neg = f_omega(rb, sd, parse_dsl("cup 0 L\ncup 1 L\nx- 0\ncap~ 1\ncap~ 0\n"));
  const cd z3 = r.zeta * r.zeta * r.zeta;
  CHECK(std::abs(pos - (-z3) * one) < 1e-10);
  CHECK(std::abs(neg - (-1.0 / z3) * one) < 1e-10);
}

TEST_CASE("Kauffman relations on the fixture triples") {
  int triples = 0;
  for (const char* name : {"kauffman_kinked_meridian", "kauffman_linked_meridians", "kauffman_clasp"}) {
    auto f = load_fixture(name);
    Ribbon rb(f.data.root);
    REQUIRE(f.kauffman_rows.size() >= 2);
    for (int row : f.kauffman_rows) {
      auto t = kauffman_triple(f.data, static_cast<std::size_t>(row));
      auto rep = verify_kauffman(rb, t);
      INFO("fixture " << std::string(name));
      CAPTURE(row);
      CHECK(std::abs(rep.fx) > 1e-6);
      CHECK(rep.residual < 1e-8);
      ++triples;
    }
  }
  CHECK(triples >= 6);
}

TEST_CASE("Kauffman triples reject crossings of surgery strands and foreign disks") {
  auto f = load_fixture("kauffman_clasp");
  Ribbon rb(f.data.root);
  auto t = kauffman_triple(f.data, static_cast<std::size_t>(f.kauffman_rows.front()));
  auto tampered = t;
  switch_crossing(tampered.zero.diagram, tampered.zero.diagram.rows.size() - 3);
  CHECK_THROWS_WITH_AS(verify_kauffman(rb, tampered), doctest::Contains("disk-mismatch"), Error);
  auto swapped = t;
  std::swap(swapped.zero, swapped.infinity);
  CHECK_THROWS_AS(verify_kauffman(rb, swapped), Error);
  // the meridian crossings of the surgery strand are not link crossings
  auto m = load_fixture("shadow_meridian");
  for (std::size_t r = 0; r < m.data.diagram.rows.size(); ++r)
    if (m.data.diagram.rows[r].gen == Gen::Pos) CHECK_THROWS_AS(kauffman_triple(m.data, r), Error);
}

TEST_CASE("threading T_N along the shadow fixtures") {
  int checked = 0, zero_omega = 0;
  for (const char* name : {"shadow_meridian", "shadow_both_strands", "shadow_split", "shadow_linked_meridian",
                           "shadow_lens_meridian"}) {
    auto f = load_fixture(name);
    Ribbon rb(f.data.root);
    int target = component_named(f.data.diagram, f.shadow_target);
    auto rep = thread_chebychev(rb, f.data, target, f.shadow_omega, {}, true);
    INFO("fixture " << std::string(name));
    // independent route: N parallel copies weighted by the coefficients of T_N
    REQUIRE(rep.lhs_cabled);
    CHECK(std::abs(*rep.lhs_cabled - rep.lhs) < 1e-7 * std::abs(rep.f_link));
    REQUIRE(f.shadow_omega);
    CHECK(rep.omega == *f.shadow_omega);
    CHECK(std::abs(rep.f_link) > 1e-9);
    CHECK(rep.residual < 1e-6);
    const double factor = -2.0 * std::cos(4.0 * std::numbers::pi * rep.omega.numeric().real());
    CHECK(std::abs(rep.lhs - factor * rep.f_link) < 1e-6 * std::abs(rep.f_link));
    if (rep.omega.numeric() == cd(0.0)) {
      ++zero_omega;
      CHECK(std::abs(rep.lhs + 2.0 * rep.f_link) < 1e-6 * std::abs(rep.f_link));
    }
    ++checked;
  }
  CHECK(checked >= 3);
  CHECK(zero_omega >= 1);
}

TEST_CASE("threading meridians of every surgery component") {
  for (const char* name : {"s1xs2", "lens51_w25", "hopf_2_3"}) {
    auto f = load_fixture(name);
    Ribbon rb(f.data.root);
    for (std::size_t i = 0; i < f.data.surgery.size(); ++i) {
      SurgeryData sd = f.data;
      auto bounds = sd.diagram.boundaries();
      int after = -1, p = -1;
      for (std::size_t b = 0; b < bounds.size() && p < 0; ++b)
        for (std::size_t k = 0; k < bounds[b].size(); ++k)
          if (bounds[b][k].comp == sd.surgery[i]) {
            after = static_cast<int>(b) - 1;
            p = static_cast<int>(k);
            break;
          }
      int t = insert_meridian(sd.diagram, after, p, 1, "T");
      sd.link_colors[t] = pure(make_S(sd.root, 1));
      auto rep = thread_chebychev(rb, sd, t);
      INFO("fixture " << std::string(name));
      CAPTURE(i);
      CHECK((rep.omega - sd.omega[i]).is_integral());
      if (std::abs(rep.f_link) > 1e-9) CHECK(rep.residual < 1e-6);
    }
  }
}

TEST_CASE("threading rejects an inconsistent omega override") {
  auto f = load_fixture("shadow_meridian");
  Ribbon rb(f.data.root);
  int target = component_named(f.data.diagram, f.shadow_target);
  CHECK_NOTHROW(thread_chebychev(rb, f.data, target, w("13/10")));
  CHECK_THROWS_AS(thread_chebychev(rb, f.data, target, w("1/5")), Error);
  CHECK_THROWS_AS(thread_chebychev(rb, f.data, f.data.surgery.front()), Error);
}

TEST_CASE("surjectivity witnesses for one-component presentations") {
  for (auto [name, framing] : {std::pair{"s1xs2", 0}, {"lens51", 5}, {"lens51_w25", 5}}) {
    auto f = load_fixture(name);
    Ribbon rb(f.data.root);
    auto wl = surjectivity_witness(rb, f.data);
    INFO("fixture " << std::string(name));
    CHECK(wl.meridians.size() == 1);
    CHECK(wl.circles.empty());
    CHECK(std::abs(wl.certificate) > 1e-6);
    // oracle: the meridian keeps V(w) alone, a framed unknot
    const ExactWeight a = f.data.omega.front();
    cd expected = modified_dim(f.data.root, a) * std::pow(twist_scalar(rb, a), framing);
    CHECK(rel_diff(wl.certificate, expected) < 1e-9);
  }
}

TEST_CASE("surjectivity witnesses for two-component presentations") {
  for (const char* name : {"hopf_2_3", "torus_3_3"}) {
    auto f = load_fixture(name);
    Ribbon rb(f.data.root);
    EvalOptions opt;
    opt.jobs = 4;
    auto wl = surjectivity_witness(rb, f.data, opt);
    INFO("fixture " << std::string(name));
    CHECK(wl.meridians.size() == 2);
    CHECK(wl.chain.size() == 2);
    CHECK(wl.circles.size() == wl.switched.size());
    CHECK(std::abs(wl.certificate) > 1e-6);
    CHECK(rel_diff(wl.certificate, switched_chain_value(rb, f.data, wl, opt)) < 1e-9);
    CHECK(rel_diff(wl.certificate, pure_chain_value(rb, f.data, wl.switched)) < 1e-9);
    // deterministic
    CHECK(surjectivity_witness(rb, f.data, opt).certificate == wl.certificate);
  }
  auto chain = load_fixture("hopf_2_3");
  CHECK(surjectivity_witness(Ribbon(chain.data.root), chain.data).circles.empty());
  auto torus = load_fixture("torus_3_3");
  CHECK(surjectivity_witness(Ribbon(torus.data.root), torus.data).circles.size() >= 1);
}

TEST_CASE("witness rejects invalid presentations") {
  auto f = load_fixture("s1xs2");
  f.data.omega.front() = w("1/4");
  CHECK_THROWS_WITH_AS(surjectivity_witness(Ribbon(f.data.root), f.data), doctest::Contains("omega in quarter lattice"),
                       Error);
}
