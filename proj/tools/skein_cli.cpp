// skein-shadow: batch computation and verification from the command line.
//
// Exit codes: 0 success, 1 a check failed, 2 invalid input or usage.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "skein/fixtures.hpp"
#include "skein/skeinmap.hpp"
#include "skein/verify.hpp"

using namespace skein;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kConvention = "q=e^{4iπ/N}";

struct GlobalOptions {
  int N = 0;  // 0: take the order from the input, 5 without input
  std::string input;
  double tolerance = 1.0;
  int jobs = 1;
  std::uint64_t seed = 0xC9A1;
  std::string format = "text";
};

// Invalid input: exit 2 with a machine-readable reason.
struct InputError {
  std::string reason;
  std::string detail;
};

std::string num(double x) { return fmt::format("{:.12g}", x); }

// Drops a component below 1e-12 of the modulus: it is rounding noise at 12 digits.
cd denoise(cd z) {
  const double m = std::abs(z);
  return {std::abs(z.real()) < 1e-12 * m ? 0.0 : z.real(), std::abs(z.imag()) < 1e-12 * m ? 0.0 : z.imag()};
}

std::string num(cd z) {
  z = denoise(z);
  if (z.imag() == 0.0) return num(z.real());
  return fmt::format("{:.12g}{:+.12g}i", z.real(), z.imag());
}

double round12(double x) { return x == 0.0 || !std::isfinite(x) ? x : std::stod(num(x)); }

Json to_json(cd z) {
  z = denoise(z);
  return Json::array({round12(z.real()), round12(z.imag())});
}

// Collects one report both as ordered JSON and as "key: value" text lines.
class Report {
 public:
  Report(std::string command, int N) : command_(std::move(command)), N_(N) {
    json_["command"] = command_;
    json_["N"] = N;
    json_["convention"] = kConvention;
  }
  void put(const std::string& key, cd z) { add(key, to_json(z), num(z)); }
  void put(const std::string& key, double x) { add(key, round12(x), num(x)); }
  void put(const std::string& key, int x) { add(key, x, std::to_string(x)); }
  void put(const std::string& key, bool x) { add(key, x, x ? "yes" : "no"); }
  void put(const std::string& key, const std::string& s) { add(key, s, s); }
  void put(const std::string& key, const char* s) { put(key, std::string(s)); }
  void add(const std::string& key, Json value, std::string text) {
    json_[key] = std::move(value);
    lines_.emplace_back(key, std::move(text));
  }
  void line(std::string text) { lines_.emplace_back("", std::move(text)); }
  Json& json() { return json_; }

  void print(const GlobalOptions& g) const {
    if (g.format == "json") {
      std::cout << json_.dump(2) << "\n";
      return;
    }
    std::cout << fmt::format("# skein-shadow {}  N={}  {}\n", command_, N_, kConvention);
    for (const auto& [k, v] : lines_) std::cout << (k.empty() ? v : k + ": " + v) << "\n";
  }

 private:
  std::string command_;
  int N_;
  Json json_;
  std::vector<std::pair<std::string, std::string>> lines_;
};

int order_or_default(const GlobalOptions& g) { return g.N > 0 ? g.N : 5; }

void check_order(int N) {
  if (N < 5 || N % 2 == 0) throw InputError{"invalid N", "N must be odd and at least 5"};
}

// --input is a JSON file, or the name of a fixture in the fixture directory.
Fixture load_input(const GlobalOptions& g) {
  if (g.input.empty()) throw InputError{"missing input", "--input is required"};
  if (g.N > 0) check_order(g.N);
  try {
    if (std::filesystem::exists(g.input)) {
      std::ifstream in(g.input);
      std::stringstream ss;
      ss << in.rdbuf();
      return fixture_from_json(ss.str(), g.N);
    }
    return load_fixture(g.input, g.N);
  } catch (const Error& e) {
    throw InputError{"unreadable input", e.what()};
  }
}

void require_valid(const SurgeryData& sd) {
  check_order(sd.root.N);
  auto rep = validate(sd);
  if (!rep.ok) throw InputError{rep.problems.front().reason, rep.problems.front().detail};
}

EvalOptions eval_options(const GlobalOptions& g) {
  EvalOptions opt;
  opt.jobs = g.jobs;
  return opt;
}

std::string component_name(const MorseDiagram& d, int comp) {
  auto it = d.components.find(comp);
  return it == d.components.end() ? std::to_string(comp) : it->second;
}

int cmd_invariant(const GlobalOptions& g, bool check_kirby) {
  Fixture f = load_input(g);
  const SurgeryData& sd = f.data;
  require_valid(sd);
  Ribbon rb(sd.root);
  const EvalOptions opt = eval_options(g);
  ZResult z = z_invariant(rb, sd, opt);
  Report out("invariant", sd.root.N);
  if (!f.name.empty()) out.put("input", f.name);
  out.put("Z", z.value);
  out.put("F", z.F);
  out.put("signature", fmt::format("({}, {})", z.positive, z.negative));
  out.put("cut", component_name(sd.diagram, z.cut));
  if (!sd.link_components().empty()) out.put("f_omega", f_omega(rb, sd, opt));
  int status = 0;
  if (check_kirby && sd.surgery.empty()) {
    out.put("kirby_check", "skipped: no surgery component");
  } else if (check_kirby) {
    const double tol = 1e-6 * g.tolerance;
    double worst = 0.0;
    for (int sign : {1, -1}) {
      cd moved = z_invariant(rb, blow_up(sd, sd.surgery.front(), sign), opt).value;
      worst = std::max(worst, std::abs(moved - z.value) / std::max(std::abs(moved), std::abs(z.value)));
    }
    const bool ok = worst < tol;
    out.put("kirby_deviation", worst);
    out.put("kirby_check", ok ? "pass" : "fail");
    if (!ok) status = 1;
  }
  out.print(g);
  return status;
}

int cmd_verify(const GlobalOptions& g, std::vector<int> criteria, const std::string& fault, bool timings) {
  VerifyConfig cfg;
  cfg.N = order_or_default(g);
  check_order(cfg.N);
  if (!(g.tolerance > 0.0)) throw InputError{"invalid tolerance", "tolerances must be positive"};
  cfg.tolerance_scale = g.tolerance;
  cfg.jobs = g.jobs;
  cfg.seed = g.seed;
  cfg.fault = fault == "cartan-sign" ? Fault::CartanSign : Fault::None;
  if (criteria.empty())
    for (int i = 0; i <= 11; ++i) criteria.push_back(i);
  Report out("verify", cfg.N);
  Json rows = Json::array();
  int failed = 0;
  for (int id : criteria) {
    if (id < 0 || id > 11) throw InputError{"invalid criterion", fmt::format("no criterion {}", id)};
    CriterionResult r = run_criterion(id, cfg);
    if (!r.passed) ++failed;
    Json row{{"id", r.id},
             {"title", r.title},
             {"passed", r.passed},
             {"measured", round12(r.measured)},
             {"tolerance", r.tolerance},
             {"detail", r.detail}};
    std::string text = fmt::format("{:>2} {} {:<40} measured {:.3e} tolerance {:.0e}", r.id, r.passed ? "PASS" : "FAIL",
                                   r.title, r.measured, r.tolerance);
    if (timings) {
      row["seconds"] = r.seconds;
      text += fmt::format(" {:.2f} s", r.seconds);
    }
    if (!r.detail.empty()) text += "  " + r.detail;
    rows.push_back(std::move(row));
    out.line(std::move(text));
  }
  out.json()["criteria"] = std::move(rows);
  out.put("failed", failed);
  out.print(g);
  return failed == 0 ? 0 : 1;
}

// The canonical nilpotent endomorphism of P(n) in the library basis.
Mat nilpotent_of_P(int N, int n) {
  Mat h = Mat::Zero(2 * N, 2 * N);
  for (int i = 0; i <= n; ++i) h(N - 1 - n + i, N + i) = 1.0;
  return h;
}

std::optional<Poly> chebychev_color(const std::string& text, int N) {
  if (text == "T_N" || text == "T(N)") return chebychev(N);
  if (text.size() > 3 && text.rfind("T(", 0) == 0 && text.back() == ')') {
    try {
      return chebychev(std::stoi(text.substr(2, text.size() - 3)));
    } catch (const std::exception&) {
      throw InputError{"invalid color", text};
    }
  }
  return std::nullopt;
}

ModulePtr module_arg(const RootData& r, const std::string& text) {
  try {
    return parse_module(r, text);
  } catch (const Error& e) {
    throw InputError{"invalid module", e.what()};
  }
}

int cmd_hopf(const GlobalOptions& g, const std::string& color, const std::vector<std::string>& targets) {
  const int N = order_or_default(g);
  check_order(N);
  const RootData r = RootData::make(N);
  Ribbon rb(r);
  const double tol = 1e-9 * g.tolerance;
  auto poly = chebychev_color(color, N);
  ModulePtr encircling = poly ? nullptr : module_arg(r, color);
  Report out("hopf", N);
  out.put("color", color);
  Json rows = Json::array();
  for (const auto& t : targets) {
    ModulePtr target = module_arg(r, t);
    Mat phi = poly ? rb.open_hopf_poly(*poly, *target) : rb.open_hopf(*encircling, *target);
    Json row{{"target", t}, {"dim", target->dim()}};
    double dev = 0.0;
    cd a = scalar_part(phi, &dev);
    if (dev < tol) {
      row["scalar"] = to_json(a);
      out.line(fmt::format("{}: ({}) Id", t, num(a)));
    } else if (target->label.kind == LabelKind::P) {
      // Phi = a Id + b h_n on P(n)
      Mat h = nilpotent_of_P(N, target->label.n);
      a = phi.trace() / static_cast<double>(phi.rows());
      Mat rest = phi - a * Mat::Identity(phi.rows(), phi.cols());
      cd b = (h.conjugate().cwiseProduct(rest)).sum() / h.squaredNorm();
      const double residual = (rest - b * h).norm();
      row["scalar"] = to_json(a);
      row["nilpotent"] = to_json(b);
      row["residual"] = round12(residual);
      out.line(fmt::format("{}: ({}) Id + ({}) h   (residual {:.3g})", t, num(a), num(b), residual));
    } else {
      Json entries = Json::array();
      out.line(fmt::format("{}: matrix {}x{}", t, phi.rows(), phi.cols()));
      for (Eigen::Index i = 0; i < phi.rows(); ++i)
        for (Eigen::Index j = 0; j < phi.cols(); ++j)
          if (std::abs(phi(i, j)) > tol) {
            entries.push_back(Json::array({i, j, to_json(phi(i, j))}));
            out.line(fmt::format("  ({}, {}) {}", i, j, num(phi(i, j))));
          }
      row["entries"] = std::move(entries);
    }
    rows.push_back(std::move(row));
  }
  out.json()["targets"] = std::move(rows);
  out.print(g);
  return 0;
}

int cmd_decompose(const GlobalOptions& g, const std::string& module) {
  const int N = order_or_default(g);
  check_order(N);
  const RootData r = RootData::make(N);
  ModulePtr m = module_arg(r, module);
  DecomposeOptions opt;
  opt.seed = g.seed;
  Decomposition d = decompose(r, *m, opt);
  Report out("decompose", N);
  out.put("module", module);
  out.put("dim", m->dim());
  Json rows = Json::array();
  for (const auto& s : d.summands) {
    rows.push_back(Json{{"label", s.label.str()}, {"dim", s.character.total()}});
    out.line(fmt::format("{} (dim {})", s.label.str(), s.character.total()));
  }
  out.json()["summands"] = std::move(rows);
  out.put("character_cross_checked", d.character_cross_checked);
  out.print(g);
  return 0;
}

int cmd_witness(const GlobalOptions& g) {
  Fixture f = load_input(g);
  const SurgeryData& sd = f.data;
  require_valid(sd);
  Ribbon rb(sd.root);
  Report out("witness", sd.root.N);
  if (!f.name.empty()) out.put("input", f.name);
  WitnessLink wl;
  try {
    wl = surjectivity_witness(rb, sd, eval_options(g));
  } catch (const Error& e) {
    out.put("error", e.what());
    out.print(g);
    return 1;
  }
  std::string chain, switched;
  for (int c : wl.chain) chain += (chain.empty() ? "" : " ") + component_name(sd.diagram, c);
  for (auto r : wl.switched) switched += (switched.empty() ? "" : " ") + std::to_string(r);
  out.put("certificate", wl.certificate);
  out.put("abs_certificate", std::abs(wl.certificate));
  out.put("meridians", static_cast<int>(wl.meridians.size()));
  out.put("circles", static_cast<int>(wl.circles.size()));
  out.put("chain", chain);
  out.put("switched_rows", switched.empty() ? std::string("none") : switched);
  out.print(g);
  return 0;
}

int cmd_shadow(const GlobalOptions& g, std::string target, const std::string& omega_text, bool cabled) {
  Fixture f = load_input(g);
  const SurgeryData& sd = f.data;
  require_valid(sd);
  if (target.empty()) target = f.shadow_target;
  if (target.empty()) throw InputError{"missing target", "--target names the threaded component"};
  int comp = -1;
  for (const auto& [id, name] : sd.diagram.components)
    if (name == target) comp = id;
  if (comp < 0) throw InputError{"unknown component", target};
  std::optional<ExactWeight> omega = f.shadow_omega;
  if (!omega_text.empty()) {
    try {
      omega = ExactWeight::parse(omega_text);
    } catch (const Error& e) {
      throw InputError{"invalid omega", e.what()};
    }
  }
  Ribbon rb(sd.root);
  ShadowReport rep;
  try {
    rep = thread_chebychev(rb, sd, comp, omega, eval_options(g), cabled);
  } catch (const Error& e) {
    throw InputError{"invalid target", e.what()};
  }
  bool ok = rep.residual < 1e-6 * g.tolerance;
  double route_gap = 0.0;
  if (rep.lhs_cabled) {
    route_gap = std::abs(*rep.lhs_cabled - rep.lhs) / std::abs(rep.f_link);
    ok = ok && route_gap < 1e-7 * g.tolerance;
  }
  Report out("shadow", sd.root.N);
  if (!f.name.empty()) out.put("input", f.name);
  out.put("target", target);
  out.put("omega", rep.omega.str());
  out.put("f_link", rep.f_link);
  out.put("threaded", rep.lhs);
  out.put("predicted", rep.rhs);
  out.put("residual", rep.residual);
  if (rep.lhs_cabled) {
    out.put("threaded_cabled", *rep.lhs_cabled);
    out.put("route_gap", route_gap);
  }
  out.put("check", ok ? "pass" : "fail");
  out.print(g);
  return ok ? 0 : 1;
}

void report_input_error(const GlobalOptions& g, const InputError& e) {
  if (g.format == "json") {
    Json j{{"error", "invalid input"}, {"reason", e.reason}, {"detail", e.detail}};
    std::cout << j.dump(2) << "\n";
  }
  std::cerr << "error: " << e.reason;
  if (!e.detail.empty()) std::cerr << " (" << e.detail << ")";
  std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum invariants of 3-manifolds with a cohomology class and the skein map f_omega"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--N", g.N, "odd root order N >= 5 (default: from the input, else 5)");
  app.add_option("--tolerance", g.tolerance, "scale factor applied to every tolerance")->check(CLI::PositiveNumber);
  app.add_option("--jobs", g.jobs, "evaluation threads")->check(CLI::Range(1, 256));
  app.add_option("--seed", g.seed, "seed for idempotent splitting");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"text", "json"}));

  auto* invariant = app.add_subcommand("invariant", "Z_N of a surgery presentation, and f_omega of its link");
  bool check_kirby = false;
  invariant->add_option("--input", g.input, "presentation JSON file or fixture name")->required();
  invariant->add_flag("--check-kirby", check_kirby, "also compare against both blow-ups");

  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  std::vector<int> criteria;
  std::string fault = "none";
  bool timings = false;
  verify->add_option("--criteria", criteria, "criterion ids (0 is the Yang-Baxter check)")->delimiter(',');
  verify->add_option("--inject-fault", fault, "break the braiding on purpose")
      ->check(CLI::IsMember({"none", "cartan-sign"}));
  verify->add_flag("--timings", timings, "report runtimes");

  auto* hopf = app.add_subcommand("hopf", "open Hopf operators Phi_{color, target}");
  std::string color = "S(1)";
  std::vector<std::string> targets;
  hopf->add_option("--color", color, "encircling module, or T_N / T(k) for a Chebychev color of S(1)");
  hopf->add_option("--target", targets, "modules on the open strand")->required();

  auto* decomp = app.add_subcommand("decompose", "split a module into indecomposable summands");
  std::string module;
  decomp->add_option("--module", module, "module expression such as \"V(3/10) x V(41/100)\"")->required();

  auto* witness = app.add_subcommand("witness", "nonvanishing witness link of a presentation");
  witness->add_option("--input", g.input, "presentation JSON file or fixture name")->required();

  auto* shadow = app.add_subcommand("shadow", "thread T_N along a link component");
  std::string target, omega;
  shadow->add_option("--input", g.input, "presentation JSON file or fixture name")->required();
  shadow->add_option("--target", target, "component to thread (default: the fixture's)");
  shadow->add_option("--omega", omega, "expected omega on the target");
  bool cabled = false;
  shadow->add_flag("--cabled", cabled, "cross-check with N-strand cables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*invariant) return cmd_invariant(g, check_kirby);
    if (*verify) return cmd_verify(g, criteria, fault, timings);
    if (*hopf) return cmd_hopf(g, color, targets);
    if (*decomp) return cmd_decompose(g, module);
    if (*witness) return cmd_witness(g);
    if (*shadow) return cmd_shadow(g, target, omega, cabled);
  } catch (const InputError& e) {
    report_input_error(g, e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
