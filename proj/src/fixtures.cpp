#include "skein/fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace skein {

std::string fixture_dir() {
  if (const char* env = std::getenv("SKEIN_SHADOW_FIXTURES"); env && *env) return env;
  return SKEIN_FIXTURE_DIR;
}

std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(fixture_dir(), ec))
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  if (ec) throw Error("cannot list fixture directory " + fixture_dir() + ": " + ec.message());
  std::sort(names.begin(), names.end());
  return names;
}

Fixture fixture_from_json(const std::string& text, int N) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("fixture JSON: ") + e.what());
  }
  if (N > 0) j["N"] = N;
  Fixture f;
  f.name = j.value("name", "");
  f.description = j.value("description", "");
  f.data = parse_surgery(j.dump());
  if (j.contains("kauffman_rows")) f.kauffman_rows = j.at("kauffman_rows").get<std::vector<int>>();
  f.shadow_target = j.value("shadow_target", "");
  if (j.contains("shadow_omega")) f.shadow_omega = ExactWeight::parse(j.at("shadow_omega").get<std::string>());
  f.kirby_partner = j.value("kirby_partner", "");
  return f;
}

Fixture load_fixture(const std::string& name, int N) {
  std::filesystem::path path = std::filesystem::path(fixture_dir()) / (name + ".json");
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixture " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Fixture f = fixture_from_json(ss.str(), N);
  if (f.name.empty()) f.name = name;
  return f;
}

}  // namespace skein
