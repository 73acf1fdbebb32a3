/**
 * @file fixtures.hpp
 * @brief Named surgery fixtures stored as JSON files.
 *
 * The fixture directory is $SKEIN_SHADOW_FIXTURES when set, otherwise the
 * directory compiled into the library.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skein/cgp.hpp"

namespace skein {

struct Fixture {
  std::string name;
  std::string description;
  SurgeryData data;
  std::vector<int> kauffman_rows;           // crossing rows for Kauffman triples
  std::string shadow_target;                // component threaded by T_N
  std::optional<ExactWeight> shadow_omega;  // declared omega on the target
  std::string kirby_partner;                // fixture presenting the same manifold
};

std::string fixture_dir();
std::vector<std::string> fixture_names();
/// Loads `<dir>/<name>.json`; N > 0 overrides the stored root order.
Fixture load_fixture(const std::string& name, int N = 0);
/// Same, from JSON text.
Fixture fixture_from_json(const std::string& text, int N = 0);

}  // namespace skein
