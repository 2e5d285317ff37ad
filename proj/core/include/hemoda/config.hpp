#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "hemoda/geometry.hpp"
#include "hemoda/twin_lab.hpp"

namespace hemoda {

struct RunConfig {
  Scenario scenario;
  VesselShape vessel;
  std::array<int, 2> coarse{40, 16};
  std::array<int, 2> fine{160, 64};
  double sensor_fraction = 0.05;
  std::optional<int> sensor_count = 27;
  std::uint64_t seed_truth = 1;
  std::uint64_t seed_noise = 2;
  std::uint64_t seed_ensemble = 3;
  std::string output = "run";
  bool export_ensembles = false;
  bool export_fields = true;
  int threads = 1;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig default_config(ScenarioKind kind = ScenarioKind::kConstant);

/// Parses a JSON document. Omitted keys take the defaults of the document's
/// scenario; unknown keys are rejected. An empty document yields the constant
/// scenario defaults.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// Full JSON document with every key, accepted back by parse_config_text.
std::string serialize_config(const RunConfig& config);

}  // namespace hemoda
