#pragma once

// Every tunable of the toolkit in one flat `key = value` document with
// section prefixes (pc.scales, boiem.rayleigh_scale, ...). Unset keys keep
// module defaults; unknown keys are rejected.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biqme/boiem.hpp"
#include "biqme/cpcqi.hpp"
#include "biqme/eval_stats.hpp"
#include "biqme/features.hpp"
#include "biqme/svr.hpp"
#include "biqme/trainset.hpp"

namespace biqme {

struct ToolkitConfig {
  FeatureConfig features;
  cpcqi::Config cpcqi;
  svr::Hyper svr;
  svr::TrainOptions solver;
  svr::GridSpec grid;
  gen::GenConfig gen;
  boiem::Config boiem;
  int eval_restarts = 20;

  // Throws ConfigError naming the offending key.
  void validate() const;

  // Parses a document; errors report the 1-based line number.
  static ToolkitConfig parse(std::string_view text);
  static ToolkitConfig load(const std::filesystem::path& path);

  // All keys with their current values, in a fixed order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string echo() const;  // entries() rendered as a parseable document
};

// Every key accepted by ToolkitConfig::parse.
std::vector<std::string> config_keys();

}  // namespace biqme
