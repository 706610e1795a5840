// Copyright 2026 The twintrap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// twintrap <scenario|run|oracle-check> [--config FILE] [--seed N] [--traj N] [--out DIR]

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "twintrap/twintrap.hpp"

namespace {

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string preset_list() {
  std::string s = "scenarios:\n";
  for (const auto& p : twintrap::kPresets) s += "  " + std::string(p.name) + "  " + std::string(p.summary) + "\n";
  s += "  run  custom scenario from --config\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory simulations of pumped twin-trap condensates with detection-built relative phase"};
  app.footer(preset_list());

  std::string target;
  std::string config_path;
  std::uint64_t seed = 0;
  std::int64_t traj = 0;
  std::int64_t threads = -1;
  std::string out;
  bool dump = false;

  app.add_option("scenario", target, "preset name, 'run' or 'oracle-check'")->required();
  app.add_option("--config", config_path, "key = value file applied over the preset")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--traj", traj, "number of trajectories")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads (0 = auto)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "output directory");
  app.add_flag("--dump-config", dump, "print the resolved configuration and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    twintrap::ScenarioConfig cfg;
    if (target == "run") {
      if (config_path.empty()) throw twintrap::ConfigError("'run' needs --config");
    } else {
      cfg = twintrap::preset_config(target);
    }
    if (!config_path.empty()) {
      try {
        cfg = twintrap::parse_config(read_text(config_path), cfg);
      } catch (const twintrap::ConfigError& e) {
        throw twintrap::ConfigError(config_path + ": " + e.what());
      }
    }
    if (*seed_opt) cfg.seed = seed;
    if (traj > 0) cfg.n_traj = traj;
    if (threads >= 0) cfg.threads = threads;
    if (!out.empty()) cfg.output = out;

    if (dump) {
      std::cout << twintrap::dump_config(cfg);
      return 0;
    }
    for (const auto& path : twintrap::run_scenario(cfg, &std::cerr)) std::cout << path << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "twintrap: error: " << e.what() << '\n';
    return 1;
  }
}
