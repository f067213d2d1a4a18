// SPDX-License-Identifier: MIT
// Command-line driver: one subcommand per experiment kind plus `validate`.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbhom/experiment.hpp"

namespace {

struct Args {
  std::string config, out = "out";
  int workers = 1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Args& a, bool with_out) {
  sub->add_option("--config", a.config, "JSON config file")->check(CLI::ExistingFile);
  if (with_out) sub->add_option("--out", a.out, "output directory")->capture_default_str();
  sub->add_option("--workers", a.workers, "parallel sweep workers")->check(CLI::PositiveNumber);
  sub->add_option("--override", a.overrides, "KEY=VALUE config override (repeatable)");
}

int print_diagnostics(const tbhom::Diagnostics& d) {
  for (const auto& e : d.errors) std::cerr << "error: " << e << "\n";
  for (const auto& w : d.warnings) std::cerr << "warning: " << w << "\n";
  return d.ok() ? 0 : 2;
}

int run(const std::string& kind, const Args& a) {
  std::vector<std::string> ov{"kind=\"" + kind + "\""};
  ov.insert(ov.end(), a.overrides.begin(), a.overrides.end());
  const auto cfg = tbhom::ExperimentConfig::load(a.config, ov);
  const auto r = tbhom::run_experiment(cfg, a.out, a.workers);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& c : r.checks)
    std::printf("%s %-40s value=%.6g threshold=%.6g%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value,
                c.threshold, c.detail.empty() ? "" : "  ", c.detail.c_str());
  std::printf("config_hash=%s outputs in %s\n", cfg.hash().c_str(), a.out.c_str());
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taylor-Bloch homogenization experiments"};
  app.require_subcommand(1);
  Args args;
  const std::vector<std::string> kinds{"correctors", "dispersion", "wave-compare", "elliptic-rate", "transport",
                                       "source-term"};
  for (const auto& k : kinds) add_common(app.add_subcommand(k, "run a " + k + " experiment"), args, true);
  auto* val = app.add_subcommand("validate", "check a config without running it");
  add_common(val, args, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (val->parsed()) {
      const auto cfg = tbhom::ExperimentConfig::load(args.config, args.overrides);
      const auto d = tbhom::validate(cfg);
      if (d.ok() && d.warnings.empty()) std::cout << "config ok (hash " << cfg.hash() << ")\n";
      return print_diagnostics(d);
    }
    for (const auto& k : kinds)
      if (app.got_subcommand(k)) return run(k, args);
  } catch (const tbhom::ConfigurationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
