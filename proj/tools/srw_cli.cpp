// Command-line front end: srw <subcommand> --config PATH --seed N --reps N --out DIR

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "srw/srw.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw srw::IoError("cannot read config " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sedentary random waypoint simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  long reps = -1;
  std::string out_dir = "out";
  std::string format = "native";

  for (const char* name : {"detect", "mobile-detect", "cover", "stationary", "percolate", "trace"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "Flat key = value config file");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--reps", reps, "Replications (defaults to run.reps)");
    sub->add_option("--out", out_dir, "Output directory");
    if (std::string(name) == "trace")
      sub->add_option("--format", format, "Trace format")->check(CLI::IsMember({"native", "bonnmotion", "both"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const auto cmd = srw::parse_subcommand(app.get_subcommands().front()->get_name());

  srw::MobilityConfig cfg;
  try {
    if (!config_path.empty()) cfg = srw::parse_config(read_file(config_path));
  } catch (const srw::ParseError& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const srw::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const srw::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  srw::RunOptions opts;
  opts.out_dir = out_dir;
  opts.seed = seed;
  opts.reps = reps > 0 ? reps : cfg.reps;
  opts.format = format == "bonnmotion" ? srw::TraceFormat::bonnmotion
                : format == "both"     ? srw::TraceFormat::both
                                       : srw::TraceFormat::native;

  try {
    const auto res = srw::run_experiment(cfg, *cmd, opts);
    for (const auto& f : res.files) std::cout << f.string() << '\n';
  } catch (const srw::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
