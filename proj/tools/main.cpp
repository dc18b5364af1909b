// Command-line front end: parameter sweeps, the sudden-death boundary,
// synthetic homodyne runs, covariance estimation from sample files, beam
// rendering and single-point evaluation. All outputs are deterministic for a
// fixed config and seed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "oamcv/channel.hpp"
#include "oamcv/errors.hpp"
#include "oamcv/gaussian.hpp"
#include "oamcv/measurement.hpp"
#include "oamcv/modes.hpp"
#include "oamcv/sweep.hpp"

namespace {

oamcv::SweepConfig load_or_default(const std::string& path) {
  if (path.empty()) {
    oamcv::SweepConfig config;
    oamcv::validate_config(config);
    return config;
  }
  return oamcv::load_config(path);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) {
    throw oamcv::IoError("cannot open for writing: " + path);
  }
  out << text;
  if (!out.good()) {
    throw oamcv::IoError("write failed: " + path);
  }
}

std::string render_table(const std::vector<oamcv::SweepRecord>& records,
                         const std::string& format) {
  if (format == "json") {
    return oamcv::sweep_json(records).dump(2) + "\n";
  }
  return oamcv::sweep_csv(records);
}

std::string render_table(const std::vector<oamcv::BoundaryRecord>& records,
                         const std::string& format) {
  if (format == "json") {
    return oamcv::boundary_json(records).dump(2) + "\n";
  }
  return oamcv::boundary_csv(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OAM-multiplexed continuous-variable entanglement and coherence simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;

  const auto add_common = [&](CLI::App* sub, bool with_format) {
    sub->add_option("--config", config_path, "JSON config file (defaults used when omitted)");
    sub->add_option("--out", out_path, "output path (stdout when omitted)");
    if (with_format) {
      sub->add_option("--format", format, "output format")
          ->check(CLI::IsMember({"csv", "json"}));
    }
  };

  auto* sweep_cmd =
      app.add_subcommand("sweep", "PPT and coherence over the (l, delta, eta) grid");
  add_common(sweep_cmd, true);
  sweep_cmd->callback([&] {
    const auto config = load_or_default(config_path);
    write_text(out_path.empty() ? config.output_path : out_path,
               render_table(oamcv::run_sweep(config), format));
  });

  auto* boundary_cmd =
      app.add_subcommand("boundary", "sudden-death boundary eta*(delta)");
  add_common(boundary_cmd, true);
  boundary_cmd->callback([&] {
    const auto config = load_or_default(config_path);
    write_text(out_path.empty() ? config.output_path : out_path,
               render_table(oamcv::run_boundary(config), format));
  });

  auto* simulate_cmd = app.add_subcommand(
      "simulate", "synthetic homodyne run: sample CSVs plus an estimation report");
  add_common(simulate_cmd, false);
  simulate_cmd->add_option("--seed", seed, "override the config seed");
  simulate_cmd->callback([&] {
    auto config = load_or_default(config_path);
    if (seed) config.seed = *seed;
    const auto result = oamcv::run_simulate_pipeline(config);
    const std::string dir =
        out_path.empty() ? (config.output_path.empty() ? "simulate_out" : config.output_path)
                         : out_path;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw oamcv::IoError("cannot create output directory: " + dir);
    }
    for (const auto& set : result.sets) {
      oamcv::write_samples_csv(
          set, dir + "/samples_" + oamcv::to_string(set.pair) + ".csv");
    }
    write_text(dir + "/report.json",
               oamcv::simulate_report_json(result, config).dump(2) + "\n");
  });

  auto* estimate_cmd = app.add_subcommand(
      "estimate", "covariance estimation report from four sample CSV files");
  std::string xx_path, yy_path, xy_path, yx_path;
  int blocks = 10;
  estimate_cmd->add_option("--xx", xx_path, "X_C/X_P sample CSV")->required();
  estimate_cmd->add_option("--yy", yy_path, "Y_C/Y_P sample CSV")->required();
  estimate_cmd->add_option("--xy", xy_path, "X_C/Y_P sample CSV")->required();
  estimate_cmd->add_option("--yx", yx_path, "Y_C/X_P sample CSV")->required();
  estimate_cmd->add_option("--blocks", blocks, "blocks for error bars")
      ->check(CLI::Range(2, 1000000));
  estimate_cmd->add_option("--out", out_path, "report path (stdout when omitted)");
  estimate_cmd->callback([&] {
    std::vector<oamcv::QuadratureSampleSet> sets;
    sets.push_back(oamcv::read_samples_csv(xx_path, oamcv::QuadraturePair::XX));
    sets.push_back(oamcv::read_samples_csv(yy_path, oamcv::QuadraturePair::YY));
    sets.push_back(oamcv::read_samples_csv(xy_path, oamcv::QuadraturePair::XY));
    sets.push_back(oamcv::read_samples_csv(yx_path, oamcv::QuadraturePair::YX));
    const auto summary = oamcv::summarize_estimate(sets, blocks);
    nlohmann::json report = oamcv::estimate_report_json(summary);
    report["kind"] = "estimate";
    report["blocks"] = blocks;
    report["samples"] = sets.front().n();
    write_text(out_path, report.dump(2) + "\n");
  });

  auto* render_cmd = app.add_subcommand(
      "render-mode", "LG beam intensity or plane-wave interference as PGM");
  int l = 1;
  int size = 512;
  double tilt = 8.0;
  bool interfere = false;
  render_cmd->add_option("--l", l, "topological charge");
  render_cmd->add_option("--size", size, "grid size in pixels")->check(CLI::Range(16, 8192));
  render_cmd->add_option("--tilt", tilt, "plane-wave tilt, fringe cycles per extent unit");
  render_cmd->add_flag("--interfere", interfere, "render the interference pattern");
  render_cmd->add_option("--out", out_path, "PGM path (stdout when omitted)");
  render_cmd->callback([&] {
    const auto field = oamcv::lg_field(l, 1.0, size, size, 3.0);
    const Eigen::MatrixXd img =
        interfere ? oamcv::interference(field, tilt, 1.0) : oamcv::intensity(field);
    if (out_path.empty()) {
      oamcv::write_pgm(img, std::cout);
    } else {
      oamcv::write_pgm(img, out_path);
    }
  });

  auto* point_cmd =
      app.add_subcommand("point", "evaluate a single (eta, delta) point, JSON to stdout");
  std::optional<double> eta_opt;
  std::optional<double> delta_opt;
  point_cmd->add_option("--config", config_path, "JSON config file");
  point_cmd->add_option("--eta", eta_opt, "override point.eta");
  point_cmd->add_option("--delta", delta_opt, "override point.delta");
  point_cmd->callback([&] {
    const auto config = load_or_default(config_path);
    const double eta = eta_opt.value_or(config.point.eta);
    const double delta = delta_opt.value_or(config.point.delta);
    const oamcv::EprParams epr = config.epr.params();
    const auto state =
        oamcv::apply_channel(oamcv::initial_state(epr), oamcv::ChannelParams(eta, delta));
    const auto spectrum = oamcv::symplectic_eigenvalues(state);
    const double ppt = oamcv::ppt_value(state);
    const nlohmann::json out{
        {"source", {{"v_corr", epr.v_corr}, {"v_anti", epr.v_anti}}},
        {"eta", eta},
        {"delta", delta},
        {"ppt", ppt},
        {"coherence", oamcv::relative_entropy_coherence(state)},
        {"entangled", ppt < 1.0},
        {"symplectic_eigenvalues",
         std::vector<double>(spectrum.values.begin(), spectrum.values.end())},
    };
    std::cout << out.dump(2) << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const oamcv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const oamcv::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 1;
  } catch (const oamcv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
