#pragma once

// Configuration, parameter sweeps and deterministic CSV/JSON emission. Grid
// points are evaluated in a work pool (OAMCV_THREADS workers) but written to
// per-index slots, so the output is byte-identical regardless of scheduling.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "oamcv/channel.hpp"
#include "oamcv/errors.hpp"
#include "oamcv/gaussian.hpp"
#include "oamcv/measurement.hpp"
#include "oamcv/multiplex.hpp"
#include "oamcv/parallel.hpp"

namespace oamcv {

/// Source specification as written in the config: either variances directly
/// or measured dB levels. The original form is kept so configs round-trip.
struct EprSpec {
  enum class Kind { Linear, Decibel };
  Kind kind = Kind::Linear;
  double first = 0.47;   // v_corr or corr_db
  double second = 4.11;  // v_anti or anti_db

  EprParams params() const {
    return kind == Kind::Linear ? EprParams(first, second) : epr_from_db(first, second);
  }

  friend bool operator==(const EprSpec&, const EprSpec&) = default;
};

struct EtaGrid {
  double start = 0.0;
  double stop = 1.0;
  int steps = 101;

  friend bool operator==(const EtaGrid&, const EtaGrid&) = default;
};

struct PointSpec {
  double eta = 1.0;
  double delta = 0.0;

  friend bool operator==(const PointSpec&, const PointSpec&) = default;
};

/// All fields optional in the config file; defaults mirror the reference
/// scenario (V = 0.47, V' = 4.11, deltas {0, 0.15, 0.5, 1}, 101 eta points,
/// charges {0, 1, 2}).
struct SweepConfig {
  EprSpec epr;
  std::vector<int> charges{0, 1, 2};
  EtaGrid eta_grid;
  std::vector<double> delta_values{0.0, 0.15, 0.5, 1.0};
  std::vector<std::string> outputs{"ppt", "coherence"};
  std::uint64_t seed = 1;
  std::int64_t samples = 1'000'000;
  int blocks = 10;
  PointSpec point;
  std::string output_path;

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

inline void validate_config(const SweepConfig& config) {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  try {
    (void)config.epr.params();
  } catch (const UnphysicalSource& e) {
    fail(std::string("epr: ") + e.what());
  }
  {
    std::vector<int> sorted = config.charges;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail("charges: values must be distinct");
    }
  }
  if (!(config.eta_grid.start >= 0 && config.eta_grid.start <= 1)) {
    fail("eta_grid.start: must be in [0, 1]");
  }
  if (!(config.eta_grid.stop >= 0 && config.eta_grid.stop <= 1)) {
    fail("eta_grid.stop: must be in [0, 1]");
  }
  if (config.eta_grid.start > config.eta_grid.stop) {
    fail("eta_grid: start must not exceed stop");
  }
  if (config.eta_grid.steps < 2) {
    fail("eta_grid.steps: must be >= 2");
  }
  for (std::size_t k = 0; k < config.delta_values.size(); ++k) {
    if (!(config.delta_values[k] >= 0)) {
      fail("delta_values[" + std::to_string(k) + "]: must be >= 0");
    }
  }
  for (const auto& name : config.outputs) {
    if (name != "ppt" && name != "coherence" && name != "boundary") {
      fail("outputs: unknown quantity '" + name + "'");
    }
  }
  if (config.samples < 2) fail("samples: must be >= 2");
  if (config.blocks < 2) fail("blocks: must be >= 2");
  if (!(config.point.eta >= 0 && config.point.eta <= 1)) {
    fail("point.eta: must be in [0, 1]");
  }
  if (!(config.point.delta >= 0)) fail("point.delta: must be >= 0");
}

namespace detail {

inline const nlohmann::json* find_key(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double as_number(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  return j.get<double>();
}

inline std::int64_t as_integer(const nlohmann::json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field + ": expected an integer");
  return j.get<std::int64_t>();
}

}  // namespace detail

/// Parse and validate a config document. Unknown keys are rejected so typos
/// do not silently fall back to defaults.
inline SweepConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  static const std::array<const char*, 10> known{"epr",     "charges", "eta_grid",
                                                 "delta_values", "outputs", "seed",
                                                 "samples", "blocks",  "point",
                                                 "output_path"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }

  SweepConfig config;
  if (const auto* epr = detail::find_key(doc, "epr")) {
    if (!epr->is_object()) throw ConfigError("epr: expected an object");
    const bool linear = epr->contains("v_corr") || epr->contains("v_anti");
    const bool db = epr->contains("corr_db") || epr->contains("anti_db");
    if (linear == db) {
      throw ConfigError("epr: give exactly one of (v_corr, v_anti) or (corr_db, anti_db)");
    }
    if (linear) {
      config.epr.kind = EprSpec::Kind::Linear;
      config.epr.first = detail::as_number(epr->at("v_corr"), "epr.v_corr");
      config.epr.second = detail::as_number(epr->at("v_anti"), "epr.v_anti");
    } else {
      config.epr.kind = EprSpec::Kind::Decibel;
      config.epr.first = detail::as_number(epr->at("corr_db"), "epr.corr_db");
      config.epr.second = detail::as_number(epr->at("anti_db"), "epr.anti_db");
    }
  }
  if (const auto* charges = detail::find_key(doc, "charges")) {
    if (!charges->is_array()) throw ConfigError("charges: expected an array");
    config.charges.clear();
    for (const auto& item : *charges) {
      config.charges.push_back(static_cast<int>(detail::as_integer(item, "charges[]")));
    }
  }
  if (const auto* grid = detail::find_key(doc, "eta_grid")) {
    if (!grid->is_object()) throw ConfigError("eta_grid: expected an object");
    if (const auto* v = detail::find_key(*grid, "start")) {
      config.eta_grid.start = detail::as_number(*v, "eta_grid.start");
    }
    if (const auto* v = detail::find_key(*grid, "stop")) {
      config.eta_grid.stop = detail::as_number(*v, "eta_grid.stop");
    }
    if (const auto* v = detail::find_key(*grid, "steps")) {
      config.eta_grid.steps = static_cast<int>(detail::as_integer(*v, "eta_grid.steps"));
    }
  }
  if (const auto* deltas = detail::find_key(doc, "delta_values")) {
    if (!deltas->is_array()) throw ConfigError("delta_values: expected an array");
    config.delta_values.clear();
    for (const auto& item : *deltas) {
      config.delta_values.push_back(detail::as_number(item, "delta_values[]"));
    }
  }
  if (const auto* outputs = detail::find_key(doc, "outputs")) {
    if (!outputs->is_array()) throw ConfigError("outputs: expected an array");
    config.outputs.clear();
    for (const auto& item : *outputs) {
      if (!item.is_string()) throw ConfigError("outputs[]: expected a string");
      config.outputs.push_back(item.get<std::string>());
    }
  }
  if (const auto* seed = detail::find_key(doc, "seed")) {
    const std::int64_t value = detail::as_integer(*seed, "seed");
    if (value < 0) throw ConfigError("seed: must be >= 0");
    config.seed = static_cast<std::uint64_t>(value);
  }
  if (const auto* samples = detail::find_key(doc, "samples")) {
    config.samples = detail::as_integer(*samples, "samples");
  }
  if (const auto* blocks = detail::find_key(doc, "blocks")) {
    config.blocks = static_cast<int>(detail::as_integer(*blocks, "blocks"));
  }
  if (const auto* point = detail::find_key(doc, "point")) {
    if (!point->is_object()) throw ConfigError("point: expected an object");
    if (const auto* v = detail::find_key(*point, "eta")) {
      config.point.eta = detail::as_number(*v, "point.eta");
    }
    if (const auto* v = detail::find_key(*point, "delta")) {
      config.point.delta = detail::as_number(*v, "point.delta");
    }
  }
  if (const auto* path = detail::find_key(doc, "output_path")) {
    if (!path->is_string()) throw ConfigError("output_path: expected a string");
    config.output_path = path->get<std::string>();
  }

  validate_config(config);
  return config;
}

inline nlohmann::json config_to_json(const SweepConfig& config) {
  nlohmann::json epr;
  if (config.epr.kind == EprSpec::Kind::Linear) {
    epr = {{"v_corr", config.epr.first}, {"v_anti", config.epr.second}};
  } else {
    epr = {{"corr_db", config.epr.first}, {"anti_db", config.epr.second}};
  }
  return nlohmann::json{
      {"epr", epr},
      {"charges", config.charges},
      {"eta_grid",
       {{"start", config.eta_grid.start},
        {"stop", config.eta_grid.stop},
        {"steps", config.eta_grid.steps}}},
      {"delta_values", config.delta_values},
      {"outputs", config.outputs},
      {"seed", config.seed},
      {"samples", config.samples},
      {"blocks", config.blocks},
      {"point", {{"eta", config.point.eta}, {"delta", config.point.delta}}},
      {"output_path", config.output_path},
  };
}

inline SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

/// Evenly spaced eta values, endpoints included, clamped into [0, 1] against
/// round-off.
inline std::vector<double> eta_values(const EtaGrid& grid) {
  std::vector<double> etas(static_cast<std::size_t>(grid.steps));
  for (int k = 0; k < grid.steps; ++k) {
    const double eta =
        grid.start + (grid.stop - grid.start) * (double(k) / double(grid.steps - 1));
    etas[static_cast<std::size_t>(k)] = std::clamp(eta, 0.0, 1.0);
  }
  return etas;
}

struct SweepRecord {
  int l;
  double delta;
  double eta;
  double ppt;
  double coherence;
  bool entangled;
};

/// One record per (l, delta, eta), sorted by (l, delta, eta).
inline std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
  validate_config(config);
  const EprParams epr = config.epr.params();
  const auto base = build_multiplexed(std::span<const int>(config.charges), epr);

  std::vector<double> deltas = config.delta_values;
  std::sort(deltas.begin(), deltas.end());
  const std::vector<double> etas = eta_values(config.eta_grid);

  const std::size_t n_l = base.size();
  const std::size_t n_d = deltas.size();
  const std::size_t n_e = etas.size();
  std::vector<SweepRecord> records(n_l * n_d * n_e);
  parallel_for(n_d * n_e, [&](std::size_t task) {
    const std::size_t d = task / n_e;
    const std::size_t e = task % n_e;
    const auto out = apply_channel_all(base, ChannelParams(etas[e], deltas[d]));
    const auto rep = report(out);
    for (std::size_t li = 0; li < rep.records.size(); ++li) {
      const auto& rec = rep.records[li];
      records[li * n_d * n_e + d * n_e + e] =
          {rec.charge, deltas[d], etas[e], rec.ppt, rec.coherence, rec.entangled};
    }
  });
  return records;
}

struct BoundaryRecord {
  double delta;
  std::optional<double> eta_star;
};

/// Sudden-death boundary eta*(delta) for every configured delta, in ascending
/// delta order; deltas with no sudden death carry an empty eta_star.
inline std::vector<BoundaryRecord> run_boundary(const SweepConfig& config) {
  validate_config(config);
  const EprParams epr = config.epr.params();
  std::vector<double> deltas = config.delta_values;
  std::sort(deltas.begin(), deltas.end());
  std::vector<BoundaryRecord> records;
  records.reserve(deltas.size());
  for (const double delta : deltas) {
    records.push_back({delta, sudden_death_threshold(epr, delta)});
  }
  return records;
}

/// %.9g formatting used for all CSV floats.
inline std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::string out = "l,delta,eta,ppt,coherence,entangled\n";
  for (const auto& r : records) {
    out += std::to_string(r.l);
    out += ',';
    out += format_g9(r.delta);
    out += ',';
    out += format_g9(r.eta);
    out += ',';
    out += format_g9(r.ppt);
    out += ',';
    out += format_g9(r.coherence);
    out += ',';
    out += r.entangled ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline nlohmann::json sweep_json(const std::vector<SweepRecord>& records) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"l", r.l},
                    {"delta", r.delta},
                    {"eta", r.eta},
                    {"ppt", r.ppt},
                    {"coherence", r.coherence},
                    {"entangled", r.entangled}});
  }
  return rows;
}

inline std::string boundary_csv(const std::vector<BoundaryRecord>& records) {
  std::string out = "delta,eta_star\n";
  for (const auto& r : records) {
    out += format_g9(r.delta);
    out += ',';
    out += r.eta_star ? format_g9(*r.eta_star) : std::string("none");
    out += '\n';
  }
  return out;
}

inline nlohmann::json boundary_json(const std::vector<BoundaryRecord>& records) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json row{{"delta", r.delta}};
    if (r.eta_star) {
      row["eta_star"] = *r.eta_star;
    } else {
      row["eta_star"] = nullptr;
    }
    rows.push_back(row);
  }
  return rows;
}

struct SimulateResult {
  double eta;
  double delta;
  std::uint64_t seed;
  std::int64_t samples;
  int blocks;
  GaussianState truth;
  double ppt_true;
  double coherence_true;
  CovarianceEstimate estimate;
  double ppt_est;
  double coherence_est;
  double ppt_err;
  double coherence_err;
  std::vector<QuadratureSampleSet> sets;
};

namespace detail {

// PPT and coherence from a raw covariance estimate; the covariance is
// inflated to the physical boundary if sampling noise pushed it below.
// Used for per-block error bars, where the strict projection window would be
// too harsh for the short block records.
inline std::pair<double, double> block_metrics(const Eigen::Vector4d& disp,
                                               const Eigen::Matrix4d& cov) {
  Eigen::Matrix4d repaired = cov;
  const double nu_min = min_symplectic_modulus(cov);
  if (nu_min < 1.0) {
    repaired += minimal_isotropic_inflation(cov, nu_min) * Eigen::Matrix4d::Identity();
  }
  const GaussianState state(disp, repaired);
  return {ppt_value(state), relative_entropy_coherence(state)};
}

inline double sample_std(const std::vector<double>& values) {
  const std::size_t n = values.size();
  double mean = 0;
  for (const double v : values) mean += v;
  mean /= double(n);
  double ss = 0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / double(n - 1));
}

}  // namespace detail

struct EstimateSummary {
  CovarianceEstimate estimate;
  double ppt;
  double coherence;
  double ppt_err;
  double coherence_err;
};

/// Full-record estimate plus one-sigma error bars: the records are split into
/// `blocks` chunks, PPT and coherence are re-derived per chunk, and the error
/// bar is the chunk spread divided by sqrt(blocks) (the standard error of the
/// full-sample value).
inline EstimateSummary summarize_estimate(const std::vector<QuadratureSampleSet>& sets,
                                          int blocks) {
  CovarianceEstimate estimate = estimate_covariance(sets, blocks);
  const double ppt_est = ppt_value(estimate.state);
  const double coherence_est = relative_entropy_coherence(estimate.state);

  std::vector<double> ppt_blocks;
  std::vector<double> coh_blocks;
  for (int b = 0; b < blocks; ++b) {
    std::vector<QuadratureSampleSet> chunk;
    chunk.reserve(4);
    for (const auto& set : sets) {
      const Eigen::Index m = set.n() / blocks;
      QuadratureSampleSet piece;
      piece.pair = set.pair;
      piece.seed = set.seed;
      piece.samples = set.samples.middleRows(b * m, m);
      chunk.push_back(std::move(piece));
    }
    const auto raw = detail::raw_estimate(chunk, 2);
    const auto [ppt, coh] = detail::block_metrics(raw.disp, raw.cov);
    ppt_blocks.push_back(ppt);
    coh_blocks.push_back(coh);
  }
  const double root_blocks = std::sqrt(double(blocks));
  return EstimateSummary{std::move(estimate), ppt_est, coherence_est,
                         detail::sample_std(ppt_blocks) / root_blocks,
                         detail::sample_std(coh_blocks) / root_blocks};
}

/// End-to-end synthetic measurement at the configured point: sample the four
/// quadrature pairs, re-estimate the covariance, and report PPT/coherence
/// with one-sigma error bars.
inline SimulateResult run_simulate_pipeline(const SweepConfig& config) {
  validate_config(config);
  if (config.samples / config.blocks < 100) {
    throw ConfigError("samples: need at least 100 samples per block");
  }
  const auto truth = apply_channel(initial_state(config.epr.params()),
                                   ChannelParams(config.point.eta, config.point.delta));

  std::vector<QuadratureSampleSet> sets;
  sets.reserve(4);
  for (const auto pair : kAllQuadraturePairs) {
    sets.push_back(sample_pair(truth, pair, config.samples, config.seed));
  }

  EstimateSummary summary = summarize_estimate(sets, config.blocks);
  return SimulateResult{config.point.eta,
                        config.point.delta,
                        config.seed,
                        config.samples,
                        config.blocks,
                        truth,
                        ppt_value(truth),
                        relative_entropy_coherence(truth),
                        std::move(summary.estimate),
                        summary.ppt,
                        summary.coherence,
                        summary.ppt_err,
                        summary.coherence_err,
                        std::move(sets)};
}

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.cols(); ++i) row.push_back(m(j, i));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

/// Report for an estimate alone; `simulate` attaches ground truth on top.
inline nlohmann::json estimate_report_json(const EstimateSummary& summary) {
  return nlohmann::json{
      {"ppt", summary.ppt},
      {"ppt_err", summary.ppt_err},
      {"coherence", summary.coherence},
      {"coherence_err", summary.coherence_err},
      {"cov", detail::matrix_json(summary.estimate.state.cov())},
      {"displacement", std::vector<double>(summary.estimate.state.displacement().begin(),
                                           summary.estimate.state.displacement().end())},
      {"cov_std_error", detail::matrix_json(summary.estimate.cov_std_error)},
      {"projected", summary.estimate.projected},
      {"inflation", summary.estimate.inflation},
  };
}

inline nlohmann::json simulate_report_json(const SimulateResult& result,
                                           const SweepConfig& config) {
  const EprParams epr = config.epr.params();
  return nlohmann::json{
      {"kind", "simulate"},
      {"seed", result.seed},
      {"samples", result.samples},
      {"blocks", result.blocks},
      {"source", {{"v_corr", epr.v_corr}, {"v_anti", epr.v_anti}}},
      {"channel", {{"eta", result.eta}, {"delta", result.delta}}},
      {"truth",
       {{"ppt", result.ppt_true},
        {"coherence", result.coherence_true},
        {"cov", detail::matrix_json(result.truth.cov())}}},
      {"estimate",
       estimate_report_json({result.estimate, result.ppt_est, result.coherence_est,
                             result.ppt_err, result.coherence_err})},
  };
}

}  // namespace oamcv
