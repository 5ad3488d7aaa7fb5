// Copyright 2026 The corrnoise Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "corrnoise/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "corrnoise/baselines.hpp"
#include "corrnoise/calibration.hpp"
#include "corrnoise/realsum.hpp"

namespace corrnoise {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

std::string trim(const std::string& text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.10g", value);
  return buffer;
}

std::string format_cell(const std::optional<double>& value) {
  if (!value.has_value() || !std::isfinite(*value)) return "";
  return format_double(*value);
}

// Draws the per-bucket RAPPOR fragment counts directly: each bucket count is
// Binom(u_j, 1-f) + Binom(n - u_j, f) with independent buckets.
std::vector<long long> rappor_bucket_counts(const std::vector<long long>& hist,
                                            long long n, double f, Rng& rng) {
  std::vector<long long> counts(hist.size());
  for (std::size_t j = 0; j < hist.size(); ++j) {
    long long c = 0;
    if (hist[j] > 0) {
      std::binomial_distribution<long long> setbits(hist[j], 1.0 - f);
      c += setbits(rng);
    }
    if (n - hist[j] > 0) {
      std::binomial_distribution<long long> flips(n - hist[j], f);
      c += flips(rng);
    }
    counts[j] = c;
  }
  return counts;
}

struct Cell {
  std::string algorithm;
  long long n;
  int delta_levels;
  double epsilon;
  double delta;
};

SweepRow run_cell(const Cell& cell, const SweepConfig& config,
                  std::uint64_t cell_index) {
  SweepRow row;
  row.algorithm = cell.algorithm;
  row.n = cell.n;
  row.delta_levels = cell.delta_levels;
  row.epsilon = cell.epsilon;
  row.delta = cell.delta;

  BaselineOptions baseline_options;
  baseline_options.epsilon_star_fraction = config.epsilon_star_fraction;

  const int delta_bits = ceil_log2(cell.delta_levels);
  const bool empirical = config.mode != SweepMode::closed_form;

  // Closed-form columns, plus whatever per-algorithm state the Monte-Carlo
  // pass needs.
  std::optional<CalibrationReport> calibration;
  std::optional<RapporParams> rappor;
  std::optional<IkosParams> ikos;
  try {
    if (cell.algorithm == "corrnoise") {
      CalibrationOptions options;
      options.epsilon1_share = config.epsilon1_share;
      options.seed = config.seed;
      calibration = dsum_params(cell.epsilon, cell.delta,
                                1.0 - config.epsilon_star_fraction,
                                cell.delta_levels, cell.n, options);
      row.rmse_closed = std::sqrt(calibration->predicted_mse);
      row.messages_expected = calibration->predicted_messages;
      row.bits_expected = calibration->predicted_bits;
      row.certified = calibration->certified;
      if (!row.certified) {
        std::cerr << "corrnoise cell (n=" << cell.n
                  << ", Delta=" << cell.delta_levels
                  << "): calibration not certified (method "
                  << check_method_name(calibration->cert_atoms.method) << ")\n";
      }
    } else if (cell.algorithm == "dlap-central") {
      row.rmse_closed = dlap_rmse(cell.epsilon, cell.delta_levels);
      row.messages_expected = 1.0;
      row.bits_expected = static_cast<double>(delta_bits);
      row.certified = true;
    } else if (cell.algorithm == "ikos") {
      ikos = IkosParams::make(cell.n, cell.delta_levels, cell.epsilon,
                              cell.delta);
      row.rmse_closed = dlap_rmse(cell.epsilon, cell.delta_levels);
      row.messages_expected = static_cast<double>(ikos->g);
      row.bits_expected = static_cast<double>(ikos->bits_per_user());
      row.certified = true;
    } else if (cell.algorithm == "rappor") {
      rappor = rappor_calibrate(cell.epsilon, cell.delta, cell.delta_levels,
                                cell.n);
      row.rmse_closed = rappor_rmse(rappor->f, cell.delta_levels, cell.n);
      row.messages_expected = rappor_expected_fragments(*rappor, true);
      row.bits_expected = *row.messages_expected * delta_bits;
      row.certified = false;  // the calibration check is optimistic
    } else {
      throw ConfigError("run_sweep: unknown algorithm '" + cell.algorithm +
                        "'");
    }
  } catch (const InfeasibleError&) {
    row.certified = false;  // flagged row; run continues
    return row;
  }

  if (!empirical) return row;

  // Monte-Carlo pass: `trials` independent rounds against the configured
  // input generator.
  const bool uniform_inputs = config.input == "uniform";
  KahanSum squared_error;
  for (long long trial = 0; trial < config.trials; ++trial) {
    Rng rng = make_rng(derive_seed(config.seed, cell_index,
                                   static_cast<std::uint64_t>(trial)));
    std::vector<int> inputs(static_cast<std::size_t>(cell.n));
    if (uniform_inputs) {
      std::uniform_int_distribution<int> gen(0, cell.delta_levels);
      for (auto& x : inputs) x = gen(rng);
    } else {
      std::fill(inputs.begin(), inputs.end(), cell.delta_levels);
    }
    long long truth = 0;
    for (int x : inputs) truth += x;

    double estimate = 0.0;
    if (cell.algorithm == "corrnoise") {
      estimate = static_cast<double>(
          run_dsum_round(inputs, calibration->params, rng));
    } else if (cell.algorithm == "dlap-central") {
      estimate = static_cast<double>(
          central_dlap(truth, cell.epsilon, cell.delta_levels, rng));
    } else if (cell.algorithm == "ikos") {
      // Large rounds use the exact noise-equivalence: the recovered sum is
      // truth + DLap(eps/Delta) whenever it stays inside the window.
      if (cell.n * ikos->g <= 200'000) {
        estimate = static_cast<double>(ikos_round(inputs, *ikos, rng));
      } else {
        estimate = static_cast<double>(
            truth + nb_sample(ikos->noise, rng) - nb_sample(ikos->noise, rng));
      }
    } else if (cell.algorithm == "rappor") {
      std::vector<long long> hist(static_cast<std::size_t>(cell.delta_levels),
                                  0);
      for (int x : inputs) {
        if (x != 0) ++hist[static_cast<std::size_t>(x - 1)];
      }
      const auto counts = rappor_bucket_counts(hist, cell.n, rappor->f, rng);
      estimate = rappor_analyze(counts, cell.n, rappor->f);
    }
    const double err = estimate - static_cast<double>(truth);
    squared_error.add(err * err);
  }
  row.rmse_empirical =
      std::sqrt(squared_error.value() / static_cast<double>(config.trials));
  return row;
}

}  // namespace

SweepConfig SweepConfig::parse(std::istream& is) {
  SweepConfig config;
  std::string line;
  int line_number = 0;
  while (std::getline(is, line)) {
    ++line_number;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const std::size_t space = text.find_first_of(" \t");
    if (space == std::string::npos) {
      throw ParseError("config line " + std::to_string(line_number) +
                       ": expected 'key value'");
    }
    const std::string key = text.substr(0, space);
    const std::string value = trim(text.substr(space + 1));
    try {
      if (key == "algorithms") {
        config.algorithms.clear();
        for (const auto& part : split(value, ',')) {
          config.algorithms.push_back(trim(part));
        }
      } else if (key == "n") {
        config.n_grid.clear();
        for (const auto& part : split(value, ',')) {
          config.n_grid.push_back(std::stoll(trim(part)));
        }
      } else if (key == "delta_levels") {
        config.delta_levels_grid.clear();
        for (const auto& part : split(value, ',')) {
          config.delta_levels_grid.push_back(std::stoi(trim(part)));
        }
      } else if (key == "epsilon") {
        config.epsilon_grid.clear();
        for (const auto& part : split(value, ',')) {
          config.epsilon_grid.push_back(std::stod(trim(part)));
        }
      } else if (key == "delta") {
        config.delta_grid.clear();
        for (const auto& part : split(value, ',')) {
          config.delta_grid.push_back(std::stod(trim(part)));
        }
      } else if (key == "trials") {
        config.trials = std::stoll(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "mode") {
        if (value == "closed_form") {
          config.mode = SweepMode::closed_form;
        } else if (value == "monte_carlo") {
          config.mode = SweepMode::monte_carlo;
        } else if (value == "both") {
          config.mode = SweepMode::both;
        } else {
          throw ParseError("config: unknown mode '" + value + "'");
        }
      } else if (key == "epsilon_star_fraction") {
        config.epsilon_star_fraction = std::stod(value);
      } else if (key == "epsilon1_share") {
        config.epsilon1_share = std::stod(value);
      } else if (key == "input") {
        if (value != "worst_case" && value != "uniform") {
          throw ParseError("config: unknown input generator '" + value + "'");
        }
        config.input = value;
      } else {
        throw ParseError("config line " + std::to_string(line_number) +
                         ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("config line " + std::to_string(line_number) +
                       ": bad value for '" + key + "'");
    }
  }
  config.validate();
  return config;
}

SweepConfig SweepConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  return parse(is);
}

void SweepConfig::validate() const {
  if (algorithms.empty() || n_grid.empty() || delta_levels_grid.empty() ||
      epsilon_grid.empty() || delta_grid.empty()) {
    throw ConfigError("SweepConfig: every grid must be nonempty");
  }
  if (trials < 1) throw ConfigError("SweepConfig: trials must be >= 1");
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  std::vector<SweepRow> rows;
  std::uint64_t cell_index = 0;
  for (const auto& algorithm : config.algorithms) {
    for (long long n : config.n_grid) {
      for (int delta_levels : config.delta_levels_grid) {
        for (double epsilon : config.epsilon_grid) {
          for (double delta : config.delta_grid) {
            rows.push_back(run_cell(
                {algorithm, n, delta_levels, epsilon, delta}, config,
                cell_index));
            ++cell_index;
          }
        }
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "algorithm,n,delta_levels,epsilon,delta,rmse_closed,rmse_empirical,"
        "messages_expected,bits_expected,certified\n";
  for (const auto& row : rows) {
    os << row.algorithm << ',' << row.n << ',' << row.delta_levels << ','
       << format_double(row.epsilon) << ',' << format_double(row.delta) << ','
       << format_cell(row.rmse_closed) << ',' << format_cell(row.rmse_empirical)
       << ',' << format_cell(row.messages_expected) << ','
       << format_cell(row.bits_expected) << ',' << (row.certified ? 1 : 0)
       << '\n';
  }
}

IngestResult ingest_column(const std::string& path, const std::string& column,
                           double clamp_max) {
  if (!(clamp_max > 0.0)) {
    throw ParamError("ingest_column: clamp_max must be > 0");
  }
  std::ifstream is(path);
  if (!is) throw IoError("ingest_column: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) {
    throw IoError("ingest_column: empty file " + path);
  }
  const auto header = split(trim(line), ',');
  std::size_t index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == column) {
      index = i;
      break;
    }
  }
  if (index == header.size()) {
    throw IoError("ingest_column: column '" + column + "' not found");
  }
  IngestResult result;
  long long row_number = 1;
  while (std::getline(is, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (index >= cells.size()) {
      throw ParseError("ingest_column: row " + std::to_string(row_number) +
                       " has too few columns");
    }
    double value;
    try {
      std::size_t consumed = 0;
      const std::string cell = trim(cells[index]);
      value = std::stod(cell, &consumed);
      if (consumed != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParseError("ingest_column: non-numeric cell at row " +
                       std::to_string(row_number));
    }
    if (value > clamp_max) {
      ++result.dropped;
    } else {
      result.values.push_back(value / clamp_max);
      ++result.kept;
    }
  }
  return result;
}

std::vector<SweepRow> real_sweep(std::span<const double> data,
                                 const std::vector<int>& levels, double epsilon,
                                 double delta, double zeta, long long trials,
                                 std::uint64_t seed, double clamp_max) {
  if (data.empty()) throw ConfigError("real_sweep: empty data");
  for (double x : data) {
    if (!(x >= 0.0) || !(x <= 1.0)) {
      throw InputError("real_sweep: data must lie in [0,1]");
    }
  }
  const long long n = static_cast<long long>(data.size());
  double truth = 0.0;
  for (double x : data) truth += x;

  const std::vector<std::string> algorithms = {
      "corrnoise", "ikos", "rappor", "dlap-central", "discretized"};
  std::vector<SweepRow> rows;
  std::uint64_t cell_index = 0;
  for (int level : levels) {
    if (level < 1) throw ConfigError("real_sweep: levels must be >= 1");
    // Rounding statistics for this level: variance and the fraction of
    // users whose rounded value is nonzero.
    double round_var = 0.0;
    double nonzero_fraction = 0.0;
    for (double x : data) {
      const double scaled = x * level;
      const double frac = scaled - std::floor(scaled);
      round_var += frac * (1.0 - frac);
      if (std::floor(scaled) > 0.0) {
        nonzero_fraction += 1.0;
      } else {
        nonzero_fraction += frac;  // P(round up to 1)
      }
    }
    nonzero_fraction /= static_cast<double>(n);
    const double level_sq = static_cast<double>(level) * level;
    const int delta_bits = ceil_log2(level);

    CalibrationOptions options;
    options.seed = seed;
    RealSumPipeline pipeline(n, epsilon, delta, zeta, level, options);
    const RapporParams rappor =
        rappor_calibrate(epsilon, delta, level, n);
    const IkosParams ikos = IkosParams::make(n, level, epsilon, delta);

    for (const auto& algorithm : algorithms) {
      SweepRow row;
      row.algorithm = algorithm;
      row.n = n;
      row.delta_levels = level;
      row.epsilon = epsilon;
      row.delta = delta;

      double mech_var = 0.0;  // variance of the discretized-sum mechanism
      if (algorithm == "corrnoise") {
        mech_var = pipeline.calibration().predicted_mse;
        row.messages_expected =
            expected_messages(pipeline.calibration().params, nonzero_fraction);
        row.bits_expected =
            *row.messages_expected * message_bit_length(level);
        row.certified = pipeline.calibration().certified;
      } else if (algorithm == "ikos") {
        mech_var = dlap_rmse(epsilon, level) * dlap_rmse(epsilon, level);
        row.messages_expected = static_cast<double>(ikos.g);
        row.bits_expected = static_cast<double>(ikos.bits_per_user());
        row.certified = true;
      } else if (algorithm == "rappor") {
        const double r = rappor_rmse(rappor.f, level, n);
        mech_var = r * r;
        row.messages_expected =
            (1.0 - rappor.f) * nonzero_fraction +
            rappor.f * (level - nonzero_fraction);
        row.bits_expected = *row.messages_expected * delta_bits;
        row.certified = false;
      } else if (algorithm == "dlap-central") {
        mech_var = dlap_rmse(epsilon, level) * dlap_rmse(epsilon, level);
        row.messages_expected = 1.0;
        row.bits_expected = static_cast<double>(delta_bits);
        row.certified = true;
      } else {  // discretized, non-private
        mech_var = 0.0;
        row.messages_expected = 1.0;
        row.bits_expected = static_cast<double>(delta_bits);
        row.certified = false;
      }
      row.rmse_closed =
          std::sqrt((mech_var + round_var) / level_sq) * clamp_max;

      KahanSum squared_error;
      for (long long trial = 0; trial < trials; ++trial) {
        Rng rng = make_rng(derive_seed(seed, cell_index,
                                       static_cast<std::uint64_t>(trial)));
        double estimate = 0.0;
        if (algorithm == "corrnoise") {
          estimate = pipeline.run(data, rng);
        } else {
          // Shared randomized rounding step.
          long long rounded_sum = 0;
          std::vector<int> rounded(data.size());
          for (std::size_t i = 0; i < data.size(); ++i) {
            rounded[i] = randomized_round(data[i], level, rng);
            rounded_sum += rounded[i];
          }
          if (algorithm == "ikos") {
            if (n * ikos.g <= 200'000) {
              estimate = static_cast<double>(ikos_round(rounded, ikos, rng)) /
                         level;
            } else {
              estimate = static_cast<double>(rounded_sum +
                                             nb_sample(ikos.noise, rng) -
                                             nb_sample(ikos.noise, rng)) /
                         level;
            }
          } else if (algorithm == "rappor") {
            std::vector<long long> hist(static_cast<std::size_t>(level), 0);
            for (int y : rounded) {
              if (y != 0) ++hist[static_cast<std::size_t>(y - 1)];
            }
            const auto counts = rappor_bucket_counts(hist, n, rappor.f, rng);
            estimate = rappor_analyze(counts, n, rappor.f) / level;
          } else if (algorithm == "dlap-central") {
            estimate = static_cast<double>(
                           central_dlap(rounded_sum, epsilon, level, rng)) /
                       level;
          } else {  // discretized
            estimate = static_cast<double>(rounded_sum) / level;
          }
        }
        const double err = (estimate - truth) * clamp_max;
        squared_error.add(err * err);
      }
      row.rmse_empirical =
          std::sqrt(squared_error.value() / static_cast<double>(trials));
      rows.push_back(std::move(row));
      ++cell_index;
    }
  }
  return rows;
}

std::vector<GapRow> optimality_gap_table(std::span<const double> epsilon_grid) {
  std::vector<GapRow> rows;
  rows.reserve(epsilon_grid.size());
  for (double epsilon : epsilon_grid) {
    if (!(epsilon > 0.0)) {
      throw ParamError("optimality_gap_table: epsilon must be > 0");
    }
    GapRow row;
    row.epsilon = epsilon;
    row.rmse_laplace = std::sqrt(2.0) / epsilon;
    row.rmse_dlap = dlap_rmse(epsilon, 1);
    row.ratio = row.rmse_laplace / row.rmse_dlap;
    rows.push_back(row);
  }
  return rows;
}

void write_gap_csv(std::ostream& os, std::span<const GapRow> rows) {
  os << "epsilon,rmse_laplace,rmse_dlap,ratio\n";
  for (const auto& row : rows) {
    os << format_double(row.epsilon) << ',' << format_double(row.rmse_laplace)
       << ',' << format_double(row.rmse_dlap) << ','
       << format_double(row.ratio) << '\n';
  }
}

}  // namespace corrnoise
