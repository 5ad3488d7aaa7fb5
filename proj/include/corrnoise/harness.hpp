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

#ifndef CORRNOISE_HARNESS_HPP_
#define CORRNOISE_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corrnoise {

enum class SweepMode { closed_form, monte_carlo, both };

// Flat key-value experiment config; see the README for the schema.
struct SweepConfig {
  std::vector<std::string> algorithms;
  std::vector<long long> n_grid;
  std::vector<int> delta_levels_grid;
  std::vector<double> epsilon_grid;
  std::vector<double> delta_grid;
  long long trials = 1;
  std::uint64_t seed = 0;
  SweepMode mode = SweepMode::closed_form;
  double epsilon_star_fraction = 0.9;
  double epsilon1_share = 0.5;
  std::string input = "worst_case";  // or "uniform"

  static SweepConfig parse(std::istream& is);
  static SweepConfig parse_file(const std::string& path);
  void validate() const;
};

// One (algorithm, n, Delta, epsilon, delta) experiment record. Empty
// optionals render as empty CSV cells.
struct SweepRow {
  std::string algorithm;
  long long n = 0;
  int delta_levels = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::optional<double> rmse_closed;
  std::optional<double> rmse_empirical;
  std::optional<double> messages_expected;
  std::optional<double> bits_expected;
  bool certified = false;
};

std::vector<SweepRow> run_sweep(const SweepConfig& config);

// CSV schema (exact column order):
// algorithm,n,delta_levels,epsilon,delta,rmse_closed,rmse_empirical,
// messages_expected,bits_expected,certified
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

struct IngestResult {
  std::vector<double> values;  // scaled into [0, 1]
  long long kept = 0;
  long long dropped = 0;
};

// Parses a header CSV column, drops rows above clamp_max and divides the
// rest by clamp_max.
IngestResult ingest_column(const std::string& path, const std::string& column,
                           double clamp_max);

// The census-style real-summation experiment: per discretization level,
// empirical RMSE and bits/user for corrnoise, ikos, rappor, dlap-central and
// the non-private "discretized" baseline. RMSEs are reported in original
// units (scaled by clamp_max).
std::vector<SweepRow> real_sweep(std::span<const double> data,
                                 const std::vector<int>& levels, double epsilon,
                                 double delta, double zeta, long long trials,
                                 std::uint64_t seed, double clamp_max = 1.0);

struct GapRow {
  double epsilon = 0.0;
  double rmse_laplace = 0.0;
  double rmse_dlap = 0.0;
  double ratio = 0.0;
};

// Laplace (sqrt(2)/eps) vs Discrete Laplace (sqrt(2 e^-eps)/(1 - e^-eps))
// RMSE per epsilon.
std::vector<GapRow> optimality_gap_table(std::span<const double> epsilon_grid);
void write_gap_csv(std::ostream& os, std::span<const GapRow> rows);

}  // namespace corrnoise

#endif  // CORRNOISE_HARNESS_HPP_
