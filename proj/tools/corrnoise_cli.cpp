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

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corrnoise/baselines.hpp"
#include "corrnoise/calibration.hpp"
#include "corrnoise/divergence.hpp"
#include "corrnoise/harness.hpp"
#include "corrnoise/realsum.hpp"

namespace {

using namespace corrnoise;

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw IoError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_calibrate(double epsilon, double delta, double gamma, int delta_levels,
                  long long n, double share, bool no_tprime_opt, int refine,
                  std::uint64_t seed, const std::string& out) {
  CalibrationOptions options;
  options.epsilon1_share = share;
  options.use_tprime_optimizer = !no_tprime_opt;
  options.refine_budget = refine;
  options.seed = seed;
  const CalibrationReport report =
      dsum_params(epsilon, delta, gamma, delta_levels, n, options);
  Output output(out);
  write_calibration(output.stream(), report);
  for (const auto& warning : report.warnings) {
    std::cerr << "warning: " << warning << '\n';
  }
  if (!report.certified) {
    std::cerr << "warning: emitted parameters are not certified\n";
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out) {
  const SweepConfig config = SweepConfig::parse_file(config_path);
  const std::vector<SweepRow> rows = run_sweep(config);
  Output output(out);
  write_sweep_csv(output.stream(), rows);
  return 0;
}

int cmd_real(const std::string& data_path, const std::string& column,
             double clamp, const std::vector<int>& levels, double epsilon,
             double delta, double zeta, long long trials, std::uint64_t seed,
             const std::string& out) {
  const IngestResult ingest = ingest_column(data_path, column, clamp);
  std::cerr << "ingest: kept " << ingest.kept << " rows, dropped "
            << ingest.dropped << '\n';
  if (ingest.values.empty()) throw IoError("real: no usable rows");
  const std::vector<SweepRow> rows = real_sweep(
      ingest.values, levels, epsilon, delta, zeta, trials, seed, clamp);
  Output output(out);
  write_sweep_csv(output.stream(), rows);
  return 0;
}

int cmd_gap(double single_eps, int grid_points, const std::string& out) {
  std::vector<double> grid;
  if (single_eps > 0.0) {
    grid.push_back(single_eps);
  } else {
    grid.reserve(static_cast<std::size_t>(grid_points));
    for (int i = 1; i <= grid_points; ++i) {
      grid.push_back(static_cast<double>(i) / grid_points);
    }
  }
  const auto rows = optimality_gap_table(grid);
  Output output(out);
  write_gap_csv(output.stream(), rows);
  return 0;
}

int cmd_verify(int delta_max) {
  bool ok = true;

  // Atom-system exactness across the whole Delta range.
  for (int delta = 1; delta <= delta_max; ++delta) {
    const AtomSystem sys = build_right_inverse(delta);
    const SystemReport report = verify_system(sys);
    if (!report.pass()) {
      std::cout << "FAIL atom-system Delta=" << delta << '\n';
      ok = false;
    }
  }
  std::cout << (ok ? "PASS" : "FAIL") << " atom-system Delta=1.."
            << delta_max << '\n';

  // The scalar NB mechanism passes its own divergence check.
  for (int delta_levels : {1, 5}) {
    const NegBinParams nb = nb_scalar_params(1.0, 1e-6, delta_levels);
    const DpCheckReport report =
        dp_check_noise_addition(nb, delta_levels, 1.0);
    const bool pass = report.delta_bound <= 1e-6;
    std::cout << (pass ? "PASS" : "FAIL") << " nb-scalar Delta="
              << delta_levels << " delta_bound=" << report.delta_bound << '\n';
    ok = ok && pass;
  }

  // The two divergence routes agree.
  {
    const NegBinParams nb(2.0, 0.6);
    const DiscreteDist trunc = truncate_nb(nb, 1e-14);
    double max_gap = 0.0;
    for (long long k : {-2LL, -1LL, 1LL, 2LL}) {
      const double fast = nb_shift_divergence(nb, k, 0.4);
      const double generic = shift_divergence(trunc, k, 0.4);
      max_gap = std::max(max_gap, std::fabs(fast - generic));
    }
    const bool pass = max_gap <= 1e-9;
    std::cout << (pass ? "PASS" : "FAIL")
              << " divergence-route-agreement gap=" << max_gap << '\n';
    ok = ok && pass;
  }

  // A small calibrated instance certifies end to end.
  {
    const CalibrationReport report = dsum_params(1.0, 1e-6, 0.1, 2, 1000);
    std::cout << (report.certified ? "PASS" : "FAIL")
              << " calibration-certificate Delta=2 hat="
              << report.cert_hat.delta_bound
              << " atoms=" << report.cert_atoms.delta_bound << '\n';
    ok = ok && report.certified;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated-noise shuffle-model summation harness"};
  app.require_subcommand(1);

  std::string out;
  std::string format = "csv";
  app.add_option("--out", out, "write output to file instead of stdout");
  app.add_option("--format", format, "output format (csv)")
      ->check(CLI::IsMember({"csv"}));

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "emit a calibration file");
  double epsilon = 1.0, delta = 1e-6, gamma = 0.1, zeta = 0.25, share = 0.5;
  double clamp = 400.0;
  int delta_levels = 1, refine = 0, grid_points = 100;
  long long n = 1000000, trials = 1000;
  std::uint64_t seed = 0;
  bool no_tprime_opt = false;
  calibrate->add_option("--eps", epsilon, "privacy epsilon")->required();
  calibrate->add_option("--delta", delta, "privacy delta")->required();
  calibrate->add_option("--gamma", gamma, "central-noise budget fraction");
  calibrate->add_option("--delta-levels", delta_levels, "summation Delta")
      ->required();
  calibrate->add_option("--n", n, "number of users")->required();
  calibrate->add_option("--share", share, "epsilon1 share in [0.5, 0.9]");
  calibrate->add_flag("--no-tprime-opt", no_tprime_opt,
                      "use the fallback t' = 2t");
  calibrate->add_option("--refine", refine, "refinement search budget");
  calibrate->add_option("--seed", seed, "random seed");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a sweep from a config file");
  std::string config_path;
  sweep->add_option("--config", config_path, "sweep config file")->required();

  // real
  auto* real = app.add_subcommand("real", "census-style real summation");
  std::string data_path, column = "value";
  std::vector<int> levels = {20, 50, 100, 200};
  real->add_option("--data", data_path, "CSV data file")->required();
  real->add_option("--column", column, "column name");
  real->add_option("--clamp", clamp, "clamp maximum (original units)");
  real->add_option("--levels", levels, "discretization levels")
      ->delimiter(',');
  real->add_option("--eps", epsilon, "privacy epsilon");
  real->add_option("--delta", delta, "privacy delta");
  real->add_option("--zeta", zeta, "accuracy slack zeta");
  real->add_option("--trials", trials, "Monte-Carlo trials");
  real->add_option("--seed", seed, "random seed");

  // gap
  auto* gap = app.add_subcommand("gap", "Laplace vs Discrete Laplace table");
  double gap_eps = 0.0;
  gap->add_option("--eps", gap_eps, "single epsilon (else a grid over (0,1])");
  gap->add_option("--grid", grid_points, "grid size over (0,1]");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "run the atom-system and DP-oracle suites");
  int delta_max = 256;
  verify->add_option("--delta-max", delta_max, "largest Delta to verify");

  CLI11_PARSE(app, argc, argv);

  try {
    if (calibrate->parsed()) {
      return cmd_calibrate(epsilon, delta, gamma, delta_levels, n, share,
                           no_tprime_opt, refine, seed, out);
    }
    if (sweep->parsed()) return cmd_sweep(config_path, out);
    if (real->parsed()) {
      return cmd_real(data_path, column, clamp, levels, epsilon, delta, zeta,
                      trials, seed, out);
    }
    if (gap->parsed()) return cmd_gap(gap_eps, grid_points, out);
    if (verify->parsed()) return cmd_verify(delta_max);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
