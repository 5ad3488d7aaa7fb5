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

#include "corrnoise/realsum.hpp"

#include <cmath>

namespace corrnoise {

int real_sum_delta(double epsilon, double zeta, long long n) {
  if (!(epsilon > 0.0)) throw ParamError("real_sum_delta: epsilon must be > 0");
  if (!(zeta > 0.0) || !(zeta < 0.5)) {
    throw ParamError("real_sum_delta: zeta must lie in (0, 1/2)");
  }
  if (n < 1) throw ParamError("real_sum_delta: n must be >= 1");
  const double value =
      (epsilon / 2.0) * std::sqrt(static_cast<double>(n) / zeta);
  return static_cast<int>(std::ceil(value));
}

long long run_dsum_round(std::span<const int> inputs,
                         const ProtocolParams& params, Rng& rng,
                         SimulateMode mode) {
  if (mode == SimulateMode::auto_select) {
    const double work = static_cast<double>(params.n) *
                        static_cast<double>(params.sys.atoms.size() + 2);
    mode = work > 2e5 ? SimulateMode::central_oracle : SimulateMode::per_user;
  }
  if (mode == SimulateMode::per_user) {
    return analyze(shuffle_round(inputs, params, rng));
  }
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(params.delta), 0);
  for (int x : inputs) {
    if (x < 0 || x > params.delta) {
      throw InputError("run_dsum_round: input outside {0..Delta}");
    }
    if (x != 0) ++h.counts[static_cast<std::size_t>(x - 1)];
  }
  return analyze(central_run(h, params, rng));
}

RealSumPipeline::RealSumPipeline(long long n, double epsilon, double delta,
                                 double zeta, const CalibrationOptions& options)
    : RealSumPipeline(n, epsilon, delta, zeta, real_sum_delta(epsilon, zeta, n),
                      options) {}

RealSumPipeline::RealSumPipeline(long long n, double epsilon, double delta,
                                 double zeta, int delta_levels,
                                 const CalibrationOptions& options) {
  if (!(zeta > 0.0) || !(zeta < 0.5)) {
    throw ParamError("RealSumPipeline: zeta must lie in (0, 1/2)");
  }
  calibration_ = dsum_params(epsilon, delta, zeta / 2.0, delta_levels, n,
                             options);
}

double RealSumPipeline::run(std::span<const double> xs, Rng& rng,
                            SimulateMode mode) const {
  const ProtocolParams& params = calibration_.params;
  if (static_cast<long long>(xs.size()) != params.n) {
    throw ConfigError("RealSumPipeline: |xs| must equal n");
  }
  std::vector<int> rounded(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    rounded[i] = randomized_round(xs[i], params.delta, rng);
  }
  const long long sum = run_dsum_round(rounded, params, rng, mode);
  return static_cast<double>(sum) / static_cast<double>(params.delta);
}

double real_round_trip(std::span<const double> xs, double epsilon,
                       double delta, double zeta, Rng& rng,
                       SimulateMode mode) {
  RealSumPipeline pipeline(static_cast<long long>(xs.size()), epsilon, delta,
                           zeta);
  return pipeline.run(xs, rng, mode);
}

std::vector<double> sparse_round_trip(
    const std::vector<std::vector<double>>& vectors, double epsilon,
    double delta, double zeta, Rng& rng, SimulateMode mode) {
  if (vectors.empty()) throw ConfigError("sparse_round_trip: no users");
  const std::size_t dims = vectors.front().size();
  if (dims == 0) throw ConfigError("sparse_round_trip: zero dimensions");
  for (const auto& v : vectors) {
    if (v.size() != dims) {
      throw ConfigError("sparse_round_trip: inconsistent dimensions");
    }
    int nonzero = 0;
    for (double value : v) {
      if (value != 0.0) ++nonzero;
      if (!(value >= 0.0) || !(value <= 1.0)) {
        throw InputError("sparse_round_trip: entries must lie in [0,1]");
      }
    }
    if (nonzero > 1) {
      throw InputError("sparse_round_trip: input vectors must be 1-sparse");
    }
  }
  // Each coordinate runs the real-summation pipeline at (eps/2, delta/2).
  RealSumPipeline pipeline(static_cast<long long>(vectors.size()),
                           epsilon / 2.0, delta / 2.0, zeta);
  std::vector<double> estimates(dims);
  std::vector<double> column(vectors.size());
  for (std::size_t j = 0; j < dims; ++j) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      column[i] = vectors[i][j];
    }
    estimates[j] = pipeline.run(column, rng, mode);
  }
  return estimates;
}

int sparse_message_bits(int dimensions, int delta_levels) {
  if (dimensions < 1) {
    throw ParamError("sparse_message_bits: dimensions must be >= 1");
  }
  return ceil_log2(dimensions) + message_bit_length(delta_levels);
}

}  // namespace corrnoise
