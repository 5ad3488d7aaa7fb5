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

#ifndef CORRNOISE_REALSUM_HPP_
#define CORRNOISE_REALSUM_HPP_

#include <span>
#include <vector>

#include "corrnoise/calibration.hpp"
#include "corrnoise/protocol.hpp"

namespace corrnoise {

// How a Delta-summation round is simulated. The central oracle draws the
// full-size noise once and produces a count vector with exactly the same
// distribution as the per-user protocol (the shuffle/central equivalence is
// verified by the coupling tests); it is the fast path for large n.
enum class SimulateMode { per_user, central_oracle, auto_select };

// Delta = ceil((epsilon / 2) * sqrt(n / zeta)).
int real_sum_delta(double epsilon, double zeta, long long n);

// One Delta-summation round over integer inputs with the given params,
// returning the analyzer output.
long long run_dsum_round(std::span<const int> inputs,
                         const ProtocolParams& params, Rng& rng,
                         SimulateMode mode = SimulateMode::auto_select);

// Real summation: randomized rounding onto {0..Delta}, the Delta-summation
// pipeline at gamma = zeta/2, and rescaling by 1/Delta.
class RealSumPipeline {
 public:
  RealSumPipeline(long long n, double epsilon, double delta, double zeta,
                  const CalibrationOptions& options = {});
  // Same pipeline but with a caller-chosen discretization level (the census
  // experiments sweep Delta directly).
  RealSumPipeline(long long n, double epsilon, double delta, double zeta,
                  int delta_levels, const CalibrationOptions& options);

  int delta() const { return calibration_.params.delta; }
  const CalibrationReport& calibration() const { return calibration_; }
  ProtocolParams& params() { return calibration_.params; }

  double run(std::span<const double> xs, Rng& rng,
             SimulateMode mode = SimulateMode::auto_select) const;

 private:
  CalibrationReport calibration_;
};

double real_round_trip(std::span<const double> xs, double epsilon,
                       double delta, double zeta, Rng& rng,
                       SimulateMode mode = SimulateMode::auto_select);

// 1-sparse vector summation: an independent real-summation pipeline per
// coordinate at privacy (epsilon/2, delta/2); the simulator keeps coordinate
// tags out of band and only accounts for their bits.
std::vector<double> sparse_round_trip(
    const std::vector<std::vector<double>>& vectors, double epsilon,
    double delta, double zeta, Rng& rng,
    SimulateMode mode = SimulateMode::auto_select);

// ceil(log2 d) tag bits plus the per-coordinate message length.
int sparse_message_bits(int dimensions, int delta_levels);

}  // namespace corrnoise

#endif  // CORRNOISE_REALSUM_HPP_
