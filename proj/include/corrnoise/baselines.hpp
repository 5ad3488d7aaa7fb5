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

#ifndef CORRNOISE_BASELINES_HPP_
#define CORRNOISE_BASELINES_HPP_

#include <string>
#include <vector>

#include "corrnoise/dist_core.hpp"
#include "corrnoise/rng.hpp"

namespace corrnoise {

// Central-model Discrete Laplace mechanism: true_sum + DLap(eps/Delta),
// sampled as the difference of two NB(1, e^{-eps/Delta}) draws.
long long central_dlap(long long true_sum, double epsilon, int delta_sum,
                       Rng& rng);

// RMSE of the Discrete Laplace mechanism at parameter eps/Delta.
double dlap_rmse(double epsilon, int delta_sum);

// IKOS split-and-mix: each user sends g additive shares of its (noised)
// value over Z_q. The per-user noise is the same infinitely divisible DLap
// share construction as the main protocol, so the aggregate error matches
// the Discrete Laplace mechanism exactly.
struct IkosParams {
  int g = 3;
  unsigned long long q = 0;
  long long n = 0;
  int delta_sum = 0;
  NegBinParams noise;  // full-size NB; per-user share is NB(r/n, p) twice
  bool noise_disabled = false;

  // q: smallest power of two >= n * Delta + 1; g: configurable, default
  // max(3, ceil(log(n Delta / delta) / log n) + 1).
  static IkosParams make(long long n, int delta_sum, double epsilon,
                         double delta, int g_override = 0);
  int bits_per_user() const;
};

std::vector<unsigned long long> ikos_randomize(int x, const IkosParams& params,
                                               Rng& rng);
// Sums the residues mod q and recenters into the length-q window centered at
// n * Delta / 2.
long long ikos_analyze(const std::vector<unsigned long long>& residues,
                       long long n, int delta_sum, unsigned long long q);
// Convenience: a full round over all users.
long long ikos_round(const std::vector<int>& inputs, const IkosParams& params,
                     Rng& rng);

// Fragmented RAPPOR: one-hot encoding with per-bit flips, transmitting only
// the set coordinates as separate ceil(log2 Delta)-bit messages.
struct RapporParams {
  double f = 0.0;  // flip probability, < 0.5
  int delta_sum = 0;
};

// Returns the set coordinates (values in 1..Delta) after flipping.
std::vector<int> rappor_randomize(int x, const RapporParams& params, Rng& rng);
// Debiases per-bucket counts u_hat_j = (c_j - n f) / (1 - 2f) and returns
// sum_j j * u_hat_j.
double rappor_analyze(const std::vector<long long>& fragment_counts,
                      long long n, double f);
// Expected fragments for one user: (1-f) 1[x!=0] + f (Delta - 1[x!=0]).
double rappor_expected_fragments(const RapporParams& params, bool nonzero);

// Smallest flip probability passing the optimistic two-dataset check
// (all-zeros vs one-user-at-Delta); the divergence of the affected bucket is
// evaluated exactly on truncated binomial counts. The result is optimistic,
// not a DP certificate. Throws InfeasibleError if no f < 0.5 passes.
RapporParams rappor_calibrate(double epsilon, double delta, int delta_sum,
                              long long n);

// Closed-form RMSE of the debiased RAPPOR sum estimator. The per-bit
// variance is f(1-f) for set and unset bits alike, so the input histogram
// drops out.
double rappor_rmse(double f, int delta_sum, long long n);

struct BaselineOptions {
  double epsilon_star_fraction = 0.9;  // corrnoise: eps* = fraction * eps
  int ikos_g_override = 0;
};

// Closed-form RMSE by algorithm tag: "dlap-central", "ikos", "rappor",
// "corrnoise".
double baseline_rmse(const std::string& algorithm, long long n, double epsilon,
                     double delta, int delta_sum,
                     const BaselineOptions& options = {});

}  // namespace corrnoise

#endif  // CORRNOISE_BASELINES_HPP_
