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

#ifndef CORRNOISE_DIVERGENCE_HPP_
#define CORRNOISE_DIVERGENCE_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "corrnoise/dist_core.hpp"

namespace corrnoise {

enum class CheckMethod { exact, composition, monte_carlo, auto_select };

const char* check_method_name(CheckMethod m);

// One coordinate of a shifted product distribution: dist + shift.
struct ShiftedFactor {
  DiscreteDist dist;
  long long shift = 0;
};

struct DpCheckReport {
  double epsilon = 0.0;
  double delta_bound = 0.0;
  CheckMethod method = CheckMethod::exact;
  // Monte-Carlo results are estimates, never certificates.
  bool certified = true;
  std::optional<long long> worst_shift;
  std::optional<std::pair<int, int>> worst_columns;
};

// Hockey-stick divergence d_eps(d1 || d2) = sum_v [d1(v) - e^eps d2(v)]_+.
// The truncated tail mass of d1 is added in full, so the result is a
// conservative upper bound on the divergence of the untruncated pair.
double hockey_stick(const DiscreteDist& d1, const DiscreteDist& d2,
                    double epsilon);

// d_eps(D || k + D).
double shift_divergence(const DiscreteDist& d, long long k, double epsilon);

// Exact d_eps(NB || k + NB) with closed tail sums: the NB likelihood ratio is
// monotone, so the positive part of the sum is an integer interval and the
// whole divergence reduces to a handful of CDF evaluations. No truncation
// error. Cross-checked against the DiscreteDist route in tests.
double nb_shift_divergence(const NegBinParams& nb, long long k,
                           double epsilon);

// Noise-addition DP check for Delta-summation: max over k in {-Delta..Delta}
// of the shift divergence, worst shift recorded.
DpCheckReport dp_check_noise_addition(const DiscreteDist& d, long long delta_sum,
                                      double epsilon);
DpCheckReport dp_check_noise_addition(const NegBinParams& nb,
                                      long long delta_sum, double epsilon);

// sum_i d_{eps_i}(dist_i || shift_i + dist_i): an upper bound on the product
// divergence at eps = sum eps_i.
double composition_bound(const std::vector<ShiftedFactor>& factors,
                         const std::vector<double>& epsilon_alloc);

// Exact divergence between the shifted product and the unshifted product by
// joint enumeration. Throws CapacityError when the joint support exceeds
// state_cap; callers should then fall back to composition_bound or the
// Monte-Carlo estimate.
double product_divergence_exact(const std::vector<ShiftedFactor>& factors,
                                double epsilon,
                                std::size_t state_cap = 10'000'000);

struct LinearQueryOptions {
  CheckMethod method = CheckMethod::auto_select;
  // Per-row domination weights; the composition route allocates
  // eps_i = eps * |shift_i| / tprime_i (falls back to proportional-to-|shift|
  // allocation when absent).
  std::vector<double> tprime;
  double tail_tol = 1e-12;
  std::size_t exact_state_cap = 10'000'000;
  long long mc_samples = 200'000;
  std::uint64_t mc_seed = 12345;
};

// DP check of the (NB_i)-noise addition mechanism for the Q-linear query
// problem. `columns` are the columns of Q (a zero column included by the
// caller); every unordered column pair is checked in both orientations and
// the maximum divergence is reported.
DpCheckReport linear_query_check(
    const std::vector<std::vector<long long>>& columns,
    const std::vector<NegBinParams>& noise, double epsilon,
    const LinearQueryOptions& options = {});

}  // namespace corrnoise

#endif  // CORRNOISE_DIVERGENCE_HPP_
