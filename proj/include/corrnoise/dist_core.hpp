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

#ifndef CORRNOISE_DIST_CORE_HPP_
#define CORRNOISE_DIST_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "corrnoise/errors.hpp"
#include "corrnoise/rng.hpp"

namespace corrnoise {

// Negative binomial NB(r, p): mass C(k + r - 1, k) (1 - p)^r p^k at k >= 0.
// r = 0 is the degenerate point mass at 0; it is what the "noise disabled"
// test mode of the protocol runs on.
struct NegBinParams {
  double r = 1.0;
  double p = 0.5;

  NegBinParams() = default;
  NegBinParams(double r_in, double p_in);

  double mean() const { return r * p / (1.0 - p); }
  double variance() const { return r * p / ((1.0 - p) * (1.0 - p)); }
  bool degenerate() const { return r == 0.0; }
};

// Discrete Laplace DLap(s): mass (1 - e^-s) / (1 + e^-s) * e^-s|k|.
struct DLapParams {
  double s = 1.0;

  DLapParams() = default;
  explicit DLapParams(double s_in);

  double variance() const;
};

// Finite truncated pmf on a contiguous integer range [lo, lo + size - 1].
// At most tail_tol probability mass lies outside the stored support.
struct DiscreteDist {
  long long lo = 0;
  std::vector<double> masses;
  double tail_tol = 0.0;

  long long hi() const { return lo + static_cast<long long>(masses.size()) - 1; }
  std::size_t size() const { return masses.size(); }
  double at(long long v) const {
    if (v < lo || v > hi()) return 0.0;
    return masses[static_cast<std::size_t>(v - lo)];
  }
  double total_mass() const;
  // Throws ConfigError if masses are negative or the total is not within
  // [1 - tail_tol, 1] (up to float slack).
  void check_normalized() const;

  static DiscreteDist point_mass(long long v);
};

// Compensated (Kahan) accumulator for long pmf sums.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

double nb_log_pmf(const NegBinParams& params, long long k);
double nb_pmf(const NegBinParams& params, long long k);

// Gamma(r)-mixed Poisson, so fractional r (as in NB(r/n, p)) is exact in
// distribution.
long long nb_sample(const NegBinParams& params, Rng& rng);

// NB(r, p)_{/n} = NB(r / n, p).
NegBinParams nb_divide(const NegBinParams& params, long long n);

double dlap_pmf(const DLapParams& params, long long k);

inline constexpr double kDefaultTailTol = 1e-12;
inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 22;

// Smallest contiguous support around `center` whose excluded mass is at most
// tail_tol. Throws TruncationError if the mass cannot be collected within
// max_support points.
DiscreteDist truncate(const std::function<double(long long)>& pmf,
                      double tail_tol, long long center,
                      std::size_t max_support = kDefaultSupportCap);

DiscreteDist truncate_nb(const NegBinParams& params,
                         double tail_tol = kDefaultTailTol,
                         std::size_t max_support = kDefaultSupportCap);
DiscreteDist truncate_dlap(const DLapParams& params,
                           double tail_tol = kDefaultTailTol,
                           std::size_t max_support = kDefaultSupportCap);

// Distribution of the independent sum; support bounds add. Throws
// CapacityError if the result support exceeds size_cap.
DiscreteDist convolve(const DiscreteDist& a, const DiscreteDist& b,
                      std::size_t size_cap = std::size_t{1} << 23);

// Distribution of sign * z + shift, sign in {-1, +1}.
DiscreteDist negate_shift(const DiscreteDist& d, int sign, long long shift);

// Total variation distance; the (tiny) truncated tails are counted in full as
// an upper-bound correction.
double tv_distance(const DiscreteDist& a, const DiscreteDist& b);

// Single-parameter-set NB sampler with a precomputed fast path. For
// small-mean, zero-heavy regimes (the per-user NB(r/n, p) shares) it uses
// plain inverse-CDF inversion; otherwise the Gamma-Poisson mixture. Both are
// exact in distribution.
class NbSampler {
 public:
  explicit NbSampler(const NegBinParams& params);

  long long operator()(Rng& rng) const;
  const NegBinParams& params() const { return params_; }

 private:
  NegBinParams params_;
  double p0_ = 1.0;  // mass at zero
  bool inversion_ = false;
};

}  // namespace corrnoise

#endif  // CORRNOISE_DIST_CORE_HPP_
