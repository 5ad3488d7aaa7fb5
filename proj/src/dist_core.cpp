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

#include "corrnoise/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace corrnoise {

namespace {

constexpr double kNormSlack = 1e-9;

void trim_zero_edges(long long& lo, std::vector<double>& masses) {
  std::size_t begin = 0;
  while (begin + 1 < masses.size() && masses[begin] == 0.0) ++begin;
  std::size_t end = masses.size();
  while (end > begin + 1 && masses[end - 1] == 0.0) --end;
  if (begin > 0 || end < masses.size()) {
    masses = std::vector<double>(masses.begin() + begin, masses.begin() + end);
    lo += static_cast<long long>(begin);
  }
}

}  // namespace

NegBinParams::NegBinParams(double r_in, double p_in) : r(r_in), p(p_in) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ParamError("NegBinParams: r must be >= 0, got " + std::to_string(r));
  }
  if (!(p > 0.0) || !(p < 1.0)) {
    throw ParamError("NegBinParams: p must be in (0,1), got " +
                     std::to_string(p));
  }
}

DLapParams::DLapParams(double s_in) : s(s_in) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ParamError("DLapParams: s must be > 0, got " + std::to_string(s));
  }
}

double DLapParams::variance() const {
  // DLap(s) = NB(1, e^-s) - NB(1, e^-s), so the variance is 2p/(1-p)^2.
  const double p = std::exp(-s);
  return 2.0 * p / ((1.0 - p) * (1.0 - p));
}

double DiscreteDist::total_mass() const {
  KahanSum acc;
  for (double m : masses) acc.add(m);
  return acc.value();
}

void DiscreteDist::check_normalized() const {
  if (masses.empty()) throw ConfigError("DiscreteDist: empty support");
  for (double m : masses) {
    if (!(m >= 0.0)) throw ConfigError("DiscreteDist: negative mass");
  }
  const double total = total_mass();
  if (total > 1.0 + kNormSlack || total < 1.0 - tail_tol - kNormSlack) {
    throw ConfigError("DiscreteDist: total mass " + std::to_string(total) +
                      " inconsistent with tail_tol " + std::to_string(tail_tol));
  }
}

DiscreteDist DiscreteDist::point_mass(long long v) {
  return DiscreteDist{v, {1.0}, 0.0};
}

double nb_log_pmf(const NegBinParams& params, long long k) {
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (params.degenerate()) {
    return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double kd = static_cast<double>(k);
  return std::lgamma(kd + params.r) - std::lgamma(params.r) -
         std::lgamma(kd + 1.0) + params.r * std::log1p(-params.p) +
         kd * std::log(params.p);
}

double nb_pmf(const NegBinParams& params, long long k) {
  if (k < 0) return 0.0;
  if (params.degenerate()) return k == 0 ? 1.0 : 0.0;
  return std::exp(nb_log_pmf(params, k));
}

long long nb_sample(const NegBinParams& params, Rng& rng) {
  if (params.degenerate()) return 0;
  std::gamma_distribution<double> gamma(params.r, params.p / (1.0 - params.p));
  const double lambda = gamma(rng);
  if (!(lambda > 0.0)) return 0;
  std::poisson_distribution<long long> poisson(lambda);
  return poisson(rng);
}

NegBinParams nb_divide(const NegBinParams& params, long long n) {
  if (n < 1) throw ParamError("nb_divide: n must be >= 1");
  NegBinParams out = params;
  out.r = params.r / static_cast<double>(n);
  return out;
}

double dlap_pmf(const DLapParams& params, long long k) {
  const double e = std::exp(-params.s);
  return (1.0 - e) / (1.0 + e) *
         std::exp(-params.s * static_cast<double>(std::llabs(k)));
}

DiscreteDist truncate(const std::function<double(long long)>& pmf,
                      double tail_tol, long long center,
                      std::size_t max_support) {
  if (!(tail_tol > 0.0)) throw ParamError("truncate: tail_tol must be > 0");
  long long lo = center;
  long long hi = center;
  // Ring buffer semantics are not needed: grow a deque-like vector outward.
  std::vector<double> right{pmf(center)};
  std::vector<double> left;  // masses at center-1, center-2, ... (reversed)
  KahanSum acc;
  acc.add(right[0]);
  double next_left = pmf(center - 1);
  double next_right = pmf(center + 1);
  while (acc.value() < 1.0 - tail_tol) {
    if (left.size() + right.size() >= max_support) {
      throw TruncationError(
          "truncate: pmf mass not collected within max_support points");
    }
    // Greedy: take the larger of the two frontier masses; on a tie (e.g.
    // both zero while crossing a gap) extend both sides.
    if (next_left > next_right) {
      left.push_back(next_left);
      acc.add(next_left);
      --lo;
      next_left = pmf(lo - 1);
    } else if (next_right > next_left) {
      right.push_back(next_right);
      acc.add(next_right);
      ++hi;
      next_right = pmf(hi + 1);
    } else {
      left.push_back(next_left);
      acc.add(next_left);
      --lo;
      next_left = pmf(lo - 1);
      right.push_back(next_right);
      acc.add(next_right);
      ++hi;
      next_right = pmf(hi + 1);
    }
  }
  std::vector<double> masses;
  masses.reserve(left.size() + right.size());
  for (auto it = left.rbegin(); it != left.rend(); ++it) masses.push_back(*it);
  for (double m : right) masses.push_back(m);
  trim_zero_edges(lo, masses);
  return DiscreteDist{lo, std::move(masses), tail_tol};
}

DiscreteDist truncate_nb(const NegBinParams& params, double tail_tol,
                         std::size_t max_support) {
  if (params.degenerate()) return DiscreteDist::point_mass(0);
  if (!(tail_tol > 0.0)) throw ParamError("truncate_nb: tail_tol must be > 0");
  // Same greedy expansion as the generic truncate, but with the ratio
  // recurrence pmf(k+1) = pmf(k) * p (k + r) / (k + 1) instead of a log-pmf
  // evaluation per point.
  long long lo = std::max(0LL, std::llround(params.mean()));
  long long hi = lo;
  std::vector<double> right{nb_pmf(params, lo)};
  std::vector<double> left;
  KahanSum acc;
  acc.add(right[0]);
  const auto step_up = [&params](double mass, long long k) {
    return mass * params.p * (static_cast<double>(k) + params.r) /
           (static_cast<double>(k) + 1.0);
  };
  const auto step_down = [&params](double mass, long long k) {
    return mass * static_cast<double>(k) /
           (params.p * (static_cast<double>(k) - 1.0 + params.r));
  };
  double next_right = step_up(right[0], hi);
  double next_left = lo > 0 ? step_down(right[0], lo) : 0.0;
  while (acc.value() < 1.0 - tail_tol) {
    if (left.size() + right.size() >= max_support ||
        (next_right == 0.0 && next_left == 0.0)) {
      throw TruncationError("truncate_nb: mass not collected within budget");
    }
    if (next_right >= next_left) {
      right.push_back(next_right);
      acc.add(next_right);
      ++hi;
      next_right = step_up(right.back(), hi);
    } else {
      left.push_back(next_left);
      acc.add(next_left);
      --lo;
      next_left = lo > 0 ? step_down(left.back(), lo) : 0.0;
    }
  }
  std::vector<double> masses;
  masses.reserve(left.size() + right.size());
  for (auto it = left.rbegin(); it != left.rend(); ++it) masses.push_back(*it);
  for (double m : right) masses.push_back(m);
  trim_zero_edges(lo, masses);
  return DiscreteDist{lo, std::move(masses), tail_tol};
}

DiscreteDist truncate_dlap(const DLapParams& params, double tail_tol,
                           std::size_t max_support) {
  return truncate([&params](long long k) { return dlap_pmf(params, k); },
                  tail_tol, 0, max_support);
}

DiscreteDist convolve(const DiscreteDist& a, const DiscreteDist& b,
                      std::size_t size_cap) {
  a.check_normalized();
  b.check_normalized();
  const std::size_t out_size = a.size() + b.size() - 1;
  if (out_size > size_cap) {
    throw CapacityError("convolve: result support " + std::to_string(out_size) +
                        " exceeds cap " + std::to_string(size_cap));
  }
  std::vector<long double> acc(out_size, 0.0L);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double ai = a.masses[i];
    if (ai == 0.0L) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      acc[i + j] += ai * static_cast<long double>(b.masses[j]);
    }
  }
  std::vector<double> masses(out_size);
  for (std::size_t i = 0; i < out_size; ++i) {
    masses[i] = static_cast<double>(acc[i]);
  }
  return DiscreteDist{a.lo + b.lo, std::move(masses),
                      a.tail_tol + b.tail_tol};
}

DiscreteDist negate_shift(const DiscreteDist& d, int sign, long long shift) {
  if (sign != 1 && sign != -1) {
    throw ParamError("negate_shift: sign must be +1 or -1");
  }
  DiscreteDist out;
  out.tail_tol = d.tail_tol;
  out.masses = d.masses;
  if (sign == 1) {
    out.lo = d.lo + shift;
  } else {
    std::reverse(out.masses.begin(), out.masses.end());
    out.lo = -d.hi() + shift;
  }
  return out;
}

double tv_distance(const DiscreteDist& a, const DiscreteDist& b) {
  const long long lo = std::min(a.lo, b.lo);
  const long long hi = std::max(a.hi(), b.hi());
  KahanSum acc;
  for (long long v = lo; v <= hi; ++v) {
    acc.add(std::fabs(a.at(v) - b.at(v)));
  }
  const double tail_a = std::max(0.0, 1.0 - a.total_mass());
  const double tail_b = std::max(0.0, 1.0 - b.total_mass());
  return 0.5 * (acc.value() + tail_a + tail_b);
}

NbSampler::NbSampler(const NegBinParams& params) : params_(params) {
  if (params_.degenerate()) {
    p0_ = 1.0;
    inversion_ = true;
    return;
  }
  p0_ = std::exp(params_.r * std::log1p(-params_.p));
  // Inversion walks O(mean) conditional steps; hand large means to the
  // O(1) Gamma-Poisson path.
  inversion_ = p0_ >= 0.3 && params_.mean() <= 32.0;
}

long long NbSampler::operator()(Rng& rng) const {
  if (params_.degenerate()) return 0;
  if (!inversion_) return nb_sample(params_, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (u < p0_) return 0;
  double mass = p0_;
  double cum = p0_;
  long long k = 0;
  // pmf(k+1) = pmf(k) * p * (k + r) / (k + 1)
  while (k < (1LL << 30)) {
    mass *= params_.p * (static_cast<double>(k) + params_.r) /
            (static_cast<double>(k) + 1.0);
    cum += mass;
    ++k;
    if (u < cum) return k;
    if (mass == 0.0) break;  // accumulated the entire representable tail
  }
  return k;
}

}  // namespace corrnoise
