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

#include "corrnoise/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include <boost/math/special_functions/beta.hpp>

#include "corrnoise/rng.hpp"

namespace corrnoise {

namespace {

// NB CDF F(k) = I_{1-p}(r, k+1); survival via the complement for tail
// accuracy.
double nb_cdf(const NegBinParams& nb, long long k) {
  if (k < 0) return 0.0;
  return boost::math::ibeta(nb.r, static_cast<double>(k) + 1.0, 1.0 - nb.p);
}

double nb_survival(const NegBinParams& nb, long long k) {
  if (k < 0) return 1.0;
  return boost::math::ibetac(nb.r, static_cast<double>(k) + 1.0, 1.0 - nb.p);
}

// Mass of [a, b]; b < 0 encodes an unbounded upper end.
double nb_interval_mass(const NegBinParams& nb, long long a, long long b) {
  if (b >= 0 && b < a) return 0.0;
  const double upper = b < 0 ? 1.0 : nb_cdf(nb, b);
  return std::max(0.0, upper - nb_cdf(nb, a - 1));
}

struct PositiveRegion {
  bool empty = true;
  long long a = 0;
  long long b = -1;  // -1 developed as "unbounded"
  bool unbounded = false;
};

}  // namespace

const char* check_method_name(CheckMethod m) {
  switch (m) {
    case CheckMethod::exact:
      return "exact";
    case CheckMethod::composition:
      return "composition";
    case CheckMethod::monte_carlo:
      return "monte_carlo";
    case CheckMethod::auto_select:
      return "auto";
  }
  return "unknown";
}

double hockey_stick(const DiscreteDist& d1, const DiscreteDist& d2,
                    double epsilon) {
  if (!(epsilon >= 0.0)) throw ParamError("hockey_stick: epsilon must be >= 0");
  d1.check_normalized();
  d2.check_normalized();
  const double scale = std::exp(epsilon);
  KahanSum acc;
  for (long long v = d1.lo; v <= d1.hi(); ++v) {
    const double term = d1.at(v) - scale * d2.at(v);
    if (term > 0.0) acc.add(term);
  }
  acc.add(std::max(0.0, 1.0 - d1.total_mass()));
  return acc.value();
}

double shift_divergence(const DiscreteDist& d, long long k, double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw ParamError("shift_divergence: epsilon must be >= 0");
  }
  d.check_normalized();
  if (k == 0) return 0.0;
  const double scale = std::exp(epsilon);
  KahanSum acc;
  for (long long v = d.lo; v <= d.hi(); ++v) {
    // (k + D)(v) = D(v - k)
    const double term = d.at(v) - scale * d.at(v - k);
    if (term > 0.0) acc.add(term);
  }
  acc.add(std::max(0.0, 1.0 - d.total_mass()));
  return acc.value();
}

double nb_shift_divergence(const NegBinParams& nb, long long k,
                           double epsilon) {
  if (!(epsilon >= 0.0)) {
    throw ParamError("nb_shift_divergence: epsilon must be >= 0");
  }
  if (k == 0) return 0.0;
  if (nb.degenerate()) return 1.0;  // point masses at 0 and k are disjoint

  const auto log_ratio = [&nb, k](long long v) {
    // log pmf(v) - log pmf(v-k); both arguments nonnegative by construction.
    return nb_log_pmf(nb, v) - nb_log_pmf(nb, v - k);
  };
  const long long vstart = std::max(0LL, k);
  const double g0 = log_ratio(vstart) - epsilon;
  const double ginf =
      static_cast<double>(k) * std::log(nb.p) - epsilon;  // limit v -> inf

  // g(v) = log_ratio(v) - eps is monotone in v (strictly unless r == 1), so
  // the positive part of the divergence sum over v >= vstart is an interval.
  const bool decreasing = (nb.r > 1.0) == (k > 0);

  PositiveRegion region;
  if (decreasing || nb.r == 1.0) {
    if (ginf > 0.0) {
      region = {false, vstart, -1, true};
    } else if (g0 > 0.0) {
      // Find the last v with g(v) > 0 by exponential bracket + bisection.
      long long lo = vstart, hi = vstart + 1;
      while (log_ratio(hi) - epsilon > 0.0) {
        lo = hi;
        hi = vstart + 2 * (hi - vstart);
        if (hi - vstart > (1LL << 48)) break;
      }
      while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (log_ratio(mid) - epsilon > 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      region = {false, vstart, lo, false};
    }
  } else {  // increasing toward ginf
    if (ginf > 0.0) {
      if (g0 > 0.0) {
        region = {false, vstart, -1, true};
      } else {
        long long lo = vstart, hi = vstart + 1;
        while (log_ratio(hi) - epsilon <= 0.0) {
          lo = hi;
          hi = vstart + 2 * (hi - vstart);
          if (hi - vstart > (1LL << 48)) break;
        }
        while (hi - lo > 1) {
          const long long mid = lo + (hi - lo) / 2;
          if (log_ratio(mid) - epsilon <= 0.0) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        region = {false, hi, -1, true};
      }
    }
  }

  double result = k > 0 ? nb_cdf(nb, k - 1) : 0.0;  // head mass, D(v-k) = 0
  if (!region.empty) {
    const double s1 = region.unbounded
                          ? nb_survival(nb, region.a - 1)
                          : nb_interval_mass(nb, region.a, region.b);
    const double s2 = region.unbounded
                          ? nb_survival(nb, region.a - 1 - k)
                          : nb_interval_mass(nb, region.a - k, region.b - k);
    result += s1 - std::exp(epsilon) * s2;
  }
  return std::max(0.0, result);
}

DpCheckReport dp_check_noise_addition(const DiscreteDist& d,
                                      long long delta_sum, double epsilon) {
  if (delta_sum < 1) {
    throw ParamError("dp_check_noise_addition: Delta must be >= 1");
  }
  DpCheckReport report;
  report.epsilon = epsilon;
  report.method = CheckMethod::exact;
  report.worst_shift = 0;
  for (long long k = -delta_sum; k <= delta_sum; ++k) {
    const double div = shift_divergence(d, k, epsilon);
    if (div > report.delta_bound) {
      report.delta_bound = div;
      report.worst_shift = k;
    }
  }
  return report;
}

DpCheckReport dp_check_noise_addition(const NegBinParams& nb,
                                      long long delta_sum, double epsilon) {
  if (delta_sum < 1) {
    throw ParamError("dp_check_noise_addition: Delta must be >= 1");
  }
  DpCheckReport report;
  report.epsilon = epsilon;
  report.method = CheckMethod::exact;
  report.worst_shift = 0;
  for (long long k = -delta_sum; k <= delta_sum; ++k) {
    const double div = nb_shift_divergence(nb, k, epsilon);
    if (div > report.delta_bound) {
      report.delta_bound = div;
      report.worst_shift = k;
    }
  }
  return report;
}

double composition_bound(const std::vector<ShiftedFactor>& factors,
                         const std::vector<double>& epsilon_alloc) {
  if (factors.size() != epsilon_alloc.size()) {
    throw ConfigError("composition_bound: allocation length mismatch");
  }
  KahanSum acc;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (!(epsilon_alloc[i] >= 0.0)) {
      throw ConfigError("composition_bound: negative epsilon allocation");
    }
    acc.add(shift_divergence(factors[i].dist, factors[i].shift,
                             epsilon_alloc[i]));
  }
  return acc.value();
}

double product_divergence_exact(const std::vector<ShiftedFactor>& factors,
                                double epsilon, std::size_t state_cap) {
  if (factors.empty()) return 0.0;
  std::size_t states = 1;
  for (const auto& f : factors) {
    f.dist.check_normalized();
    if (states > state_cap / f.dist.size()) {
      throw CapacityError(
          "product_divergence_exact: joint support exceeds cap; use "
          "composition_bound or the Monte-Carlo estimate");
    }
    states *= f.dist.size();
  }
  const double scale = std::exp(epsilon);
  const std::size_t n = factors.size();
  // Enumerate the support box of the shifted product P; points outside it
  // contribute nothing since P = 0 there.
  std::vector<long long> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = factors[i].dist.lo + factors[i].shift;
  }
  KahanSum acc;
  std::vector<long long> idx(n, 0);
  while (true) {
    double p = 1.0, q = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const long long vi = v[i] + idx[i];
      p *= factors[i].dist.at(vi - factors[i].shift);
      if (p == 0.0) break;
      q *= factors[i].dist.at(vi);
    }
    if (p > 0.0) {
      const double term = p - scale * q;
      if (term > 0.0) acc.add(term);
    }
    // odometer increment
    std::size_t pos = 0;
    while (pos < n) {
      if (++idx[pos] < static_cast<long long>(factors[pos].dist.size())) break;
      idx[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  double tail_total = 1.0;
  for (const auto& f : factors) tail_total *= f.dist.total_mass();
  acc.add(std::max(0.0, 1.0 - tail_total));
  return acc.value();
}

namespace {

struct PairEval {
  double value = 0.0;
  CheckMethod method = CheckMethod::exact;
  bool certified = true;
};

// Monte-Carlo estimate of d_eps(prod(NB_i + s_i) || prod NB_i) by sampling
// the shifted product and averaging [1 - e^eps * Q/P]_+.
double mc_product_divergence(const std::vector<const NegBinParams*>& nbs,
                             const std::vector<long long>& shifts,
                             double epsilon, long long samples,
                             std::uint64_t seed) {
  Rng rng = make_rng(seed);
  KahanSum acc;
  for (long long t = 0; t < samples; ++t) {
    double llr = 0.0;  // log Q(x) - log P(x)
    bool q_zero = false;
    for (std::size_t i = 0; i < nbs.size(); ++i) {
      const long long z = nb_sample(*nbs[i], rng);
      const long long x = z + shifts[i];
      if (x < 0) {
        q_zero = true;
        break;
      }
      llr += nb_log_pmf(*nbs[i], x) - nb_log_pmf(*nbs[i], z);
    }
    const double term = q_zero ? 1.0 : 1.0 - std::exp(epsilon + llr);
    if (term > 0.0) acc.add(term);
  }
  return acc.value() / static_cast<double>(samples);
}

}  // namespace

DpCheckReport linear_query_check(
    const std::vector<std::vector<long long>>& columns,
    const std::vector<NegBinParams>& noise, double epsilon,
    const LinearQueryOptions& options) {
  if (columns.empty()) throw ConfigError("linear_query_check: no columns");
  const std::size_t rows = noise.size();
  if (rows == 0) throw ParamError("linear_query_check: empty index set");
  for (const auto& col : columns) {
    if (col.size() != rows) {
      throw ConfigError("linear_query_check: column/noise length mismatch");
    }
  }
  if (!options.tprime.empty() && options.tprime.size() != rows) {
    throw ConfigError("linear_query_check: tprime length mismatch");
  }

  DpCheckReport report;
  report.epsilon = epsilon;
  report.method = CheckMethod::exact;

  // Caches shared across column pairs: truncations per row and composition
  // terms per (row, shift, eps_i).
  std::map<std::size_t, DiscreteDist> trunc_cache;
  std::map<std::tuple<std::size_t, long long, double>, double> comp_cache;
  const auto truncated = [&](std::size_t i) -> const DiscreteDist& {
    auto it = trunc_cache.find(i);
    if (it == trunc_cache.end()) {
      it = trunc_cache.emplace(i, truncate_nb(noise[i], options.tail_tol))
               .first;
    }
    return it->second;
  };

  bool any_composition = false;
  bool any_mc = false;
  std::uint64_t mc_stream = 0;

  for (std::size_t a = 0; a < columns.size(); ++a) {
    for (std::size_t b = a + 1; b < columns.size(); ++b) {
      std::vector<std::size_t> nz;
      for (std::size_t i = 0; i < rows; ++i) {
        if (columns[a][i] != columns[b][i]) nz.push_back(i);
      }
      if (nz.empty()) continue;  // identical columns, divergence 0

      for (int orientation = 0; orientation < 2; ++orientation) {
        std::vector<long long> shifts(nz.size());
        for (std::size_t j = 0; j < nz.size(); ++j) {
          const std::size_t i = nz[j];
          shifts[j] = columns[a][i] - columns[b][i];
          if (orientation == 1) shifts[j] = -shifts[j];
        }

        CheckMethod method = options.method;
        if (method == CheckMethod::auto_select) {
          // Generous analytic support estimate first, so oversized factors
          // are never truncated just to be measured.
          const double z = std::sqrt(2.0 * std::log(1.0 / options.tail_tol)) +
                           6.0;
          double states_est = 1.0;
          for (std::size_t j = 0; j < nz.size(); ++j) {
            const double sd = std::sqrt(noise[nz[j]].variance());
            states_est *= 2.0 * z * sd + 32.0;
          }
          bool fits = states_est <= static_cast<double>(options.exact_state_cap);
          if (fits) {
            std::size_t states = 1;
            for (std::size_t j = 0; j < nz.size() && fits; ++j) {
              const auto& d = truncated(nz[j]);
              if (states > options.exact_state_cap / d.size()) {
                fits = false;
              } else {
                states *= d.size();
              }
            }
          }
          method = fits ? CheckMethod::exact : CheckMethod::composition;
        }

        PairEval eval;
        eval.method = method;
        switch (method) {
          case CheckMethod::exact: {
            std::vector<ShiftedFactor> factors;
            factors.reserve(nz.size());
            for (std::size_t j = 0; j < nz.size(); ++j) {
              factors.push_back(ShiftedFactor{truncated(nz[j]), shifts[j]});
            }
            eval.value = product_divergence_exact(factors, epsilon,
                                                  options.exact_state_cap);
            break;
          }
          case CheckMethod::composition: {
            any_composition = true;
            double weight_sum = 0.0;
            std::vector<double> weights(nz.size());
            for (std::size_t j = 0; j < nz.size(); ++j) {
              const double w =
                  options.tprime.empty()
                      ? static_cast<double>(std::llabs(shifts[j]))
                      : static_cast<double>(std::llabs(shifts[j])) /
                            options.tprime[nz[j]];
              weights[j] = w;
              weight_sum += w;
            }
            // Allocation must sum to at most eps; rescale if the shifts are
            // not dominated by tprime.
            const double norm = std::max(1.0, weight_sum);
            const double unit = options.tprime.empty() ? weight_sum : norm;
            KahanSum acc;
            for (std::size_t j = 0; j < nz.size(); ++j) {
              const double eps_j = epsilon * weights[j] / unit;
              // d(D + s || D) = d(D || D - s), so the per-factor term for
              // the shifted-vs-unshifted orientation uses -shift.
              const auto key = std::make_tuple(nz[j], -shifts[j], eps_j);
              auto it = comp_cache.find(key);
              if (it == comp_cache.end()) {
                it = comp_cache
                         .emplace(key, nb_shift_divergence(noise[nz[j]],
                                                           -shifts[j], eps_j))
                         .first;
              }
              acc.add(it->second);
            }
            eval.value = acc.value();
            break;
          }
          case CheckMethod::monte_carlo: {
            any_mc = true;
            std::vector<const NegBinParams*> nbs(nz.size());
            for (std::size_t j = 0; j < nz.size(); ++j) nbs[j] = &noise[nz[j]];
            eval.value = mc_product_divergence(
                nbs, shifts, epsilon, options.mc_samples,
                derive_seed(options.mc_seed, mc_stream++));
            eval.certified = false;
            break;
          }
          case CheckMethod::auto_select:
            break;  // unreachable
        }

        if (eval.value > report.delta_bound) {
          report.delta_bound = eval.value;
          report.method = eval.method;
          report.worst_columns =
              std::make_pair(static_cast<int>(a), static_cast<int>(b));
        }
      }
    }
  }
  if (any_mc) {
    report.certified = false;
    report.method = CheckMethod::monte_carlo;
  } else if (any_composition && report.method == CheckMethod::exact &&
             report.delta_bound == 0.0) {
    report.method = CheckMethod::composition;
  }
  return report;
}

}  // namespace corrnoise
