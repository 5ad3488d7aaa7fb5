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

#ifndef CORRNOISE_TESTS_STATS_UTIL_HPP_
#define CORRNOISE_TESTS_STATS_UTIL_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace corrnoise::testing {

// Pearson chi-square goodness-of-fit p-value for integer samples against an
// exact pmf. Adjacent support points are merged until every bin's expected
// count is at least 5; the leftover probability mass forms a catch-all bin.
inline double chi_square_pvalue(const std::map<long long, long long>& observed,
                                const std::function<double(long long)>& pmf,
                                long long num_samples) {
  long long lo = observed.begin()->first;
  long long hi = observed.rbegin()->first;

  struct Bin {
    double expected = 0.0;
    long long count = 0;
  };
  std::vector<Bin> bins;
  Bin current;
  double covered = 0.0;
  for (long long v = lo; v <= hi; ++v) {
    const double p = pmf(v);
    covered += p;
    current.expected += p * static_cast<double>(num_samples);
    auto it = observed.find(v);
    if (it != observed.end()) current.count += it->second;
    if (current.expected >= 5.0) {
      bins.push_back(current);
      current = Bin{};
    }
  }
  // Catch-all bin: everything outside [lo, hi] plus the unfinished bin.
  current.expected += (1.0 - covered) * static_cast<double>(num_samples);
  if (!bins.empty() && current.expected < 5.0) {
    bins.back().expected += current.expected;
    bins.back().count += current.count;
  } else {
    bins.push_back(current);
  }
  if (bins.size() < 2) return 1.0;

  double stat = 0.0;
  for (const auto& bin : bins) {
    const double diff = static_cast<double>(bin.count) - bin.expected;
    stat += diff * diff / bin.expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(bins.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_slope(lx, ly);
}

}  // namespace corrnoise::testing

#endif  // CORRNOISE_TESTS_STATS_UTIL_HPP_
