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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "corrnoise/dist_core.hpp"
#include "stats_util.hpp"

using namespace corrnoise;

TEST_CASE("nb_pmf matches closed forms") {
  CHECK(nb_pmf(NegBinParams(1, 0.5), 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(nb_pmf(NegBinParams(1, 0.5), 2) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(nb_pmf(NegBinParams(2, 0.3), 1) ==
        doctest::Approx(0.294).epsilon(1e-12));
  CHECK(nb_pmf(NegBinParams(2, 0.3), -1) == 0.0);
  // r = 0 is the degenerate point mass used by the noise-disabled mode.
  CHECK(nb_pmf(NegBinParams(0, 0.5), 0) == 1.0);
  CHECK(nb_pmf(NegBinParams(0, 0.5), 3) == 0.0);
}

TEST_CASE("nb_pmf matches the product-form recurrence") {
  // pmf(k+1)/pmf(k) = p (k + r) / (k + 1)
  for (const auto& [r, p] : std::vector<std::pair<double, double>>{
           {0.5, 0.6}, {1.0, 0.5}, {2.75, 0.3}, {37.5, 0.81873}}) {
    const NegBinParams nb(r, p);
    double mass = nb_pmf(nb, 0);
    for (long long k = 0; k <= 1000; ++k) {
      CHECK(nb_pmf(nb, k) == doctest::Approx(mass).epsilon(1e-12));
      mass *= p * (static_cast<double>(k) + r) / (static_cast<double>(k) + 1);
    }
  }
}

TEST_CASE("nb_pmf log-space evaluation survives large k") {
  const double mass = nb_pmf(NegBinParams(2.0, 0.999), 1000000);
  CHECK(std::isfinite(mass));
  CHECK(mass >= 0.0);
}

TEST_CASE("NegBinParams validation") {
  CHECK_THROWS_AS(NegBinParams(-1.0, 0.5), ParamError);
  CHECK_THROWS_AS(NegBinParams(1.0, 0.0), ParamError);
  CHECK_THROWS_AS(NegBinParams(1.0, 1.0), ParamError);
  CHECK_THROWS_AS(DLapParams(0.0), ParamError);
  CHECK_THROWS_AS(DLapParams(-2.0), ParamError);
}

TEST_CASE("nb_divide") {
  const NegBinParams d3 = nb_divide(NegBinParams(3, 0.4), 3);
  CHECK(d3.r == doctest::Approx(1.0));
  CHECK(d3.p == doctest::Approx(0.4));
  const NegBinParams identity = nb_divide(NegBinParams(1, 0.9), 1);
  CHECK(identity.r == doctest::Approx(1.0));
  CHECK(identity.p == doctest::Approx(0.9));
  const NegBinParams quarters = nb_divide(NegBinParams(2, 0.5), 4);
  CHECK(quarters.r == doctest::Approx(0.5));
  CHECK_THROWS_AS(nb_divide(NegBinParams(1, 0.5), 0), ParamError);
}

TEST_CASE("dlap_pmf") {
  CHECK(dlap_pmf(DLapParams(1.0), 0) == doctest::Approx(0.46212).epsilon(1e-4));
  CHECK(dlap_pmf(DLapParams(std::log(2.0)), 1) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  for (long long k = -5; k <= 5; ++k) {
    CHECK(dlap_pmf(DLapParams(0.7), k) ==
          doctest::Approx(dlap_pmf(DLapParams(0.7), -k)));
  }
  // Mass sums to 1 over a wide window.
  KahanSum acc;
  for (long long k = -200; k <= 200; ++k) acc.add(dlap_pmf(DLapParams(1.0), k));
  CHECK(acc.value() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncate basics") {
  const DiscreteDist point = truncate(
      [](long long k) { return k == 0 ? 1.0 : 0.0; }, 1e-12, 0);
  CHECK(point.lo == 0);
  CHECK(point.size() == 1);
  CHECK(point.masses[0] == 1.0);

  const DiscreteDist dlap = truncate_dlap(DLapParams(1.0), 1e-12);
  CHECK(dlap.total_mass() >= 1.0 - 1e-12);
  CHECK(dlap.lo < 0);
  CHECK(dlap.hi() > 0);

  const DiscreteDist nb = truncate_nb(NegBinParams(1, 0.5), 1e-6);
  CHECK(nb.lo == 0);
  CHECK(nb.hi() >= 19);
  CHECK(nb.total_mass() >= 1.0 - 1e-6);

  CHECK_THROWS_AS(
      truncate([](long long) { return 0.0; }, 1e-12, 0, 1000),
      TruncationError);
}

TEST_CASE("truncate_nb agrees with the generic truncation") {
  for (const auto& [r, p] : std::vector<std::pair<double, double>>{
           {0.5, 0.4}, {2.0, 0.5}, {10.0, 0.9}}) {
    const NegBinParams nb(r, p);
    const DiscreteDist fast = truncate_nb(nb, 1e-10);
    const DiscreteDist generic = truncate(
        [&nb](long long k) { return nb_pmf(nb, k); }, 1e-10,
        std::llround(nb.mean()));
    CHECK(tv_distance(fast, generic) < 1e-9);
  }
}

TEST_CASE("convolve identities") {
  const DiscreteDist d = truncate_nb(NegBinParams(1, 0.5), 1e-12);
  const DiscreteDist with_delta0 = convolve(DiscreteDist::point_mass(0), d);
  CHECK(tv_distance(with_delta0, d) < 3e-12);

  const DiscreteDist d3 =
      convolve(DiscreteDist::point_mass(1), DiscreteDist::point_mass(2));
  CHECK(d3.lo == 3);
  CHECK(d3.size() == 1);

  CHECK_THROWS_AS(convolve(d, d, 4), CapacityError);
}

TEST_CASE("convolution realizes infinite divisibility") {
  // NB(0.5, 0.4) + NB(0.5, 0.4) = NB(1, 0.4), pointwise.
  const DiscreteDist half = truncate_nb(NegBinParams(0.5, 0.4), 1e-12);
  const DiscreteDist sum = convolve(half, half);
  const NegBinParams whole(1.0, 0.4);
  for (long long v = sum.lo; v <= sum.hi(); ++v) {
    CHECK(sum.at(v) == doctest::Approx(nb_pmf(whole, v)).epsilon(1e-10));
  }

  // n-fold: NB(2/4, 0.5) four times vs NB(2, 0.5) in total variation.
  DiscreteDist acc = truncate_nb(nb_divide(NegBinParams(2, 0.5), 4), 1e-12);
  const DiscreteDist share = acc;
  for (int i = 1; i < 4; ++i) acc = convolve(acc, share);
  CHECK(tv_distance(acc, truncate_nb(NegBinParams(2, 0.5), 1e-12)) < 1e-8);
}

TEST_CASE("negate_shift") {
  const DiscreteDist shifted =
      negate_shift(DiscreteDist::point_mass(0), 1, 5);
  CHECK(shifted.lo == 5);

  const DiscreteDist d = truncate_nb(NegBinParams(2, 0.5), 1e-12);
  const DiscreteDist twice = negate_shift(negate_shift(d, -1, 0), -1, 0);
  CHECK(tv_distance(twice, d) < 3e-12);

  const DiscreteDist dlap = truncate_dlap(DLapParams(1.0), 1e-12);
  CHECK(tv_distance(negate_shift(dlap, -1, 0), dlap) < 1e-12);

  CHECK_THROWS_AS(negate_shift(d, 2, 0), ParamError);
}

TEST_CASE("nb_sample moments") {
  Rng rng = make_rng(7);
  const NegBinParams nb(2, 0.5);
  const long long trials = 100000;
  double sum = 0.0;
  for (long long i = 0; i < trials; ++i) {
    sum += static_cast<double>(nb_sample(nb, rng));
  }
  const double mean = sum / static_cast<double>(trials);
  const double sigma = std::sqrt(nb.variance());
  CHECK(std::fabs(mean - nb.mean()) <=
        3.0 * sigma / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("nb_sample goodness of fit, both sampler paths") {
  // Fractional r exercises the divisibility requirement; the grid covers the
  // inversion path (small mean) and the Gamma-Poisson path (large mean).
  const long long trials = 100000;
  int grid_index = 0;
  for (const auto& [r, p] : std::vector<std::pair<double, double>>{
           {0.5, 0.6}, {1.0, 0.5}, {0.25, 0.8}, {12.0, 0.7}, {50.0, 0.9}}) {
    const NegBinParams nb(r, p);
    Rng rng = make_rng(1000 + grid_index++);
    std::map<long long, long long> observed;
    for (long long i = 0; i < trials; ++i) ++observed[nb_sample(nb, rng)];
    const double pvalue = testing::chi_square_pvalue(
        observed, [&nb](long long k) { return nb_pmf(nb, k); }, trials);
    INFO("r=", r, " p=", p, " pvalue=", pvalue);
    CHECK(pvalue > 0.01);
  }
}

TEST_CASE("NbSampler matches nb_sample in distribution") {
  const long long trials = 100000;
  int grid_index = 0;
  for (const auto& [r, p] : std::vector<std::pair<double, double>>{
           {0.002, 0.5},    // zero-heavy per-user share, inversion path
           {0.0061, 0.999},  // tiny r with extreme p, Gamma-Poisson path
           {2.0, 0.5}}) {
    const NegBinParams nb(r, p);
    const NbSampler sampler(nb);
    Rng rng = make_rng(2000 + grid_index++);
    std::map<long long, long long> observed;
    for (long long i = 0; i < trials; ++i) ++observed[sampler(rng)];
    const double pvalue = testing::chi_square_pvalue(
        observed, [&nb](long long k) { return nb_pmf(nb, k); }, trials);
    INFO("r=", r, " p=", p, " pvalue=", pvalue);
    CHECK(pvalue > 0.01);
  }
}

TEST_CASE("stored mass invariant") {
  for (const auto& [r, p] : std::vector<std::pair<double, double>>{
           {0.5, 0.6}, {3.0, 0.9}, {37.5, 0.8187}}) {
    const DiscreteDist d = truncate_nb(NegBinParams(r, p), 1e-12);
    const double total = d.total_mass();
    CHECK(total >= 1.0 - 1e-12);
    CHECK(total <= 1.0 + 1e-9);
    CHECK_NOTHROW(d.check_normalized());
  }
}
