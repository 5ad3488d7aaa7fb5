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
#include <vector>

#include "corrnoise/divergence.hpp"
#include "corrnoise/rng.hpp"

using namespace corrnoise;

namespace {

DiscreteDist bernoulli(double p1) {
  return DiscreteDist{0, {1.0 - p1, p1}, 0.0};
}

}  // namespace

TEST_CASE("hockey_stick basics") {
  const DiscreteDist d = truncate_nb(NegBinParams(1, 0.5), 1e-12);
  CHECK(hockey_stick(d, d, 0.0) <= 2e-12);
  CHECK(hockey_stick(d, d, 1.0) <= 2e-12);

  CHECK(hockey_stick(DiscreteDist::point_mass(0), DiscreteDist::point_mass(1),
                     1.0) == doctest::Approx(1.0));

  // At eps = 0 the divergence is the total variation distance.
  CHECK(hockey_stick(bernoulli(0.5), bernoulli(0.25), 0.0) ==
        doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(hockey_stick(d, d, -0.5), ParamError);
}

TEST_CASE("hockey_stick is nonincreasing in epsilon") {
  const DiscreteDist d1 = truncate_nb(NegBinParams(2, 0.6), 1e-12);
  const DiscreteDist d2 = negate_shift(d1, 1, 2);
  double previous = 2.0;
  for (double eps : {0.0, 0.1, 0.3, 0.7, 1.5, 3.0}) {
    const double value = hockey_stick(d1, d2, eps);
    CHECK(value <= previous + 1e-15);
    previous = value;
  }
}

TEST_CASE("shift_divergence closed forms") {
  const DiscreteDist geo = truncate_nb(NegBinParams(1, 0.8), 1e-13);
  CHECK(shift_divergence(geo, 0, 0.5) == 0.0);
  // Only the k = 0 head term survives since e^0.3 * 0.8 > 1.
  CHECK(shift_divergence(geo, 1, 0.3) ==
        doctest::Approx(0.2).epsilon(1e-9));
  // Every term q p^k (1 - e^eps p) is nonpositive.
  CHECK(shift_divergence(geo, -1, 0.3) <= 1e-11);
}

TEST_CASE("shift_divergence is symmetric for symmetric distributions") {
  const DiscreteDist dlap = truncate_dlap(DLapParams(0.8), 1e-12);
  for (long long k : {1LL, 2LL, 3LL}) {
    CHECK(shift_divergence(dlap, k, 0.4) ==
          doctest::Approx(shift_divergence(dlap, -k, 0.4)).epsilon(1e-9));
  }
}

TEST_CASE("nb_shift_divergence agrees with the truncated route") {
  for (const auto& [r, p] : std::vector<std::pair<double, double>>{
           {0.5, 0.3}, {0.5, 0.8}, {1.0, 0.8}, {2.0, 0.6}, {37.5, 0.8187}}) {
    const NegBinParams nb(r, p);
    const DiscreteDist trunc = truncate_nb(nb, 1e-14);
    for (long long k : {-3LL, -2LL, -1LL, 1LL, 2LL, 3LL}) {
      for (double eps : {0.0, 0.3, 1.0}) {
        const double fast = nb_shift_divergence(nb, k, eps);
        const double generic = shift_divergence(trunc, k, eps);
        INFO("r=", r, " p=", p, " k=", k, " eps=", eps, " fast=", fast,
             " generic=", generic);
        CHECK(std::fabs(fast - generic) < 1e-9);
      }
    }
  }
  CHECK(nb_shift_divergence(NegBinParams(1, 0.8), 1, 0.3) ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("dp_check_noise_addition") {
  // Symmetry forces a worst shift of +-1 for Discrete Laplace.
  const DiscreteDist dlap = truncate_dlap(DLapParams(1.0), 1e-12);
  const DpCheckReport report = dp_check_noise_addition(dlap, 1, 1.0);
  CHECK(std::llabs(report.worst_shift.value()) == 1);

  // Pure DP of Discrete Laplace at matched epsilon, up to truncation.
  for (int delta_sum : {1, 2}) {
    const double eps = 1.0;
    const double tail = 1e-9;
    const DiscreteDist d =
        truncate_dlap(DLapParams(eps / delta_sum), tail);
    const DpCheckReport pure = dp_check_noise_addition(d, delta_sum, eps);
    CHECK(pure.delta_bound <= tail * (2 * delta_sum + 1));
  }

  // The geometric example again, through the report path.
  const DiscreteDist geo = truncate_nb(NegBinParams(1, 0.8), 1e-13);
  const DpCheckReport geo_report = dp_check_noise_addition(geo, 1, 0.3);
  CHECK(geo_report.delta_bound == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(geo_report.worst_shift.value() == 1);

  // Thm-style scalar NB parameters certify at (1, 1e-6) for Delta = 1.
  const NegBinParams nb(3.0 * (1.0 + std::log(1e6)), std::exp(-0.2));
  const DpCheckReport nb_report = dp_check_noise_addition(nb, 1, 1.0);
  CHECK(nb_report.delta_bound <= 1e-6);

  CHECK_THROWS_AS(dp_check_noise_addition(geo, 0, 1.0), ParamError);
}

TEST_CASE("composition_bound") {
  const DiscreteDist geo = truncate_nb(NegBinParams(1, 0.8), 1e-13);
  std::vector<ShiftedFactor> factors = {{geo, 0}, {geo, 0}};
  CHECK(composition_bound(factors, {0.1, 0.2}) <= 1e-11);

  factors = {{geo, 1}};
  CHECK(composition_bound(factors, {0.3}) ==
        doctest::Approx(shift_divergence(geo, 1, 0.3)).epsilon(1e-12));

  factors = {{geo, 1}, {geo, 1}};
  CHECK(composition_bound(factors, {0.3, 0.3}) ==
        doctest::Approx(0.4).epsilon(1e-9));

  CHECK_THROWS_AS(composition_bound(factors, {0.3}), ConfigError);
}

TEST_CASE("product_divergence_exact") {
  const DiscreteDist geo = truncate_nb(NegBinParams(1, 0.8), 1e-13);
  // A single factor shifted by -1 equals d(D || 1 + D).
  CHECK(product_divergence_exact({{geo, -1}}, 0.3) ==
        doctest::Approx(shift_divergence(geo, 1, 0.3)).epsilon(1e-9));
  CHECK(product_divergence_exact({{geo, 0}, {geo, 0}}, 0.2) <= 1e-11);

  // Exact never exceeds the composition bound with the even split.
  const double exact =
      product_divergence_exact({{geo, 1}, {geo, 1}}, 0.6);
  const double bound =
      composition_bound({{geo, -1}, {geo, -1}}, {0.3, 0.3});
  CHECK(exact <= bound + 1e-9);

  CHECK_THROWS_AS(product_divergence_exact({{geo, 1}, {geo, 1}}, 0.6, 10),
                  CapacityError);
}

TEST_CASE("exact product is below every composition bound on random instances") {
  Rng rng = make_rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t k = 1 + instance % 3;
    std::vector<ShiftedFactor> factors;
    std::vector<ShiftedFactor> negated;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = 0.3 + 2.7 * unif(rng);
      const double p = 0.2 + 0.6 * unif(rng);
      long long shift = -2 + static_cast<long long>(5.0 * unif(rng));
      const DiscreteDist d = truncate_nb(NegBinParams(r, p), 1e-13);
      factors.push_back({d, shift});
      negated.push_back({d, -shift});
    }
    const double eps = 0.2 + 0.8 * unif(rng);
    // Random nonnegative allocation summing to eps.
    std::vector<double> alloc(k);
    double total = 0.0;
    for (auto& a : alloc) {
      a = 0.05 + unif(rng);
      total += a;
    }
    for (auto& a : alloc) a *= eps / total;
    const double exact = product_divergence_exact(factors, eps, 1 << 24);
    const double bound = composition_bound(negated, alloc);
    INFO("instance=", instance, " exact=", exact, " bound=", bound);
    CHECK(exact <= bound + 1e-9);
  }
}

TEST_CASE("linear_query_check") {
  // All-zeros matrix: nothing to distinguish.
  const std::vector<NegBinParams> noise1 = {NegBinParams(1, 0.5)};
  DpCheckReport zeros = linear_query_check({{0}, {0}, {0}}, noise1, 0.5);
  CHECK(zeros.delta_bound == 0.0);

  // One row with entries {0, 1} reduces to the scalar Delta = 1 check.
  const NegBinParams nb(3.0 * (1.0 + std::log(1e5)), std::exp(-0.2));
  DpCheckReport lq = linear_query_check({{0}, {1}}, {nb}, 1.0);
  const DpCheckReport scalar = dp_check_noise_addition(nb, 1, 1.0);
  CHECK(lq.delta_bound == doctest::Approx(scalar.delta_bound).epsilon(1e-6));
  CHECK(lq.worst_columns.has_value());

  CHECK_THROWS_AS(
      linear_query_check({{0, 0}, {1}}, noise1, 0.5), ConfigError);
  CHECK_THROWS_AS(linear_query_check({}, noise1, 0.5), ConfigError);
}

TEST_CASE("linear_query_check methods agree on a small instance") {
  const std::vector<std::vector<long long>> columns = {{0, 0}, {1, -2}};
  const std::vector<NegBinParams> noise = {NegBinParams(8, 0.4),
                                           NegBinParams(6, 0.45)};
  LinearQueryOptions exact_options;
  exact_options.method = CheckMethod::exact;
  const DpCheckReport exact = linear_query_check(columns, noise, 1.0,
                                                 exact_options);
  LinearQueryOptions comp_options;
  comp_options.method = CheckMethod::composition;
  const DpCheckReport comp = linear_query_check(columns, noise, 1.0,
                                                comp_options);
  CHECK(exact.certified);
  CHECK(comp.certified);
  CHECK(exact.delta_bound <= comp.delta_bound + 1e-9);

  LinearQueryOptions mc_options;
  mc_options.method = CheckMethod::monte_carlo;
  mc_options.mc_samples = 400000;
  const DpCheckReport mc = linear_query_check(columns, noise, 1.0, mc_options);
  CHECK_FALSE(mc.certified);
  CHECK(mc.delta_bound == doctest::Approx(exact.delta_bound).epsilon(0.08));
}
