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
#include <sstream>
#include <vector>

#include "corrnoise/protocol.hpp"

using namespace corrnoise;

namespace {

// Small hand-picked noise; values only need to be valid, not calibrated.
ProtocolParams make_params(int delta, long long n, bool noise_disabled) {
  ProtocolParams params;
  params.delta = delta;
  params.n = n;
  params.central = NegBinParams(1.0, std::exp(-0.9 / delta));
  params.sys = build_right_inverse(delta);
  params.atom_noise.assign(params.sys.atoms.size(),
                           {NegBinParams(2.0, 0.4)});
  params.atom_noise[0].push_back(NegBinParams(3.0, 0.35));
  params.noise_disabled = noise_disabled;
  return params;
}

}  // namespace

TEST_CASE("randomize with noise disabled") {
  const ProtocolParams params = make_params(4, 10, true);
  Rng rng = make_rng(1);
  CHECK(randomize(0, params, rng).counts.empty());
  const MessageBag bag = randomize(3, params, rng);
  REQUIRE(bag.counts.size() == 1);
  CHECK(bag.counts.at(3) == 1);
  CHECK_THROWS_AS(randomize(5, params, rng), InputError);
  CHECK_THROWS_AS(randomize(-1, params, rng), InputError);
}

TEST_CASE("analyze sums messages") {
  MessageBag bag;
  CHECK(analyze(bag) == 0);
  bag.add(3, 1);
  bag.add(-1, 3);
  bag.add(2, 1);
  bag.add(1, 1);
  CHECK(analyze(bag) == 3);
}

TEST_CASE("shuffle_round basics") {
  const ProtocolParams params = make_params(2, 2, true);
  Rng rng = make_rng(2);
  const std::vector<int> zeros = {0, 0};
  CHECK(shuffle_round(zeros, params, rng).counts.empty());

  const std::vector<int> inputs = {1, 2};
  const MessageBag bag = shuffle_round(inputs, params, rng);
  CHECK(bag.counts.at(1) == 1);
  CHECK(bag.counts.at(2) == 1);
  CHECK(analyze(bag) == 3);

  const std::vector<int> wrong_size = {1};
  CHECK_THROWS_AS(shuffle_round(wrong_size, params, rng), ConfigError);
}

TEST_CASE("zero-sum atoms never change the analyzer output") {
  const ProtocolParams params = make_params(3, 20, false);
  const std::vector<int> inputs = {0, 1, 2, 3, 3, 0, 1, 2, 3, 1,
                                   0, 0, 1, 2, 3, 3, 2, 1, 0, 2};
  long long truth = 0;
  for (int x : inputs) truth += x;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = make_rng(seed);
    NoiseDraws totals;
    const MessageBag bag = shuffle_round(inputs, params, rng, &totals);
    CHECK(analyze(bag) == truth + totals.z_plus - totals.z_minus);
  }
}

TEST_CASE("central_run trivials and determinism of assembly") {
  ProtocolParams params = make_params(2, 5, true);
  Rng rng = make_rng(3);
  Histogram h;
  h.counts = {0, 0};
  CHECK(central_run(h, params, rng).counts.empty());

  h.counts = {0, 3};
  const MessageBag bag = central_run(h, params, rng);
  REQUIRE(bag.counts.size() == 1);
  CHECK(bag.counts.at(2) == 3);

  // z+ = 2 drawn, everything else zero: u_{+1} = h_1 + 2.
  h.counts = {1, 0};
  NoiseDraws draws;
  draws.z_plus = 2;
  draws.z_atom.assign(params.sys.atoms.size(), 0);
  const MessageBag assembled = central_assemble(h, params, draws);
  CHECK(assembled.counts.at(1) == 3);

  // central_run reports the draws it used.
  params.noise_disabled = false;
  NoiseDraws used;
  const MessageBag noisy = central_run(h, params, rng, &used);
  CHECK(noisy == central_assemble(h, params, used));
}

TEST_CASE("shuffle and central couple through shared noise totals") {
  // Same per-noise totals => identical count vectors, deterministically.
  const ProtocolParams params = make_params(2, 5, false);
  const std::vector<int> inputs = {0, 1, 2, 2, 1};
  Histogram h;
  h.counts = {2, 2};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng = make_rng(seed);
    NoiseDraws totals;
    const MessageBag shuffled = shuffle_round(inputs, params, rng, &totals);
    const MessageBag central = central_assemble(h, params, totals);
    CHECK(shuffled == central);
  }
}

TEST_CASE("exact_output_dist point mass when noise is disabled") {
  const ProtocolParams params = make_params(2, 3, true);
  Histogram h;
  h.counts = {1, 2};
  const JointOutputDist joint = exact_output_dist(h, params);
  REQUIRE(joint.mass.size() == 1);
  // u = (u_{-2}, u_{-1}, u_{+1}, u_{+2}) = (0, 0, 1, 2).
  const std::vector<long long> expect = {0, 0, 1, 2};
  CHECK(joint.mass.begin()->first == JointOutputDist::pack(expect));
  CHECK(joint.mass.begin()->second == doctest::Approx(1.0));
}

TEST_CASE("exact_output_dist marginal matches the convolution oracle") {
  // Delta = 1: the u_{+1} - u_{-1} marginal is h_1 + central - central;
  // the {-1,+1} atom noise cancels.
  ProtocolParams params = make_params(1, 3, false);
  params.central = NegBinParams(1.0, 0.4);
  params.atom_noise[0] = {NegBinParams(1.5, 0.3), NegBinParams(1.0, 0.35)};
  Histogram h;
  h.counts = {2};
  const JointOutputDist joint = exact_output_dist(h, params, 1e-11);

  const std::vector<long long> weights = {-1, 1};
  const auto marginal = joint_linear_marginal(joint, weights);

  const DiscreteDist central = truncate_nb(params.central, 1e-12);
  const DiscreteDist diff =
      convolve(central, negate_shift(central, -1, h.weighted_sum()));
  double max_gap = 0.0;
  for (const auto& [value, prob] : marginal) {
    max_gap = std::max(max_gap, std::fabs(prob - diff.at(value)));
  }
  CHECK(max_gap < 1e-9);
}

TEST_CASE("exact_output_dist capacity and domain guards") {
  const ProtocolParams params = make_params(2, 3, false);
  Histogram h;
  h.counts = {1, 1};
  CHECK_THROWS_AS(exact_output_dist(h, params, 1e-12, 100), CapacityError);
  const ProtocolParams big = make_params(3, 3, false);
  CHECK_THROWS_AS(exact_output_dist(h, big), ParamError);
}

TEST_CASE("joint_hockey_stick of a joint against itself is zero") {
  const ProtocolParams params = make_params(1, 2, false);
  Histogram h;
  h.counts = {1};
  const JointOutputDist joint = exact_output_dist(h, params, 1e-10);
  CHECK(joint_hockey_stick(joint, joint, 0.0) <=
        1.0 - joint.total_mass() + 1e-12);
}

TEST_CASE("randomized_round") {
  Rng rng = make_rng(4);
  for (int i = 0; i < 20; ++i) {
    CHECK(randomized_round(0.0, 7, rng) == 0);
    CHECK(randomized_round(1.0, 7, rng) == 7);
  }
  for (int i = 0; i < 100; ++i) {
    const int y = randomized_round(0.35, 10, rng);
    CHECK((y == 3 || y == 4));
  }
  CHECK_THROWS_AS(randomized_round(-0.1, 7, rng), InputError);
  CHECK_THROWS_AS(randomized_round(1.1, 7, rng), InputError);

  // Unbiasedness: mean of roundings of 0.37 at Delta 10 is 3.7.
  const long long trials = 100000;
  double sum = 0.0;
  for (long long i = 0; i < trials; ++i) {
    sum += randomized_round(0.37, 10, rng);
  }
  const double mean = sum / static_cast<double>(trials);
  // Bernoulli(0.7) rounding fraction: sigma^2 = 0.21.
  const double sigma = std::sqrt(0.21);
  CHECK(std::fabs(mean - 3.7) <=
        3.0 * sigma / std::sqrt(static_cast<double>(trials)));
}

TEST_CASE("message encoding") {
  CHECK(message_bit_length(1) == 1);
  CHECK(message_bit_length(4) == 3);
  CHECK(message_bit_length(5) == 4);

  CHECK(encode_message(1, 1) == "0");
  CHECK(encode_message(-1, 1) == "1");
  CHECK(encode_message(3, 4) == "010");

  for (int delta = 1; delta <= 64; ++delta) {
    for (int m = -delta; m <= delta; ++m) {
      if (m == 0) continue;
      const std::string bits = encode_message(m, delta);
      CHECK(static_cast<int>(bits.size()) == message_bit_length(delta));
      CHECK(decode_message(bits, delta) == m);
    }
  }

  CHECK_THROWS_AS(encode_message(0, 4), InputError);
  CHECK_THROWS_AS(encode_message(5, 4), InputError);
  CHECK_THROWS_AS(decode_message("0", 4), InputError);
  CHECK_THROWS_AS(decode_message("011", 3), InputError);  // magnitude 4 > 3
}

TEST_CASE("transcript export") {
  const ProtocolParams params = make_params(2, 3, false);
  const std::vector<int> inputs = {0, 1, 2};
  std::ostringstream os;
  write_transcript_csv(os, inputs, params, 42);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "user,message,bits");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    const auto first_comma = line.find(',');
    const auto second_comma = line.find(',', first_comma + 1);
    const std::string bits = line.substr(second_comma + 1);
    CHECK(static_cast<int>(bits.size()) == message_bit_length(params.delta));
    const int message = std::stoi(
        line.substr(first_comma + 1, second_comma - first_comma - 1));
    CHECK(decode_message(bits, params.delta) == message);
  }
  CHECK(rows >= 2);  // at least the two nonzero inputs
}

TEST_CASE("ProtocolParams validation") {
  ProtocolParams params = make_params(2, 3, false);
  params.atom_noise.pop_back();
  CHECK_THROWS_AS(params.validate(), ConfigError);
  params = make_params(2, 3, false);
  params.n = 0;
  CHECK_THROWS_AS(params.validate(), ParamError);
}
