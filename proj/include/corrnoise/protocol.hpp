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

#ifndef CORRNOISE_PROTOCOL_HPP_
#define CORRNOISE_PROTOCOL_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corrnoise/atoms.hpp"
#include "corrnoise/dist_core.hpp"
#include "corrnoise/rng.hpp"

namespace corrnoise {

// Input histogram: counts[j-1] users hold value j; users holding 0 are
// implicit (total() <= n).
struct Histogram {
  std::vector<long long> counts;

  long long total() const;
  long long weighted_sum() const;  // sum over j of j * h_j
};

// A fully calibrated protocol instance. atom_noise[s] lists independent NB
// components whose draws are all emitted on atom s; the {-1,+1} atom carries
// two components (the flooding noise plus the correlation-hiding noise),
// every other atom one.
struct ProtocolParams {
  int delta = 0;
  long long n = 0;
  NegBinParams central;  // D^central, NB(1, e^{-eps*/Delta})
  AtomSystem sys;
  std::vector<std::vector<NegBinParams>> atom_noise;
  // Test mode: every noise distribution replaced by a point mass at 0.
  bool noise_disabled = false;

  void validate() const;
};

// Multiset of nonzero messages in [-Delta, Delta]: both a randomizer output
// and the full adversary view (the count vector u).
struct MessageBag {
  std::map<int, long long> counts;

  void add(int message, long long copies);
  void merge(const MessageBag& other);
  long long total_messages() const;
};

bool operator==(const MessageBag& a, const MessageBag& b);

// Per-round noise totals, exposed for the coupling and zero-sum tests.
struct NoiseDraws {
  long long z_plus = 0;
  long long z_minus = 0;
  std::vector<long long> z_atom;  // per atom, all components summed

  void accumulate(const NoiseDraws& other);
};

MessageBag randomize(int x, const ProtocolParams& params, Rng& rng,
                     NoiseDraws* draws = nullptr);

MessageBag shuffle_round(std::span<const int> inputs,
                         const ProtocolParams& params, Rng& rng,
                         NoiseDraws* totals = nullptr);

long long analyze(const MessageBag& bag);

// Central oracle: u = h_ext + z+ * 1_{+1} + z- * 1_{-1} + A z with full-size
// noise draws.
MessageBag central_run(const Histogram& h, const ProtocolParams& params,
                       Rng& rng, NoiseDraws* draws = nullptr);

// Deterministic assembly of the central output from given draws; with draws
// summed over all users this realizes the shuffle/central coupling.
MessageBag central_assemble(const Histogram& h, const ProtocolParams& params,
                            const NoiseDraws& draws);

// Exact joint distribution of the count vector u for Delta <= 2, computed by
// brute-force enumeration of all noise variables over truncated supports.
// This is the desk-scale oracle behind the DP acceptance checks.
struct JointOutputDist {
  int delta = 0;
  std::unordered_map<std::uint64_t, double> mass;  // packed u -> probability

  static std::uint64_t pack(std::span<const long long> u);
  double total_mass() const;
};

JointOutputDist exact_output_dist(const Histogram& h,
                                  const ProtocolParams& params,
                                  double tail_tol = 1e-9,
                                  std::size_t max_states = 10'000'000);

double joint_hockey_stick(const JointOutputDist& a, const JointOutputDist& b,
                          double epsilon);

// Distribution of sum_i weights[i] * u_i under the joint; coordinate order
// -Delta..-1, 1..Delta. Test oracle for marginals.
std::map<long long, double> joint_linear_marginal(
    const JointOutputDist& joint, std::span<const long long> weights);

// Unbiased randomized rounding of x in [0,1] onto {0, ..., Delta}.
int randomized_round(double x, int delta, Rng& rng);

// Fixed-width message encoding: sign bit then (|m|-1) in ceil(log2 Delta)
// bits. Bit strings are '0'/'1' characters.
int message_bit_length(int delta);
std::string encode_message(int m, int delta);
int decode_message(const std::string& bits, int delta);

// Audit transcript: one CSV row per (user, message) with the encoded bits.
void write_transcript_csv(std::ostream& os, std::span<const int> inputs,
                          const ProtocolParams& params, std::uint64_t seed);

}  // namespace corrnoise

#endif  // CORRNOISE_PROTOCOL_HPP_
