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

#ifndef CORRNOISE_CALIBRATION_HPP_
#define CORRNOISE_CALIBRATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "corrnoise/divergence.hpp"
#include "corrnoise/protocol.hpp"

namespace corrnoise {

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  double epsilon_star = 0.0;
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
};

// epsilon_star = fraction * eps; epsilon1 = share * (eps - eps*);
// epsilon2 the rest; delta split 50/50. share must lie in [0.5, 0.9].
PrivacyBudget split_budget(double epsilon, double delta,
                           double epsilon_star_fraction, double epsilon1_share);

// Scalar NB mechanism for Delta-summation: p = e^{-0.2 eps/Delta},
// r = 3(1 + ln(1/delta)). Requires eps, delta in (0,1).
NegBinParams nb_scalar_params(double epsilon, double delta, long long delta_sum);

// Per-coordinate NB mechanism for a linear query whose pairwise column
// differences are dominated by tprime: p_i = e^{-0.2 eps / tprime_i},
// r_i = 3(1 + ln(|I|/delta)).
std::vector<NegBinParams> nb_vector_params(const std::vector<double>& tprime,
                                           double epsilon, double delta);

// Picks tprime dominating every pairwise difference of the columns of
// [0 c_2 ... c_Delta] while approximately minimizing the expected number of
// noise messages under nb_vector_params. Never worse than the fallback 2t;
// on optimizer failure returns 2t and sets *fell_back.
std::vector<double> optimize_tprime(const AtomSystem& sys, double epsilon2,
                                    double delta2, bool* fell_back = nullptr);

struct CalibrationOptions {
  double epsilon1_share = 0.5;  // in [0.5, 0.9]
  bool use_tprime_optimizer = true;
  int refine_budget = 0;
  CheckMethod certificate_method = CheckMethod::auto_select;
  double tail_tol = 1e-12;
  long long mc_samples = 200'000;
  std::uint64_t seed = 0;
};

struct CalibrationReport {
  PrivacyBudget budget;
  ProtocolParams params;
  std::vector<double> tprime;
  bool tprime_fell_back = false;
  double predicted_mse = 0.0;
  double predicted_messages = 0.0;
  double predicted_bits = 0.0;
  DpCheckReport cert_hat;    // D-hat against Delta-summation at (eps1, delta1)
  DpCheckReport cert_atoms;  // flooding noises against the linear query
  bool certified = false;
  std::vector<std::string> warnings;
};

// Full calibration per the concrete parameter selection: central NB(1,
// e^{-eps*/Delta}), D-hat at (eps1, delta1), per-atom flooding noise at
// (eps2, delta2) with t or optimized t', and the {-1,+1} atom carrying the
// extra D-hat component.
CalibrationReport dsum_params(double epsilon, double delta, double gamma,
                              int delta_sum, long long n,
                              const CalibrationOptions& options = {});

// Coordinate-descent search over the NB parameters, minimizing expected
// messages subject to the certificates still passing. Monotone: never
// worsens expected messages, never emits an uncertified set, and returns the
// input unchanged when no improvement is found within budget.
CalibrationReport refine_params(const CalibrationReport& report,
                                int search_budget, std::uint64_t seed = 0);

// Closed forms: MSE = 2 Var(D^central); messages = 1 + (1/n)(2 E[central] +
// sum_s |s| E[D^s]); bits = messages * (ceil(log2 Delta) + 1). The leading
// term is the worst case (nonzero input); pass nonzero_fraction for a
// data-aware variant.
double protocol_mse(const ProtocolParams& params);
double expected_messages(const ProtocolParams& params,
                         double nonzero_fraction = 1.0);
double expected_bits(const ProtocolParams& params,
                     double nonzero_fraction = 1.0);

void write_calibration(std::ostream& os, const CalibrationReport& report);
std::string serialize_calibration(const CalibrationReport& report);
CalibrationReport parse_calibration(std::istream& is);
CalibrationReport parse_calibration(const std::string& text);

}  // namespace corrnoise

#endif  // CORRNOISE_CALIBRATION_HPP_
