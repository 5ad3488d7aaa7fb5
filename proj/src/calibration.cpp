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

#include "corrnoise/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace corrnoise {

namespace {

// Columns of [0 c_2 ... c_Delta] as dense vectors over the atom index set.
std::vector<std::vector<long long>> linear_query_columns(const AtomSystem& sys) {
  std::vector<std::vector<long long>> columns;
  columns.emplace_back(sys.atoms.size(), 0);  // the implicit zero column
  for (int i = 2; i <= sys.delta; ++i) {
    columns.push_back(sys.column_dense(AtomSystem::col_slot(i, sys.delta)));
  }
  return columns;
}

// Expected flooding messages per round for a given tprime choice,
// sum_s ||s||_1 * E[NB(r_s, p_s)].
double tprime_objective(const AtomSystem& sys, const std::vector<double>& tprime,
                        double epsilon2, double delta2) {
  const std::vector<NegBinParams> noise =
      nb_vector_params(tprime, epsilon2, delta2);
  double total = 0.0;
  for (std::size_t s = 0; s < noise.size(); ++s) {
    total += sys.atoms[s].l1() * noise[s].mean();
  }
  return total;
}

DpCheckReport run_atom_certificate(const AtomSystem& sys,
                                   const std::vector<NegBinParams>& noise,
                                   double epsilon2,
                                   const std::vector<double>& tprime,
                                   const CalibrationOptions& options) {
  LinearQueryOptions lq;
  lq.method = options.certificate_method;
  lq.tprime = tprime;
  lq.tail_tol = options.tail_tol;
  lq.mc_samples = options.mc_samples;
  lq.mc_seed = derive_seed(options.seed, 0x1701);
  return linear_query_check(linear_query_columns(sys), noise, epsilon2, lq);
}

void fill_predictions(CalibrationReport& report) {
  report.predicted_mse = protocol_mse(report.params);
  report.predicted_messages = expected_messages(report.params);
  report.predicted_bits = expected_bits(report.params);
}

void run_certificates(CalibrationReport& report,
                      const CalibrationOptions& options) {
  const NegBinParams& hat = report.params.atom_noise[0].back();
  report.cert_hat = dp_check_noise_addition(
      hat, report.params.delta, report.budget.epsilon1);
  std::vector<NegBinParams> tilde;
  tilde.reserve(report.params.atom_noise.size());
  for (const auto& components : report.params.atom_noise) {
    tilde.push_back(components.front());
  }
  report.cert_atoms = run_atom_certificate(report.params.sys, tilde,
                                           report.budget.epsilon2,
                                           report.tprime, options);
  report.certified = report.cert_hat.certified && report.cert_atoms.certified &&
                     report.cert_hat.delta_bound <= report.budget.delta1 &&
                     report.cert_atoms.delta_bound <= report.budget.delta2;
}

}  // namespace

PrivacyBudget split_budget(double epsilon, double delta,
                           double epsilon_star_fraction,
                           double epsilon1_share) {
  if (!(epsilon > 0.0)) throw ParamError("split_budget: epsilon must be > 0");
  if (!(delta > 0.0) || !(delta < 0.5)) {
    throw ParamError("split_budget: delta must lie in (0, 1/2)");
  }
  if (!(epsilon_star_fraction > 0.0) || !(epsilon_star_fraction < 1.0)) {
    throw ParamError("split_budget: epsilon_star_fraction must be in (0,1)");
  }
  if (!(epsilon1_share >= 0.5) || !(epsilon1_share <= 0.9)) {
    throw ParamError("split_budget: epsilon1_share must lie in [0.5, 0.9]");
  }
  PrivacyBudget budget;
  budget.epsilon = epsilon;
  budget.delta = delta;
  budget.gamma = 1.0 - epsilon_star_fraction;
  budget.epsilon_star = epsilon_star_fraction * epsilon;
  const double rest = epsilon - budget.epsilon_star;
  budget.epsilon1 = epsilon1_share * rest;
  budget.epsilon2 = rest - budget.epsilon1;
  budget.delta1 = delta / 2.0;
  budget.delta2 = delta - budget.delta1;
  return budget;
}

NegBinParams nb_scalar_params(double epsilon, double delta,
                              long long delta_sum) {
  if (!(epsilon > 0.0) || !(epsilon <= 1.0)) {
    throw ParamError("nb_scalar_params: epsilon must lie in (0,1]");
  }
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw ParamError("nb_scalar_params: delta must lie in (0,1)");
  }
  if (delta_sum < 1) throw ParamError("nb_scalar_params: Delta must be >= 1");
  const double p = std::exp(-0.2 * epsilon / static_cast<double>(delta_sum));
  const double r = 3.0 * (1.0 + std::log(1.0 / delta));
  return NegBinParams(r, p);
}

std::vector<NegBinParams> nb_vector_params(const std::vector<double>& tprime,
                                           double epsilon, double delta) {
  if (tprime.empty()) throw ParamError("nb_vector_params: empty index set");
  if (!(epsilon > 0.0) || !(epsilon <= 1.0) || !(delta > 0.0) ||
      !(delta < 1.0)) {
    throw ParamError("nb_vector_params: epsilon in (0,1] and delta in (0,1)");
  }
  const double r = 3.0 * (1.0 + std::log(static_cast<double>(tprime.size()) /
                                         delta));
  std::vector<NegBinParams> out;
  out.reserve(tprime.size());
  for (double t : tprime) {
    if (!(t > 0.0)) throw ParamError("nb_vector_params: tprime must be > 0");
    out.emplace_back(r, std::exp(-0.2 * epsilon / t));
  }
  return out;
}

std::vector<double> optimize_tprime(const AtomSystem& sys, double epsilon2,
                                    double delta2, bool* fell_back) {
  if (fell_back != nullptr) *fell_back = false;
  std::vector<double> fallback(sys.t.size());
  for (std::size_t s = 0; s < sys.t.size(); ++s) {
    fallback[s] = 2.0 * static_cast<double>(sys.t[s]);
  }
  try {
    // Pairwise difference vectors over the columns of [0 c_2 ... c_Delta].
    const auto columns = linear_query_columns(sys);
    struct Constraint {
      std::vector<std::pair<std::size_t, double>> terms;  // (atom, |sigma|)
    };
    std::vector<Constraint> constraints;
    for (std::size_t a = 0; a < columns.size(); ++a) {
      for (std::size_t b = a + 1; b < columns.size(); ++b) {
        Constraint c;
        for (std::size_t s = 0; s < sys.atoms.size(); ++s) {
          const long long diff = columns[a][s] - columns[b][s];
          if (diff != 0) {
            c.terms.emplace_back(s, static_cast<double>(std::llabs(diff)));
          }
        }
        if (!c.terms.empty()) constraints.push_back(std::move(c));
      }
    }
    // Keeping p away from exact zero: underflow floor for unconstrained
    // coordinates (e.g. Delta = 1, where the query has only the zero column).
    const double floor = 0.2 * epsilon2 / 500.0;

    std::vector<double> tprime = fallback;
    // The objective is increasing in every tprime coordinate, so each
    // coordinate's optimum sits on its tightest constraint; sweep coordinate
    // minimizers until the point stops moving.
    for (int sweep = 0; sweep < 64; ++sweep) {
      double max_rel_change = 0.0;
      for (std::size_t s = 0; s < tprime.size(); ++s) {
        double lower = floor;
        for (const auto& c : constraints) {
          double own = 0.0;
          double rest = 0.0;
          for (const auto& [i, mag] : c.terms) {
            if (i == s) {
              own = mag;
            } else {
              rest += mag / tprime[i];
            }
          }
          if (own == 0.0) continue;
          if (rest >= 1.0) {
            lower = tprime[s];  // cannot move this coordinate
            break;
          }
          lower = std::max(lower, own / (1.0 - rest));
        }
        if (lower < tprime[s]) {
          max_rel_change =
              std::max(max_rel_change, (tprime[s] - lower) / tprime[s]);
          tprime[s] = lower;
        }
      }
      if (max_rel_change < 1e-10) break;
    }
    // Feasibility re-check, and the fallback guarantee on the objective.
    for (const auto& c : constraints) {
      double sum = 0.0;
      for (const auto& [i, mag] : c.terms) sum += mag / tprime[i];
      if (sum > 1.0 + 1e-9) throw InfeasibleError("tprime infeasible");
    }
    if (tprime_objective(sys, tprime, epsilon2, delta2) >
        tprime_objective(sys, fallback, epsilon2, delta2)) {
      throw InfeasibleError("tprime objective regression");
    }
    return tprime;
  } catch (const std::exception&) {
    if (fell_back != nullptr) *fell_back = true;
    return fallback;
  }
}

CalibrationReport dsum_params(double epsilon, double delta, double gamma,
                              int delta_sum, long long n,
                              const CalibrationOptions& options) {
  if (!(epsilon > 0.0)) throw ParamError("dsum_params: epsilon must be > 0");
  if (!(delta > 0.0) || !(delta < 0.5)) {
    throw ParamError("dsum_params: delta must lie in (0, 1/2)");
  }
  if (!(gamma > 0.0) || !(gamma < 0.5)) {
    throw ParamError("dsum_params: gamma must lie in (0, 1/2)");
  }
  if (delta_sum < 1 || n < 1) {
    throw ParamError("dsum_params: Delta and n must be >= 1");
  }
  if (!(options.epsilon1_share >= 0.5) || !(options.epsilon1_share <= 0.9)) {
    throw ParamError("dsum_params: epsilon1_share must lie in [0.5, 0.9]");
  }

  CalibrationReport report;
  report.budget.epsilon = epsilon;
  report.budget.delta = delta;
  report.budget.gamma = gamma;
  report.budget.epsilon_star = (1.0 - gamma) * epsilon;
  // The scalar NB theorem needs epsilon < 1, so the flooding budget is
  // capped at 1 before splitting.
  const double rest = std::min(1.0, gamma * epsilon);
  report.budget.epsilon1 = options.epsilon1_share * rest;
  report.budget.epsilon2 = rest - report.budget.epsilon1;
  report.budget.delta1 = delta / 2.0;
  report.budget.delta2 = delta - report.budget.delta1;
  if (epsilon > 8.0) {
    report.warnings.push_back(
        "epsilon above 8: the accuracy guarantees target epsilon = O(1)");
  }

  ProtocolParams params;
  params.delta = delta_sum;
  params.n = n;
  params.central = NegBinParams(
      1.0, std::exp(-report.budget.epsilon_star / delta_sum));
  params.sys = build_right_inverse(delta_sum);

  if (options.use_tprime_optimizer) {
    report.tprime = optimize_tprime(params.sys, report.budget.epsilon2,
                                    report.budget.delta2,
                                    &report.tprime_fell_back);
  } else {
    report.tprime.resize(params.sys.t.size());
    for (std::size_t s = 0; s < params.sys.t.size(); ++s) {
      report.tprime[s] = 2.0 * static_cast<double>(params.sys.t[s]);
    }
  }

  const std::vector<NegBinParams> tilde = nb_vector_params(
      report.tprime, report.budget.epsilon2, report.budget.delta2);
  const NegBinParams hat = nb_scalar_params(
      report.budget.epsilon1, report.budget.delta1, delta_sum);

  params.atom_noise.resize(params.sys.atoms.size());
  for (std::size_t s = 0; s < params.sys.atoms.size(); ++s) {
    params.atom_noise[s] = {tilde[s]};
  }
  // The {-1,+1} atom carries D-hat as an extra independent component; the
  // two draws are emitted on the same atom, realizing the convolution.
  params.atom_noise[0].push_back(hat);

  report.params = std::move(params);
  fill_predictions(report);
  run_certificates(report, options);

  if (options.refine_budget > 0) {
    return refine_params(report, options.refine_budget, options.seed);
  }
  return report;
}

CalibrationReport refine_params(const CalibrationReport& report,
                                int search_budget, std::uint64_t seed) {
  if (search_budget <= 0) return report;
  CalibrationOptions options;
  options.seed = seed;

  CalibrationReport best = report;
  if (!best.certified) return report;  // nothing safe to move from

  int evals = 0;
  // Knob list: (atom component, which of {r, p}). The hat component is
  // atom 0's last entry.
  struct Knob {
    std::size_t atom;
    std::size_t component;
    bool shrink_r;
  };
  std::vector<Knob> knobs;
  for (std::size_t s = 0; s < best.params.atom_noise.size(); ++s) {
    for (std::size_t c = 0; c < best.params.atom_noise[s].size(); ++c) {
      knobs.push_back({s, c, true});
      knobs.push_back({s, c, false});
    }
  }

  bool moved = true;
  while (moved && evals < search_budget) {
    moved = false;
    for (const Knob& knob : knobs) {
      if (evals >= search_budget) break;
      CalibrationReport trial = best;
      NegBinParams& nb = trial.params.atom_noise[knob.atom][knob.component];
      if (knob.shrink_r) {
        nb.r *= 0.85;
        if (nb.r < 1e-6) continue;
      } else {
        // Multiplicative step on -ln p, shrinking p toward 0.
        nb.p = std::pow(nb.p, 1.25);
        if (nb.p <= 0.0 || nb.p >= 1.0) continue;
      }
      ++evals;
      fill_predictions(trial);
      if (trial.predicted_messages >= best.predicted_messages) continue;
      run_certificates(trial, options);
      if (!trial.certified) continue;
      best = std::move(trial);
      moved = true;
    }
  }
  return best;
}

double protocol_mse(const ProtocolParams& params) {
  if (params.noise_disabled) return 0.0;
  return 2.0 * params.central.variance();
}

double expected_messages(const ProtocolParams& params,
                         double nonzero_fraction) {
  double overhead = 0.0;
  if (!params.noise_disabled) {
    overhead += 2.0 * params.central.mean();
    for (std::size_t s = 0; s < params.atom_noise.size(); ++s) {
      double atom_mean = 0.0;
      for (const auto& nb : params.atom_noise[s]) atom_mean += nb.mean();
      overhead += params.sys.atoms[s].l1() * atom_mean;
    }
  }
  return nonzero_fraction + overhead / static_cast<double>(params.n);
}

double expected_bits(const ProtocolParams& params, double nonzero_fraction) {
  return expected_messages(params, nonzero_fraction) *
         message_bit_length(params.delta);
}

namespace {

void put(std::ostream& os, const char* key, double value) {
  os << key << ' ' << std::setprecision(17) << value << '\n';
}

}  // namespace

void write_calibration(std::ostream& os, const CalibrationReport& report) {
  os << "calibration v1\n";
  put(os, "epsilon", report.budget.epsilon);
  put(os, "delta", report.budget.delta);
  put(os, "gamma", report.budget.gamma);
  os << "delta_levels " << report.params.delta << '\n';
  os << "n " << report.params.n << '\n';
  put(os, "epsilon_star", report.budget.epsilon_star);
  put(os, "epsilon1", report.budget.epsilon1);
  put(os, "epsilon2", report.budget.epsilon2);
  put(os, "delta1", report.budget.delta1);
  put(os, "delta2", report.budget.delta2);
  put(os, "central_r", report.params.central.r);
  put(os, "central_p", report.params.central.p);
  os << "atoms " << report.params.atom_noise.size() << '\n';
  for (std::size_t s = 0; s < report.params.atom_noise.size(); ++s) {
    os << "atom " << s;
    for (const auto& [elem, mult] : report.params.sys.atoms[s].counts) {
      for (int c = 0; c < mult; ++c) os << ' ' << elem;
    }
    os << '\n';
    os << "atom_tprime " << s << ' ' << std::setprecision(17)
       << report.tprime[s] << '\n';
    os << "atom_noise " << s << ' '
       << report.params.atom_noise[s].size();
    for (const auto& nb : report.params.atom_noise[s]) {
      os << ' ' << std::setprecision(17) << nb.r << ' '
         << std::setprecision(17) << nb.p;
    }
    os << '\n';
  }
  put(os, "predicted_mse", report.predicted_mse);
  put(os, "predicted_messages", report.predicted_messages);
  put(os, "predicted_bits", report.predicted_bits);
  put(os, "cert_hat_delta", report.cert_hat.delta_bound);
  os << "cert_hat_method " << check_method_name(report.cert_hat.method) << '\n';
  put(os, "cert_atoms_delta", report.cert_atoms.delta_bound);
  os << "cert_atoms_method " << check_method_name(report.cert_atoms.method)
     << '\n';
  os << "certified " << (report.certified ? 1 : 0) << '\n';
  os << "end\n";
}

std::string serialize_calibration(const CalibrationReport& report) {
  std::ostringstream os;
  write_calibration(os, report);
  return os.str();
}

CalibrationReport parse_calibration(std::istream& is) {
  std::string token;
  const auto expect = [&](const std::string& want) {
    if (!(is >> token) || token != want) {
      throw ParseError("calibration: expected '" + want + "'");
    }
  };
  const auto read_double = [&](const std::string& key) {
    expect(key);
    double value;
    if (!(is >> value)) throw ParseError("calibration: bad " + key);
    return value;
  };
  expect("calibration");
  expect("v1");
  CalibrationReport report;
  report.budget.epsilon = read_double("epsilon");
  report.budget.delta = read_double("delta");
  report.budget.gamma = read_double("gamma");
  expect("delta_levels");
  int delta_sum;
  if (!(is >> delta_sum)) throw ParseError("calibration: bad delta_levels");
  expect("n");
  long long n;
  if (!(is >> n)) throw ParseError("calibration: bad n");
  report.budget.epsilon_star = read_double("epsilon_star");
  report.budget.epsilon1 = read_double("epsilon1");
  report.budget.epsilon2 = read_double("epsilon2");
  report.budget.delta1 = read_double("delta1");
  report.budget.delta2 = read_double("delta2");
  const double central_r = read_double("central_r");
  const double central_p = read_double("central_p");

  report.params.delta = delta_sum;
  report.params.n = n;
  report.params.central = NegBinParams(central_r, central_p);
  report.params.sys = build_right_inverse(delta_sum);

  expect("atoms");
  std::size_t atom_count;
  if (!(is >> atom_count) || atom_count != report.params.sys.atoms.size()) {
    throw ParseError("calibration: atom count mismatch");
  }
  report.params.atom_noise.resize(atom_count);
  report.tprime.resize(atom_count);
  is.ignore();
  for (std::size_t s = 0; s < atom_count; ++s) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("calibration: short file");
    // "atom <s> <elems...>" is informational; the system is rebuilt from
    // delta_levels and must agree.
    std::size_t idx;
    expect("atom_tprime");
    if (!(is >> idx >> report.tprime[s]) || idx != s) {
      throw ParseError("calibration: bad atom_tprime");
    }
    expect("atom_noise");
    std::size_t components;
    if (!(is >> idx >> components) || idx != s || components < 1) {
      throw ParseError("calibration: bad atom_noise");
    }
    for (std::size_t c = 0; c < components; ++c) {
      double r, p;
      if (!(is >> r >> p)) throw ParseError("calibration: bad NB params");
      report.params.atom_noise[s].emplace_back(r, p);
    }
    is.ignore();
  }
  report.predicted_mse = read_double("predicted_mse");
  report.predicted_messages = read_double("predicted_messages");
  report.predicted_bits = read_double("predicted_bits");
  report.cert_hat.delta_bound = read_double("cert_hat_delta");
  expect("cert_hat_method");
  is >> token;
  report.cert_atoms.delta_bound = read_double("cert_atoms_delta");
  expect("cert_atoms_method");
  is >> token;
  expect("certified");
  int certified;
  if (!(is >> certified)) throw ParseError("calibration: bad certified");
  report.certified = certified != 0;
  expect("end");
  report.params.validate();
  return report;
}

CalibrationReport parse_calibration(const std::string& text) {
  std::istringstream is(text);
  return parse_calibration(is);
}

}  // namespace corrnoise
