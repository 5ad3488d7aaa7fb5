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

#include "corrnoise/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace corrnoise {

namespace {

// Per-round sampler set: one fast sampler per noise component at the
// per-user share r/n.
struct RoundSamplers {
  NbSampler central;
  std::vector<std::vector<NbSampler>> atom;

  RoundSamplers(const ProtocolParams& params, long long n_users)
      : central(nb_divide(params.central, n_users)) {
    atom.reserve(params.atom_noise.size());
    for (const auto& components : params.atom_noise) {
      std::vector<NbSampler> samplers;
      samplers.reserve(components.size());
      for (const auto& nb : components) {
        samplers.emplace_back(nb_divide(nb, n_users));
      }
      atom.push_back(std::move(samplers));
    }
  }
};

MessageBag randomize_with(const RoundSamplers& samplers, int x,
                          const ProtocolParams& params, Rng& rng,
                          NoiseDraws* draws) {
  if (x < 0 || x > params.delta) {
    throw InputError("randomize: input must lie in {0, ..., Delta}");
  }
  MessageBag bag;
  if (x != 0) bag.add(x, 1);
  if (draws != nullptr) {
    draws->z_plus = 0;
    draws->z_minus = 0;
    draws->z_atom.assign(params.sys.atoms.size(), 0);
  }
  if (params.noise_disabled) return bag;

  const long long z_plus = samplers.central(rng);
  const long long z_minus = samplers.central(rng);
  bag.add(1, z_plus);
  bag.add(-1, z_minus);
  if (draws != nullptr) {
    draws->z_plus = z_plus;
    draws->z_minus = z_minus;
  }
  for (std::size_t s = 0; s < samplers.atom.size(); ++s) {
    long long copies = 0;
    for (const auto& sampler : samplers.atom[s]) copies += sampler(rng);
    if (copies > 0) {
      for (const auto& [elem, mult] : params.sys.atoms[s].counts) {
        bag.add(elem, copies * mult);
      }
    }
    if (draws != nullptr) draws->z_atom[s] = copies;
  }
  return bag;
}

}  // namespace

long long Histogram::total() const {
  long long sum = 0;
  for (long long h : counts) sum += h;
  return sum;
}

long long Histogram::weighted_sum() const {
  long long sum = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    sum += static_cast<long long>(j + 1) * counts[j];
  }
  return sum;
}

void ProtocolParams::validate() const {
  if (delta < 1) throw ParamError("ProtocolParams: Delta must be >= 1");
  if (n < 1) throw ParamError("ProtocolParams: n must be >= 1");
  if (sys.delta != delta) {
    throw ConfigError("ProtocolParams: atom system Delta mismatch");
  }
  if (atom_noise.size() != sys.atoms.size()) {
    throw ConfigError("ProtocolParams: atom_noise must cover every atom");
  }
  for (const auto& components : atom_noise) {
    if (components.empty()) {
      throw ConfigError("ProtocolParams: atom with no noise component");
    }
  }
}

void MessageBag::add(int message, long long copies) {
  if (copies == 0) return;
  if (message == 0) throw InputError("MessageBag: zero message");
  auto it = counts.find(message);
  if (it == counts.end()) {
    counts.emplace(message, copies);
  } else {
    it->second += copies;
    if (it->second == 0) counts.erase(it);
  }
}

void MessageBag::merge(const MessageBag& other) {
  for (const auto& [message, copies] : other.counts) add(message, copies);
}

long long MessageBag::total_messages() const {
  long long total = 0;
  for (const auto& [message, copies] : counts) total += copies;
  return total;
}

bool operator==(const MessageBag& a, const MessageBag& b) {
  return a.counts == b.counts;
}

void NoiseDraws::accumulate(const NoiseDraws& other) {
  z_plus += other.z_plus;
  z_minus += other.z_minus;
  if (z_atom.size() < other.z_atom.size()) z_atom.resize(other.z_atom.size());
  for (std::size_t s = 0; s < other.z_atom.size(); ++s) {
    z_atom[s] += other.z_atom[s];
  }
}

MessageBag randomize(int x, const ProtocolParams& params, Rng& rng,
                     NoiseDraws* draws) {
  params.validate();
  RoundSamplers samplers(params, params.n);
  return randomize_with(samplers, x, params, rng, draws);
}

MessageBag shuffle_round(std::span<const int> inputs,
                         const ProtocolParams& params, Rng& rng,
                         NoiseDraws* totals) {
  params.validate();
  if (static_cast<long long>(inputs.size()) != params.n) {
    throw ConfigError("shuffle_round: |inputs| must equal n");
  }
  RoundSamplers samplers(params, params.n);
  MessageBag shuffled;
  if (totals != nullptr) {
    totals->z_plus = 0;
    totals->z_minus = 0;
    totals->z_atom.assign(params.sys.atoms.size(), 0);
  }
  NoiseDraws user_draws;
  for (int x : inputs) {
    MessageBag bag = randomize_with(samplers, x, params, rng,
                                    totals != nullptr ? &user_draws : nullptr);
    shuffled.merge(bag);
    if (totals != nullptr) totals->accumulate(user_draws);
  }
  return shuffled;
}

long long analyze(const MessageBag& bag) {
  long long sum = 0;
  for (const auto& [message, copies] : bag.counts) {
    sum += static_cast<long long>(message) * copies;
  }
  return sum;
}

MessageBag central_assemble(const Histogram& h, const ProtocolParams& params,
                            const NoiseDraws& draws) {
  if (static_cast<int>(h.counts.size()) > params.delta) {
    throw ConfigError("central_assemble: histogram wider than Delta");
  }
  MessageBag u;
  for (std::size_t j = 0; j < h.counts.size(); ++j) {
    u.add(static_cast<int>(j + 1), h.counts[j]);
  }
  u.add(1, draws.z_plus);
  u.add(-1, draws.z_minus);
  for (std::size_t s = 0; s < params.sys.atoms.size(); ++s) {
    const long long z = s < draws.z_atom.size() ? draws.z_atom[s] : 0;
    if (z == 0) continue;
    for (const auto& [elem, mult] : params.sys.atoms[s].counts) {
      u.add(elem, z * mult);
    }
  }
  return u;
}

MessageBag central_run(const Histogram& h, const ProtocolParams& params,
                       Rng& rng, NoiseDraws* draws_out) {
  params.validate();
  NoiseDraws draws;
  draws.z_atom.assign(params.sys.atoms.size(), 0);
  if (!params.noise_disabled) {
    draws.z_plus = nb_sample(params.central, rng);
    draws.z_minus = nb_sample(params.central, rng);
    for (std::size_t s = 0; s < params.atom_noise.size(); ++s) {
      for (const auto& nb : params.atom_noise[s]) {
        draws.z_atom[s] += nb_sample(nb, rng);
      }
    }
  }
  if (draws_out != nullptr) *draws_out = draws;
  return central_assemble(h, params, draws);
}

std::uint64_t JointOutputDist::pack(std::span<const long long> u) {
  std::uint64_t key = 0;
  for (long long v : u) {
    if (v < 0 || v > 0xffff) {
      throw CapacityError("JointOutputDist: count outside packable range");
    }
    key = (key << 16) | static_cast<std::uint64_t>(v);
  }
  return key;
}

double JointOutputDist::total_mass() const {
  KahanSum acc;
  for (const auto& [key, prob] : mass) acc.add(prob);
  return acc.value();
}

JointOutputDist exact_output_dist(const Histogram& h,
                                  const ProtocolParams& params,
                                  double tail_tol, std::size_t max_states) {
  params.validate();
  if (params.delta > 2) {
    throw ParamError("exact_output_dist: only Delta <= 2 is enumerable");
  }
  const int delta = params.delta;
  const std::size_t coords = 2 * static_cast<std::size_t>(delta);
  // u coordinate order: -Delta..-1, 1..Delta.
  const auto coord_of = [delta](int message) {
    return message < 0 ? message + delta : delta + message - 1;
  };

  std::vector<long long> base(coords, 0);
  for (std::size_t j = 0; j < h.counts.size(); ++j) {
    base[static_cast<std::size_t>(
        coord_of(static_cast<int>(j + 1)))] = h.counts[j];
  }

  JointOutputDist joint;
  joint.delta = delta;
  if (params.noise_disabled) {
    joint.mass.emplace(JointOutputDist::pack(base), 1.0);
    return joint;
  }

  // One enumeration variable per noise source: z+, z-, and one per atom
  // (components convolved, since copies of the same atom only matter in sum).
  struct Variable {
    DiscreteDist dist;
    std::vector<std::pair<std::size_t, long long>> effect;  // coord, scale
  };
  std::vector<Variable> vars;
  const DiscreteDist central_dist = truncate_nb(params.central, tail_tol);
  vars.push_back({central_dist, {{static_cast<std::size_t>(coord_of(1)), 1}}});
  vars.push_back({central_dist, {{static_cast<std::size_t>(coord_of(-1)), 1}}});
  for (std::size_t s = 0; s < params.sys.atoms.size(); ++s) {
    DiscreteDist dist = truncate_nb(params.atom_noise[s][0], tail_tol);
    for (std::size_t c = 1; c < params.atom_noise[s].size(); ++c) {
      dist = convolve(dist, truncate_nb(params.atom_noise[s][c], tail_tol));
    }
    Variable var;
    var.dist = std::move(dist);
    for (const auto& [elem, mult] : params.sys.atoms[s].counts) {
      var.effect.emplace_back(static_cast<std::size_t>(coord_of(elem)), mult);
    }
    vars.push_back(std::move(var));
  }

  std::size_t states = 1;
  for (const auto& var : vars) {
    if (states > max_states / var.dist.size()) {
      throw CapacityError("exact_output_dist: joint support exceeds cap");
    }
    states *= var.dist.size();
  }

  std::vector<long long> u = base;
  std::vector<long long> idx(vars.size(), 0);
  // Apply the lo offset of every variable up front; the odometer then adds
  // increments relative to it.
  for (const auto& var : vars) {
    for (const auto& [coord, scale] : var.effect) {
      u[coord] += var.dist.lo * scale;
    }
  }
  joint.mass.reserve(std::min(states, max_states));
  while (true) {
    double prob = 1.0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      prob *= vars[i].dist.masses[static_cast<std::size_t>(idx[i])];
      if (prob == 0.0) break;
    }
    if (prob > 0.0) {
      joint.mass[JointOutputDist::pack(u)] += prob;
    }
    std::size_t pos = 0;
    while (pos < vars.size()) {
      if (++idx[pos] < static_cast<long long>(vars[pos].dist.size())) {
        for (const auto& [coord, scale] : vars[pos].effect) u[coord] += scale;
        break;
      }
      for (const auto& [coord, scale] : vars[pos].effect) {
        u[coord] -= (static_cast<long long>(vars[pos].dist.size()) - 1) * scale;
      }
      idx[pos] = 0;
      ++pos;
    }
    if (pos == vars.size()) break;
  }
  return joint;
}

double joint_hockey_stick(const JointOutputDist& a, const JointOutputDist& b,
                          double epsilon) {
  const double scale = std::exp(epsilon);
  KahanSum acc;
  for (const auto& [key, pa] : a.mass) {
    auto it = b.mass.find(key);
    const double pb = it == b.mass.end() ? 0.0 : it->second;
    const double term = pa - scale * pb;
    if (term > 0.0) acc.add(term);
  }
  acc.add(std::max(0.0, 1.0 - a.total_mass()));
  return acc.value();
}

std::map<long long, double> joint_linear_marginal(
    const JointOutputDist& joint, std::span<const long long> weights) {
  const std::size_t coords = 2 * static_cast<std::size_t>(joint.delta);
  if (weights.size() != coords) {
    throw ConfigError("joint_linear_marginal: weight length mismatch");
  }
  std::map<long long, double> out;
  for (const auto& [key, prob] : joint.mass) {
    long long value = 0;
    for (std::size_t c = 0; c < coords; ++c) {
      const std::uint64_t shift = 16 * (coords - 1 - c);
      const long long uc = static_cast<long long>((key >> shift) & 0xffff);
      value += weights[c] * uc;
    }
    out[value] += prob;
  }
  return out;
}

int randomized_round(double x, int delta, Rng& rng) {
  if (!(x >= 0.0) || !(x <= 1.0)) {
    throw InputError("randomized_round: x must lie in [0,1]");
  }
  if (delta < 1) throw ParamError("randomized_round: Delta must be >= 1");
  const double scaled = x * static_cast<double>(delta);
  double floor_part = std::floor(scaled);
  double frac = scaled - floor_part;
  long long y = static_cast<long long>(floor_part);
  if (y >= delta) {  // x == 1
    return delta;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) < frac) ++y;
  return static_cast<int>(y);
}

int message_bit_length(int delta) {
  if (delta < 1) throw ParamError("message_bit_length: Delta must be >= 1");
  return ceil_log2(delta) + 1;
}

std::string encode_message(int m, int delta) {
  if (m == 0 || std::abs(m) > delta) {
    throw InputError("encode_message: message must be nonzero in [-D, D]");
  }
  const int mag_bits = ceil_log2(delta);
  std::string bits;
  bits.reserve(static_cast<std::size_t>(mag_bits) + 1);
  bits.push_back(m > 0 ? '0' : '1');
  const int mag = std::abs(m) - 1;
  for (int b = mag_bits - 1; b >= 0; --b) {
    bits.push_back(((mag >> b) & 1) ? '1' : '0');
  }
  return bits;
}

int decode_message(const std::string& bits, int delta) {
  const int mag_bits = ceil_log2(delta);
  if (static_cast<int>(bits.size()) != mag_bits + 1) {
    throw InputError("decode_message: wrong bit length");
  }
  int mag = 0;
  for (int b = 0; b < mag_bits; ++b) {
    const char c = bits[static_cast<std::size_t>(b) + 1];
    if (c != '0' && c != '1') throw InputError("decode_message: bad bit");
    mag = (mag << 1) | (c == '1');
  }
  const int m = mag + 1;
  if (m > delta) throw InputError("decode_message: magnitude out of range");
  return bits[0] == '0' ? m : -m;
}

void write_transcript_csv(std::ostream& os, std::span<const int> inputs,
                          const ProtocolParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng = make_rng(seed);
  RoundSamplers samplers(params, params.n);
  os << "user,message,bits\n";
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    MessageBag bag =
        randomize_with(samplers, inputs[i], params, rng, nullptr);
    for (const auto& [message, copies] : bag.counts) {
      const std::string bits = encode_message(message, params.delta);
      for (long long c = 0; c < copies; ++c) {
        os << i << ',' << message << ',' << bits << '\n';
      }
    }
  }
}

}  // namespace corrnoise
