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

#ifndef CORRNOISE_ATOMS_HPP_
#define CORRNOISE_ATOMS_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "corrnoise/errors.hpp"

namespace corrnoise {

// A zero-sum multiset of nonzero messages in [-Delta, Delta], e.g.
// {-1, -1, +2}. Injected by the randomizer to mask message counts without
// biasing the sum.
struct NoiseAtom {
  std::map<int, int> counts;  // element -> multiplicity, keys nonzero

  int l1() const;                 // total multiset size ||s||_1
  long long element_sum() const;  // sum over i of i * counts[i]
};

bool operator==(const NoiseAtom& a, const NoiseAtom& b);

// The collection S of Theorem-style noise atoms, in the fixed order
// {-1,+1}, then +2, -2, +3, -3, ..., +Delta, -Delta (the atom for +i is
// {i, -floor(i/2), -ceil(i/2)}). |S| = 2*Delta - 1.
std::vector<NoiseAtom> build_atoms(int delta);

struct Domination {
  long long gamma = 0;         // Gamma = Delta * ceil(1 + log2 Delta)
  std::vector<long long> t;    // per atom, build_atoms order
};

// Gamma and the domination vector t: t[{-1,+1}] = Gamma, and the two atoms
// whose large element is +-m get ceil(Gamma / m).
Domination build_domination(int delta);

// S, the sparse integer right inverse C of A-tilde, the domination vector t
// and Gamma. Columns of C are indexed by i in [-Delta..-1] U [2..Delta] in
// the order -1, 2, -2, 3, -3, ..., matching the atom order.
struct AtomSystem {
  int delta = 0;
  std::vector<NoiseAtom> atoms;
  // columns[slot] lists (atom index, coefficient) pairs, atom index ascending.
  std::vector<std::vector<std::pair<int, long long>>> columns;
  std::vector<long long> t;
  long long gamma = 0;

  int col_count() const { return 2 * delta - 1; }
  // Column/atom slot for index i in [-Delta..-1] U [2..Delta].
  static int col_slot(int i, int delta);
  static int col_value(int slot);
  std::vector<long long> column_dense(int slot) const;
};

// Builds the full system by the iterative column construction
// (c_{-1} = 1_{{-1,+1}}, c_1 = 0, c_i = 1_{{i,-i1,-i2}} - c_{-i1} - c_{-i2},
// c_{-i} = 1_{{-i,i1,i2}} - c_{i1} - c_{i2}) and verifies it; a failed
// verification throws std::logic_error.
AtomSystem build_right_inverse(int delta);

struct SystemReport {
  bool inverse_ok = false;         // A-tilde * C == I exactly over Z
  double max_domination = 0.0;     // max over columns of sum_s |C[s,i]| / t[s]
  bool domination_ok = false;      // every column sum <= 1
  bool induction_bound_ok = false; // column i <= |i| * ceil(1 + log2|i|) / Gamma
  long long t_norm_s = 0;          // ||t||_S = sum_s ||s||_1 * t[s]
  long long t_norm_bound = 0;      // 3 * (Gamma + sum_{m=2..Delta} 2*ceil(Gamma/m))
  bool t_norm_ok = false;

  bool pass() const {
    return inverse_ok && domination_ok && induction_bound_ok && t_norm_ok;
  }
};

SystemReport verify_system(const AtomSystem& sys);

// Text format (documented in the README) so calibrations can be cached.
void write_atom_system(std::ostream& os, const AtomSystem& sys);
std::string serialize_atom_system(const AtomSystem& sys);
AtomSystem parse_atom_system(std::istream& is);
AtomSystem parse_atom_system(const std::string& text);

// ceil(log2(x)) for x >= 1.
int ceil_log2(long long x);

}  // namespace corrnoise

#endif  // CORRNOISE_ATOMS_HPP_
