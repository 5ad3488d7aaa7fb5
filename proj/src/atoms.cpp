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

#include "corrnoise/atoms.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace corrnoise {

namespace {

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

long long ceil_div(long long a, long long b) { return -floor_div(-a, b); }

NoiseAtom pair_atom() {
  NoiseAtom atom;
  atom.counts[-1] = 1;
  atom.counts[1] = 1;
  return atom;
}

// {i, -floor(i/2), -ceil(i/2)} as a multiset (for i = +-2 the two halves
// coincide and get multiplicity 2).
NoiseAtom split_atom(int i) {
  NoiseAtom atom;
  atom.counts[i] += 1;
  atom.counts[static_cast<int>(-floor_div(i, 2))] += 1;
  atom.counts[static_cast<int>(-ceil_div(i, 2))] += 1;
  return atom;
}

using SparseCol = std::vector<std::pair<int, long long>>;

SparseCol sparse_axpy(const SparseCol& x, long long alpha, const SparseCol& y) {
  // x + alpha * y, merged by atom index.
  SparseCol out;
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].first < x[i].first) {
      out.emplace_back(y[j].first, alpha * y[j].second);
      ++j;
    } else {
      const long long v = x[i].second + alpha * y[j].second;
      if (v != 0) out.emplace_back(x[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

int NoiseAtom::l1() const {
  int total = 0;
  for (const auto& [elem, mult] : counts) total += mult;
  return total;
}

long long NoiseAtom::element_sum() const {
  long long sum = 0;
  for (const auto& [elem, mult] : counts) {
    sum += static_cast<long long>(elem) * mult;
  }
  return sum;
}

bool operator==(const NoiseAtom& a, const NoiseAtom& b) {
  return a.counts == b.counts;
}

int ceil_log2(long long x) {
  if (x < 1) throw ParamError("ceil_log2: x must be >= 1");
  int bits = 0;
  long long v = x - 1;
  while (v > 0) {
    v >>= 1;
    ++bits;
  }
  return bits;
}

std::vector<NoiseAtom> build_atoms(int delta) {
  if (delta < 1) throw ParamError("build_atoms: Delta must be >= 1");
  std::vector<NoiseAtom> atoms;
  atoms.reserve(2 * delta - 1);
  atoms.push_back(pair_atom());
  for (int i = 2; i <= delta; ++i) {
    atoms.push_back(split_atom(i));
    atoms.push_back(split_atom(-i));
  }
  return atoms;
}

Domination build_domination(int delta) {
  if (delta < 1) throw ParamError("build_domination: Delta must be >= 1");
  Domination dom;
  dom.gamma = static_cast<long long>(delta) * (1 + ceil_log2(delta));
  dom.t.reserve(2 * delta - 1);
  dom.t.push_back(dom.gamma);
  for (int m = 2; m <= delta; ++m) {
    const long long tm = ceil_div(dom.gamma, m);
    dom.t.push_back(tm);
    dom.t.push_back(tm);
  }
  return dom;
}

int AtomSystem::col_slot(int i, int delta) {
  if (i == -1) return 0;
  const int m = std::abs(i);
  if (m < 2 || m > delta || i == 0) {
    throw ParamError("col_slot: index outside [-Delta..-1] U [2..Delta]");
  }
  return 2 * (m - 2) + (i > 0 ? 1 : 2);
}

int AtomSystem::col_value(int slot) {
  if (slot == 0) return -1;
  const int m = (slot - 1) / 2 + 2;
  return (slot % 2 == 1) ? m : -m;
}

std::vector<long long> AtomSystem::column_dense(int slot) const {
  std::vector<long long> dense(atoms.size(), 0);
  for (const auto& [atom_idx, coef] : columns[slot]) {
    dense[static_cast<std::size_t>(atom_idx)] = coef;
  }
  return dense;
}

AtomSystem build_right_inverse(int delta) {
  AtomSystem sys;
  sys.delta = delta;
  sys.atoms = build_atoms(delta);
  Domination dom = build_domination(delta);
  sys.gamma = dom.gamma;
  sys.t = std::move(dom.t);

  const int cols = sys.col_count();
  sys.columns.assign(cols, {});
  // c_{-1} is the indicator of the {-1,+1} atom; c_1 is implicitly zero.
  sys.columns[0] = {{0, 1}};
  for (int i = 2; i <= delta; ++i) {
    const int i1 = i / 2;
    const int i2 = i - i1;  // ceil
    const auto col_of = [&](int idx) -> const SparseCol& {
      static const SparseCol kZero;
      if (idx == 1) return kZero;
      return sys.columns[AtomSystem::col_slot(idx, delta)];
    };
    const int pos_slot = AtomSystem::col_slot(i, delta);
    const int neg_slot = AtomSystem::col_slot(-i, delta);
    SparseCol pos = {{pos_slot, 1}};  // atom slots mirror column slots
    pos = sparse_axpy(pos, -1, col_of(-i1));
    pos = sparse_axpy(pos, -1, col_of(-i2));
    sys.columns[pos_slot] = std::move(pos);
    SparseCol neg = {{neg_slot, 1}};
    neg = sparse_axpy(neg, -1, col_of(i1));
    neg = sparse_axpy(neg, -1, col_of(i2));
    sys.columns[neg_slot] = std::move(neg);
  }

  const SystemReport report = verify_system(sys);
  if (!report.pass()) {
    throw std::logic_error(
        "build_right_inverse: constructed system failed verification");
  }
  return sys;
}

SystemReport verify_system(const AtomSystem& sys) {
  SystemReport report;
  const int cols = sys.col_count();

  // A-tilde * C == I, exactly over the integers. Row indices are the column
  // index set; the +1 row of A is excluded.
  report.inverse_ok = true;
  for (int slot = 0; slot < cols && report.inverse_ok; ++slot) {
    std::map<int, long long> result;  // row index -> value
    for (const auto& [atom_idx, coef] : sys.columns[slot]) {
      for (const auto& [elem, mult] : sys.atoms[atom_idx].counts) {
        if (elem == 1) continue;  // row +1 removed in A-tilde
        result[elem] += coef * mult;
      }
    }
    const int want = AtomSystem::col_value(slot);
    for (const auto& [row, value] : result) {
      if (value != (row == want ? 1 : 0)) {
        report.inverse_ok = false;
        break;
      }
    }
    if (result.find(want) == result.end()) report.inverse_ok = false;
  }

  // Per-column domination sums and the induction bound
  // sum_s |C[s,i]| / t[s] <= |i| * ceil(1 + log2 |i|) / Gamma <= 1.
  report.domination_ok = true;
  report.induction_bound_ok = true;
  const double slack = 1e-9;
  for (int slot = 0; slot < cols; ++slot) {
    long double sum = 0.0L;
    for (const auto& [atom_idx, coef] : sys.columns[slot]) {
      sum += static_cast<long double>(std::llabs(coef)) /
             static_cast<long double>(sys.t[static_cast<std::size_t>(atom_idx)]);
    }
    const double column_sum = static_cast<double>(sum);
    report.max_domination = std::max(report.max_domination, column_sum);
    if (column_sum > 1.0 + slack) report.domination_ok = false;
    const long long m = std::llabs(AtomSystem::col_value(slot));
    const double bound = static_cast<double>(m) * (1 + ceil_log2(m)) /
                         static_cast<double>(sys.gamma);
    if (column_sum > bound + slack) report.induction_bound_ok = false;
  }

  report.t_norm_s = 0;
  for (std::size_t s = 0; s < sys.atoms.size(); ++s) {
    report.t_norm_s += static_cast<long long>(sys.atoms[s].l1()) * sys.t[s];
  }
  long long harmonic = 0;
  for (int m = 2; m <= sys.delta; ++m) {
    harmonic += 2 * ((sys.gamma + m - 1) / m);
  }
  report.t_norm_bound = 3 * (sys.gamma + harmonic);
  report.t_norm_ok = report.t_norm_s <= report.t_norm_bound;
  return report;
}

void write_atom_system(std::ostream& os, const AtomSystem& sys) {
  os << "atom-system v1\n";
  os << "delta " << sys.delta << "\n";
  os << "gamma " << sys.gamma << "\n";
  os << "atoms " << sys.atoms.size() << "\n";
  for (const auto& atom : sys.atoms) {
    bool first = true;
    for (const auto& [elem, mult] : atom.counts) {
      for (int c = 0; c < mult; ++c) {
        if (!first) os << ' ';
        os << elem;
        first = false;
      }
    }
    os << "\n";
  }
  os << "t";
  for (long long tv : sys.t) os << ' ' << tv;
  os << "\n";
  std::size_t nnz = 0;
  for (const auto& col : sys.columns) nnz += col.size();
  os << "C " << nnz << "\n";
  for (int slot = 0; slot < sys.col_count(); ++slot) {
    for (const auto& [atom_idx, coef] : sys.columns[slot]) {
      os << AtomSystem::col_value(slot) << ' ' << atom_idx << ' ' << coef
         << "\n";
    }
  }
  os << "end\n";
}

std::string serialize_atom_system(const AtomSystem& sys) {
  std::ostringstream os;
  write_atom_system(os, sys);
  return os.str();
}

AtomSystem parse_atom_system(std::istream& is) {
  std::string token;
  const auto expect = [&](const std::string& want) {
    if (!(is >> token) || token != want) {
      throw ParseError("atom-system: expected '" + want + "'");
    }
  };
  expect("atom-system");
  expect("v1");
  AtomSystem sys;
  expect("delta");
  if (!(is >> sys.delta) || sys.delta < 1) {
    throw ParseError("atom-system: bad delta");
  }
  expect("gamma");
  if (!(is >> sys.gamma)) throw ParseError("atom-system: bad gamma");
  expect("atoms");
  std::size_t atom_count = 0;
  is >> atom_count;
  is.ignore();  // rest of line
  sys.atoms.resize(atom_count);
  for (std::size_t s = 0; s < atom_count; ++s) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("atom-system: short file");
    std::istringstream ls(line);
    int elem;
    while (ls >> elem) sys.atoms[s].counts[elem] += 1;
    if (sys.atoms[s].counts.empty()) {
      throw ParseError("atom-system: empty atom line");
    }
  }
  expect("t");
  sys.t.resize(atom_count);
  for (auto& tv : sys.t) {
    if (!(is >> tv)) throw ParseError("atom-system: bad t");
  }
  expect("C");
  std::size_t nnz = 0;
  is >> nnz;
  sys.columns.assign(sys.col_count(), {});
  for (std::size_t e = 0; e < nnz; ++e) {
    int col_index, atom_idx;
    long long coef;
    if (!(is >> col_index >> atom_idx >> coef)) {
      throw ParseError("atom-system: bad C triple");
    }
    sys.columns[AtomSystem::col_slot(col_index, sys.delta)].emplace_back(
        atom_idx, coef);
  }
  expect("end");
  return sys;
}

AtomSystem parse_atom_system(const std::string& text) {
  std::istringstream is(text);
  return parse_atom_system(is);
}

}  // namespace corrnoise
