#pragma once

// Block linear pencils: integer coefficient matrices attached to variable
// slots (X, Y, or one of the auxiliary witnesses), evaluated at symmetric
// matrices of any dimension via Kronecker lifting. The same machinery serves
// block-wise evaluation, flattening to a single monolithic pencil, and the
// splice operation that grafts one pencil's constraints into another.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "powersdr/symmat.hpp"

namespace powersdr {

struct IntMat {
  int n = 0;
  std::vector<int> v;

  static IntMat zero(int n) {
    if (n < 1) throw std::invalid_argument("IntMat: n must be >= 1");
    IntMat m;
    m.n = n;
    m.v.assign(static_cast<std::size_t>(n) * n, 0);
    return m;
  }
  static IntMat from_rows(const std::vector<std::vector<int>>& rows) {
    IntMat m = zero(static_cast<int>(rows.size()));
    for (int i = 0; i < m.n; ++i) {
      if (static_cast<int>(rows[i].size()) != m.n)
        throw std::invalid_argument("IntMat: ragged rows");
      for (int j = 0; j < m.n; ++j) m.v[i * m.n + j] = rows[i][j];
    }
    if (!m.symmetric()) throw std::invalid_argument("IntMat: not symmetric");
    return m;
  }
  int at(int i, int j) const { return v[static_cast<std::size_t>(i) * n + j]; }
  void set(int i, int j, int val) {
    v[static_cast<std::size_t>(i) * n + j] = val;
    v[static_cast<std::size_t>(j) * n + i] = val;
  }
  bool symmetric() const {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (at(i, j) != at(j, i)) return false;
    return true;
  }
  bool zero_matrix() const {
    return std::all_of(v.begin(), v.end(), [](int x) { return x == 0; });
  }
  friend bool operator==(const IntMat&, const IntMat&) = default;
};

struct VarSlot {
  enum class Kind { X, Y, Aux };
  Kind kind = Kind::X;
  int index = -1;  // >= 0 iff kind == Aux

  static VarSlot x() { return {Kind::X, -1}; }
  static VarSlot y() { return {Kind::Y, -1}; }
  static VarSlot aux(int i) {
    if (i < 0) throw std::invalid_argument("VarSlot: negative aux index");
    return {Kind::Aux, i};
  }
  friend bool operator==(const VarSlot&, const VarSlot&) = default;
  friend bool operator<(const VarSlot& a, const VarSlot& b) {
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.index < b.index;
  }
};

inline std::string to_string(const VarSlot& s) {
  switch (s.kind) {
    case VarSlot::Kind::X: return "X";
    case VarSlot::Kind::Y: return "Y";
    default: return "Aux(" + std::to_string(s.index) + ")";
  }
}

// One psd constraint: constant + sum_slot coeff_slot (x) value_slot >= 0,
// where (x) is the Kronecker product against the n x n slot values.
struct PencilBlock {
  int size = 0;  // coefficient dimension (1 or 2 in every built lift)
  IntMat constant;
  std::vector<std::pair<VarSlot, IntMat>> terms;

  void normalize() {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < terms.size(); ++i)
      if (terms[i].first == terms[i + 1].first)
        throw std::invalid_argument("PencilBlock: duplicate slot " +
                                    to_string(terms[i].first));
    if (constant.n != size)
      throw std::invalid_argument("PencilBlock: constant size mismatch");
    for (const auto& [slot, coeff] : terms)
      if (coeff.n != size)
        throw std::invalid_argument("PencilBlock: coeff size mismatch for " +
                                    to_string(slot));
  }
};

struct BlockPencil {
  std::vector<PencilBlock> blocks;
  int aux_count = 0;
};

namespace detail {

inline const SymMatrix* slot_value(const VarSlot& s, const SymMatrix& x,
                                   const SymMatrix& y,
                                   const std::vector<SymMatrix>& aux) {
  switch (s.kind) {
    case VarSlot::Kind::X: return &x;
    case VarSlot::Kind::Y: return &y;
    default:
      if (s.index >= static_cast<int>(aux.size()))
        throw std::invalid_argument("evaluate: missing aux " +
                                    std::to_string(s.index));
      return &aux[s.index];
  }
}

}  // namespace detail

inline SymMatrix evaluate_block(const PencilBlock& b, const SymMatrix& x,
                                const SymMatrix& y,
                                const std::vector<SymMatrix>& aux) {
  int n = x.n();
  if (y.n() != n) throw std::invalid_argument("evaluate: X/Y size mismatch");
  for (const auto& w : aux)
    if (w.n() != n) throw std::invalid_argument("evaluate: aux size mismatch");
  int big = b.size * n;
  Mat m = Mat::zero(big, big);
  auto accumulate = [&](const IntMat& coeff, const SymMatrix* s) {
    for (int r = 0; r < b.size; ++r)
      for (int c = 0; c < b.size; ++c) {
        int cv = coeff.at(r, c);
        if (cv == 0) continue;
        for (int i = 0; i < n; ++i) {
          if (s == nullptr) {
            m.at(r * n + i, c * n + i) += cv;  // identity
          } else {
            for (int j = 0; j < n; ++j)
              m.at(r * n + i, c * n + j) += cv * (*s)(i, j);
          }
        }
      }
  };
  accumulate(b.constant, nullptr);
  for (const auto& [slot, coeff] : b.terms)
    accumulate(coeff, detail::slot_value(slot, x, y, aux));
  return SymMatrix::from_mat(m);  // exactly symmetric by construction
}

struct BlockMargins {
  double min_margin = 0.0;
  std::vector<double> per_block;
};

inline BlockMargins evaluate(const BlockPencil& p, const SymMatrix& x,
                             const SymMatrix& y,
                             const std::vector<SymMatrix>& aux) {
  if (static_cast<int>(aux.size()) != p.aux_count)
    throw std::invalid_argument("evaluate: expected " +
                                std::to_string(p.aux_count) + " aux values");
  BlockMargins out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& b : p.blocks) {
    double m = psd_margin(evaluate_block(b, x, y, aux));
    out.per_block.push_back(m);
    out.min_margin = std::min(out.min_margin, m);
  }
  return out;
}

// Single monolithic pencil: the direct sum of all blocks, one coefficient
// matrix per slot (X, Y, then every aux in order).
inline PencilBlock flatten(const BlockPencil& p) {
  int total = 0;
  for (const auto& b : p.blocks) total += b.size;
  PencilBlock flat;
  flat.size = total;
  flat.constant = IntMat::zero(total);
  std::vector<VarSlot> slots = {VarSlot::x(), VarSlot::y()};
  for (int i = 0; i < p.aux_count; ++i) slots.push_back(VarSlot::aux(i));
  for (const auto& s : slots) flat.terms.push_back({s, IntMat::zero(total)});

  int off = 0;
  for (const auto& b : p.blocks) {
    for (int r = 0; r < b.size; ++r)
      for (int c = 0; c < b.size; ++c)
        if (b.constant.at(r, c) != 0)
          flat.constant.set(off + r, off + c, b.constant.at(r, c));
    for (const auto& [slot, coeff] : b.terms) {
      auto it = std::find_if(flat.terms.begin(), flat.terms.end(),
                             [&](const auto& t) { return t.first == slot; });
      if (it == flat.terms.end())
        throw std::logic_error("flatten: slot outside pencil range");
      for (int r = 0; r < b.size; ++r)
        for (int c = 0; c < b.size; ++c)
          if (coeff.at(r, c) != 0) it->second.set(off + r, off + c, coeff.at(r, c));
    }
    off += b.size;
  }
  return flat;
}

// Graft `inner` into `outer`: inner's X and Y slots are renamed to existing
// outer slots, inner's aux indices are shifted past outer's.
inline BlockPencil splice(const BlockPencil& outer, const BlockPencil& inner,
                          const VarSlot& x_maps_to, const VarSlot& y_maps_to) {
  auto check_target = [&](const VarSlot& s) {
    if (s.kind == VarSlot::Kind::Aux && s.index >= outer.aux_count)
      throw std::invalid_argument("splice: target " + to_string(s) +
                                  " outside outer pencil (aux_count " +
                                  std::to_string(outer.aux_count) + ")");
  };
  check_target(x_maps_to);
  check_target(y_maps_to);
  if (x_maps_to == y_maps_to)
    throw std::invalid_argument("splice: X and Y must map to distinct slots");

  BlockPencil out = outer;
  for (const auto& b : inner.blocks) {
    PencilBlock nb;
    nb.size = b.size;
    nb.constant = b.constant;
    for (const auto& [slot, coeff] : b.terms) {
      VarSlot mapped = slot;
      switch (slot.kind) {
        case VarSlot::Kind::X: mapped = x_maps_to; break;
        case VarSlot::Kind::Y: mapped = y_maps_to; break;
        case VarSlot::Kind::Aux:
          mapped = VarSlot::aux(slot.index + outer.aux_count);
          break;
      }
      nb.terms.push_back({mapped, coeff});
    }
    nb.normalize();
    out.blocks.push_back(std::move(nb));
  }
  out.aux_count = outer.aux_count + inner.aux_count;
  return out;
}

// Strict positive-definiteness of every block via Cholesky; cheap enough to
// sit inside a bisection loop. `tau` shifts the test to lambda_min > tau.
inline bool pencil_feasible(const BlockPencil& p, const SymMatrix& x,
                            const SymMatrix& y,
                            const std::vector<SymMatrix>& aux,
                            double tau = 0.0) {
  if (static_cast<int>(aux.size()) != p.aux_count)
    throw std::invalid_argument("pencil_feasible: aux count mismatch");
  for (const auto& b : p.blocks) {
    SymMatrix m = evaluate_block(b, x, y, aux);
    int n = m.n();
    std::vector<double> low(static_cast<std::size_t>(n) * n, 0.0);
    auto l = [&](int i, int j) -> double& {
      return low[static_cast<std::size_t>(i) * n + j];
    };
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = m(i, j) - (i == j ? tau : 0.0);
        for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
        if (i == j) {
          if (sum <= 0.0) {
            ok = false;
            break;
          }
          l(i, i) = std::sqrt(sum);
        } else {
          l(i, j) = sum / l(j, j);
        }
      }
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace powersdr
