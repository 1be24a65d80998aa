#pragma once

// Numerical and exact verification for the constructed lifts.
//
// Three independent angles on correctness, none of which reuse the builder's
// own bookkeeping:
//   * completeness  — sample members of the target set, plug in the canonical
//                     witness, and demand every pencil block clears zero;
//   * soundness     — hit-and-run sample the projected spectrahedron and
//                     demand every sample is a genuine member (dense
//                     eigenvalue oracle, no pencil involved);
//   * exclusion     — shifted non-members must leave the witness search
//                     stranded with a visibly negative best margin.
// A scalar interval engine recovers sup/inf of y over the n = 1 slice to ten
// digits, and an exact rational computation reproduces the classical 2 x 2
// midpoint failure for the matrix square.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "powersdr/lift.hpp"

namespace powersdr {

// ---------------------------------------------------------------------------
// Membership oracle: dense eigendecomposition, independent of any pencil.

inline bool member_oracle(const Rational& p, SetKind kind, const SymMatrix& x,
                          const SymMatrix& y, double tol = kDefaultTol) {
  if (x.n() != y.n())
    throw std::invalid_argument("member_oracle: X/Y size mismatch");
  if (p.num < 0) {
    // negative exponents are only defined on the definite cone
    double band = tol * std::max(1.0, norm_max(x));
    if (psd_margin(x) <= band) return false;
  }
  SymMatrix xp = matrix_power(x, p, tol);
  if (kind == SetKind::Hypograph)
    return is_psd(y, tol) && loewner_geq(xp, y, tol);
  return loewner_geq(y, xp, tol);
}

// Signed, scale-normalized distance-to-membership proxy used for reporting.
inline double member_margin(const Rational& p, SetKind kind,
                            const SymMatrix& x, const SymMatrix& y,
                            double tol = kDefaultTol) {
  SymMatrix xp = matrix_power(x, p, tol);
  double scale = std::max({1.0, norm_max(xp), norm_max(y)});
  if (kind == SetKind::Hypograph)
    return std::min(psd_margin(xp - y), psd_margin(y)) / scale;
  return psd_margin(y - xp) / scale;
}

// ---------------------------------------------------------------------------
// Deterministic per-trial randomness; every failure is replayable from
// (seed, trial) alone.

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(mix64(seed ^ mix64(trial)));
}

inline SymMatrix random_sym(int n, std::mt19937_64& g) {
  std::normal_distribution<double> dist;
  SymMatrix m = SymMatrix::identity(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, dist(g));
  return m;
}

inline SymMatrix random_gram(int n, std::mt19937_64& g) {
  std::normal_distribution<double> dist;
  Mat r = Mat::zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = dist(g);
  return SymMatrix::from_mat(matmul(transpose(r), r), true);
}

}  // namespace detail

// Random psd X; negative exponents get a ridge to stay safely definite.
inline SymMatrix sample_domain_point(const Rational& p, int n,
                                     std::mt19937_64& g) {
  SymMatrix x = detail::random_gram(n, g);
  if (p.num < 0)
    for (int i = 0; i < n; ++i) x.set(i, i, x(i, i) + 0.3);
  return x;
}

// Random member of the target set over a fixed X. Hypograph members are
// congruence-compressed powers X^{p/2} M X^{p/2} with 0 <= M <= I (top
// eigenvalue of M lands exactly on 1, so boundary contact is exercised);
// epigraph members are X^p plus a psd bump.
inline SymMatrix sample_member_y(const Rational& p, SetKind kind,
                                 const SymMatrix& x, std::mt19937_64& g) {
  int n = x.n();
  if (kind == SetKind::Hypograph) {
    SymMatrix m = detail::random_gram(n, g);
    double top = eig_sym(m).eigenvalues.front();
    if (top > 0.0) m = (1.0 / top) * m;
    Mat xph = matrix_power(x, p * make_rational(1, 2)).to_mat();
    return SymMatrix::from_mat(matmul(matmul(xph, m.to_mat()), xph), true);
  }
  return matrix_power(x, p) + 0.5 * detail::random_gram(n, g);
}

// ---------------------------------------------------------------------------
// Trial reports.

struct FailureRecord {
  std::uint64_t seed = 0;
  int trial = 0;
  int n = 0;
};

struct TrialReport {
  std::uint64_t seed = 0;
  int n = 0;
  Rational p;
  SetKind kind = SetKind::Hypograph;
  int trials = 0;
  int completeness_failures = 0;
  int soundness_failures = 0;
  int heuristic_infeasibility_confirmations = 0;
  // semantics by suite: completeness = worst normalized pencil margin;
  // soundness and midpoint = worst membership margin; exclusion = smallest
  // probe residual seen.
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<FailureRecord> failures;
};

inline nlohmann::json report_to_json(const TrialReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures)
    failures.push_back(
        {{"seed", f.seed}, {"trial", f.trial}, {"n", f.n}});
  return nlohmann::json{
      {"seed", r.seed},
      {"n", r.n},
      {"p", to_string(r.p)},
      {"kind", to_string(r.kind)},
      {"trials", r.trials},
      {"completeness_failures", r.completeness_failures},
      {"soundness_failures", r.soundness_failures},
      {"heuristic_infeasibility_confirmations",
       r.heuristic_infeasibility_confirmations},
      {"worst_margin", r.worst_margin},
      {"failures", failures}};
}

// ---------------------------------------------------------------------------
// Completeness: canonical witness must clear every block.

inline TrialReport check_completeness(const SdrLift& lift, int trials, int n,
                                      std::uint64_t seed,
                                      double margin_tol = 1e-7) {
  TrialReport rep;
  rep.seed = seed;
  rep.n = n;
  rep.p = lift.p;
  rep.kind = lift.kind;
  rep.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 g = detail::trial_rng(seed, static_cast<std::uint64_t>(trial));
    SymMatrix x = sample_domain_point(lift.p, n, g);
    SymMatrix y = sample_member_y(lift.p, lift.kind, x, g);
    std::vector<SymMatrix> aux = canonical_witness(lift, x, y);
    double scale = std::max({1.0, norm_max(x), norm_max(y)});
    double m = evaluate(lift.pencil, x, y, aux).min_margin / scale;
    rep.worst_margin = std::min(rep.worst_margin, m);
    if (m < -margin_tol) {
      ++rep.completeness_failures;
      rep.failures.push_back({seed, trial, n});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fast strict-feasibility test used inside the hit-and-run walk: precompiled
// coefficient entries, one reusable buffer, in-place Cholesky per block.

namespace detail {

class PencilEvaluator {
 public:
  explicit PencilEvaluator(const BlockPencil& pencil) {
    for (const auto& b : pencil.blocks) {
      Block blk;
      blk.size = b.size;
      for (int i = 0; i < b.size; ++i)
        for (int j = 0; j < b.size; ++j)
          if (b.constant.at(i, j) != 0)
            blk.constant.push_back(
                {i, j, static_cast<double>(b.constant.at(i, j))});
      for (const auto& [slot, coeff] : b.terms) {
        Term t;
        t.slot = slot.kind == VarSlot::Kind::X   ? 0
                 : slot.kind == VarSlot::Kind::Y ? 1
                                                 : 2 + slot.index;
        for (int i = 0; i < b.size; ++i)
          for (int j = 0; j < b.size; ++j)
            if (coeff.at(i, j) != 0)
              t.entries.push_back({i, j, static_cast<double>(coeff.at(i, j))});
        if (!t.entries.empty()) blk.terms.push_back(std::move(t));
      }
      blocks_.push_back(std::move(blk));
    }
  }

  // Strict positive definiteness of every block at (x, y + s dy, aux + s daux).
  bool feasible(const SymMatrix& x, const SymMatrix& y,
                const std::vector<SymMatrix>& aux,
                const SymMatrix* dy = nullptr,
                const std::vector<SymMatrix>* daux = nullptr,
                double s = 0.0) const {
    const int n = x.n();
    for (const auto& blk : blocks_) {
      const int big = blk.size * n;
      buf_.assign(static_cast<std::size_t>(big) * big, 0.0);
      for (const auto& e : blk.constant)
        for (int d = 0; d < n; ++d)
          buf_[static_cast<std::size_t>(e.bi * n + d) * big + e.bj * n + d] +=
              e.v;
      for (const auto& t : blk.terms) {
        const SymMatrix* m =
            t.slot == 0 ? &x : t.slot == 1 ? &y : &aux[t.slot - 2];
        const SymMatrix* dm = nullptr;
        if (s != 0.0 && t.slot != 0)
          dm = t.slot == 1 ? dy : (daux ? &(*daux)[t.slot - 2] : nullptr);
        for (const auto& e : t.entries) {
          for (int i = 0; i < n; ++i) {
            std::size_t row = static_cast<std::size_t>(e.bi * n + i) * big +
                              e.bj * n;
            for (int j = 0; j < n; ++j) {
              double val = (*m)(i, j);
              if (dm) val += s * (*dm)(i, j);
              buf_[row + j] += e.v * val;
            }
          }
        }
      }
      if (!cholesky_pd(big)) return false;
    }
    return true;
  }

 private:
  struct Entry {
    int bi = 0, bj = 0;
    double v = 0.0;
  };
  struct Term {
    int slot = 0;  // 0 = X, 1 = Y, 2 + i = aux i
    std::vector<Entry> entries;
  };
  struct Block {
    int size = 0;
    std::vector<Entry> constant;
    std::vector<Term> terms;
  };

  bool cholesky_pd(int m) const {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= i; ++j) {
        double sum = buf_[static_cast<std::size_t>(i) * m + j];
        for (int q = 0; q < j; ++q)
          sum -= buf_[static_cast<std::size_t>(i) * m + q] *
                 buf_[static_cast<std::size_t>(j) * m + q];
        if (i == j) {
          if (!(sum > 0.0)) return false;  // also rejects NaN
          buf_[static_cast<std::size_t>(i) * m + i] = std::sqrt(sum);
        } else {
          buf_[static_cast<std::size_t>(i) * m + j] =
              sum / buf_[static_cast<std::size_t>(j) * m + j];
        }
      }
    }
    return true;
  }

  std::vector<Block> blocks_;
  mutable std::vector<double> buf_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Hit-and-run sampling of the lifted spectrahedron's (Y, aux) slice over a
// fixed X. Starts from the deterministic interior point, walks `steps`
// random directions, picks uniformly inside 0.99 of each feasible segment.
// Throws if the interior start is degenerate.

inline std::pair<SymMatrix, std::vector<SymMatrix>> sample_feasible(
    const SdrLift& lift, const SymMatrix& x, int steps, std::uint64_t seed) {
  auto start = interior_start(lift, x, 0.1);
  SymMatrix y = std::move(start.first);
  std::vector<SymMatrix> aux = std::move(start.second);
  double start_margin = evaluate(lift.pencil, x, y, aux).min_margin;
  if (start_margin <= 1e-9)
    throw std::runtime_error("sample_feasible: degenerate interior start, margin " +
                             std::to_string(start_margin));
  if (steps <= 0) return {std::move(y), std::move(aux)};

  const SymMatrix y0 = y;
  const std::vector<SymMatrix> aux0 = aux;
  detail::PencilEvaluator ev(lift.pencil);
  std::mt19937_64 g = detail::trial_rng(seed, 0x5EEDULL);
  const int n = x.n();
  const double cap = 100.0 * std::max(1.0, norm_max(x));
  std::vector<SymMatrix> daux(aux.size(), SymMatrix::identity(n));

  for (int step = 0; step < steps; ++step) {
    SymMatrix dy = detail::random_sym(n, g);
    for (auto& d : daux) d = detail::random_sym(n, g);
    auto clear = [&](double s) { return ev.feasible(x, y, aux, &dy, &daux, s); };
    // furthest strictly feasible magnitude along dir, capped
    auto reach = [&](double dir) {
      double lo = 0.0, hi = 0.125;
      while (hi < cap && clear(dir * hi)) {
        lo = hi;
        hi *= 2.0;
      }
      hi = std::min(hi, cap);
      if (clear(dir * hi)) return hi;
      for (int it = 0; it < 25; ++it) {
        double mid = 0.5 * (lo + hi);
        if (clear(dir * mid))
          lo = mid;
        else
          hi = mid;
      }
      return lo;
    };
    double fwd = reach(1.0);
    double back = reach(-1.0);
    if (!(fwd > 0.0) && !(back > 0.0)) continue;
    std::uniform_real_distribution<double> u(-0.99 * back, 0.99 * fwd);
    double s = u(g);
    y = y + s * dy;
    for (std::size_t i = 0; i < aux.size(); ++i) aux[i] = aux[i] + s * daux[i];
  }

  // The walk stays interior by convexity; if dense re-evaluation disagrees
  // at rounding level, pull back toward the start until it does not.
  for (int guard = 0; guard < 64; ++guard) {
    if (evaluate(lift.pencil, x, y, aux).min_margin >= 0.0) break;
    y = 0.5 * (y + y0);
    for (std::size_t i = 0; i < aux.size(); ++i)
      aux[i] = 0.5 * (aux[i] + aux0[i]);
  }
  return {std::move(y), std::move(aux)};
}

// ---------------------------------------------------------------------------
// Soundness: every sampled point of the projection must pass the dense
// membership oracle.

inline TrialReport check_soundness(const SdrLift& lift, int trials, int n,
                                   int steps, std::uint64_t seed,
                                   double member_tol = 1e-6) {
  TrialReport rep;
  rep.seed = seed;
  rep.n = n;
  rep.p = lift.p;
  rep.kind = lift.kind;
  rep.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 g = detail::trial_rng(seed, static_cast<std::uint64_t>(trial));
    SymMatrix x = detail::random_gram(n, g);
    for (int i = 0; i < n; ++i) x.set(i, i, x(i, i) + 0.25);
    auto point = sample_feasible(lift, x, steps,
                                 detail::mix64(seed) ^ static_cast<std::uint64_t>(trial));
    double m = member_margin(lift.p, lift.kind, x, point.first, member_tol);
    rep.worst_margin = std::min(rep.worst_margin, m);
    if (!member_oracle(lift.p, lift.kind, x, point.first, member_tol)) {
      ++rep.soundness_failures;
      rep.failures.push_back({seed, trial, n});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Infeasibility probe: alternating least-squares witness search. For each
// block, the psd-clip residual R is pushed back onto the block's auxiliary
// slots through the normal equations of Delta -> sum_a C_a (x) Delta_a
// (whose Gram matrix is <C_a, C_b>_F by the Kronecker inner product).
// Finding any witness with margin >= -1e-8 * scale certifies feasibility;
// exhausting the budget reports the best margin's magnitude as residual.

struct ProbeResult {
  bool feasible_found = false;
  double residual = 0.0;  // |best margin| when no witness was found
  int iterations = 0;
};

inline ProbeResult probe_infeasibility(const SdrLift& lift, const SymMatrix& x,
                                       const SymMatrix& y, int iters = 300,
                                       double tol = kDefaultTol) {
  const int n = x.n();
  std::vector<SymMatrix> aux;
  try {
    aux = canonical_witness(lift, x, y);
  } catch (const std::exception&) {
    aux.assign(static_cast<std::size_t>(lift.pencil.aux_count),
               SymMatrix::identity(n));
  }
  const double scale = std::max({1.0, norm_max(x), norm_max(y)});

  // per-block aux slots and factored Gram inverses, precomputed once
  struct BlockAux {
    std::vector<int> slots;          // aux indices
    std::vector<const IntMat*> coeff;
    std::vector<double> gram_inv;    // k x k row-major
  };
  std::vector<BlockAux> plan(lift.pencil.blocks.size());
  for (std::size_t bi = 0; bi < lift.pencil.blocks.size(); ++bi) {
    const auto& b = lift.pencil.blocks[bi];
    auto& pl = plan[bi];
    for (const auto& [slot, coeff] : b.terms)
      if (slot.kind == VarSlot::Kind::Aux) {
        pl.slots.push_back(slot.index);
        pl.coeff.push_back(&coeff);
      }
    const int k = static_cast<int>(pl.slots.size());
    if (k == 0) continue;
    std::vector<double> gram(static_cast<std::size_t>(k) * k, 0.0);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) {
        double dot = 0.0;
        for (int r = 0; r < b.size; ++r)
          for (int q = 0; q < b.size; ++q)
            dot += pl.coeff[a]->at(r, q) * pl.coeff[c]->at(r, q);
        gram[static_cast<std::size_t>(a) * k + c] = dot;
      }
    // tiny Gauss-Jordan inverse; coefficient patterns keep this well posed
    std::vector<double> inv(static_cast<std::size_t>(k) * k, 0.0);
    for (int a = 0; a < k; ++a) inv[static_cast<std::size_t>(a) * k + a] = 1.0;
    for (int col = 0; col < k; ++col) {
      int piv = col;
      for (int r = col + 1; r < k; ++r)
        if (std::abs(gram[static_cast<std::size_t>(r) * k + col]) >
            std::abs(gram[static_cast<std::size_t>(piv) * k + col]))
          piv = r;
      double pv = gram[static_cast<std::size_t>(piv) * k + col];
      if (std::abs(pv) < 1e-12) {
        pl.slots.clear();  // degenerate block: leave its aux untouched
        break;
      }
      for (int c = 0; c < k; ++c) {
        std::swap(gram[static_cast<std::size_t>(col) * k + c],
                  gram[static_cast<std::size_t>(piv) * k + c]);
        std::swap(inv[static_cast<std::size_t>(col) * k + c],
                  inv[static_cast<std::size_t>(piv) * k + c]);
      }
      for (int c = 0; c < k; ++c) {
        gram[static_cast<std::size_t>(col) * k + c] /= pv;
        inv[static_cast<std::size_t>(col) * k + c] /= pv;
      }
      for (int r = 0; r < k; ++r) {
        if (r == col) continue;
        double f = gram[static_cast<std::size_t>(r) * k + col];
        if (f == 0.0) continue;
        for (int c = 0; c < k; ++c) {
          gram[static_cast<std::size_t>(r) * k + c] -=
              f * gram[static_cast<std::size_t>(col) * k + c];
          inv[static_cast<std::size_t>(r) * k + c] -=
              f * inv[static_cast<std::size_t>(col) * k + c];
        }
      }
    }
    pl.gram_inv = std::move(inv);
  }

  double best = -std::numeric_limits<double>::infinity();
  for (int it = 0;; ++it) {
    double m = evaluate(lift.pencil, x, y, aux).min_margin;
    best = std::max(best, m);
    if (best >= -tol * scale) return {true, 0.0, it};
    if (it >= iters) break;
    for (std::size_t bi = 0; bi < lift.pencil.blocks.size(); ++bi) {
      const auto& pl = plan[bi];
      const int k = static_cast<int>(pl.slots.size());
      if (k == 0) continue;
      const auto& b = lift.pencil.blocks[bi];
      SymMatrix m_blk = evaluate_block(b, x, y, aux);
      Spectrum sp = eig_sym(m_blk);
      SymMatrix clip =
          map_eigenvalues(sp, [](double lam) { return std::max(lam, 0.0); });
      SymMatrix r = clip - m_blk;
      if (norm_max(r) <= 1e-15 * scale) continue;
      // backprojected residual per slot: P_a(i,j) = sum C_a(bi,bj) R(bi n+i, bj n+j)
      std::vector<SymMatrix> proj(static_cast<std::size_t>(k),
                                  SymMatrix::identity(n));
      for (int a = 0; a < k; ++a) {
        Mat pa = Mat::zero(n, n);
        for (int br = 0; br < b.size; ++br)
          for (int bq = 0; bq < b.size; ++bq) {
            int c = pl.coeff[a]->at(br, bq);
            if (c == 0) continue;
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j)
                pa.at(i, j) += c * r(br * n + i, bq * n + j);
          }
        proj[a] = SymMatrix::from_mat(pa, true);
      }
      for (int a = 0; a < k; ++a) {
        SymMatrix delta = 0.0 * proj[0];
        for (int c = 0; c < k; ++c)
          delta = delta +
                  pl.gram_inv[static_cast<std::size_t>(a) * k + c] * proj[c];
        aux[pl.slots[a]] = aux[pl.slots[a]] + delta;
      }
    }
  }
  return {false, std::max(0.0, -best), iters};
}

// ---------------------------------------------------------------------------
// Exclusion sweep: shifted non-members across sizes 1..n must all be flagged.

inline TrialReport check_exclusion(const SdrLift& lift, int trials, int n,
                                   std::uint64_t seed, int iters = 300,
                                   double shift = 0.1,
                                   double tol = kDefaultTol) {
  TrialReport rep;
  rep.seed = seed;
  rep.n = n;
  rep.p = lift.p;
  rep.kind = lift.kind;
  rep.trials = trials;
  double sign = lift.kind == SetKind::Hypograph ? 1.0 : -1.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 g = detail::trial_rng(seed, static_cast<std::uint64_t>(trial));
    int nn = 1 + trial % n;
    SymMatrix x = sample_domain_point(lift.p, nn, g);
    SymMatrix y =
        matrix_power(x, lift.p) + (sign * shift) * SymMatrix::identity(nn);
    ProbeResult pr = probe_infeasibility(lift, x, y, iters, tol);
    if (!pr.feasible_found) rep.worst_margin = std::min(rep.worst_margin, pr.residual);
    if (!pr.feasible_found && pr.residual >= 1e-3) {
      ++rep.heuristic_infeasibility_confirmations;
    } else {
      rep.failures.push_back({seed, trial, nn});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Scalar interval engine: for n = 1 the pencil is a system of 1 x 1 and 2 x 2
// scalar blocks. Interval propagation over (y, aux) with the three facts
// A >= 0, C >= 0, AC >= B^2 of a psd 2 x 2 block contracts geometrically onto
// the exact variable ranges, so the sup (hypograph) or inf (epigraph) of y
// over the slice converges to x^p. Every derived bound is necessary, so the
// result brackets the truth from outside at all times.

namespace detail {

struct ScalarCell {
  double c = 0.0;  // constant + x-coefficient * x
  std::vector<std::pair<int, int>> vars;  // (variable index, integer coeff)
};

inline double cell_sup(const ScalarCell& cell, const std::vector<double>& lo,
                       const std::vector<double>& up, int skip = -1) {
  double s = cell.c;
  for (const auto& [v, k] : cell.vars) {
    if (v == skip) continue;
    s += k > 0 ? k * up[v] : k * lo[v];
  }
  return s;
}

inline double cell_inf(const ScalarCell& cell, const std::vector<double>& lo,
                       const std::vector<double>& up, int skip = -1) {
  double s = cell.c;
  for (const auto& [v, k] : cell.vars) {
    if (v == skip) continue;
    s += k > 0 ? k * lo[v] : k * up[v];
  }
  return s;
}

// Tighten variable ranges from cell >= bound (necessary directions only).
inline void cell_ge(const ScalarCell& cell, double bound,
                    std::vector<double>& lo, std::vector<double>& up) {
  for (const auto& [v, k] : cell.vars) {
    double rest_hi = cell_sup(cell, lo, up, v);
    double t = (bound - rest_hi) / k;
    if (k > 0)
      lo[v] = std::max(lo[v], t);
    else
      up[v] = std::min(up[v], t);
  }
}

// Tighten variable ranges from cell <= bound.
inline void cell_le(const ScalarCell& cell, double bound,
                    std::vector<double>& lo, std::vector<double>& up) {
  for (const auto& [v, k] : cell.vars) {
    double rest_lo = cell_inf(cell, lo, up, v);
    double t = (bound - rest_lo) / k;
    if (k > 0)
      up[v] = std::min(up[v], t);
    else
      lo[v] = std::max(lo[v], t);
  }
}

}  // namespace detail

inline double scalar_max_y(const SdrLift& lift, double x,
                           int max_sweeps = 600) {
  if (!(x > 0.0))
    throw std::domain_error("scalar_max_y: x must be positive");
  const double kBig = 1e30;
  const int nv = 1 + lift.pencil.aux_count;  // variable 0 is y
  std::vector<double> lo(static_cast<std::size_t>(nv), -kBig);
  std::vector<double> up(static_cast<std::size_t>(nv), kBig);

  struct ScalarBlock {
    int size = 0;
    detail::ScalarCell cell[2][2];
  };
  std::vector<ScalarBlock> blocks;
  for (const auto& b : lift.pencil.blocks) {
    ScalarBlock sb;
    sb.size = b.size;
    if (b.size > 2)
      throw std::logic_error("scalar_max_y: unexpected block size");
    for (int i = 0; i < b.size; ++i)
      for (int j = 0; j < b.size; ++j)
        sb.cell[i][j].c = b.constant.at(i, j);
    for (const auto& [slot, coeff] : b.terms) {
      for (int i = 0; i < b.size; ++i)
        for (int j = 0; j < b.size; ++j) {
          int k = coeff.at(i, j);
          if (k == 0) continue;
          if (slot.kind == VarSlot::Kind::X)
            sb.cell[i][j].c += k * x;
          else
            sb.cell[i][j].vars.push_back(
                {slot.kind == VarSlot::Kind::Y ? 0 : 1 + slot.index, k});
        }
    }
    blocks.push_back(std::move(sb));
  }

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    std::vector<double> plo = lo, pup = up;
    for (const auto& sb : blocks) {
      if (sb.size == 1) {
        detail::cell_ge(sb.cell[0][0], 0.0, lo, up);
        continue;
      }
      const auto& a = sb.cell[0][0];
      const auto& bb = sb.cell[0][1];
      const auto& c = sb.cell[1][1];
      detail::cell_ge(a, 0.0, lo, up);
      detail::cell_ge(c, 0.0, lo, up);
      double a_hi = std::max(0.0, detail::cell_sup(a, lo, up));
      double c_hi = std::max(0.0, detail::cell_sup(c, lo, up));
      double bcap = std::sqrt(a_hi * c_hi);
      detail::cell_le(bb, bcap, lo, up);
      detail::cell_ge(bb, -bcap, lo, up);
      double b_lo = detail::cell_inf(bb, lo, up);
      double b_hi = detail::cell_sup(bb, lo, up);
      double b2min = (b_lo <= 0.0 && b_hi >= 0.0)
                         ? 0.0
                         : std::min(b_lo * b_lo, b_hi * b_hi);
      if (b2min > 0.0) {
        if (c_hi > 0.0) detail::cell_ge(a, b2min / c_hi, lo, up);
        if (a_hi > 0.0) detail::cell_ge(c, b2min / a_hi, lo, up);
      }
    }
    for (int v = 0; v < nv; ++v) {
      lo[v] = std::max(lo[v], -kBig);
      up[v] = std::min(up[v], kBig);
      change = std::max(change, std::abs(lo[v] - plo[v]));
      change = std::max(change, std::abs(up[v] - pup[v]));
    }
    double ret = lift.kind == SetKind::Hypograph ? up[0] : lo[0];
    double anchor = std::abs(ret) < 1e29 ? std::max(1.0, std::abs(ret)) : 1.0;
    if (sweep > 8 && change < 1e-17 * anchor) break;
  }
  return lift.kind == SetKind::Hypograph ? up[0] : lo[0];
}

// ---------------------------------------------------------------------------
// Midpoint convexity of the target set itself, via the dense oracle.

inline TrialReport midpoint_convexity_check(const Rational& p, SetKind kind,
                                            int trials, int n,
                                            std::uint64_t seed,
                                            double member_tol = 1e-6) {
  TrialReport rep;
  rep.seed = seed;
  rep.n = n;
  rep.p = p;
  rep.kind = kind;
  rep.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 g = detail::trial_rng(seed, static_cast<std::uint64_t>(trial));
    SymMatrix x1 = sample_domain_point(p, n, g);
    SymMatrix y1 = sample_member_y(p, kind, x1, g);
    SymMatrix x2 = sample_domain_point(p, n, g);
    SymMatrix y2 = sample_member_y(p, kind, x2, g);
    SymMatrix xm = 0.5 * (x1 + x2);
    SymMatrix ym = 0.5 * (y1 + y2);
    double m = member_margin(p, kind, xm, ym, member_tol);
    rep.worst_margin = std::min(rep.worst_margin, m);
    if (!member_oracle(p, kind, xm, ym, member_tol)) {
      ++rep.soundness_failures;
      rep.failures.push_back({seed, trial, n});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// The exact 2 x 2 obstruction: midpoints of the squaring map escape the
// quadratic sublevel set. All arithmetic is exact.

struct ExactRational2x2 {
  Rational a11, a12, a22;
};

struct CounterexampleResult {
  ExactRational2x2 z;  // midpoint of the two sample points
  ExactRational2x2 e;  // Z^2 - A
  Rational det;        // det(E)
  bool psd = false;    // whether E is positive semidefinite
};

inline CounterexampleResult multivariate_counterexample() {
  auto r = [](std::int64_t num, std::int64_t den = 1) {
    return make_rational(num, den);
  };
  ExactRational2x2 x1{r(2), r(0), r(1)};
  ExactRational2x2 x2{r(3), r(1), r(133, 64)};
  ExactRational2x2 a{r(4), r(0), r(1)};
  Rational half = r(1, 2);
  ExactRational2x2 z{half * (x1.a11 + x2.a11), half * (x1.a12 + x2.a12),
                     half * (x1.a22 + x2.a22)};
  // symmetric square: [[u, v], [v, w]]^2 = [[u^2+v^2, v(u+w)], [v(u+w), v^2+w^2]]
  ExactRational2x2 z2{z.a11 * z.a11 + z.a12 * z.a12, z.a12 * (z.a11 + z.a22),
                      z.a12 * z.a12 + z.a22 * z.a22};
  ExactRational2x2 e{z2.a11 - a.a11, z2.a12 - a.a12, z2.a22 - a.a22};
  Rational det = e.a11 * e.a22 - e.a12 * e.a12;
  Rational zero = r(0);
  bool psd = !(e.a11 < zero) && !(e.a22 < zero) && !(det < zero);
  return {z, e, det, psd};
}

}  // namespace powersdr
