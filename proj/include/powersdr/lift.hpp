#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "powersdr/pencil.hpp"
#include "powersdr/rational.hpp"
#include "powersdr/symmat.hpp"

namespace powersdr {

enum class SetKind { Hypograph, Epigraph };

// Which recursion step introduced a node of the construction tree.
enum class LiftRule {
  Half,             // base lift for exponent 1/2
  EvenReciprocal,   // 1/(2d) from 1/d
  OddReciprocal,    // 1/(2d+1) from 1/(d+1)
  MoreThanHalf,     // p in (1/2,1) from 2 - 1/p
  LessThanHalf,     // p in (0,1/2) from 1/d and d*p
  EpigraphShift,    // p in (1,2) from the hypograph of 2 - p
  EpigraphInverse,  // p in (-1,0) from the hypograph of -p
  Endpoint,         // p in {-1, 0, 1, 2}: no recursion
};

inline std::string to_string(LiftRule r) {
  switch (r) {
    case LiftRule::Half: return "half";
    case LiftRule::EvenReciprocal: return "even_reciprocal";
    case LiftRule::OddReciprocal: return "odd_reciprocal";
    case LiftRule::MoreThanHalf: return "more_than_half";
    case LiftRule::LessThanHalf: return "less_than_half";
    case LiftRule::EpigraphShift: return "epigraph_shift";
    case LiftRule::EpigraphInverse: return "epigraph_inverse";
    case LiftRule::Endpoint: return "endpoint";
  }
  return "?";
}

inline LiftRule lift_rule_from_string(const std::string& s) {
  for (LiftRule r : {LiftRule::Half, LiftRule::EvenReciprocal,
                     LiftRule::OddReciprocal, LiftRule::MoreThanHalf,
                     LiftRule::LessThanHalf, LiftRule::EpigraphShift,
                     LiftRule::EpigraphInverse, LiftRule::Endpoint})
    if (to_string(r) == s) return r;
  throw std::invalid_argument("unknown lift rule \"" + s + "\"");
}

// Fixed arity of each rule; lets a pre-order rule list rebuild the tree.
inline int lift_rule_children(LiftRule r) {
  switch (r) {
    case LiftRule::LessThanHalf: return 2;
    case LiftRule::Half:
    case LiftRule::Endpoint: return 0;
    default: return 1;
  }
}

inline std::string to_string(SetKind k) {
  return k == SetKind::Hypograph ? "hypograph" : "epigraph";
}

inline SetKind set_kind_from_string(const std::string& s) {
  if (s == "hypograph") return SetKind::Hypograph;
  if (s == "epigraph") return SetKind::Epigraph;
  throw std::invalid_argument("unknown set kind \"" + s + "\"");
}

// Closed-form value for one auxiliary slot: a power of X, except for the
// top-level slot of an inverse-rule epigraph lift which holds Y^{-1}.
struct WitnessEntry {
  bool inverse_of_y = false;
  Rational exponent;

  friend bool operator==(const WitnessEntry&, const WitnessEntry&) = default;
};

struct ProvNode {
  LiftRule rule = LiftRule::Endpoint;
  Rational p;
  std::vector<ProvNode> children;
};

struct SdrLift {
  Rational p;
  SetKind kind = SetKind::Hypograph;
  BlockPencil pencil;
  std::vector<WitnessEntry> witness;  // one entry per auxiliary, in slot order
  ProvNode provenance;
};

namespace detail {

inline PencilBlock make_block(IntMat constant,
                              std::vector<std::pair<VarSlot, IntMat>> terms) {
  PencilBlock b;
  b.size = constant.n;
  b.constant = std::move(constant);
  b.terms = std::move(terms);
  b.normalize();
  return b;
}

inline PencilBlock psd_block(const VarSlot& s) {
  return make_block(IntMat::zero(1), {{s, IntMat::from_rows({{1}})}});
}

inline PencilBlock dominance_block(const VarSlot& hi, const VarSlot& lo) {
  return make_block(IntMat::zero(1), {{hi, IntMat::from_rows({{1}})},
                                      {lo, IntMat::from_rows({{-1}})}});
}

inline void append_scaled_witness(std::vector<WitnessEntry>& dst,
                                  const std::vector<WitnessEntry>& src,
                                  const Rational& scale) {
  for (const auto& w : src) {
    if (w.inverse_of_y)
      throw std::logic_error("append_scaled_witness: inverse entry in a sub-lift");
    dst.push_back({false, scale * w.exponent});
  }
}

inline std::recursive_mutex& lift_mutex() {
  static std::recursive_mutex m;
  return m;
}

inline SdrLift make_half() {
  SdrLift lift;
  lift.p = make_rational(1, 2);
  lift.kind = SetKind::Hypograph;
  lift.provenance = {LiftRule::Half, lift.p, {}};
  lift.witness = {{false, make_rational(1, 2)}};
  lift.pencil.aux_count = 1;
  // [[X, W],[W, I]] >= 0, W - Y >= 0, Y >= 0
  lift.pencil.blocks.push_back(make_block(
      IntMat::from_rows({{0, 0}, {0, 1}}),
      {{VarSlot::x(), IntMat::from_rows({{1, 0}, {0, 0}})},
       {VarSlot::aux(0), IntMat::from_rows({{0, 1}, {1, 0}})}}));
  lift.pencil.blocks.push_back(dominance_block(VarSlot::aux(0), VarSlot::y()));
  lift.pencil.blocks.push_back(psd_block(VarSlot::y()));
  return lift;
}

inline SdrLift make_reciprocal(std::int64_t m);
inline SdrLift make_hypograph(const Rational& p);

}  // namespace detail

inline const SdrLift& build_reciprocal(std::int64_t m) {
  if (m < 2)
    throw std::domain_error("build_reciprocal: index must be at least 2");
  std::scoped_lock lk(detail::lift_mutex());
  static std::map<std::int64_t, SdrLift> cache;
  auto it = cache.find(m);
  if (it == cache.end())
    it = cache.emplace(m, detail::make_reciprocal(m)).first;
  return it->second;
}

inline const SdrLift& build_half() { return build_reciprocal(2); }

inline const SdrLift& build_hypograph(const Rational& p) {
  if (!(make_rational(0, 1) < p) || !(p < make_rational(1, 1)))
    throw std::domain_error("build_hypograph: exponent " + to_string(p) +
                            " outside (0, 1)");
  std::scoped_lock lk(detail::lift_mutex());
  static std::map<Rational, SdrLift> cache;
  auto it = cache.find(p);
  if (it == cache.end())
    it = cache.emplace(p, detail::make_hypograph(p)).first;
  return it->second;
}

namespace detail {

inline SdrLift make_reciprocal(std::int64_t m) {
  if (m == 2) return make_half();
  SdrLift lift;
  lift.p = make_rational(1, m);
  lift.kind = SetKind::Hypograph;
  if (m % 2 == 0) {
    std::int64_t d = m / 2;
    const SdrLift& inner = build_reciprocal(d);
    BlockPencil outer;
    outer.aux_count = 1;  // W
    // [[X, W],[W, I]] >= 0; then W bounds Y through the 1/d lift
    outer.blocks.push_back(make_block(
        IntMat::from_rows({{0, 0}, {0, 1}}),
        {{VarSlot::x(), IntMat::from_rows({{1, 0}, {0, 0}})},
         {VarSlot::aux(0), IntMat::from_rows({{0, 1}, {1, 0}})}}));
    lift.pencil = splice(outer, inner.pencil, VarSlot::aux(0), VarSlot::y());
    lift.witness = {{false, make_rational(1, 2)}};
    append_scaled_witness(lift.witness, inner.witness, make_rational(1, 2));
    lift.provenance = {LiftRule::EvenReciprocal, lift.p, {inner.provenance}};
  } else {
    std::int64_t d = (m - 1) / 2;
    const SdrLift& inner = build_reciprocal(d + 1);
    BlockPencil outer;
    outer.aux_count = 2;  // W, Z
    // [[X, W],[W, Z]] >= 0, Z - Y >= 0, Y >= 0; W caps Z through 1/(d+1)
    outer.blocks.push_back(make_block(
        IntMat::zero(2),
        {{VarSlot::x(), IntMat::from_rows({{1, 0}, {0, 0}})},
         {VarSlot::aux(0), IntMat::from_rows({{0, 1}, {1, 0}})},
         {VarSlot::aux(1), IntMat::from_rows({{0, 0}, {0, 1}})}}));
    outer.blocks.push_back(dominance_block(VarSlot::aux(1), VarSlot::y()));
    outer.blocks.push_back(psd_block(VarSlot::y()));
    lift.pencil = splice(outer, inner.pencil, VarSlot::aux(0), VarSlot::aux(1));
    Rational wexp = make_rational(d + 1, m);
    lift.witness = {{false, wexp}, {false, make_rational(1, m)}};
    append_scaled_witness(lift.witness, inner.witness, wexp);
    lift.provenance = {LiftRule::OddReciprocal, lift.p, {inner.provenance}};
  }
  return lift;
}

inline SdrLift make_hypograph(const Rational& p) {
  if (p == make_rational(1, 2)) return make_half();
  SdrLift lift;
  lift.p = p;
  lift.kind = SetKind::Hypograph;
  if (make_rational(1, 2) < p) {
    Rational q = conjugate_exponent(p);
    const SdrLift& inner = build_hypograph(q);
    BlockPencil outer;
    outer.aux_count = 2;  // W, Z
    // [[X, W],[W, Z]] >= 0, W - Y >= 0, Y >= 0; Z caps W through H_q
    outer.blocks.push_back(make_block(
        IntMat::zero(2),
        {{VarSlot::x(), IntMat::from_rows({{1, 0}, {0, 0}})},
         {VarSlot::aux(0), IntMat::from_rows({{0, 1}, {1, 0}})},
         {VarSlot::aux(1), IntMat::from_rows({{0, 0}, {0, 1}})}}));
    outer.blocks.push_back(dominance_block(VarSlot::aux(0), VarSlot::y()));
    outer.blocks.push_back(psd_block(VarSlot::y()));
    lift.pencil = splice(outer, inner.pencil, VarSlot::aux(0), VarSlot::aux(1));
    lift.witness = {{false, p},
                    {false, make_rational(2, 1) * p - make_rational(1, 1)}};
    append_scaled_witness(lift.witness, inner.witness, p);
    lift.provenance = {LiftRule::MoreThanHalf, p, {inner.provenance}};
  } else {
    std::int64_t d = scaling_index(p);
    const SdrLift& rec = build_reciprocal(d);
    const SdrLift& inner = build_hypograph(make_rational(d, 1) * p);
    BlockPencil outer;
    outer.aux_count = 1;  // W
    lift.pencil = splice(outer, rec.pencil, VarSlot::x(), VarSlot::aux(0));
    lift.pencil =
        splice(lift.pencil, inner.pencil, VarSlot::aux(0), VarSlot::y());
    Rational wexp = make_rational(1, d);
    lift.witness = {{false, wexp}};
    append_scaled_witness(lift.witness, rec.witness, make_rational(1, 1));
    append_scaled_witness(lift.witness, inner.witness, wexp);
    lift.provenance = {LiftRule::LessThanHalf, p,
                       {rec.provenance, inner.provenance}};
  }
  return lift;
}

inline SdrLift make_epigraph(const Rational& p) {
  SdrLift lift;
  lift.p = p;
  lift.kind = SetKind::Epigraph;
  if (make_rational(1, 1) < p) {
    Rational q = make_rational(2, 1) - p;
    const SdrLift& inner = build_hypograph(q);
    BlockPencil outer;
    outer.aux_count = 1;  // Z
    // [[Y, X],[X, Z]] >= 0, X >= 0; Z stays below X^{2-p}
    outer.blocks.push_back(make_block(
        IntMat::zero(2),
        {{VarSlot::x(), IntMat::from_rows({{0, 1}, {1, 0}})},
         {VarSlot::y(), IntMat::from_rows({{1, 0}, {0, 0}})},
         {VarSlot::aux(0), IntMat::from_rows({{0, 0}, {0, 1}})}}));
    outer.blocks.push_back(psd_block(VarSlot::x()));
    lift.pencil = splice(outer, inner.pencil, VarSlot::x(), VarSlot::aux(0));
    lift.witness = {{false, q}};
    append_scaled_witness(lift.witness, inner.witness, make_rational(1, 1));
    lift.provenance = {LiftRule::EpigraphShift, p, {inner.provenance}};
  } else {
    Rational q = make_rational(0, 1) - p;
    const SdrLift& inner = build_hypograph(q);
    BlockPencil outer;
    outer.aux_count = 1;  // Z
    // [[Z, I],[I, Y]] >= 0 forces Z >= Y^{-1}; Z stays below X^{-p}
    outer.blocks.push_back(make_block(
        IntMat::from_rows({{0, 1}, {1, 0}}),
        {{VarSlot::y(), IntMat::from_rows({{0, 0}, {0, 1}})},
         {VarSlot::aux(0), IntMat::from_rows({{1, 0}, {0, 0}})}}));
    lift.pencil = splice(outer, inner.pencil, VarSlot::x(), VarSlot::aux(0));
    lift.witness = {{true, make_rational(0, 1)}};
    append_scaled_witness(lift.witness, inner.witness, make_rational(1, 1));
    lift.provenance = {LiftRule::EpigraphInverse, p, {inner.provenance}};
  }
  return lift;
}

inline SdrLift make_endpoint(const Rational& p, SetKind kind) {
  SdrLift lift;
  lift.p = p;
  lift.kind = kind;
  lift.provenance = {LiftRule::Endpoint, p, {}};
  BlockPencil& pen = lift.pencil;
  pen.aux_count = 0;
  if (kind == SetKind::Hypograph) {
    if (p == make_rational(1, 1)) {
      pen.blocks.push_back(dominance_block(VarSlot::x(), VarSlot::y()));
    } else {  // p == 0: Y <= I
      pen.blocks.push_back(make_block(
          IntMat::from_rows({{1}}), {{VarSlot::y(), IntMat::from_rows({{-1}})}}));
    }
    pen.blocks.push_back(psd_block(VarSlot::y()));
  } else if (p == make_rational(2, 1)) {
    // [[Y, X],[X, I]] >= 0, X >= 0
    pen.blocks.push_back(make_block(
        IntMat::from_rows({{0, 0}, {0, 1}}),
        {{VarSlot::x(), IntMat::from_rows({{0, 1}, {1, 0}})},
         {VarSlot::y(), IntMat::from_rows({{1, 0}, {0, 0}})}}));
    pen.blocks.push_back(psd_block(VarSlot::x()));
  } else if (p == make_rational(-1, 1)) {
    // [[Y, I],[I, X]] >= 0
    pen.blocks.push_back(make_block(
        IntMat::from_rows({{0, 1}, {1, 0}}),
        {{VarSlot::x(), IntMat::from_rows({{0, 0}, {0, 1}})},
         {VarSlot::y(), IntMat::from_rows({{1, 0}, {0, 0}})}}));
  } else if (p == make_rational(1, 1)) {
    pen.blocks.push_back(dominance_block(VarSlot::y(), VarSlot::x()));
    pen.blocks.push_back(psd_block(VarSlot::x()));
  } else {  // p == 0: Y >= I
    pen.blocks.push_back(make_block(
        IntMat::from_rows({{-1}}), {{VarSlot::y(), IntMat::from_rows({{1}})}}));
    pen.blocks.push_back(psd_block(VarSlot::x()));
  }
  return lift;
}

inline const SdrLift& endpoint_cached(const Rational& p, SetKind kind) {
  std::scoped_lock lk(lift_mutex());
  static std::map<std::pair<Rational, int>, SdrLift> cache;
  auto key = std::make_pair(p, static_cast<int>(kind));
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_endpoint(p, kind)).first;
  return it->second;
}

}  // namespace detail

inline const SdrLift& build_epigraph(const Rational& p) {
  bool shift = make_rational(1, 1) < p && p < make_rational(2, 1);
  bool inverse = make_rational(-1, 1) < p && p < make_rational(0, 1);
  if (!shift && !inverse)
    throw std::domain_error("build_epigraph: exponent " + to_string(p) +
                            " outside (1, 2) and (-1, 0)");
  std::scoped_lock lk(detail::lift_mutex());
  static std::map<Rational, SdrLift> cache;
  auto it = cache.find(p);
  if (it == cache.end())
    it = cache.emplace(p, detail::make_epigraph(p)).first;
  return it->second;
}

inline const SdrLift& build(const Rational& p, SetKind kind) {
  const Rational zero = make_rational(0, 1);
  const Rational one = make_rational(1, 1);
  if (kind == SetKind::Hypograph) {
    if (p < zero || one < p)
      throw std::domain_error("build: hypograph exponent " + to_string(p) +
                              " outside [0, 1]");
    if (p == zero || p == one) return detail::endpoint_cached(p, kind);
    return build_hypograph(p);
  }
  const Rational two = make_rational(2, 1);
  const Rational minus_one = make_rational(-1, 1);
  if (p < minus_one || two < p || (zero < p && p < one))
    throw std::domain_error("build: epigraph exponent " + to_string(p) +
                            " outside [-1, 0] and [1, 2]");
  if (p == zero || p == one || p == two || p == minus_one)
    return detail::endpoint_cached(p, kind);
  return build_epigraph(p);
}

inline void collect_provenance(const ProvNode& n,
                               std::vector<std::pair<LiftRule, Rational>>& out) {
  out.push_back({n.rule, n.p});
  for (const auto& c : n.children) collect_provenance(c, out);
}

inline std::vector<std::pair<LiftRule, Rational>> provenance_list(
    const SdrLift& lift) {
  std::vector<std::pair<LiftRule, Rational>> out;
  collect_provenance(lift.provenance, out);
  return out;
}

// Exponent trail of the main recursion; reciprocal sub-branches of a
// less-than-half step are skipped, matching build_chain for hypographs.
inline std::vector<Rational> provenance_spine(const SdrLift& lift) {
  std::vector<Rational> out;
  const ProvNode* n = &lift.provenance;
  while (true) {
    out.push_back(n->p);
    if (n->rule == LiftRule::LessThanHalf)
      n = &n->children.at(1);
    else if (!n->children.empty())
      n = &n->children.front();
    else
      break;
  }
  return out;
}

inline std::vector<SymMatrix> canonical_witness(const SdrLift& lift,
                                                const SymMatrix& x,
                                                const SymMatrix& y,
                                                double tol = kDefaultTol) {
  Spectrum s = eig_sym(x);
  double band = tol * std::max(1.0, norm_max(x));
  for (double& lam : s.eigenvalues) {
    if (lam < -band)
      throw std::domain_error(
          "canonical_witness: X has an eigenvalue below the psd band");
    if (lam < 0.0) lam = 0.0;
  }
  std::vector<SymMatrix> out;
  out.reserve(lift.witness.size());
  for (const auto& w : lift.witness) {
    if (w.inverse_of_y) {
      out.push_back(matrix_power(y, make_rational(-1, 1), tol));
      continue;
    }
    double e = to_double(w.exponent);
    out.push_back(map_eigenvalues(s, [&](double lam) {
      if (lam == 0.0) return w.exponent.num == 0 ? 1.0 : 0.0;
      return std::pow(lam, e);
    }));
  }
  return out;
}

namespace detail {

// Scale factor per auxiliary making every block strictly feasible at
// Y = b * X^p. Works because each coupling block, restricted to an
// eigenvalue of X, factors into a power of the eigenvalue times an
// inequality in the scales alone (the witness exponents satisfy
// 2*e_W = e_X + e_Z on every two-by-two block).
inline void interior_scales(const ProvNode& node, double a, double b,
                            std::vector<double>& out) {
  auto mid = [](double lo, double hi) { return 0.5 * (lo + hi); };
  switch (node.rule) {
    case LiftRule::Half:
      out.push_back(mid(b, std::sqrt(a)));
      break;
    case LiftRule::EvenReciprocal: {
      double d = static_cast<double>(node.p.den / 2);
      double tw = mid(std::pow(b, d), std::sqrt(a));
      out.push_back(tw);
      interior_scales(node.children.at(0), tw, b, out);
      break;
    }
    case LiftRule::OddReciprocal: {
      std::int64_t m = node.p.den;
      double d1 = static_cast<double>((m - 1) / 2 + 1);  // d + 1
      double tw = mid(std::pow(b, d1), std::pow(a, d1 / static_cast<double>(m)));
      double tz = mid(std::max(b, tw * tw / a), std::pow(tw, 1.0 / d1));
      out.push_back(tw);
      out.push_back(tz);
      interior_scales(node.children.at(0), tw, tz, out);
      break;
    }
    case LiftRule::MoreThanHalf: {
      double pd = to_double(node.p);
      double qd = to_double(conjugate_exponent(node.p));
      double tw = mid(b, std::pow(a, pd));
      double tz = mid(tw * tw / a, std::pow(tw, qd));
      out.push_back(tw);
      out.push_back(tz);
      interior_scales(node.children.at(0), tw, tz, out);
      break;
    }
    case LiftRule::LessThanHalf: {
      std::int64_t d = scaling_index(node.p);
      double dp = to_double(node.p) * static_cast<double>(d);
      double tw =
          mid(std::pow(b, 1.0 / dp), std::pow(a, 1.0 / static_cast<double>(d)));
      out.push_back(tw);
      interior_scales(node.children.at(0), a, tw, out);
      interior_scales(node.children.at(1), tw, b, out);
      break;
    }
    case LiftRule::EpigraphShift: {
      double tz = mid(a * a / b, std::pow(a, 2.0 - to_double(node.p)));
      out.push_back(tz);
      interior_scales(node.children.at(0), a, tz, out);
      break;
    }
    case LiftRule::EpigraphInverse: {
      double tz = mid(1.0 / b, std::pow(a, -to_double(node.p)));
      out.push_back(tz);
      interior_scales(node.children.at(0), a, tz, out);
      break;
    }
    case LiftRule::Endpoint:
      break;
  }
}

}  // namespace detail

// Strictly feasible point of the lifted set over a positive definite X:
// Y = (1 -+ delta) X^p and each auxiliary a rescaled power of X.
inline std::pair<SymMatrix, std::vector<SymMatrix>> interior_start(
    const SdrLift& lift, const SymMatrix& x, double delta = 0.1) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::invalid_argument("interior_start: delta must lie in (0, 1)");
  Spectrum s = eig_sym(x);
  double band = kDefaultTol * std::max(1.0, norm_max(x));
  if (s.eigenvalues.empty() || s.eigenvalues.back() <= band)
    throw std::domain_error("interior_start: X must be positive definite");
  double b = lift.kind == SetKind::Hypograph ? 1.0 - delta : 1.0 + delta;
  std::vector<double> scales;
  detail::interior_scales(lift.provenance, 1.0, b, scales);
  if (scales.size() != lift.witness.size())
    throw std::logic_error("interior_start: scale/witness length mismatch");
  double pd = to_double(lift.p);
  SymMatrix y0 =
      map_eigenvalues(s, [&](double lam) { return b * std::pow(lam, pd); });
  std::vector<SymMatrix> aux;
  aux.reserve(scales.size());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    double e = lift.witness[i].inverse_of_y ? -pd
                                            : to_double(lift.witness[i].exponent);
    double t = scales[i];
    aux.push_back(
        map_eigenvalues(s, [&](double lam) { return t * std::pow(lam, e); }));
  }
  return {std::move(y0), std::move(aux)};
}

struct LiftStats {
  int aux_count = 0;
  int block_count = 0;
  int flat_dimension = 0;
  std::vector<Rational> chain;
};

inline LiftStats lift_stats(const SdrLift& lift) {
  LiftStats s;
  s.aux_count = lift.pencil.aux_count;
  s.block_count = static_cast<int>(lift.pencil.blocks.size());
  for (const auto& b : lift.pencil.blocks) s.flat_dimension += b.size;
  s.chain = provenance_spine(lift);
  return s;
}

}  // namespace powersdr
