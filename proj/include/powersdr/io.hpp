#pragma once

// Serialization: pencil/matrix JSON schemas and the SDPA sparse (.dat-s)
// feasibility export. JSON uses nlohmann::json, whose sorted object keys
// make round-trips byte-stable once term order is normalized.

#include <json.hpp>

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "powersdr/lift.hpp"
#include "powersdr/pencil.hpp"
#include "powersdr/symmat.hpp"

namespace powersdr {

inline nlohmann::json slot_to_json(const VarSlot& s) {
  switch (s.kind) {
    case VarSlot::Kind::X: return "X";
    case VarSlot::Kind::Y: return "Y";
    default: return nlohmann::json{{"Aux", s.index}};
  }
}

inline VarSlot slot_from_json(const nlohmann::json& j, int aux_count) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "X") return VarSlot::x();
    if (s == "Y") return VarSlot::y();
    throw std::invalid_argument("slot: unknown name '" + s + "'");
  }
  if (j.is_object() && j.size() == 1 && j.contains("Aux")) {
    int idx = j.at("Aux").get<int>();
    if (idx < 0 || idx >= aux_count)
      throw std::invalid_argument("slot: aux index " + std::to_string(idx) +
                                  " outside aux_count " +
                                  std::to_string(aux_count));
    return VarSlot::aux(idx);
  }
  throw std::invalid_argument("slot: expected \"X\", \"Y\" or {\"Aux\": i}");
}

inline nlohmann::json intmat_to_json(const IntMat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.n; ++j) row.push_back(m.at(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline IntMat intmat_from_json(const nlohmann::json& j, int expect_size) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("coeff: expected a non-empty array of rows");
  std::vector<std::vector<int>> rows;
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != static_cast<int>(j.size()))
      throw std::invalid_argument("coeff: rows must form a square matrix");
    rows.push_back(row.get<std::vector<int>>());
  }
  if (expect_size > 0 && static_cast<int>(rows.size()) != expect_size)
    throw std::invalid_argument("coeff: size " + std::to_string(rows.size()) +
                                " does not match block size " +
                                std::to_string(expect_size));
  return IntMat::from_rows(rows);  // throws if asymmetric
}

inline nlohmann::json pencil_to_json(const BlockPencil& p) {
  nlohmann::json j;
  j["aux_count"] = p.aux_count;
  j["blocks"] = nlohmann::json::array();
  for (auto b : p.blocks) {
    b.normalize();
    nlohmann::json jb;
    jb["size"] = b.size;
    jb["constant"] = intmat_to_json(b.constant);
    jb["terms"] = nlohmann::json::array();
    for (const auto& [slot, coeff] : b.terms)
      jb["terms"].push_back(
          {{"slot", slot_to_json(slot)}, {"coeff", intmat_to_json(coeff)}});
    j["blocks"].push_back(jb);
  }
  return j;
}

inline BlockPencil pencil_from_json(const nlohmann::json& j) {
  BlockPencil p;
  p.aux_count = j.at("aux_count").get<int>();
  if (p.aux_count < 0)
    throw std::invalid_argument("pencil: negative aux_count");
  for (const auto& jb : j.at("blocks")) {
    PencilBlock b;
    b.size = jb.at("size").get<int>();
    if (b.size < 1) throw std::invalid_argument("pencil: block size < 1");
    b.constant = intmat_from_json(jb.at("constant"), b.size);
    for (const auto& jt : jb.at("terms"))
      b.terms.push_back({slot_from_json(jt.at("slot"), p.aux_count),
                         intmat_from_json(jt.at("coeff"), b.size)});
    b.normalize();
    p.blocks.push_back(std::move(b));
  }
  return p;
}

inline nlohmann::json symmatrix_to_json(const SymMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.n(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.n(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return nlohmann::json{{"n", m.n()}, {"rows", rows}};
}

inline SymMatrix symmatrix_from_json(const nlohmann::json& j,
                                     bool symmetrize = false) {
  if (!j.is_object() || !j.contains("n") || !j.contains("rows"))
    throw std::invalid_argument(
        "matrix: expected {\"n\": int, \"rows\": [[...], ...]}");
  int n = j.at("n").get<int>();
  const auto& rows = j.at("rows");
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    throw std::invalid_argument("matrix: row count does not match n");
  std::vector<std::vector<double>> data;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("matrix: ragged rows");
    data.push_back(row.get<std::vector<double>>());
  }
  return SymMatrix::from_rows(data, symmetrize);
}

// SDPA sparse feasibility export. X and Y are fixed and folded into the
// constant matrix F0; each aux contributes n(n+1)/2 scalar variables (upper
// triangle, row-major). Convention: find v with  sum_k v_k F_k - F0 >= 0,
// zero objective.
inline nlohmann::json lift_to_json(const SdrLift& lift) {
  nlohmann::json j = pencil_to_json(lift.pencil);
  j["p"] = to_string(lift.p);
  j["kind"] = to_string(lift.kind);
  nlohmann::json w = nlohmann::json::array();
  for (const auto& e : lift.witness) {
    if (e.inverse_of_y)
      w.push_back("inverse_of_y");
    else
      w.push_back(nlohmann::json{{"power_of_x", to_string(e.exponent)}});
  }
  j["witness"] = w;
  nlohmann::json prov = nlohmann::json::array();
  for (const auto& [rule, p] : provenance_list(lift))
    prov.push_back(
        nlohmann::json{{"rule", to_string(rule)}, {"p", to_string(p)}});
  j["provenance"] = prov;
  return j;
}

namespace detail {

inline ProvNode provenance_node_from_json(const nlohmann::json& arr,
                                          std::size_t& pos) {
  if (!arr.is_array() || pos >= arr.size())
    throw std::invalid_argument("lift: truncated provenance list");
  const auto& item = arr.at(pos++);
  ProvNode n;
  n.rule = lift_rule_from_string(item.at("rule").get<std::string>());
  n.p = parse_rational(item.at("p").get<std::string>());
  int k = lift_rule_children(n.rule);
  for (int i = 0; i < k; ++i)
    n.children.push_back(provenance_node_from_json(arr, pos));
  return n;
}

}  // namespace detail

inline SdrLift lift_from_json(const nlohmann::json& j) {
  SdrLift lift;
  lift.pencil = pencil_from_json(j);
  lift.p = parse_rational(j.at("p").get<std::string>());
  lift.kind = set_kind_from_string(j.at("kind").get<std::string>());
  const auto& w = j.at("witness");
  if (!w.is_array() ||
      static_cast<int>(w.size()) != lift.pencil.aux_count)
    throw std::invalid_argument("lift: witness length != aux_count");
  for (const auto& e : w) {
    if (e.is_string()) {
      if (e.get<std::string>() != "inverse_of_y")
        throw std::invalid_argument("lift: unknown witness entry");
      lift.witness.push_back({true, make_rational(0, 1)});
    } else {
      lift.witness.push_back(
          {false, parse_rational(e.at("power_of_x").get<std::string>())});
    }
  }
  std::size_t pos = 0;
  lift.provenance = detail::provenance_node_from_json(j.at("provenance"), pos);
  if (pos != j.at("provenance").size())
    throw std::invalid_argument("lift: trailing provenance entries");
  if (!(lift.provenance.p == lift.p))
    throw std::invalid_argument("lift: provenance root disagrees with p");
  return lift;
}

inline std::string to_sdpa(const BlockPencil& p, const SymMatrix& x,
                           const SymMatrix& y,
                           const std::vector<std::string>& comments) {
  int n = x.n();
  if (y.n() != n) throw std::invalid_argument("to_sdpa: X/Y size mismatch");
  int tri = n * (n + 1) / 2;
  int mdim = p.aux_count * tri;

  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };

  std::ostringstream out;
  for (const auto& c : comments) out << "* " << c << "\n";
  out << "* n = " << n
      << "; one scalar variable per upper-triangle entry of each aux\n";
  out << mdim << " = mDIM\n";
  out << p.blocks.size() << " = nBLOCK\n";
  for (std::size_t b = 0; b < p.blocks.size(); ++b)
    out << (b ? " " : "") << p.blocks[b].size * n;
  out << "\n";
  for (int k = 0; k < mdim; ++k) out << (k ? " " : "") << 0;
  if (mdim == 0) out << 0;  // degenerate but keeps the line non-empty
  out << "\n";

  // F0 = -(constant + X/Y terms) per block
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    const auto& blk = p.blocks[b];
    Mat m0 = Mat::zero(blk.size * n, blk.size * n);
    auto accumulate = [&](const IntMat& coeff, const SymMatrix* s) {
      for (int r = 0; r < blk.size; ++r)
        for (int c = 0; c < blk.size; ++c) {
          int cv = coeff.at(r, c);
          if (cv == 0) continue;
          for (int i = 0; i < n; ++i) {
            if (s == nullptr)
              m0.at(r * n + i, c * n + i) += cv;
            else
              for (int jj = 0; jj < n; ++jj)
                m0.at(r * n + i, c * n + jj) += cv * (*s)(i, jj);
          }
        }
    };
    accumulate(blk.constant, nullptr);
    for (const auto& [slot, coeff] : blk.terms) {
      if (slot.kind == VarSlot::Kind::X) accumulate(coeff, &x);
      if (slot.kind == VarSlot::Kind::Y) accumulate(coeff, &y);
    }
    for (int i = 0; i < blk.size * n; ++i)
      for (int j = i; j < blk.size * n; ++j)
        if (m0.at(i, j) != 0.0)
          out << "0 " << b + 1 << " " << i + 1 << " " << j + 1 << " "
              << fmt(-m0.at(i, j)) << "\n";
  }

  // F_k: aux a, upper-triangle entry t -> coefficient matrix C_a (x) S_t
  for (int a = 0; a < p.aux_count; ++a) {
    for (int t = 0; t < tri; ++t) {
      int k = a * tri + t + 1;
      // t-th upper-triangle pair, row-major
      int ti = 0, tj = 0, left = t;
      for (int i = 0; i < n; ++i) {
        int rowlen = n - i;
        if (left < rowlen) {
          ti = i;
          tj = i + left;
          break;
        }
        left -= rowlen;
      }
      for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        const auto& blk = p.blocks[b];
        const IntMat* coeff = nullptr;
        for (const auto& [slot, cm] : blk.terms)
          if (slot == VarSlot::aux(a)) coeff = &cm;
        if (coeff == nullptr) continue;
        std::map<std::pair<int, int>, int> cells;
        for (int r = 0; r < blk.size; ++r)
          for (int c = 0; c < blk.size; ++c) {
            int cv = coeff->at(r, c);
            if (cv == 0) continue;
            auto put = [&](int u, int v) {
              int gi = r * n + u, gj = c * n + v;
              if (gi <= gj) cells[{gi, gj}] = cv;
            };
            put(ti, tj);
            if (ti != tj) put(tj, ti);
          }
        for (const auto& [cell, cv] : cells)
          out << k << " " << b + 1 << " " << cell.first + 1 << " "
              << cell.second + 1 << " " << cv << "\n";
      }
    }
  }
  return out.str();
}

}  // namespace powersdr
