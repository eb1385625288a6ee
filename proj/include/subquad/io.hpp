// Copyright (c) 2026 The subquad authors
// SPDX-License-Identifier: MIT

#ifndef SUBQUAD_IO_HPP
#define SUBQUAD_IO_HPP

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "subquad/common.hpp"
#include "subquad/grid.hpp"
#include "subquad/solvers.hpp"
#include "subquad/system.hpp"

namespace subquad {

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// RFC-4180-style quoting: wrap when the field contains a comma, quote, or
/// newline; embedded quotes are doubled.
inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

/// Plain-text state file: a header (dim, counts, lengths) and one node row
/// per line — "x u v" in one dimension, "x y u v" in two — at full double
/// precision, in grid index order.
inline void write_state_file(const std::string& path, const GridDomain& grid,
                             const StatePair& st) {
  if (static_cast<int>(st.u.size()) != grid.n_nodes())
    throw UsageError("write_state_file: state does not match grid");
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write state file '" + path + "'");
  out << "dim " << grid.dim << "\n";
  out << "counts " << grid.counts[0];
  if (grid.dim == 2) out << " " << grid.counts[1];
  out << "\n";
  out << "lengths " << format_double(grid.lengths[0]);
  if (grid.dim == 2) out << " " << format_double(grid.lengths[1]);
  out << "\n";
  for (int i = 0; i < grid.n_nodes(); ++i) {
    out << format_double(grid.node_x(i));
    if (grid.dim == 2) out << " " << format_double(grid.node_y(i));
    out << " " << format_double(st.u[static_cast<std::size_t>(i)]) << " "
        << format_double(st.v[static_cast<std::size_t>(i)]) << "\n";
  }
  if (!out) throw UsageError("error while writing state file '" + path + "'");
}

struct StateFileHeader {
  int dim = 0;
  std::array<int, 2> counts{0, 0};
  std::array<double, 2> lengths{0.0, 0.0};
};

inline StatePair read_state_file(const std::string& path, StateFileHeader* header_out = nullptr) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open state file '" + path + "'");
  auto bad = [&path](const std::string& what) -> UsageError {
    return UsageError("state file '" + path + "': " + what);
  };

  StateFileHeader hdr;
  std::string word;
  if (!(in >> word) || word != "dim" || !(in >> hdr.dim)) throw bad("missing dim header");
  if (hdr.dim != 1 && hdr.dim != 2) throw bad("dim must be 1 or 2");
  if (!(in >> word) || word != "counts" || !(in >> hdr.counts[0]))
    throw bad("missing counts header");
  if (hdr.dim == 2 && !(in >> hdr.counts[1])) throw bad("missing second count");
  if (!(in >> word) || word != "lengths" || !(in >> hdr.lengths[0]))
    throw bad("missing lengths header");
  if (hdr.dim == 2 && !(in >> hdr.lengths[1])) throw bad("missing second length");

  const int n = hdr.dim == 1 ? hdr.counts[0] : hdr.counts[0] * hdr.counts[1];
  if (n < 3) throw bad("node count too small");
  StatePair st = zero_state(n);
  double x, y, u, v;
  for (int i = 0; i < n; ++i) {
    if (hdr.dim == 1) {
      if (!(in >> x >> u >> v)) throw bad("truncated at node " + std::to_string(i));
    } else {
      if (!(in >> x >> y >> u >> v)) throw bad("truncated at node " + std::to_string(i));
    }
    st.u[static_cast<std::size_t>(i)] = u;
    st.v[static_cast<std::size_t>(i)] = v;
  }
  if (header_out != nullptr) *header_out = hdr;
  return st;
}

/// Per-solution records for a single-lambda run: one row per solution with
/// its classification, energy, residual, and the state file it was saved to.
inline void write_solutions_csv(const std::string& path, double lambda,
                                const std::vector<Solution>& sols,
                                const std::vector<std::string>& state_paths) {
  if (sols.size() != state_paths.size())
    throw UsageError("write_solutions_csv: path list does not match solutions");
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << "index,lambda,classification,energy,residual_norm,iterations,start_id,state_file\n";
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    out << i << "," << format_double(lambda) << "," << to_string(s.classification) << ","
        << format_double(s.energy) << "," << format_double(s.residual_norm) << ","
        << s.iterations << "," << s.start_id << "," << csv_quote(state_paths[i]) << "\n";
  }
  if (!out) throw UsageError("error while writing '" + path + "'");
}

/// Sweep CSV with exactly these columns:
/// lambda, lambda_times_sF, lambda_times_SF, n_nontrivial, min_energy,
/// max_residual, status. Rows are sorted by lambda.
inline std::string sweep_csv_text(const SweepReport& rep) {
  std::ostringstream out;
  out << "lambda,lambda_times_sF,lambda_times_SF,n_nontrivial,min_energy,max_residual,status\n";
  for (const auto& row : rep.rows) {
    out << format_double(row.lambda) << "," << format_double(row.lambda * rep.s_F) << ","
        << format_double(row.lambda * rep.S_F) << "," << row.n_nontrivial << ","
        << format_double(row.min_energy) << "," << format_double(row.max_residual) << ","
        << csv_quote(row.status) << "\n";
  }
  return out.str();
}

inline void write_sweep_csv(const std::string& path, const SweepReport& rep) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << sweep_csv_text(rep);
  if (!out) throw UsageError("error while writing '" + path + "'");
}

}  // namespace subquad

#endif
