#include "ricci_lab/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ricci_lab/errors.hpp"

namespace rlab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_snapshot(std::ostream& os, const SymTensorField& f, double t) {
  const Chart& chart = f.chart();
  os << "# chart=" << to_string(chart.kind()) << " n=" << chart.n() << " N0=" << chart.N0()
     << " Nt=" << chart.Nt() << " t=" << format_double(t) << '\n';
  std::string line;
  for (std::size_t node = 0; node < f.nodes(); ++node) {
    line.clear();
    const auto m = chart.multi_index(node);
    for (int a = 0; a < chart.axes(); ++a) {
      if (a) line += ',';
      line += std::to_string(m[a]);
    }
    for (int c = 0; c < f.components(); ++c) {
      line += ',';
      line += format_double(f.at(node, c));
    }
    line += '\n';
    os << line;
  }
}

void write_snapshot(const std::string& path, const SymTensorField& f, double t) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open snapshot for writing: " + path);
  write_snapshot(os, f, t);
}

Snapshot read_snapshot(std::istream& is, double period, Rank vector_rank) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# ", 0) != 0)
    throw DataError("snapshot: missing header line");
  std::map<std::string, std::string> kv;
  std::istringstream hs(header.substr(2));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw DataError("snapshot: malformed header token '" + tok + "'");
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"chart", "n", "N0", "Nt", "t"})
    if (!kv.count(key)) throw DataError(std::string("snapshot: header lacks ") + key);
  const ChartKind kind = chart_kind_from_string(kv["chart"]);
  const int n = std::stoi(kv["n"]);
  const int N0 = std::stoi(kv["N0"]);
  const int Nt = std::stoi(kv["Nt"]);
  const Chart chart = kind == ChartKind::SlabTorus ? Chart::slab_torus(n, N0, Nt, period)
                                                   : Chart::radial_ball(n, N0);
  const double t = std::stod(kv["t"]);

  std::string line;
  std::vector<std::vector<double>> rows;
  rows.reserve(chart.node_count());
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.size() != chart.node_count())
    throw DataError("snapshot: expected " + std::to_string(chart.node_count()) + " rows, got " +
                    std::to_string(rows.size()));
  const int ncomp = static_cast<int>(rows.front().size()) - chart.axes();
  Rank rank;
  if (ncomp == 1)
    rank = Rank::Scalar;
  else if (ncomp == chart.dim())
    rank = vector_rank;
  else if (ncomp == sym_size(chart.dim()))
    rank = Rank::Sym2;
  else
    throw DataError("snapshot: component count does not match any rank");
  SymTensorField f(chart, rank);
  for (std::size_t node = 0; node < rows.size(); ++node) {
    if (static_cast<int>(rows[node].size()) != ncomp + chart.axes())
      throw DataError("snapshot: ragged row " + std::to_string(node));
    std::array<int, kMaxDim> m{};
    for (int a = 0; a < chart.axes(); ++a) m[a] = static_cast<int>(rows[node][a]);
    const std::size_t idx = chart.index(m);
    for (int c = 0; c < ncomp; ++c) f.at(idx, c) = rows[node][chart.axes() + c];
  }
  return {t, std::move(f)};
}

Snapshot read_snapshot(const std::string& path, double period, Rank vector_rank) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open snapshot: " + path);
  return read_snapshot(is, period, vector_rank);
}

}  // namespace rlab
