#pragma once

#include <iosfwd>
#include <string>

#include "ricci_lab/field.hpp"

namespace rlab {

/// Field snapshot CSV: a header `# chart=<kind> n=<n> N0=<N0> Nt=<Nt> t=<time>` followed by
/// one row per storage node: the node multi-index, then the components in canonical packed
/// order, each written with 17 significant digits.
void write_snapshot(std::ostream& os, const SymTensorField& f, double t);
void write_snapshot(const std::string& path, const SymTensorField& f, double t);

struct Snapshot {
  double t;
  SymTensorField field;
};

/// Reads a snapshot back. The rank is inferred from the component count; vector-sized
/// payloads are returned with `vector_rank`. The header does not carry the tangential
/// period, so slab snapshots are rebuilt with `period`.
Snapshot read_snapshot(std::istream& is, double period = 1.0, Rank vector_rank = Rank::Vector);
Snapshot read_snapshot(const std::string& path, double period = 1.0,
                       Rank vector_rank = Rank::Vector);

/// `%.17g` formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace rlab
