#include "ricci_lab/families.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace rlab {

SymTensorField sample(const Chart& chart, Rank rank,
                      const std::function<double(const Point&, int)>& f) {
  SymTensorField out(chart, rank);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const Point p = node_point(chart, node);
    for (int c = 0; c < out.components(); ++c) out.at(node, c) = f(p, c);
  }
  return out;
}

namespace {

struct Mode {
  double amp;
  double k0;
  std::array<int, kMaxDim> k{};
  double phase;
};

}  // namespace

SymTensorField random_smooth_tensor(const Chart& chart, std::uint64_t seed, double amplitude) {
  if (chart.kind() != ChartKind::SlabTorus)
    throw std::invalid_argument("random_smooth_tensor: SlabTorus only");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> wave(-1, 1);
  const int ncomp = sym_size(chart.dim());
  const int modes = 3;
  std::vector<Mode> table;
  for (int c = 0; c < ncomp; ++c)
    for (int m = 0; m < modes; ++m) {
      Mode md;
      md.amp = amplitude * unit(rng) / modes;
      md.k0 = 0.5 + 0.5 * (unit(rng) + 1.0);
      for (int a = 1; a <= chart.n(); ++a) md.k[a] = wave(rng);
      md.phase = std::numbers::pi * unit(rng);
      table.push_back(md);
    }
  const double L = chart.L();
  return sample(chart, Rank::Sym2, [&](const Point& p, int c) {
    double v = 0.0;
    for (int m = 0; m < modes; ++m) {
      const Mode& md = table[c * modes + m];
      double arg = std::numbers::pi * md.k0 * p[0] + md.phase;
      for (int a = 1; a <= chart.n(); ++a) arg += 2.0 * std::numbers::pi * md.k[a] * p[a] / L;
      v += md.amp * std::sin(arg);
    }
    return v;
  });
}

MetricField random_smooth_metric(const Chart& chart, std::uint64_t seed, double amplitude) {
  SymTensorField g = random_smooth_tensor(chart, seed, amplitude);
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (int i = 0; i < chart.dim(); ++i) g.set(node, i, i, g.get(node, i, i) + 1.0);
  return MetricField(std::move(g));
}

MetricField conformal_exp(const Chart& slab, double c) {
  const int d = slab.dim();
  return MetricField(sample(slab, Rank::Sym2, [&](const Point& p, int comp) {
    for (int i = 0; i < d; ++i)
      if (sym_index(i, i, d) == comp) return std::exp(2.0 * c * p[0]);
    return 0.0;
  }));
}

MetricField warped_slab(const Chart& slab, const std::function<double(double)>& psi) {
  if (slab.kind() != ChartKind::SlabTorus) throw std::invalid_argument("warped_slab: SlabTorus only");
  const int d = slab.dim();
  return MetricField(sample(slab, Rank::Sym2, [&](const Point& p, int comp) {
    if (comp == 0) return 1.0;
    for (int i = 1; i < d; ++i)
      if (sym_index(i, i, d) == comp) {
        const double s = psi(p[0]);
        return s * s;
      }
    return 0.0;
  }));
}

}  // namespace rlab
