#include "ricci_lab/wellposedness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/flow.hpp"

namespace rlab {

// ------------------------------------------------------------------ symbol

double SymbolSystem::zeta_norm2() const {
  double s = 0.0;
  for (double z : zeta) s += z * z;
  return s;
}

bool SymbolSystem::admissible(double delta1) const {
  return p.real() >= -delta1 * zeta_norm2() && tau_hat != Complex(0.0, 0.0);
}

Complex SymbolSystem::determinant() const { return matrix.partialPivLu().determinant(); }

double SymbolSystem::normalized_determinant() const {
  const double w = std::abs(p) + zeta_norm2();
  return std::abs(determinant()) / std::pow(w, 0.5 * (n + 2));
}

int SymbolSystem::rank() const {
  Eigen::FullPivLU<ComplexMat> lu(matrix);
  lu.setThreshold(1e-12);
  return static_cast<int>(lu.rank());
}

bool SymbolSystem::elimination_succeeds() const {
  const double w = std::abs(p) + zeta_norm2();
  if (!(std::abs(tau_hat) > 1e-12 * std::sqrt(w))) return false;
  const Complex factor = p * static_cast<double>(n) + 2.0 * zeta_norm2() * (n - 1.0);
  return std::abs(factor) > 1e-12 * w;
}

SymbolSystem symbol_matrix(int n, Complex p, const std::vector<double>& zeta) {
  if (n < 1) throw std::invalid_argument("symbol_matrix needs n >= 1");
  if (static_cast<int>(zeta.size()) != n) throw std::invalid_argument("zeta must have n entries");
  SymbolSystem s;
  s.n = n;
  s.p = p;
  s.zeta = zeta;
  const Complex I(0.0, 1.0);
  s.tau_hat = I * std::sqrt(p + s.zeta_norm2());
  const Complex tau = s.tau_hat;
  // columns: 0 = h00, 1..n = h0mu, n+1 = phi; tr h = h00 + n phi
  ComplexMat m = ComplexMat::Zero(n + 2, n + 2);
  const int phi = n + 1;
  const double nd = n;
  m(0, 0) = I * tau - 0.5 * I * tau;
  for (int a = 0; a < n; ++a) m(0, 1 + a) = I * zeta[a];
  m(0, phi) = -0.5 * I * tau * nd;
  for (int mu = 0; mu < n; ++mu) {
    const int r = 1 + mu;
    m(r, 1 + mu) = I * tau;
    m(r, 0) = -0.5 * I * zeta[mu];
    m(r, phi) = I * zeta[mu] - 0.5 * I * zeta[mu] * nd;
  }
  m(phi, phi) = I * tau * nd;
  for (int a = 0; a < n; ++a) m(phi, 1 + a) = -2.0 * I * zeta[a];
  s.matrix = std::move(m);
  return s;
}

SymbolSample classify_sample(int n, Complex p, const std::vector<double>& zeta, double delta1) {
  const SymbolSystem s = symbol_matrix(n, p, zeta);
  SymbolSample out{p, zeta, 0.0, false, false};
  if (!s.admissible(delta1)) {
    out.excluded = true;
    return out;
  }
  out.normalized_det = s.normalized_determinant();
  out.failing = !(out.normalized_det > kSymbolFailTolerance);
  return out;
}

namespace {

// 53-bit uniform in [0, 1), independent of the standard library's distribution code.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

std::vector<double> unit_direction(std::mt19937_64& rng, int n) {
  std::vector<double> v(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = 2.0 * uniform01(rng) - 1.0;
      norm += x * x;
    }
  } while (norm > 1.0 || norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

ComplementingReport complementing_check(int n, int num_samples, double delta1,
                                        std::uint64_t seed) {
  if (!(delta1 > 0.0 && delta1 < 1.0)) throw std::invalid_argument("delta1 must lie in (0, 1)");
  if (n < 1 || num_samples < 1) throw std::invalid_argument("need n >= 1 and at least one sample");
  ComplementingReport rep;
  rep.n = n;
  rep.samples = num_samples;
  rep.delta1 = delta1;
  rep.seed = seed;
  rep.min_normalized_det = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int k = 0; k < num_samples; ++k) {
    const double zn = std::pow(10.0, -2.0 + 4.0 * uniform01(rng));
    std::vector<double> zeta = unit_direction(rng, n);
    double z2 = 0.0;
    for (double& z : zeta) {
      z *= zn;
      z2 += z * z;  // the same sum the admissibility test forms
    }
    const double pmax = 100.0 * z2;
    Complex p;
    if (k % 10 == 0) {
      p = 0.0;
    } else if (k % 5 == 4) {
      const double re = -delta1 * z2;
      const double bound = std::sqrt(pmax * pmax - re * re);
      p = Complex(re, bound * (2.0 * uniform01(rng) - 1.0));
    } else {
      do {
        p = Complex(-delta1 * z2 + (pmax + delta1 * z2) * uniform01(rng),
                    pmax * (2.0 * uniform01(rng) - 1.0));
      } while (std::abs(p) > pmax);
    }
    SymbolSample s = classify_sample(n, p, zeta, delta1);
    if (s.excluded) {
      ++rep.excluded;
    } else {
      rep.min_normalized_det = std::min(rep.min_normalized_det, s.normalized_det);
      if (s.failing) ++rep.failing;
    }
    rep.sample_list.push_back(std::move(s));
  }
  return rep;
}

// ------------------------------------------------------------- compatibility

namespace {

double max_abs(const BoundaryField& f) { return f.max_abs(); }

SmallMat traceless(const SmallMat& m, const SmallMat& gamma) {
  const int n = static_cast<int>(m.rows());
  const double tr = gamma.llt().solve(m).trace() / n;
  return m - tr * gamma;
}

BoundaryField induced_at(const MetricField& g0, const SymTensorField& h1, double tau, Side s) {
  if (tau == 0.0) return induced_metric(g0, s);
  SymTensorField g = g0.tensor();
  SymTensorField step = h1;
  step *= tau;
  g += step;
  return induced_metric(MetricField(std::move(g)), s);
}

// one-sided derivative at 0 from samples at 0, dt, 2 dt
double d0(double f0, double f1, double f2, double dt) { return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * dt); }

}  // namespace

CompatReport compat_check(const MetricField& g0, const BoundaryDatum& datum,
                          const BackgroundFamily& background) {
  CompatReport rep;
  const double dt = kCompatStep;
  const Chart& chart = g0.chart();
  const int n = chart.n();

  const MetricField gt0 = background.at(0.0);
  if (gt0.chart() != chart) throw DataError("background lives on a different chart");
  {
    const auto a = gt0.tensor().values();
    const auto b = g0.tensor().values();
    rep.gt_initial = std::equal(a.begin(), a.end(), b.begin(), b.end());
  }
  if (!rep.gt_initial) throw DataError("background family violates gt(0) = g0");
  {
    const MetricField g1 = background.at(dt);
    const MetricField g2 = background.at(2.0 * dt);
    for (std::size_t k = 0; k < gt0.tensor().values().size(); ++k)
      rep.gt_rate = std::max(rep.gt_rate, std::abs(d0(gt0.tensor().values()[k], g1.tensor().values()[k],
                                                      g2.tensor().values()[k], dt)));
    rep.gt_aligned = rep.gt_rate <= 1e-8;
  }

  SymTensorField h1 = ricci(g0);
  h1 *= -2.0;

  for (Side s : chart.sides()) {
    const SideDatum& sd = datum.side(s);
    const BoundaryField H0 = mean_curvature(g0, s);
    const BoundaryField gT0 = induced_at(g0, h1, 0.0, s);
    const BoundaryField gT1 = induced_at(g0, h1, dt, s);
    const BoundaryField gT2 = induced_at(g0, h1, 2.0 * dt, s);
    const BoundaryField Hd = mean_curvature_linearized(g0, h1, s);
    const BoundaryField c0 = conformal_factor(g0, sd.gamma.frame(0.0), s);

    rep.order0_conf.residual =
        std::max(rep.order0_conf.residual, max_abs(conformal_residual(g0, sd.gamma.frame(0.0), s)));
    for (std::size_t b = 0; b < H0.count; ++b) {
      const SmallMat m0 = unpack_boundary(gT0, b, n);
      const SmallMat m1 = unpack_boundary(gT1, b, n);
      const SmallMat m2 = unpack_boundary(gT2, b, n);
      const double e0 = sd.eta(b, 0.0, m0);
      const double e1 = sd.eta(b, dt, m1);
      const double e2 = sd.eta(b, 2.0 * dt, m2);
      const SmallMat y0 = sd.gamma.at(b, 0.0);
      const SmallMat y1 = sd.gamma.at(b, dt);
      const SmallMat y2 = sd.gamma.at(b, 2.0 * dt);

      rep.data_scale = std::max({rep.data_scale, std::abs(e0), y0.cwiseAbs().maxCoeff()});
      rep.order0_mean.residual = std::max(rep.order0_mean.residual, std::abs(H0.at(b, 0) - e0));

      const SmallMat gdot = (-3.0 * m0 + 4.0 * m1 - m2) / (2.0 * dt);
      const SmallMat ydot = (-3.0 * y0 + 4.0 * y1 - y2) / (2.0 * dt);
      const SmallMat tf = traceless(gdot - c0.at(b, 0) * ydot, y0);
      rep.order1_conf.residual = std::max(rep.order1_conf.residual, tf.cwiseAbs().maxCoeff());

      const double r1 = d0(e0, e1, e2, dt) - Hd.at(b, 0);
      if (std::abs(r1) >= rep.order1_mean.residual) {
        rep.order1_mean.residual = std::abs(r1);
        rep.order1_mean_signed = r1;
      }
    }
  }
  rep.order0_mean.threshold = 1e-8 * (1.0 + rep.data_scale);
  rep.order0_conf.threshold = 1e-8 * (1.0 + rep.data_scale);
  rep.order1_conf.threshold = 1e-6;
  rep.order1_mean.threshold = 1e-6;
  return rep;
}

// ------------------------------------------------------------ corner probe

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0 && y[k] > 0.0)) throw std::invalid_argument("loglog_slope needs positive data");
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

CornerProbeReport corner_probe(const std::vector<ProbeSample>& samples) {
  std::vector<const ProbeSample*> sorted;
  for (const auto& s : samples) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->t < b->t; });
  if (sorted.empty() || sorted.front()->t != 0.0)
    throw std::invalid_argument("corner probe needs the t = 0 snapshot");
  const std::vector<double>& v0 = sorted.front()->values;
  auto find = [&](double t) -> const ProbeSample* {
    for (auto* s : sorted)
      if (std::abs(s->t - t) <= 1e-12 * t) return s;
    return nullptr;
  };
  CornerProbeReport rep;
  double scale = 0.0;
  for (double v : v0) scale = std::max(scale, std::abs(v));
  double worst_second = 0.0;
  for (auto* s : sorted) {
    if (s->t <= 0.0) continue;
    const ProbeSample* twice = find(2.0 * s->t);
    if (!twice) continue;
    if (s->values.size() != v0.size() || twice->values.size() != v0.size())
      throw std::invalid_argument("corner probe samples differ in size");
    double second = 0.0, first = 0.0;
    for (std::size_t k = 0; k < v0.size(); ++k) {
      second = std::max(second, std::abs(twice->values[k] - 2.0 * s->values[k] + v0[k]));
      first = std::max(first, std::abs(s->values[k] - v0[k]));
    }
    worst_second = std::max(worst_second, second);
    rep.t.push_back(s->t);
    rep.q1.push_back(second / (s->t * s->t));
    rep.q0.push_back(first / s->t);
  }
  if (rep.t.size() < 3) throw std::invalid_argument("corner probe needs >= 3 dyadic pairs (t, 2t)");
  if (worst_second <= 1e-12 * (1.0 + scale)) {
    rep.trivial = true;
    return rep;
  }
  std::vector<double> tx, qy;
  for (std::size_t k = 0; k < rep.t.size(); ++k)
    if (rep.q1[k] > 0.0) {
      tx.push_back(rep.t[k]);
      qy.push_back(rep.q1[k]);
    }
  rep.q1_exponent = loglog_slope(tx, qy);
  tx.clear();
  qy.clear();
  for (std::size_t k = 0; k < rep.t.size(); ++k)
    if (rep.q0[k] > 0.0) {
      tx.push_back(rep.t[k]);
      qy.push_back(rep.q0[k]);
    }
  if (tx.size() >= 2) rep.q0_exponent = loglog_slope(tx, qy);
  rep.flag = rep.q1_exponent < kCornerFlagExponent;
  return rep;
}

std::vector<ProbeSample> boundary_series(const FlowTrajectory& traj, Side side) {
  std::vector<ProbeSample> out;
  for (const TimedMetric& s : traj.snapshots) {
    const Chart& c = s.g.chart();
    ProbeSample p{s.t, {}};
    for (int comp = 0; comp < s.g.tensor().components(); ++comp)
      for (std::size_t b = 0; b < c.boundary_count(); ++b)
        p.values.push_back(s.g.tensor().at(c.boundary_node(side, b), comp));
    out.push_back(std::move(p));
  }
  return out;
}

// ------------------------------------------------------------ extension monitor

bool ExtensionMonitor::add(double t, double m) {
  t_.push_back(t);
  m_.push_back(m);
  if (flagged_) return true;
  const std::size_t k = m_.size();
  if (k < 3) return false;
  const double threshold = 100.0 * std::max(m_.front(), floor_);
  if (m >= threshold && m_[k - 1] > m_[k - 2] && m_[k - 2] > m_[k - 3]) {
    flagged_ = true;
    t_flag_ = t;
  }
  return flagged_;
}

ExtensionMonitor extension_monitor(const FlowTrajectory& traj) {
  ExtensionMonitor mon;
  for (const Diagnostics& d : traj.diagnostics) mon.add(d.t, d.sup_rm + d.sup_a);
  return mon;
}

}  // namespace rlab
