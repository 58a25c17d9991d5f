#include "ricci_lab/warped.hpp"

#include <cmath>
#include <stdexcept>

namespace rlab {

namespace {

// Odd image of psi and even image of phi below the origin.
double psi_at(const WarpedProfile& p, long j) {
  return j >= 0 ? p.psi[static_cast<std::size_t>(j)] : -p.psi[static_cast<std::size_t>(-j - 1)];
}
double phi_at(const WarpedProfile& p, long j) {
  return p.phi[static_cast<std::size_t>(j >= 0 ? j : -j - 1)];
}

// sigma[f] = d_s psi on the face r = f h, f = 0..N0. Fourth-order staggered stencils
// inside, one-sided through the ghost on the outer face.
std::vector<double> face_slopes(const WarpedProfile& p) {
  const std::size_t N0 = p.phi.size() - 1;
  const double h = p.h;
  std::vector<double> sigma(N0 + 1);
  sigma[0] = 1.0;  // no cone point at the origin
  for (std::size_t f = 1; f <= N0; ++f) {
    const long k = static_cast<long>(f);
    double dpsi, phi_f;
    if (f + 1 <= N0) {
      dpsi = (-psi_at(p, k + 1) + 27.0 * psi_at(p, k) - 27.0 * psi_at(p, k - 1) + psi_at(p, k - 2)) /
             (24.0 * h);
      phi_f = (-phi_at(p, k + 1) + 9.0 * phi_at(p, k) + 9.0 * phi_at(p, k - 1) - phi_at(p, k - 2)) /
              16.0;
    } else {
      // one-sided five-point stencils through the ghost
      dpsi = (-psi_at(p, k - 4) + 5.0 * psi_at(p, k - 3) - 9.0 * psi_at(p, k - 2) -
              17.0 * psi_at(p, k - 1) + 22.0 * psi_at(p, k)) /
             (24.0 * h);
      phi_f = (-5.0 * phi_at(p, k - 4) + 28.0 * phi_at(p, k - 3) - 70.0 * phi_at(p, k - 2) +
               140.0 * phi_at(p, k - 1) + 35.0 * phi_at(p, k)) /
              128.0;
    }
    sigma[f] = dpsi / phi_f;
  }
  return sigma;
}

}  // namespace

WarpedDerivatives warped_derivatives(const WarpedProfile& p) {
  const std::size_t N0 = p.phi.size() - 1;
  const double h = p.h;
  const std::vector<double> sigma = face_slopes(p);
  WarpedDerivatives d;
  d.psi_s.resize(N0);
  d.psi_ss.resize(N0);
  for (std::size_t j = 0; j < N0; ++j) {
    // sigma is even in r: interpolate linearly in r^2 to the center
    const double jj = static_cast<double>(j);
    const double w = (jj + 0.25) / (2.0 * jj + 1.0);
    d.psi_s[j] = (1.0 - w) * sigma[j] + w * sigma[j + 1];
    d.psi_ss[j] = (sigma[j + 1] - sigma[j]) / (h * p.phi[j]);
  }
  return d;
}

WarpedDerivatives warped_derivatives_fourth(const WarpedProfile& p) {
  const std::size_t N0 = p.phi.size() - 1;
  if (N0 < 4) return warped_derivatives(p);
  const double h = p.h;
  const std::vector<double> sigma = face_slopes(p);
  // sigma is even in r
  auto sg = [&](long f) { return sigma[static_cast<std::size_t>(f < 0 ? -f : f)]; };
  WarpedDerivatives d;
  d.psi_s.resize(N0);
  d.psi_ss.resize(N0);
  for (std::size_t j = 0; j < N0; ++j) {
    const long k = static_cast<long>(j);
    double v, dv;
    if (j + 2 <= N0) {
      v = (-sg(k - 1) + 9.0 * sg(k) + 9.0 * sg(k + 1) - sg(k + 2)) / 16.0;
      dv = (sg(k - 1) - 27.0 * sg(k) + 27.0 * sg(k + 1) - sg(k + 2)) / (24.0 * h);
    } else {
      v = (sg(k - 2) - 5.0 * sg(k - 1) + 15.0 * sg(k) + 5.0 * sg(k + 1)) / 16.0;
      dv = (sg(k - 2) - 3.0 * sg(k - 1) - 21.0 * sg(k) + 23.0 * sg(k + 1)) / (24.0 * h);
    }
    d.psi_s[j] = v;
    d.psi_ss[j] = dv / p.phi[j];
  }
  return d;
}

WarpedFace warped_face(const WarpedProfile& p) {
  const std::size_t N0 = p.phi.size() - 1;
  WarpedFace f;
  f.phi = 0.5 * (p.phi[N0 - 1] + p.phi[N0]);
  f.psi = 0.5 * (p.psi[N0 - 1] + p.psi[N0]);
  f.psi_r = (p.psi[N0] - p.psi[N0 - 1]) / p.h;
  f.psi_s = f.psi_r / f.phi;
  return f;
}

WarpedProfile warped_profile(const SymTensorField& g) {
  const Chart& chart = g.chart();
  if (chart.kind() != ChartKind::RadialBall)
    throw std::invalid_argument("warped profile requires a RadialBall chart");
  const int d = chart.dim();
  WarpedProfile p;
  p.n = chart.n();
  p.h = chart.h0();
  p.phi.resize(g.nodes());
  p.psi.resize(g.nodes());
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    const double a = g.get(j, 0, 0);
    const double b = g.get(j, 1, 1);
    const double tol = 1e-12 * (std::abs(a) + std::abs(b));
    for (int i = 0; i < d; ++i)
      for (int k = i + 1; k < d; ++k)
        if (std::abs(g.get(j, i, k)) > tol)
          throw std::invalid_argument("RadialBall metric is not diagonal in the warped frame");
    for (int i = 2; i < d; ++i)
      if (std::abs(g.get(j, i, i) - b) > tol)
        throw std::invalid_argument("RadialBall metric has unequal fiber entries");
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("RadialBall metric is not positive");
    p.phi[j] = std::sqrt(a);
    p.psi[j] = std::sqrt(b);
  }
  return p;
}

WarpedProfile warped_profile(const MetricField& g) { return warped_profile(g.tensor()); }

MetricField warped_metric(const Chart& ball, const WarpedProfile& p) {
  if (ball.kind() != ChartKind::RadialBall || p.phi.size() != ball.node_count() ||
      p.psi.size() != ball.node_count())
    throw std::invalid_argument("warped_metric: profile does not match the chart");
  SymTensorField g(ball, Rank::Sym2);
  for (std::size_t j = 0; j < ball.node_count(); ++j) {
    g.set(j, 0, 0, p.phi[j] * p.phi[j]);
    for (int a = 1; a < ball.dim(); ++a) g.set(j, a, a, p.psi[j] * p.psi[j]);
  }
  return MetricField(std::move(g));
}

}  // namespace rlab
