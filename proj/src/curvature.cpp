#include "ricci_lab/curvature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/stencil.hpp"
#include "ricci_lab/warped.hpp"

namespace rlab {

namespace {

void require_slab(const Chart& chart, const char* op) {
  if (chart.kind() != ChartKind::SlabTorus)
    throw std::invalid_argument(std::string(op) +
                                ": only warped-product quantities are available on RadialBall");
}

std::vector<SymTensorField> gradient(const SymTensorField& f) {
  std::vector<SymTensorField> out;
  out.reserve(f.chart().axes());
  for (int a = 0; a < f.chart().axes(); ++a) out.push_back(partial_derivative(f, a, 1));
  return out;
}

Jet jet_from(const SymTensorField& f, const std::vector<SymTensorField>& df, std::size_t node) {
  Jet j;
  j.dim = f.dim();
  j.v = unpack(f, node);
  for (int a = 0; a < j.dim; ++a) j.d[a] = unpack(df[a], node);
  return j;
}

// Degree-5 polynomial extrapolation (degree N0 - 1 on tiny grids) of every component into
// the RadialBall ghost. H' differences the ghost against the last node; with linear or
// cubic extrapolation the O(h^2) / O(h^4) ghost error swamps the order-1 compatibility check.
void extrapolate_ghost(SymTensorField& f) {
  const int N0 = f.chart().N0();
  const int m = std::min(6, N0);
  double w[6];
  for (int k = 1; k <= m; ++k) {
    double binom = 1.0;
    for (int i = 0; i < k; ++i) binom = binom * (m - i) / (i + 1);
    w[k - 1] = (k % 2 == 1 ? 1.0 : -1.0) * binom;
  }
  for (int c = 0; c < f.components(); ++c) {
    double v = 0.0;
    for (int k = 1; k <= m; ++k) v += w[k - 1] * f.at(static_cast<std::size_t>(N0 - k), c);
    f.at(static_cast<std::size_t>(N0), c) = v;
  }
}

}  // namespace

Jet node_jet(const SymTensorField& f, std::size_t node) {
  Jet j;
  j.dim = f.dim();
  j.v = unpack(f, node);
  const int axes = f.chart().axes();
  for (int a = 0; a < axes; ++a) {
    SmallMat m(j.dim, j.dim);
    for (int r = 0; r < j.dim; ++r)
      for (int c = r; c < j.dim; ++c) {
        const double v = node_derivative(f, sym_index(r, c, j.dim), node, a);
        m(r, c) = v;
        m(c, r) = v;
      }
    j.d[a] = m;
  }
  return j;
}

namespace local {

SmallMat tangential(const SmallMat& m) {
  const int n = static_cast<int>(m.rows()) - 1;
  return m.block(1, 1, n, n);
}

std::array<SmallMat, kMaxDim> christoffel(const Jet& g, const SmallMat& ginv) {
  const int d = g.dim;
  // first kind: G1[l](i, j) = (d_i g_jl + d_j g_il - d_l g_ij) / 2
  std::array<SmallMat, kMaxDim> first;
  for (int l = 0; l < d; ++l) {
    first[l].resize(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const double v = 0.5 * (g.d[i](j, l) + g.d[j](i, l) - g.d[l](i, j));
        first[l](i, j) = v;
        first[l](j, i) = v;
      }
  }
  std::array<SmallMat, kMaxDim> out;
  for (int k = 0; k < d; ++k) {
    out[k] = SmallMat::Zero(d, d);
    for (int l = 0; l < d; ++l) out[k] += ginv(k, l) * first[l];
  }
  return out;
}

SmallVec normal(const SmallMat& ginv, Side side) {
  const double g00 = ginv(0, 0);
  if (!(g00 > 0.0)) throw Error("outward normal: g^00 is not positive");
  return Chart::orientation(side) * ginv.col(0) / std::sqrt(g00);
}

namespace {

// Tangential derivatives of the unit normal: out[a](i) = d_a nu^i, a = 1..n.
std::array<SmallVec, kMaxDim> normal_derivatives(const Jet& g, const SmallMat& ginv, Side side) {
  const int d = g.dim;
  const double o = Chart::orientation(side);
  const double s = std::sqrt(ginv(0, 0));
  std::array<SmallVec, kMaxDim> out;
  for (int a = 1; a < d; ++a) {
    const SmallMat D = ginv * g.d[a] * ginv;  // = -d_a(g^-1)
    out[a].resize(d);
    for (int i = 0; i < d; ++i)
      out[a](i) = o * (-D(0, i) / s + ginv(0, i) * D(0, 0) / (2.0 * s * s * s));
  }
  return out;
}

}  // namespace

double mean_curvature(const Jet& g, const SmallMat& ginv, Side side) {
  const int d = g.dim;
  const double o = Chart::orientation(side);
  const double g00 = ginv(0, 0);
  if (!(g00 > 0.0)) throw Error("mean curvature: g^00 is not positive");
  const double s = std::sqrt(g00);
  const SmallVec nu = normal(ginv, side);
  const SmallMat gTinv = tangential(g.v).inverse();

  double term1 = 0.0;
  for (int al = 1; al < d; ++al)
    for (int be = 1; be < d; ++be) {
      double dn = 0.0;
      for (int i = 0; i < d; ++i) dn += nu(i) * g.d[i](al, be);
      term1 += gTinv(al - 1, be - 1) * dn;
    }

  double term2 = 0.0;
  for (int al = 1; al < d; ++al) {
    double tg = 0.0;  // g^{T,al be} g_{0 be}
    for (int be = 1; be < d; ++be) tg += gTinv(al - 1, be - 1) * g.v(0, be);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        const double c = 2.0 * ginv(0, l) * ginv(al, k) / s -
                         ginv(0, l) * ginv(0, k) * ginv(0, al) / (s * s * s) +
                         tg * ginv(0, l) * ginv(0, k) / s;
        term2 += c * g.d[al](k, l);
      }
  }
  return 0.5 * (term1 - o * term2);
}

SmallMat second_fundamental_form(const Jet& g, const SmallMat& ginv, Side side) {
  const int d = g.dim;
  const int n = d - 1;
  const SmallVec nu = normal(ginv, side);
  const auto dnu = normal_derivatives(g, ginv, side);
  SmallMat A(n, n);
  for (int al = 1; al < d; ++al)
    for (int be = al; be < d; ++be) {
      double v = 0.0;
      for (int i = 0; i < d; ++i)
        v += nu(i) * g.d[i](al, be) + g.v(i, be) * dnu[al](i) + g.v(al, i) * dnu[be](i);
      A(al - 1, be - 1) = 0.5 * v;
      A(be - 1, al - 1) = 0.5 * v;
    }
  return A;
}

double mean_curvature_linearized(const Jet& g, const SmallMat& ginv, const Jet& h, Side side) {
  const int d = g.dim;
  const int n = d - 1;
  const SmallVec nu = normal(ginv, side);
  const auto dnu = normal_derivatives(g, ginv, side);
  const auto G = christoffel(g, ginv);
  const SmallMat gTinv = tangential(g.v).inverse();

  // tr_{gT} nabla_nu h
  double tr_nabla = 0.0;
  for (int al = 1; al < d; ++al)
    for (int be = 1; be < d; ++be) {
      double v = 0.0;
      for (int i = 0; i < d; ++i) {
        double c = h.d[i](al, be);
        for (int r = 0; r < d; ++r) c -= G[r](i, al) * h.v(r, be) + G[r](i, be) * h.v(al, r);
        v += nu(i) * c;
      }
      tr_nabla += gTinv(al - 1, be - 1) * v;
    }

  // divergence of omega = h(nu)^T on the boundary with the induced metric
  SmallVec omega(n);
  for (int be = 1; be < d; ++be) {
    double v = 0.0;
    for (int i = 0; i < d; ++i) v += nu(i) * h.v(i, be);
    omega(be - 1) = v;
  }
  double div = 0.0;
  for (int al = 1; al < d; ++al)
    for (int be = 1; be < d; ++be) {
      double domega = 0.0;
      for (int i = 0; i < d; ++i) domega += dnu[al](i) * h.v(i, be) + nu(i) * h.d[al](i, be);
      double conn = 0.0;
      for (int ga = 1; ga < d; ++ga) {
        double gT_gamma = 0.0;
        for (int de = 1; de < d; ++de)
          gT_gamma += gTinv(ga - 1, de - 1) *
                      (g.d[al](be, de) + g.d[be](al, de) - g.d[de](al, be));
        conn += 0.5 * gT_gamma * omega(ga - 1);
      }
      div += gTinv(al - 1, be - 1) * (domega - conn);
    }

  const double hnn = nu.dot(h.v * nu);
  const double H = mean_curvature(g, ginv, side);
  return 0.5 * (tr_nabla - 2.0 * div - hnn * H);
}

SmallVec deturck_oneform(const Jet& g, const SmallMat& ginv, const Jet& gt, const SmallMat& gtinv) {
  const int d = g.dim;
  const auto G = christoffel(g, ginv);
  const auto Gt = christoffel(gt, gtinv);
  SmallVec W(d);
  for (int r = 0; r < d; ++r) {
    double v = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = 0; q < d; ++q) v += ginv(p, q) * (G[r](p, q) - Gt[r](p, q));
    W(r) = v;
  }
  return g.v * W;
}

}  // namespace local

ConnectionField christoffel(const MetricField& g) {
  const Chart& chart = g.chart();
  require_slab(chart, "christoffel");
  const int d = g.dim();
  const auto dg = gradient(g.tensor());
  ConnectionField out;
  for (int k = 0; k < d; ++k) out.gamma.emplace_back(chart, Rank::Sym2);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const auto G = local::christoffel(jet_from(g.tensor(), dg, node), g.inverse_at(node));
    for (int k = 0; k < d; ++k) pack(out.gamma[k], node, G[k]);
  }
  return out;
}

namespace {

struct CurvatureParts {
  ConnectionField conn;
  // dgamma[a][k]: d_a Gamma^k
  std::vector<std::vector<SymTensorField>> dgamma;
};

CurvatureParts curvature_parts(const MetricField& g) {
  CurvatureParts p{christoffel(g), {}};
  const int d = g.dim();
  p.dgamma.resize(d);
  for (int a = 0; a < d; ++a)
    for (int k = 0; k < d; ++k) p.dgamma[a].push_back(partial_derivative(p.conn.gamma[k], a, 1));
  return p;
}

SymTensorField ricci_ball(const MetricField& g) {
  const WarpedProfile p = warped_profile(g);
  const WarpedDerivatives wd = warped_derivatives_fourth(p);
  const Chart& chart = g.chart();
  const int n = chart.n();
  SymTensorField ric(chart, Rank::Sym2);
  for (int j = 0; j < chart.N0(); ++j) {
    const double psi = p.psi[j];
    const double rr = -n * wd.psi_ss[j] / psi * p.phi[j] * p.phi[j];
    const double tt = -psi * wd.psi_ss[j] + (n - 1) * (1.0 - wd.psi_s[j] * wd.psi_s[j]);
    ric.set(j, 0, 0, rr);
    for (int a = 1; a <= n; ++a) ric.set(j, a, a, tt);
  }
  extrapolate_ghost(ric);
  return ric;
}

SymTensorField riemann_norm_ball(const MetricField& g) {
  const WarpedProfile p = warped_profile(g);
  const WarpedDerivatives wd = warped_derivatives_fourth(p);
  const Chart& chart = g.chart();
  const int n = chart.n();
  SymTensorField out(chart, Rank::Scalar);
  for (int j = 0; j < chart.N0(); ++j) {
    const double kr = -wd.psi_ss[j] / p.psi[j];
    const double kt = (1.0 - wd.psi_s[j] * wd.psi_s[j]) / (p.psi[j] * p.psi[j]);
    out.at(j, 0) = 2.0 * std::sqrt(n * kr * kr + 0.5 * n * (n - 1) * kt * kt);
  }
  extrapolate_ghost(out);
  return out;
}

}  // namespace

SymTensorField ricci(const MetricField& g) {
  if (g.chart().kind() == ChartKind::RadialBall) return ricci_ball(g);
  const Chart& chart = g.chart();
  const int d = g.dim();
  const CurvatureParts p = curvature_parts(g);
  // C_j = Gamma^k_{kj} and its derivatives
  SymTensorField C(chart, Rank::OneForm);
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    for (int j = 0; j < d; ++j) {
      double v = 0.0;
      for (int k = 0; k < d; ++k) v += p.conn.gamma[k].get(node, k, j);
      C.at(node, j) = v;
    }
  const auto dC = gradient(C);

  SymTensorField ric(chart, Rank::Sym2);
  std::array<SmallMat, kMaxDim> G;
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    for (int k = 0; k < d; ++k) G[k] = unpack(p.conn.gamma[k], node);
    SmallVec Cn(d);
    for (int j = 0; j < d; ++j) Cn(j) = C.at(node, j);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double v = 0.0;
        for (int k = 0; k < d; ++k) v += p.dgamma[k][k].get(node, i, j);
        v -= 0.5 * (dC[i].at(node, j) + dC[j].at(node, i));
        for (int l = 0; l < d; ++l) {
          v += Cn(l) * G[l](i, j);
          for (int k = 0; k < d; ++k) v -= G[k](i, l) * G[l](k, j);
        }
        ric.set(node, i, j, v);
      }
  }
  return ric;
}

SymTensorField riemann_norm(const MetricField& g) {
  if (g.chart().kind() == ChartKind::RadialBall) return riemann_norm_ball(g);
  const Chart& chart = g.chart();
  const int d = g.dim();
  const CurvatureParts p = curvature_parts(g);
  SymTensorField out(chart, Rank::Scalar);
  const int d2 = d * d, d3 = d2 * d, d4 = d3 * d;
  std::vector<double> R(d4), low(d4), tmp(d4);
  std::array<SmallMat, kMaxDim> G;
  auto at = [&](int l, int i, int j, int k) { return ((l * d + i) * d + j) * d + k; };
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    for (int k = 0; k < d; ++k) G[k] = unpack(p.conn.gamma[k], node);
    const SmallMat gm = g.at(node);
    const SmallMat gi = g.inverse_at(node);
    // R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_ip G^p_jk - G^l_jp G^p_ik
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) {
            double v = p.dgamma[i][l].get(node, j, k) - p.dgamma[j][l].get(node, i, k);
            for (int q = 0; q < d; ++q) v += G[l](i, q) * G[q](j, k) - G[l](j, q) * G[q](i, k);
            R[at(l, i, j, k)] = v;
          }
    // low = R_l^{ijk}: lower l, raise i, j, k
    for (int m = 0; m < d; ++m)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) {
            double v = 0.0;
            for (int l = 0; l < d; ++l) v += gm(m, l) * R[at(l, i, j, k)];
            low[at(m, i, j, k)] = v;
          }
    for (int pass = 1; pass <= 3; ++pass) {
      for (int m = 0; m < d; ++m)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
              double v = 0.0;
              for (int q = 0; q < d; ++q) {
                if (pass == 1) v += gi(i, q) * low[at(m, q, j, k)];
                if (pass == 2) v += gi(j, q) * low[at(m, i, q, k)];
                if (pass == 3) v += gi(k, q) * low[at(m, i, j, q)];
              }
              tmp[at(m, i, j, k)] = v;
            }
      low.swap(tmp);
    }
    double s = 0.0;
    for (int e = 0; e < d4; ++e) s += R[e] * low[e];
    out.at(node, 0) = std::sqrt(std::max(s, 0.0));
  }
  return out;
}

SymTensorField bianchi(const MetricField& g, const SymTensorField& u) {
  const Chart& chart = g.chart();
  require_slab(chart, "bianchi");
  if (u.rank() != Rank::Sym2 || u.chart() != chart)
    throw std::invalid_argument("bianchi: u must be a symmetric 2-tensor on the metric's chart");
  const int d = g.dim();
  const auto dg = gradient(g.tensor());
  const auto du = gradient(u);
  SymTensorField tr(chart, Rank::Scalar);
  for (std::size_t node = 0; node < chart.node_count(); ++node)
    tr.at(node, 0) = (g.inverse_at(node).cwiseProduct(unpack(u, node))).sum();
  const auto dtr = gradient(tr);

  SymTensorField beta(chart, Rank::OneForm);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const SmallMat gi = g.inverse_at(node);
    const auto G = local::christoffel(jet_from(g.tensor(), dg, node), gi);
    const Jet uj = jet_from(u, du, node);
    for (int l = 0; l < d; ++l) {
      double v = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double c = uj.d[i](j, l);
          for (int r = 0; r < d; ++r) c -= uj.v(r, l) * G[r](i, j) + uj.v(j, r) * G[r](i, l);
          v += gi(i, j) * c;
        }
      beta.at(node, l) = v - 0.5 * dtr[l].at(node, 0);
    }
  }
  return beta;
}

DeTurckField deturck_field(const MetricField& g, const MetricField& gt) {
  const Chart& chart = g.chart();
  require_slab(chart, "deturck_field");
  if (gt.chart() != chart) throw std::invalid_argument("deturck_field: charts differ");
  const int d = g.dim();
  const auto dg = gradient(g.tensor());
  const auto dgt = gradient(gt.tensor());
  DeTurckField out{SymTensorField(chart, Rank::Vector), SymTensorField(chart, Rank::OneForm)};
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const SmallMat gi = g.inverse_at(node);
    const auto G = local::christoffel(jet_from(g.tensor(), dg, node), gi);
    const auto Gt = local::christoffel(jet_from(gt.tensor(), dgt, node), gt.inverse_at(node));
    SmallVec W(d);
    for (int r = 0; r < d; ++r) {
      double v = 0.0;
      for (int p = 0; p < d; ++p)
        for (int q = 0; q < d; ++q) v += gi(p, q) * (G[r](p, q) - Gt[r](p, q));
      W(r) = v;
    }
    const SmallVec Wl = g.at(node) * W;
    for (int r = 0; r < d; ++r) {
      out.vector.at(node, r) = W(r);
      out.oneform.at(node, r) = Wl(r);
    }
  }
  return out;
}

SymTensorField lie_derivative_metric(const MetricField& g, const SymTensorField& X) {
  const Chart& chart = g.chart();
  require_slab(chart, "lie_derivative_metric");
  if (X.rank() != Rank::Vector || X.chart() != chart)
    throw std::invalid_argument("lie_derivative_metric: X must be a vector field on the metric's chart");
  const int d = g.dim();
  const auto dg = gradient(g.tensor());
  const auto dX = gradient(X);
  SymTensorField out(chart, Rank::Sym2);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const SmallMat gm = g.at(node);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double v = 0.0;
        for (int k = 0; k < d; ++k)
          v += X.at(node, k) * dg[k].get(node, i, j) + gm(k, j) * dX[i].at(node, k) +
               gm(i, k) * dX[j].at(node, k);
        out.set(node, i, j, v);
      }
  }
  return out;
}

SymTensorField deturck_rhs(const MetricField& g, const MetricField& gt) {
  SymTensorField rhs = ricci(g);
  rhs *= -2.0;
  rhs += lie_derivative_metric(g, deturck_field(g, gt).vector);
  return rhs;
}

RhsRoutes deturck_rhs_routes(const MetricField& g, const MetricField& gt) {
  const Chart& chart = g.chart();
  require_slab(chart, "deturck_rhs");
  const int d = g.dim();
  const auto dg = gradient(g.tensor());
  // second derivatives d_a d_b g, a <= b
  std::vector<std::vector<SymTensorField>> hess(d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b)
      hess[a].push_back(a == b ? partial_derivative(g.tensor(), a, 2)
                               : partial_derivative(dg[a], b, 1));

  // V^r = g^{pq} Gamma(gt)^r_{pq}
  const auto dgt = gradient(gt.tensor());
  SymTensorField V(chart, Rank::Vector);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const SmallMat gi = g.inverse_at(node);
    const auto Gt = local::christoffel(jet_from(gt.tensor(), dgt, node), gt.inverse_at(node));
    for (int r = 0; r < d; ++r) V.at(node, r) = gi.cwiseProduct(Gt[r]).sum();
  }

  SymTensorField B(chart, Rank::Sym2);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const SmallMat gi = g.inverse_at(node);
    const Jet J = jet_from(g.tensor(), dg, node);
    // dd(a, b) = d_a g_{..} for readability: J.d[a](i, j) = d_a g_ij
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double t = 0.0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) {
            const auto& H = a <= b ? hess[a][b - a] : hess[b][a - b];
            t += gi(a, b) * H.get(node, i, j);
          }
        double Q = 0.0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            for (int p = 0; p < d; ++p)
              for (int q = 0; q < d; ++q) {
                const double w = gi(a, b) * gi(p, q);
                Q += w * (0.5 * J.d[i](p, a) * J.d[j](q, b) + J.d[a](j, p) * J.d[q](i, b) -
                          J.d[a](j, p) * J.d[b](i, q) - J.d[j](p, a) * J.d[b](i, q) -
                          J.d[i](p, a) * J.d[b](j, q));
              }
        B.set(node, i, j, t + Q);
      }
  }
  B -= lie_derivative_metric(g, V);
  return {deturck_rhs(g, gt), std::move(B)};
}

// ---------------------------------------------------------------- boundary quantities

namespace {

struct BallFace {
  WarpedProfile p;
  WarpedFace f;
};

BallFace ball_face(const MetricField& g, Side side) {
  if (side != Side::Upper) throw std::invalid_argument("RadialBall has only the Upper boundary side");
  BallFace b{warped_profile(g), {}};
  b.f = warped_face(b.p);
  return b;
}

}  // namespace

BoundaryField outward_normal(const MetricField& g, Side side) {
  const Chart& chart = g.chart();
  const int d = g.dim();
  BoundaryField out(side, d, chart.boundary_count());
  if (chart.kind() == ChartKind::RadialBall) {
    out.at(0, 0) = 1.0 / ball_face(g, side).f.phi;
    return out;
  }
  for (std::size_t b = 0; b < out.count; ++b) {
    const SmallVec nu = local::normal(g.inverse_at(chart.boundary_node(side, b)), side);
    for (int i = 0; i < d; ++i) out.at(b, i) = nu(i);
  }
  return out;
}

BoundaryField induced_metric(const MetricField& g, Side side) {
  const Chart& chart = g.chart();
  const int n = chart.n();
  BoundaryField out(side, sym_size(n), chart.boundary_count());
  if (chart.kind() == ChartKind::RadialBall) {
    const double psi = ball_face(g, side).f.psi;
    for (int a = 0; a < n; ++a) out.at(0, sym_index(a, a, n)) = psi * psi;
    return out;
  }
  for (std::size_t b = 0; b < out.count; ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    for (int a = 0; a < n; ++a)
      for (int c = a; c < n; ++c) out.at(b, sym_index(a, c, n)) = g.tensor().get(node, a + 1, c + 1);
  }
  return out;
}

BoundaryField second_fundamental_form(const MetricField& g, Side side) {
  const Chart& chart = g.chart();
  const int n = chart.n();
  BoundaryField out(side, sym_size(n), chart.boundary_count());
  if (chart.kind() == ChartKind::RadialBall) {
    const auto bf = ball_face(g, side);
    for (int a = 0; a < n; ++a) out.at(0, sym_index(a, a, n)) = bf.f.psi * bf.f.psi_s;
    return out;
  }
  for (std::size_t b = 0; b < out.count; ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    const SmallMat A =
        local::second_fundamental_form(node_jet(g.tensor(), node), g.inverse_at(node), side);
    for (int a = 0; a < n; ++a)
      for (int c = a; c < n; ++c) out.at(b, sym_index(a, c, n)) = A(a, c);
  }
  return out;
}

BoundaryField mean_curvature(const MetricField& g, Side side) {
  const Chart& chart = g.chart();
  BoundaryField out(side, 1, chart.boundary_count());
  if (chart.kind() == ChartKind::RadialBall) {
    const auto bf = ball_face(g, side);
    out.at(0, 0) = chart.n() * bf.f.psi_s / bf.f.psi;
    return out;
  }
  for (std::size_t b = 0; b < out.count; ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    out.at(b, 0) = local::mean_curvature(node_jet(g.tensor(), node), g.inverse_at(node), side);
  }
  return out;
}

MeanCurvatureRoutes mean_curvature_routes(const MetricField& g, Side side) {
  const Chart& chart = g.chart();
  const int n = chart.n();
  MeanCurvatureRoutes r{mean_curvature(g, side), BoundaryField(side, 1, chart.boundary_count())};
  if (chart.kind() == ChartKind::RadialBall) {
    // (L_N g)^T = phi^{-1} d_r(psi^2) on the round frame, traced over psi^2 delta
    const auto bf = ball_face(g, side);
    const std::size_t N0 = chart.N0();
    const double p2n = bf.p.psi[N0] * bf.p.psi[N0];
    const double p2m = bf.p.psi[N0 - 1] * bf.p.psi[N0 - 1];
    r.lie.at(0, 0) = 0.5 * n * ((p2n - p2m) / chart.h0()) / (bf.f.phi * 0.5 * (p2n + p2m));
    return r;
  }
  // nu extended to every node with the side's orientation, then L_nu g by the field route
  SymTensorField nu(chart, Rank::Vector);
  for (std::size_t node = 0; node < chart.node_count(); ++node) {
    const SmallVec v = local::normal(g.inverse_at(node), side);
    for (int i = 0; i <= n; ++i) nu.at(node, i) = v(i);
  }
  const SymTensorField L = lie_derivative_metric(g, nu);
  for (std::size_t b = 0; b < chart.boundary_count(); ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    const SmallMat gTinv = local::tangential(g.at(node)).inverse();
    const SmallMat LT = local::tangential(unpack(L, node));
    r.lie.at(b, 0) = 0.5 * gTinv.cwiseProduct(LT).sum();
  }
  return r;
}

BoundaryField second_form_norm(const MetricField& g, Side side) {
  const Chart& chart = g.chart();
  const int n = chart.n();
  BoundaryField out(side, 1, chart.boundary_count());
  if (chart.kind() == ChartKind::RadialBall) {
    const auto bf = ball_face(g, side);
    out.at(0, 0) = std::sqrt(static_cast<double>(n)) * std::abs(bf.f.psi_s / bf.f.psi);
    return out;
  }
  for (std::size_t b = 0; b < out.count; ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    const Jet J = node_jet(g.tensor(), node);
    const SmallMat A = local::second_fundamental_form(J, g.inverse_at(node), side);
    const SmallMat gTinv = local::tangential(J.v).inverse();
    const SmallMat M = gTinv * A;
    out.at(b, 0) = std::sqrt(std::max((M * M).trace(), 0.0));
  }
  return out;
}

BoundaryField mean_curvature_linearized(const MetricField& g, const SymTensorField& h, Side side) {
  const Chart& chart = g.chart();
  if (h.rank() != Rank::Sym2 || h.chart() != chart)
    throw std::invalid_argument("mean_curvature_linearized: h must be a symmetric 2-tensor");
  BoundaryField out(side, 1, chart.boundary_count());
  if (chart.kind() == ChartKind::RadialBall) {
    const auto bf = ball_face(g, side);
    const std::size_t N0 = chart.N0();
    const int d = chart.dim();
    auto dphi = [&](std::size_t j) {
      for (int a = 1; a < d; ++a)
        if (h.get(j, 0, a) != 0.0) throw std::invalid_argument("RadialBall direction is not warped");
      return h.get(j, 0, 0) / (2.0 * bf.p.phi[j]);
    };
    auto dpsi = [&](std::size_t j) { return h.get(j, 1, 1) / (2.0 * bf.p.psi[j]); };
    const double hh = chart.h0();
    const double pf = bf.f.phi, sf = bf.f.psi;
    const double dpf = 0.5 * (dphi(N0) + dphi(N0 - 1));
    const double dsf = 0.5 * (dpsi(N0) + dpsi(N0 - 1));
    const double num = (bf.p.psi[N0] - bf.p.psi[N0 - 1]) / hh;
    const double dnum = (dpsi(N0) - dpsi(N0 - 1)) / hh;
    const double den = pf * sf;
    out.at(0, 0) = chart.n() * (dnum / den - num * (dpf * sf + pf * dsf) / (den * den));
    return out;
  }
  for (std::size_t b = 0; b < out.count; ++b) {
    const std::size_t node = chart.boundary_node(side, b);
    out.at(b, 0) = local::mean_curvature_linearized(node_jet(g.tensor(), node), g.inverse_at(node),
                                                    node_jet(h, node), side);
  }
  return out;
}

BoundaryGeometry boundary_geometry(const MetricField& g, Side side) {
  return {outward_normal(g, side), second_fundamental_form(g, side), mean_curvature(g, side),
          induced_metric(g, side)};
}

}  // namespace rlab
