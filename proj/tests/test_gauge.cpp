#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ricci_lab/curvature.hpp"
#include "ricci_lab/families.hpp"
#include "ricci_lab/gauge.hpp"
#include "ricci_lab/stencil.hpp"

using namespace rlab;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<VelocitySample> steady(const SymTensorField& w, double t0, double t1, int samples) {
  std::vector<VelocitySample> out;
  for (int k = 0; k < samples; ++k) out.push_back({t0 + (t1 - t0) * k / (samples - 1), w});
  return out;
}

double interior_sup(const SymTensorField& f) {
  const Chart& c = f.chart();
  double worst = 0.0;
  for (std::size_t i = 0; i < c.node_count(); ++i) {
    const int i0 = c.multi_index(i)[0];
    if (i0 < 2 || i0 > c.N0() - 3) continue;
    for (int k = 0; k < f.components(); ++k) worst = std::max(worst, std::abs(f.at(i, k)));
  }
  return worst;
}

// Compactly supported rotation about (1/2, 1/2) on the tangential 2-torus.
double omega(double r) {
  const double R = 0.4;
  return r < R ? 3.0 * std::pow(1.0 - (r / R) * (r / R), 2) : 0.0;
}

FlowTrajectory warped_run(int N0, double T) {
  const Chart c = Chart::slab_torus(2, N0, 4);
  const MetricField g0 = warped_slab(c, [](double x) { return 1.0 + 0.3 * x - 0.2 * x * x; });
  RunOptions o;
  o.horizon = T;
  o.cadence = Cadence::every_steps(1);
  return run(g0, BoundaryDatum::from_initial(g0), BackgroundFamily::frozen(g0), o);
}

double max_value(const std::vector<ResidualSample>& r) {
  double m = 0.0;
  for (const auto& s : r) m = std::max(m, s.value);
  return m;
}

}  // namespace

TEST_CASE("integrate_diffeo: W = 0 gives the identity bit-exactly") {
  const Chart c = Chart::slab_torus(2, 7, 6);
  const MetricField g = MetricField::identity(c);
  RunOptions o;
  o.horizon = 0.01;
  o.cadence = Cadence::every_steps(1);
  const FlowTrajectory tr = run(g, BoundaryDatum::from_initial(g), BackgroundFamily::frozen(g), o);
  REQUIRE(tr.snapshots.size() >= 3);
  const PulledTrajectory pb = pull_back(tr, 2);
  const DiffeoField id = identity_diffeo(c, 0.0);
  for (const DiffeoField& psi : pb.diffeos)
    for (std::size_t k = 0; k < psi.map.values().size(); ++k)
      REQUIRE(psi.map.values()[k] == id.map.values()[k]);
  CHECK(pb.max_boundary_displacement == 0.0);
  for (std::size_t k = 0; k < pb.metrics.size(); ++k)
    CHECK((pb.metrics[k].g.tensor() - tr.snapshots[k].g.tensor()).max_abs() == 0.0);
  for (const ResidualSample& s : ricci_flow_residual(pb.metrics)) CHECK(s.value <= 1e-10);
}

TEST_CASE("integrate_diffeo: constant tangential W is a translation") {
  const Chart c = Chart::slab_torus(2, 5, 4);
  const double cw = 0.7;
  SymTensorField w(c, Rank::Vector);
  for (std::size_t i = 0; i < c.node_count(); ++i) w.at(i, 1) = cw;
  const auto out = integrate_diffeo(steady(w, 0.0, 1.0, 5), 0.25, 0.9, 3);
  REQUIRE(out.size() == 4);  // 0.25, 0.5, 0.75, 0.9
  CHECK(out.front().t == 0.25);
  CHECK(out.back().t == doctest::Approx(0.9));
  for (const DiffeoField& psi : out)
    for (std::size_t i = 0; i < c.node_count(); ++i) {
      const Point x = node_point(c, i);
      CHECK(psi.map.at(i, 0) == x[0]);
      CHECK(std::abs(psi.map.at(i, 1) - (x[1] - cw * (psi.t - 0.25))) <= 1e-14);
      CHECK(psi.map.at(i, 2) == x[2]);
    }
}

TEST_CASE("integrate_diffeo: rotation on the tangential 2-torus") {
  // W = omega(r) (-(y - 1/2), x - 1/2); r is conserved, so psi_t rotates by -omega(r) t.
  const double T = 0.5;
  auto error_for = [&](int Nt, int substeps) {
    const Chart c = Chart::slab_torus(2, 4, Nt);
    SymTensorField w = sample(c, Rank::Vector, [](const Point& x, int comp) {
      const double u = x[1] - 0.5, v = x[2] - 0.5, om = omega(std::hypot(u, v));
      return comp == 1 ? -om * v : comp == 2 ? om * u : 0.0;
    });
    const auto out = integrate_diffeo(steady(w, 0.0, T, 2), 0.0, T, substeps);
    double err = 0.0;
    for (std::size_t i = 0; i < c.node_count(); ++i) {
      const Point x = node_point(c, i);
      const double u = x[1] - 0.5, v = x[2] - 0.5, a = -omega(std::hypot(u, v)) * T;
      const double ex1 = 0.5 + std::cos(a) * u - std::sin(a) * v;
      const double ex2 = 0.5 + std::sin(a) * u + std::cos(a) * v;
      err = std::max({err, std::abs(out.back().map.at(i, 1) - ex1),
                      std::abs(out.back().map.at(i, 2) - ex2)});
    }
    return err;
  };
  const double e1 = error_for(32, 64), e2 = error_for(64, 128);
  MESSAGE("rotation errors " << e1 << " " << e2);
  CHECK(e2 < 5e-3);
  CHECK(std::log2(e1 / e2) >= 1.7);
  // The RK4 time error is far below the interpolation error.
  CHECK(std::abs(error_for(32, 16) - e1) <= 1e-5);
}

TEST_CASE("pullback_metric examples") {
  SUBCASE("identity leaves g unchanged at the nodes") {
    const Chart c = Chart::slab_torus(2, 9, 6);
    const MetricField g = random_smooth_metric(c, 7, 0.2);
    const MetricField p = pullback_metric(identity_diffeo(c, 0.0), g);
    CHECK((p.tensor() - g.tensor()).max_abs() <= 1e-15);
  }
  SUBCASE("tangential translation by whole cells shifts g, and keeps flat metrics flat") {
    const Chart c = Chart::slab_torus(2, 9, 8);
    const MetricField g = random_smooth_metric(c, 11, 0.2);
    DiffeoField psi = identity_diffeo(c, 0.0);
    for (std::size_t i = 0; i < c.node_count(); ++i) psi.map.at(i, 1) += 3.0 * c.ht();
    const MetricField p = pullback_metric(psi, g);
    double err = 0.0;
    for (std::size_t i = 0; i < c.node_count(); ++i) {
      auto m = c.multi_index(i);
      m[1] = (m[1] + 3) % c.Nt();
      err = std::max(err, (p.at(i) - g.at(c.index(m))).cwiseAbs().maxCoeff());
    }
    CHECK(err <= 1e-14);
    const MetricField flat = pullback_metric(psi, MetricField::identity(c));
    CHECK((flat.tensor() - MetricField::identity(c).tensor()).max_abs() <= 1e-14);
  }
  SUBCASE("linear shear of the flat metric is exact") {
    const Chart c = Chart::slab_torus(2, 9, 8);
    const double s = 0.3;
    DiffeoField psi = identity_diffeo(c, 0.0);
    for (std::size_t i = 0; i < c.node_count(); ++i) psi.map.at(i, 1) += s * c.coordinate(i, 0);
    const MetricField p = pullback_metric(psi, MetricField::identity(c));
    for (std::size_t i = 0; i < c.node_count(); ++i) {
      CHECK(p.tensor().get(i, 0, 0) == doctest::Approx(1.0 + s * s).epsilon(1e-14));
      CHECK(p.tensor().get(i, 0, 1) == doctest::Approx(s).epsilon(1e-14));
      CHECK(p.tensor().get(i, 1, 1) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(std::abs(p.tensor().get(i, 1, 2)) <= 1e-14);
    }
  }
  SUBCASE("curved shear of the flat metric converges at second order") {
    const double s = 0.1;
    auto error_for = [&](int N0) {
      const Chart c = Chart::slab_torus(1, N0, 4);
      DiffeoField psi = identity_diffeo(c, 0.0);
      for (std::size_t i = 0; i < c.node_count(); ++i)
        psi.map.at(i, 1) += s * std::sin(pi * c.coordinate(i, 0));
      const MetricField p = pullback_metric(psi, MetricField::identity(c));
      double err = 0.0;
      for (std::size_t i = 0; i < c.node_count(); ++i) {
        const double d = s * pi * std::cos(pi * c.coordinate(i, 0));
        err = std::max({err, std::abs(p.tensor().get(i, 0, 0) - (1.0 + d * d)),
                        std::abs(p.tensor().get(i, 0, 1) - d)});
      }
      return err;
    };
    const double e1 = error_for(21), e2 = error_for(41);
    CHECK(e2 < 2e-3);
    CHECK(std::log2(e1 / e2) >= 1.8);
  }
}

TEST_CASE("gauge_transport errors") {
  const Chart c = Chart::slab_torus(1, 5, 4);
  SymTensorField w(c, Rank::Vector);
  SUBCASE("trajectory gap") {
    CHECK_THROWS_AS(integrate_diffeo(steady(w, 0.0, 1.0, 3), 0.0, 1.5), DataError);
    CHECK_THROWS_AS(integrate_diffeo(steady(w, 0.2, 1.0, 3), 0.0, 1.0), DataError);
  }
  SUBCASE("node leaves the chart") {
    for (std::size_t i = 0; i < c.node_count(); ++i) w.at(i, 0) = 1.0;
    try {
      integrate_diffeo(steady(w, 0.0, 1.0, 2), 0.0, 1.0, 4);
      FAIL("expected DiffeoError");
    } catch (const DiffeoError& e) {
      CHECK(c.multi_index(e.node())[0] == 0);  // the lower face is pushed to x0 < 0 first
      CHECK(e.time() >= 0.0);
    }
  }
  SUBCASE("folded map") {
    DiffeoField psi = identity_diffeo(c, 0.0);
    for (std::size_t i = 0; i < c.node_count(); ++i)
      psi.map.at(i, 1) -= 2.0 * std::sin(2.0 * pi * c.coordinate(i, 1)) / (2.0 * pi);
    CHECK_THROWS_AS(pullback_metric(psi, MetricField::identity(c)), DiffeoError);
  }
  SUBCASE("too few samples and wrong chart") {
    const MetricField g = MetricField::identity(c);
    CHECK_THROWS_AS(ricci_flow_residual({{0.0, g}, {0.1, g}}), DataError);
    const Chart b = Chart::radial_ball(2, 8);
    CHECK_THROWS_AS(identity_diffeo(b, 0.0), std::invalid_argument);
  }
}

TEST_CASE("ricci_flow_residual of the raw DeTurck flow is |L_W g| (negative control)") {
  const FlowTrajectory tr = warped_run(21, 0.02);
  const auto raw = ricci_flow_residual(tr.snapshots);
  const auto vel = gauge_velocities(tr);
  const auto pulled = ricci_flow_residual(pull_back(tr).metrics);
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const double lw = interior_sup(lie_derivative_metric(tr.snapshots[k + 1].g, vel[k + 1].w));
    CHECK(lw > 1e-5);
    // Both differ from the exact quantities by the same discretization floor.
    CHECK(std::abs(raw[k].value - lw) <= 2.0 * pulled[k].value + 1e-8);
  }
}

TEST_CASE("gauge pullback recovers Ricci flow on a warped slab") {
  std::vector<double> floors;
  std::vector<MetricField> finals_raw, finals_pulled;
  for (int N0 : {11, 21, 41}) {
    const FlowTrajectory tr = warped_run(N0, 0.02);
    REQUIRE(tr.cause == Termination::Horizon);
    const PulledTrajectory pb = pull_back(tr);
    CHECK(pb.max_boundary_displacement <= 1e-9 * (1.0 + 0.02));
    const auto raw = ricci_flow_residual(tr.snapshots);
    const auto pulled = ricci_flow_residual(pb.metrics);
    REQUIRE(raw.size() == pulled.size());
    for (std::size_t k = 0; k < raw.size(); ++k) CHECK(pulled[k].value < raw[k].value);
    floors.push_back(max_value(pulled));
    if (N0 == 41) {
      double w = 0.0;
      for (const auto& v : gauge_velocities(tr)) w = std::max(w, interior_sup(v.w));
      CHECK(w >= 10.0 * floors.back());
    }
    // Mean curvature is unchanged by a boundary-fixing diffeomorphism.
    for (Side s : {Side::Lower, Side::Upper}) {
      const BoundaryField a = mean_curvature(tr.snapshots.back().g, s);
      const BoundaryField b = mean_curvature(pb.metrics.back().g, s);
      for (std::size_t i = 0; i < a.values.size(); ++i)
        CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-6);
    }
  }
  MESSAGE("pulled residual floors " << floors[0] << " " << floors[1] << " " << floors[2]);
  CHECK(std::log2(floors[0] / floors[1]) >= 1.0);
  CHECK(std::log2(floors[1] / floors[2]) >= 1.0);
}
