#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ricci_lab/errors.hpp"
#include "ricci_lab/families.hpp"
#include "ricci_lab/flow.hpp"
#include "ricci_lab/rotsym.hpp"
#include "ricci_lab/wellposedness.hpp"

using namespace rlab;

namespace {

// regression baselines: seed 42, 100 samples, delta1 = 0.9
constexpr double kBaseline2 = 0x1.1ffa6af0ebd7ap-1;
constexpr double kBaseline3 = 0x1.6c973a0530069p-1;
constexpr double kBaseline4 = 0x1.986fdc4d8ce7fp-1;

BoundaryDatum hemisphere_data(const RotState& s, EtaRule eta) {
  return rot_datum(s, std::move(eta), TimeFunction::linear(1.0, -2.0 * s.n()));
}

RotTrajectory hemisphere_probe_run(EtaRule eta) {
  const RotState s0 = hemisphere_state(2, 400);
  RotRunOptions o;
  o.horizon = 0.02;
  o.cadence = Cadence::dyadic(0.02, 8);
  return rot_run(s0, hemisphere_data(s0, std::move(eta)), o);
}

}  // namespace

TEST_CASE("symbol examples") {
  const Complex I(0.0, 1.0);
  SUBCASE("zeta = 0 decouples") {
    const SymbolSystem s = symbol_matrix(2, 1.0, {0.0, 0.0});
    CHECK(s.matrix.rows() == 4);
    CHECK(std::abs(s.tau_hat - I) <= 1e-15);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (r != c && !(r == 0 && c == 3)) CHECK(std::abs(s.matrix(r, c)) == 0.0);
    CHECK(std::abs(s.determinant()) > 0.1);
  }
  SUBCASE("n = 2, p = 1, zeta = (1, 0) has only the zero solution") {
    const SymbolSystem s = symbol_matrix(2, 1.0, {1.0, 0.0});
    CHECK(std::abs(s.determinant()) > 1e-3);
    CHECK(s.rank() == 4);
    CHECK(s.elimination_succeeds());
  }
  SUBCASE("n = 1, p = 0, zeta = 1 is degenerate") {
    const SymbolSystem s = symbol_matrix(1, 0.0, {1.0});
    CHECK(std::abs(s.determinant()) <= 1e-14);
    CHECK(s.rank() < 3);
    CHECK_FALSE(s.elimination_succeeds());
  }
  SUBCASE("rows are the displayed equations") {
    const std::vector<double> z{0.3, -0.7, 0.2};
    const Complex p(0.4, 1.1);
    const SymbolSystem s = symbol_matrix(3, p, z);
    const Complex t = s.tau_hat;
    CHECK(std::abs(s.matrix(0, 0) - 0.5 * I * t) <= 1e-15);
    CHECK(std::abs(s.matrix(0, 4) + 1.5 * I * t) <= 1e-15);
    CHECK(std::abs(s.matrix(2, 0) + 0.5 * I * z[1]) <= 1e-15);
    CHECK(std::abs(s.matrix(2, 4) - I * z[1] * (1.0 - 1.5)) <= 1e-15);
    CHECK(std::abs(s.matrix(4, 4) - 3.0 * I * t) <= 1e-15);
    CHECK(std::abs(s.matrix(4, 3) + 2.0 * I * z[2]) <= 1e-15);
  }
  CHECK_THROWS_AS(symbol_matrix(2, 1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(symbol_matrix(0, 1.0, {}), std::invalid_argument);
}

TEST_CASE("decaying root and parabolic scaling") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + k % 3;
    std::vector<double> z(n);
    for (double& x : z) x = u(rng);
    double z2 = 0.0;
    for (double x : z) z2 += x * x;
    const Complex p(-0.9 * z2 + 3.0 * std::abs(u(rng)), 3.0 * u(rng));
    const SymbolSystem s = symbol_matrix(n, p, z);
    CHECK(s.tau_hat.imag() >= 0.0);
    CHECK(s.rank() == n + 2);
    CHECK(s.elimination_succeeds());
    const double c = std::exp(3.0 * u(rng));
    std::vector<double> zc = z;
    for (double& x : zc) x *= c;
    const SymbolSystem sc = symbol_matrix(n, c * c * p, zc);
    CHECK(std::abs(sc.normalized_determinant() / s.normalized_determinant() - 1.0) <= 1e-10);
  }
}

TEST_CASE("complementing check") {
  const double baseline[] = {kBaseline2, kBaseline3, kBaseline4};
  for (int n : {2, 3, 4}) {
    const ComplementingReport r = complementing_check(n, 100, 0.9, 42);
    CHECK(r.pass());
    CHECK(r.failing == 0);
    CHECK(r.excluded == 0);
    CHECK(r.min_normalized_det > 0.0);
    CHECK(r.min_normalized_det == baseline[n - 2]);
    CHECK(complementing_check(n, 100, 0.9, 42).min_normalized_det == r.min_normalized_det);
    CHECK(r.sample_list.size() == 100);
  }
  const ComplementingReport r1 = complementing_check(1, 100, 0.9, 42);
  CHECK(r1.failing >= 1);
  CHECK_FALSE(r1.pass());
  CHECK(complementing_check(2, 100, 0.9, 43).min_normalized_det != kBaseline2);
  CHECK_THROWS_AS(complementing_check(2, 10, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(complementing_check(2, 10, 0.0, 1), std::invalid_argument);
}

TEST_CASE("samples outside the parabola are excluded, not failing") {
  const SymbolSample s = classify_sample(2, Complex(-1.0, 0.0), {1.0, 0.0}, 0.9);
  CHECK(s.excluded);
  CHECK_FALSE(s.failing);
  CHECK(symbol_matrix(2, Complex(-1.0, 0.0), {1.0, 0.0}).tau_hat == Complex(0.0, 0.0));
  const SymbolSample in = classify_sample(2, Complex(-0.9, 0.0), {1.0, 0.0}, 0.9);
  CHECK_FALSE(in.excluded);
  CHECK_FALSE(in.failing);
  CHECK(classify_sample(1, 0.0, {2.0}, 0.9).failing);
}

TEST_CASE("compatibility on the ball") {
  for (int n : {2, 3}) {
    SUBCASE("flat ball passes") {
      RotState s = flat_ball_state(n, 200);
      const BoundaryDatum d = rot_datum(s, EtaRule::time(TimeFunction::constant(n)));
      rot_boundary_close(s, d, 0.0);
      const CompatReport r = compat_check(s.metric(), d, BackgroundFamily::frozen(s.metric()));
      CHECK(r.order0());
      CHECK(r.order1());
      CHECK(r.gt_initial);
      CHECK(r.gt_aligned);
    }
    SUBCASE("hemisphere with shrinking gamma passes") {
      RotState s = hemisphere_state(n, 200);
      const BoundaryDatum d = hemisphere_data(s, EtaRule::time(TimeFunction::constant(0.0)));
      rot_boundary_close(s, d, 0.0);
      const CompatReport r = compat_check(s.metric(), d, BackgroundFamily::frozen(s.metric()));
      CHECK(r.order0());
      CHECK(r.order1());
      CHECK(r.order1_conf.residual <= 1e-10);
    }
    SUBCASE("hemisphere with eta = t fails order 1 by exactly 1") {
      RotState s = hemisphere_state(n, 200);
      const BoundaryDatum d = hemisphere_data(s, EtaRule::time(TimeFunction::linear(0.0, 1.0)));
      rot_boundary_close(s, d, 0.0);
      const CompatReport r = compat_check(s.metric(), d, BackgroundFamily::frozen(s.metric()));
      CHECK(r.order0());
      CHECK_FALSE(r.order1());
      CHECK(r.order1_conf.pass());
      CHECK_FALSE(r.order1_mean.pass());
      CHECK(std::abs(r.order1_mean_signed - 1.0) <= 1e-6);
    }
    SUBCASE("constant gamma on the hemisphere still passes the conformal rate") {
      RotState s = hemisphere_state(n, 100);
      const BoundaryDatum d = rot_datum(s, EtaRule::time(TimeFunction::constant(0.0)));
      rot_boundary_close(s, d, 0.0);
      const CompatReport r = compat_check(s.metric(), d, BackgroundFamily::frozen(s.metric()));
      // gamma-traceless parts only: a pure rescaling of g^T is allowed
      CHECK(r.order1_conf.pass());
    }
  }
  SUBCASE("order 0 mismatch") {
    RotState s = hemisphere_state(2, 100);
    const BoundaryDatum d = hemisphere_data(s, EtaRule::time(TimeFunction::constant(1.0)));
    const CompatReport r = compat_check(s.metric(), d, BackgroundFamily::frozen(s.metric()));
    CHECK_FALSE(r.order0());
    CHECK(r.order0_mean.residual == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("compatibility on the slab") {
  const double pi = std::numbers::pi;
  const Chart c = Chart::slab_torus(2, 13, 8);
  const MetricField g0 = random_smooth_metric(c, 3, 0.1);
  const BoundaryDatum d = BoundaryDatum::from_initial(g0);
  const CompatReport r = compat_check(g0, d, BackgroundFamily::frozen(g0));
  CHECK(r.order0());
  // frozen data against a curved g0: the first time derivative does not match
  CHECK_FALSE(r.order1());

  SUBCASE("verdicts are invariant under gamma -> c^2(x) gamma") {
    BoundaryDatum dc;
    for (Side s : c.sides()) {
      BoundaryField f = d.side(s).gamma.frame(0.0);
      for (std::size_t b = 0; b < f.count; ++b) {
        const double x1 = c.coordinate(c.boundary_node(s, b), 1);
        const double c2 = 1.0 + 0.5 * std::sin(2.0 * pi * x1);
        for (int k = 0; k < f.components; ++k) f.at(b, k) *= c2;
      }
      dc.sides.emplace(s, SideDatum{GammaRule::constant(std::move(f)), d.side(s).eta});
    }
    const CompatReport rc = compat_check(g0, dc, BackgroundFamily::frozen(g0));
    CHECK(rc.order0() == r.order0());
    CHECK(rc.order1() == r.order1());
    CHECK(rc.order0_conf.residual <= 1e-13);
    CHECK(rc.order1_conf.residual == doctest::Approx(r.order1_conf.residual).epsilon(1e-9));
    CHECK(rc.order1_mean.residual == doctest::Approx(r.order1_mean.residual).epsilon(1e-12));
  }
  SUBCASE("background must start at g0") {
    const MetricField other = random_smooth_metric(c, 4, 0.1);
    CHECK_THROWS_AS(compat_check(g0, d, BackgroundFamily::frozen(other)), DataError);
  }
  SUBCASE("moving background is reported as unaligned") {
    SymTensorField t = g0.tensor();
    t *= 1.1;
    const BackgroundFamily bg = BackgroundFamily::tabulated({0.0, 1.0}, {g0, MetricField(t)});
    const CompatReport rm = compat_check(g0, d, bg);
    CHECK_FALSE(rm.gt_aligned);
    CHECK(rm.gt_rate == doctest::Approx(0.1 * g0.tensor().max_abs()).epsilon(1e-6));
  }
}

TEST_CASE("corner probe on synthetic series") {
  auto series = [](double power) {
    std::vector<ProbeSample> out{{0.0, {1.0, 2.0}}};
    for (int k = 8; k >= 0; --k) {
      const double t = std::ldexp(0.1, -k);
      out.push_back({t, {1.0 + t + std::pow(t, power), 2.0 - t}});
    }
    return out;
  };
  const CornerProbeReport smooth = corner_probe(series(2.0));
  CHECK(smooth.t.size() == 8);
  CHECK(smooth.q1_exponent == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(smooth.q1.front() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_FALSE(smooth.flag);
  const CornerProbeReport rough = corner_probe(series(1.5));
  CHECK(rough.q1_exponent == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(rough.flag);

  std::vector<ProbeSample> linear{{0.0, {1.0}}};
  for (double t : {0.01, 0.02, 0.04, 0.08}) linear.push_back({t, {1.0 + 3.0 * t}});
  const CornerProbeReport lin = corner_probe(linear);
  CHECK(lin.trivial);
  CHECK_FALSE(lin.flag);
  CHECK(lin.q0.front() == doctest::Approx(3.0));

  CHECK_THROWS_AS(corner_probe({{0.01, {1.0}}, {0.02, {1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(corner_probe({{0.0, {1.0}}, {0.01, {1.0}}, {0.02, {1.0}}}), std::invalid_argument);
  CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("corner probe separates compatible and incompatible runs") {
  const CornerProbeReport good =
      corner_probe(face_series(hemisphere_probe_run(EtaRule::time(TimeFunction::constant(0.0)))));
  CHECK_FALSE(good.trivial);
  CHECK(good.q1_exponent >= -0.1);
  CHECK_FALSE(good.flag);
  const CornerProbeReport bad =
      corner_probe(face_series(hemisphere_probe_run(EtaRule::time(TimeFunction::linear(0.0, 1.0)))));
  CHECK(bad.q1_exponent < kCornerFlagExponent);
  CHECK(bad.flag);
}

TEST_CASE("corner probe on a flat static slab run is trivial") {
  const Chart c = Chart::slab_torus(2, 9, 4);
  const MetricField g0 = MetricField::identity(c);
  RunOptions o;
  o.horizon = 0.02;
  o.cadence = Cadence::dyadic(0.02, 4);
  const FlowTrajectory tr = run(g0, BoundaryDatum::from_initial(g0), BackgroundFamily::frozen(g0), o);
  for (Side s : c.sides()) {
    const CornerProbeReport r = corner_probe(boundary_series(tr, s));
    CHECK(r.trivial);
    CHECK_FALSE(r.flag);
    for (double q : r.q0) CHECK(q <= 1e-10);
  }
}

TEST_CASE("extension monitor") {
  SUBCASE("flags once the threshold is crossed while increasing") {
    ExtensionMonitor m;
    CHECK_FALSE(m.add(0.0, 1.0));
    CHECK_FALSE(m.add(0.1, 10.0));
    CHECK_FALSE(m.add(0.2, 50.0));
    CHECK_FALSE(m.add(0.3, 99.0));
    CHECK(m.add(0.4, 100.0));
    CHECK(m.t_flag() == 0.4);
    CHECK(m.add(0.5, 1.0));  // sticky
    CHECK(m.series().size() == 6);
  }
  SUBCASE("needs three increasing samples") {
    ExtensionMonitor m;
    m.add(0.0, 1.0);
    m.add(0.1, 300.0);
    CHECK_FALSE(m.add(0.2, 200.0));
    CHECK_FALSE(m.add(0.3, 250.0));
    CHECK(m.add(0.4, 260.0));
  }
  SUBCASE("roundoff growth on flat data stays under the floor") {
    ExtensionMonitor m;
    for (int k = 0; k < 50; ++k) CHECK_FALSE(m.add(0.01 * k, 1e-16 * (1 + k)));
  }
  SUBCASE("flat slab run") {
    const Chart c = Chart::slab_torus(2, 9, 4);
    const MetricField g0 = MetricField::identity(c);
    RunOptions o;
    o.horizon = 0.05;
    const FlowTrajectory tr = run(g0, BoundaryDatum::from_initial(g0), BackgroundFamily::frozen(g0), o);
    const ExtensionMonitor m = extension_monitor(tr);
    CHECK_FALSE(m.flagged());
    for (double v : m.series()) CHECK(v <= 1e-10);
  }
  SUBCASE("warped slab with mild data") {
    const Chart c = Chart::slab_torus(2, 11, 4);
    const MetricField g0 = warped_slab(c, [](double x) { return 1.0 + 0.2 * x - 0.1 * x * x; });
    RunOptions o;
    o.horizon = 0.05;
    const FlowTrajectory tr = run(g0, BoundaryDatum::from_initial(g0), BackgroundFamily::frozen(g0), o);
    REQUIRE(tr.cause == Termination::Horizon);
    CHECK_FALSE(extension_monitor(tr).flagged());
  }
  SUBCASE("M is invariant under tangential grid translations") {
    const double pi = std::numbers::pi;
    const Chart c = Chart::slab_torus(2, 9, 8);
    auto make = [&](int shift) {
      return MetricField(MetricField::identity(c).tensor() +
                         sample(c, Rank::Sym2, [&](const Point& x, int comp) {
                           return 0.05 * std::sin(pi * x[0]) *
                                  std::cos(2.0 * pi * (x[1] + shift / 8.0) + comp);
                         }));
    };
    const MetricField a = make(0), b = make(3);
    const Diagnostics da = diagnose(a, a, BoundaryDatum::from_initial(a), 0.0);
    const Diagnostics db = diagnose(b, b, BoundaryDatum::from_initial(b), 0.0);
    CHECK(da.sup_rm + da.sup_a == doctest::Approx(db.sup_rm + db.sup_a).epsilon(1e-13));
    CHECK(da.sup_rm > 1e-3);
  }
}
