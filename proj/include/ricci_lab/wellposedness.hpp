#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ricci_lab/boundary.hpp"

namespace rlab {

class BackgroundFamily;
struct FlowTrajectory;

// ------------------------------------------------------------------ symbol

using Complex = std::complex<double>;
using ComplexMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

/// Frozen-coefficient boundary symbol over the unknowns (h00, h01..h0n, phi) after
/// imposing h_ab = phi delta_ab on the tangential block. Rows: the h(N)-row, the n
/// tangential gauge rows, the mean-curvature row.
struct SymbolSystem {
  int n = 0;
  Complex p;
  std::vector<double> zeta;
  Complex tau_hat;  ///< i sqrt(p + |zeta|^2), principal root
  ComplexMat matrix;

  double zeta_norm2() const;
  /// Re p >= -delta1 |zeta|^2 and tau_hat != 0.
  bool admissible(double delta1) const;
  Complex determinant() const;
  /// |det| / (|p| + |zeta|^2)^{(n+2)/2}; invariant under (p, zeta) -> (c^2 p, c zeta).
  double normalized_determinant() const;
  /// Numerical rank of the matrix (relative tolerance 1e-12).
  int rank() const;
  /// The hand elimination: tau_hat h00 = 0, then phi (p n + 2 |zeta|^2 (n-1)) = 0, then h0mu.
  /// True when each pivot in that chain is nonzero.
  bool elimination_succeeds() const;
};

SymbolSystem symbol_matrix(int n, Complex p, const std::vector<double>& zeta);

struct SymbolSample {
  Complex p;
  std::vector<double> zeta;
  double normalized_det = 0.0;
  bool excluded = false;
  bool failing = false;
};

struct ComplementingReport {
  int n = 0;
  int samples = 0;
  double delta1 = 0.0;
  std::uint64_t seed = 0;
  double min_normalized_det = 0.0;
  int failing = 0;
  int excluded = 0;
  std::vector<SymbolSample> sample_list;
  bool pass() const { return failing == 0; }
};

/// Normalized determinants below this count as failing samples.
inline constexpr double kSymbolFailTolerance = 1e-12;

/// Seeded sampler over the admissible parabola. |zeta| log-uniform in [1e-2, 1e2] with a
/// uniform direction; p interior (|p| <= 100 |zeta|^2), on the parabola Re p = -delta1 |zeta|^2,
/// or p = 0, in a fixed rotation.
ComplementingReport complementing_check(int n, int num_samples, double delta1, std::uint64_t seed);

/// Classifies one explicit sample (excluded when outside the admissible set).
SymbolSample classify_sample(int n, Complex p, const std::vector<double>& zeta, double delta1);

// ------------------------------------------------------------- compatibility

struct CompatItem {
  std::string name;
  double residual = 0.0;
  double threshold = 0.0;
  bool pass() const { return residual <= threshold; }
};

struct CompatReport {
  CompatItem order0_mean{"order0_mean"};
  CompatItem order0_conf{"order0_conf"};
  CompatItem order1_conf{"order1_conf"};
  CompatItem order1_mean{"order1_mean"};
  /// Signed order-1 mean residual at the worst node: eta'(0) - H'_{g0}(h1).
  double order1_mean_signed = 0.0;
  bool gt_initial = true;   ///< gt(0) == g0 (checked exactly)
  double gt_rate = 0.0;     ///< sup |d/dt gt(0)|
  bool gt_aligned = true;   ///< gt_rate <= 1e-8
  double data_scale = 0.0;

  bool order0() const { return order0_mean.pass() && order0_conf.pass(); }
  bool order1() const { return order1_mean.pass() && order1_conf.pass(); }
};

inline constexpr double kCompatStep = 1e-6;

/// h1 = -2 Ric(g0). Derivatives of the data use one-sided three-point differences over
/// [0, 2 dt]. Throws DataError when gt(0) != g0.
CompatReport compat_check(const MetricField& g0, const BoundaryDatum& datum,
                          const BackgroundFamily& background);

// ------------------------------------------------------------ corner probe

struct ProbeSample {
  double t;
  std::vector<double> values;
};

struct CornerProbeReport {
  std::vector<double> t;   ///< t at which Q1 is evaluated (t and 2t both sampled)
  std::vector<double> q1;  ///< ||g(2t) - 2 g(t) + g(0)|| / t^2, a d_t^2 g estimate
  std::vector<double> q0;  ///< ||g(t) - g(0)|| / t
  double q1_exponent = 0.0;
  double q0_exponent = 0.0;
  bool trivial = false;  ///< Q1 at roundoff, no fit
  bool flag = false;     ///< q1_exponent < -0.4
};

inline constexpr double kCornerFlagExponent = -0.4;

/// Needs g(0) and at least three pairs (t, 2t) among the samples.
CornerProbeReport corner_probe(const std::vector<ProbeSample>& samples);

/// Boundary-node metric values of one side at every snapshot.
std::vector<ProbeSample> boundary_series(const FlowTrajectory& traj, Side side);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ------------------------------------------------------------ extension monitor

/// M(t) = sup|Rm| + sup|A|. The flag is raised when M >= 100 max(M(0), floor) and the last
/// three samples increase strictly. The floor keeps flat data (M(0) = 0) from flagging on
/// roundoff.
class ExtensionMonitor {
 public:
  explicit ExtensionMonitor(double floor = 1e-6) : floor_(floor) {}
  /// Appends a sample; returns true the first time the flag is raised and on every later call.
  bool add(double t, double m);
  bool flagged() const { return flagged_; }
  double t_flag() const { return t_flag_; }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& series() const { return m_; }

 private:
  double floor_;
  std::vector<double> t_;
  std::vector<double> m_;
  bool flagged_ = false;
  double t_flag_ = 0.0;
};

ExtensionMonitor extension_monitor(const FlowTrajectory& traj);

}  // namespace rlab
