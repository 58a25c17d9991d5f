#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ricci_lab/curvature.hpp"

namespace rlab {

/// n x n matrix at boundary node b of a packed boundary field.
SmallMat unpack_boundary(const BoundaryField& f, std::size_t b, int n);

/// Piecewise-linear table on [t.front(), t.back()]; evaluation outside raises DataError.
class Table {
 public:
  Table() = default;
  Table(std::vector<double> t, std::vector<double> v);
  double operator()(double t) const;
  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::vector<double> t_;
  std::vector<double> v_;
};

/// Scalar function of time: constant, affine a + b t, or tabulated.
class TimeFunction {
 public:
  enum class Kind { Constant, Linear, Tabulated };
  static TimeFunction constant(double a);
  static TimeFunction linear(double a, double b);
  static TimeFunction tabulated(Table table);

  double operator()(double t) const;
  double t_max() const;
  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const Table& table() const { return table_; }

 private:
  Kind kind_ = Kind::Constant;
  double a_ = 0.0;
  double b_ = 0.0;
  Table table_;
};

/// gamma(t) per boundary node, packed n x n.
class GammaRule {
 public:
  enum class Kind { Constant, Scaled, Tabulated };
  static GammaRule constant(BoundaryField gamma0);
  /// lambda(t) * gamma0
  static GammaRule scaled(BoundaryField gamma0, TimeFunction lambda);
  static GammaRule tabulated(std::vector<double> times, std::vector<BoundaryField> frames);

  SmallMat at(std::size_t b, double t) const;
  BoundaryField frame(double t) const;
  double t_max() const;
  Kind kind() const { return kind_; }
  const BoundaryField& base() const { return frames_.front(); }
  const TimeFunction& lambda() const { return lambda_; }

 private:
  Kind kind_ = Kind::Constant;
  int n_ = 1;
  TimeFunction lambda_;
  std::vector<double> times_;
  std::vector<BoundaryField> frames_;
};

/// Mean-curvature datum eta(x, t, gT, gT^{-1}).
class EtaRule {
 public:
  using InducedFn = std::function<double(double t, const SmallMat& gT, const SmallMat& gTinv)>;
  enum class Kind { Time, Field, Tabulated, Induced };

  /// eta(x, t) = f(t)
  static EtaRule time(TimeFunction f);
  /// eta(x, t) = base[b] + shift(t)
  static EtaRule field(std::vector<double> base, TimeFunction shift = TimeFunction::constant(0.0));
  /// eta(x, t) linear in t between per-node frames
  static EtaRule tabulated(std::vector<double> times, std::vector<std::vector<double>> frames);
  /// Arbitrary rule of the induced metric.
  static EtaRule induced(InducedFn fn, std::string description);
  /// eta = value * (tr_delta gT / n)^power, delta the flat tangential chart metric.
  static EtaRule induced_power(double value, double power);

  double operator()(std::size_t b, double t, const SmallMat& gT) const;
  double t_max() const;
  Kind kind() const { return kind_; }
  bool uses_metric() const { return kind_ == Kind::Induced; }
  const std::string& description() const { return description_; }

 private:
  Kind kind_ = Kind::Time;
  TimeFunction f_;
  std::vector<double> base_;
  std::vector<double> times_;
  std::vector<std::vector<double>> frames_;
  InducedFn fn_;
  std::string description_;
};

struct SideDatum {
  GammaRule gamma;
  EtaRule eta;
};

/// Boundary data for each side of a chart.
struct BoundaryDatum {
  std::map<Side, SideDatum> sides;

  const SideDatum& side(Side s) const;
  double t_max() const;

  /// gamma = induced metric of g0 (constant), eta = H(g0) per node (constant).
  static BoundaryDatum from_initial(const MetricField& g0);
};

/// Stacked residual layout per boundary node: gauge (n+1), mean (1), conformal (n(n+1)/2 - 1).
struct ResidualLayout {
  int n;
  explicit ResidualLayout(int n);
  int gauge() const { return n + 1; }
  int mean() const { return 1; }
  int conformal() const { return n * (n + 1) / 2 - 1; }
  int total() const { return gauge() + mean() + conformal(); }
};

/// g^T - (tr_gamma g^T / n) gamma, packed n x n per boundary node.
BoundaryField conformal_residual(const MetricField& g, const BoundaryField& gamma, Side side);
/// H(g) - eta(x, t, g^T).
BoundaryField mean_residual(const MetricField& g, const BoundaryDatum& datum, double t, Side side);
/// One-form W(g, gt) at boundary nodes.
BoundaryField gauge_residual(const MetricField& g, const MetricField& gt, Side side);
/// Conformal factor tr_gamma g^T / n per boundary node.
BoundaryField conformal_factor(const MetricField& g, const BoundaryField& gamma, Side side);

/// Stacked residual (gauge, mean, conformal without its last diagonal entry).
BoundaryField stacked_residual(const MetricField& g, const MetricField& gt,
                               const BoundaryDatum& datum, double t, Side side);

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double fd_step = 1e-7;
  double damping_floor = 0x1p-20;
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  int halvings = 0;
};

/// Solve the three boundary conditions for the boundary-node values of g on one side,
/// holding interior nodes fixed. Damped Newton with a sparse forward-difference Jacobian.
SolveReport solve_boundary(MetricField& g, const MetricField& gt, const BoundaryDatum& datum,
                           double t, Side side, const NewtonOptions& opt = {});

}  // namespace rlab
