#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rlab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric that is not positive definite (Cholesky failure) at some node.
class SingularMetric : public Error {
 public:
  SingularMetric(std::size_t node, const std::string& what)
      : Error("singular metric at node " + std::to_string(node) + ": " + what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// The evolving metric lost positivity during time stepping.
class DegenerateMetric : public Error {
 public:
  DegenerateMetric(std::size_t node, double t, const std::string& what)
      : Error("degenerate metric at node " + std::to_string(node) + ", t=" + std::to_string(t) +
              ": " + what),
        node_(node),
        t_(t) {}
  std::size_t node() const { return node_; }
  double time() const { return t_; }

 private:
  std::size_t node_;
  double t_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(int side, std::size_t node, double residual)
      : Error("boundary Newton solve did not converge on side " + std::to_string(side) +
              " (worst node " + std::to_string(node) + ", residual " + std::to_string(residual) +
              ")"),
        side_(side),
        node_(node),
        residual_(residual) {}
  int side() const { return side_; }
  std::size_t node() const { return node_; }
  double residual() const { return residual_; }

 private:
  int side_;
  std::size_t node_;
  double residual_;
};

class SingularJacobian : public Error {
 public:
  explicit SingularJacobian(int side)
      : Error("singular boundary Jacobian on side " + std::to_string(side)), side_(side) {}
  int side() const { return side_; }

 private:
  int side_;
};

/// Any non-finite value produced during a step.
class NonFinite : public Error {
 public:
  using Error::Error;
};

/// Data rule queried outside its tabulated range, or otherwise ill-posed input data.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace rlab
