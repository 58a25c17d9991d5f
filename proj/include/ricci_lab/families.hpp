#pragma once

#include <cstdint>
#include <functional>

#include "ricci_lab/metric.hpp"
#include "ricci_lab/stencil.hpp"

namespace rlab {

/// Fill a field from a closed-form expression f(point, component).
SymTensorField sample(const Chart& chart, Rank rank,
                      const std::function<double(const Point&, int)>& f);

/// Smooth random symmetric tensor: each packed component is a short sum of modes
/// amp * sin(pi k0 x0 + 2 pi k.x / L + phase). Tangentially periodic; deterministic in seed.
SymTensorField random_smooth_tensor(const Chart& chart, std::uint64_t seed, double amplitude);

/// delta + random_smooth_tensor; amplitude must keep the result positive-definite.
MetricField random_smooth_metric(const Chart& chart, std::uint64_t seed, double amplitude);

/// e^{2 c x0} delta on a SlabTorus.
MetricField conformal_exp(const Chart& slab, double c);

/// (dx0)^2 + psi(x0)^2 delta on a SlabTorus.
MetricField warped_slab(const Chart& slab, const std::function<double(double)>& psi);

}  // namespace rlab
