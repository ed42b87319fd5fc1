#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gptpinn/mlp.hpp"

namespace gptpinn {

/// A PDE parameter value mu, e.g. (alpha, beta, gamma) for Klein-Gordon.
struct ParameterPoint {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const ParameterPoint&, const ParameterPoint&) = default;
};

std::string format_parameter(const ParameterPoint& mu);
/// Parses "a,b,c".
ParameterPoint parse_parameter(std::string_view text);
double distance(const ParameterPoint& a, const ParameterPoint& b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box of admissible parameters.
class ParameterDomain {
 public:
  ParameterDomain() = default;
  explicit ParameterDomain(std::vector<Interval> bounds);

  std::size_t dim() const { return bounds_.size(); }
  const std::vector<Interval>& bounds() const { return bounds_; }
  bool contains(const ParameterPoint& mu) const;
  /// Tensor grid with `counts[i]` equispaced values (endpoints included) per
  /// component, last component varying fastest.
  std::vector<ParameterPoint> tensor_grid(const std::vector<int>& counts) const;

  friend bool operator==(const ParameterDomain&, const ParameterDomain&) =
      default;

 private:
  std::vector<Interval> bounds_;
};

enum class PdeFamily { kKleinGordon, kBurgers, kAllenCahn };

std::string_view to_string(PdeFamily f);
PdeFamily pde_family_from_string(std::string_view name);

// Residual operators. Each returns the pointwise PDE residual.
double kg_residual(const ExtendedState& ext, double x, double t,
                   const ParameterPoint& mu);
double burgers_residual(const ExtendedState& ext, double x, double t,
                        const ParameterPoint& mu);
double allen_cahn_residual(const ExtendedState& ext, double x, double t,
                           const ParameterPoint& mu);

/// One of the three parametric families on Omega = [-1, 1], t in [0, T], with
/// Dirichlet boundary data.
class PdeDefinition {
 public:
  PdeDefinition() = default;
  PdeDefinition(PdeFamily family, ParameterDomain domain, double t_final);

  /// Standard domain and horizon for the family.
  static PdeDefinition standard(PdeFamily family);

  PdeFamily family() const { return family_; }
  const ParameterDomain& domain() const { return domain_; }
  double t_final() const { return t_final_; }
  double x_min() const { return -1.0; }
  double x_max() const { return 1.0; }

  /// Highest time derivative in the equation (2 for Klein-Gordon).
  int time_order() const;
  bool has_initial_velocity() const { return time_order() == 2; }

  /// Channels the interior residual reads.
  Channels interior_channels() const;

  double residual(const ExtendedState& ext, double x, double t,
                  const ParameterPoint& mu) const;
  ResidualBatch interior_residual(const ExtendedBatch& ext,
                                  const PointBatch& points,
                                  const ParameterPoint& mu) const;

  double boundary_value(double x, double t) const;
  double initial_value(double x) const;
  double initial_velocity(double x) const;

  friend bool operator==(const PdeDefinition&, const PdeDefinition&) = default;

 private:
  PdeFamily family_ = PdeFamily::kKleinGordon;
  ParameterDomain domain_;
  double t_final_ = 1.0;
};

/// Per-point deviations from boundary and initial data.
struct BoundaryInitialResiduals {
  Vector boundary;
  Vector initial;
  /// Only for second-order-in-time equations; empty otherwise.
  Vector initial_velocity;
};

ResidualBatch boundary_residual(const PdeDefinition& pde,
                                const ExtendedBatch& ext,
                                const PointBatch& points);
ResidualBatch initial_residual(const PdeDefinition& pde,
                               const ExtendedBatch& ext,
                               const PointBatch& points);
ResidualBatch initial_velocity_residual(const PdeDefinition& pde,
                                        const ExtendedBatch& ext,
                                        const PointBatch& points);

}  // namespace gptpinn
