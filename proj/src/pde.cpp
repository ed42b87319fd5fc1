#include "gptpinn/pde.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gptpinn/error.hpp"

namespace gptpinn {

std::string format_parameter(const ParameterPoint& mu) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < mu.dim(); ++i) {
    if (i) os << ',';
    os << mu[i];
  }
  return os.str();
}

ParameterPoint parse_parameter(std::string_view text) {
  ParameterPoint mu;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string part(text.substr(start, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - start));
    // trim
    const auto b = part.find_first_not_of(" \t");
    const auto e = part.find_last_not_of(" \t");
    if (b == std::string::npos) throw Error("malformed parameter '" + std::string(text) + "'");
    part = part.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw Error("malformed parameter '" + std::string(text) + "'");
    }
    if (used != part.size() || !std::isfinite(v)) {
      throw Error("malformed parameter '" + std::string(text) + "'");
    }
    mu.values.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return mu;
}

double distance(const ParameterPoint& a, const ParameterPoint& b) {
  if (a.dim() != b.dim()) throw Error("parameter dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

ParameterDomain::ParameterDomain(std::vector<Interval> bounds)
    : bounds_(std::move(bounds)) {
  for (const auto& b : bounds_) {
    if (!(b.lo <= b.hi)) throw Error("domain interval with lower > upper");
  }
}

bool ParameterDomain::contains(const ParameterPoint& mu) const {
  if (mu.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!(mu[i] >= bounds_[i].lo && mu[i] <= bounds_[i].hi)) return false;
  }
  return true;
}

std::vector<ParameterPoint> ParameterDomain::tensor_grid(
    const std::vector<int>& counts) const {
  if (counts.size() != dim()) throw Error("grid spec dimension mismatch");
  std::vector<std::vector<double>> axes;
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (counts[i] < 1) throw Error("grid counts must be positive");
    std::vector<double> axis(static_cast<std::size_t>(counts[i]));
    for (int k = 0; k < counts[i]; ++k) {
      axis[static_cast<std::size_t>(k)] =
          counts[i] == 1 ? bounds_[i].lo
                         : bounds_[i].lo + (bounds_[i].hi - bounds_[i].lo) *
                                               static_cast<double>(k) /
                                               static_cast<double>(counts[i] - 1);
    }
    axes.push_back(std::move(axis));
    total *= static_cast<std::size_t>(counts[i]);
  }
  std::vector<ParameterPoint> grid;
  grid.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    ParameterPoint mu;
    mu.values.resize(dim());
    std::size_t rem = flat;
    for (std::size_t i = dim(); i-- > 0;) {
      const std::size_t c = static_cast<std::size_t>(counts[i]);
      mu.values[i] = axes[i][rem % c];
      rem /= c;
    }
    grid.push_back(std::move(mu));
  }
  return grid;
}

std::string_view to_string(PdeFamily f) {
  switch (f) {
    case PdeFamily::kKleinGordon:
      return "kg";
    case PdeFamily::kBurgers:
      return "burgers";
    case PdeFamily::kAllenCahn:
      return "ac";
  }
  return "unknown";
}

PdeFamily pde_family_from_string(std::string_view name) {
  if (name == "kg") return PdeFamily::kKleinGordon;
  if (name == "burgers") return PdeFamily::kBurgers;
  if (name == "ac") return PdeFamily::kAllenCahn;
  throw Error("unknown pde family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Residuals with partial derivatives. The partials are the per-point factors
// that the chain rule multiplies into each basis snapshot:
//   KG:      1 * u_tt + alpha * u_xx + (beta + 2 gamma u) * u
//   Burgers: 1 * u_t + u * u_x + u_x * u - nu * u_xx
//   AC:      1 * u_t - lambda * u_xx + eps (3u^2 - 1) * u

namespace {

struct PointResidual {
  double r = 0.0;
  std::array<double, kNumChannels> d{};
};

PointResidual kg_point(const ExtendedState& e, double x, double t,
                       const ParameterPoint& mu) {
  const double alpha = mu[0], beta = mu[1], gamma = mu[2];
  const double c = std::cos(t);
  PointResidual out;
  out.r = e.u_tt + alpha * e.u_xx + beta * e.u + gamma * e.u * e.u +
          x * c - x * x * c * c;
  out.d[kU] = beta + 2.0 * gamma * e.u;
  out.d[kUxx] = alpha;
  out.d[kUtt] = 1.0;
  return out;
}

PointResidual burgers_point(const ExtendedState& e, double, double,
                            const ParameterPoint& mu) {
  const double nu = mu[0];
  PointResidual out;
  out.r = e.u_t + e.u * e.u_x - nu * e.u_xx;
  out.d[kU] = e.u_x;
  out.d[kUx] = e.u;
  out.d[kUt] = 1.0;
  out.d[kUxx] = -nu;
  return out;
}

PointResidual ac_point(const ExtendedState& e, double, double,
                       const ParameterPoint& mu) {
  const double lambda = mu[0], eps = mu[1];
  PointResidual out;
  out.r = e.u_t - lambda * e.u_xx + eps * (e.u * e.u * e.u - e.u);
  out.d[kU] = eps * (3.0 * e.u * e.u - 1.0);
  out.d[kUt] = 1.0;
  out.d[kUxx] = -lambda;
  return out;
}

void check_dim(const ParameterPoint& mu, std::size_t d, const char* what) {
  if (mu.dim() != d) {
    throw Error(std::string(what) + " expects a " + std::to_string(d) +
                "-component parameter");
  }
}

}  // namespace

double kg_residual(const ExtendedState& ext, double x, double t,
                   const ParameterPoint& mu) {
  check_dim(mu, 3, "klein-gordon");
  return kg_point(ext, x, t, mu).r;
}

double burgers_residual(const ExtendedState& ext, double x, double t,
                        const ParameterPoint& mu) {
  check_dim(mu, 1, "burgers");
  return burgers_point(ext, x, t, mu).r;
}

double allen_cahn_residual(const ExtendedState& ext, double x, double t,
                           const ParameterPoint& mu) {
  check_dim(mu, 2, "allen-cahn");
  return ac_point(ext, x, t, mu).r;
}

PdeDefinition::PdeDefinition(PdeFamily family, ParameterDomain domain,
                             double t_final)
    : family_(family), domain_(std::move(domain)), t_final_(t_final) {
  const std::size_t expected = family == PdeFamily::kKleinGordon ? 3
                               : family == PdeFamily::kBurgers   ? 1
                                                                 : 2;
  if (domain_.dim() != expected) {
    throw Error("domain has " + std::to_string(domain_.dim()) +
                " components, family '" + std::string(to_string(family)) +
                "' needs " + std::to_string(expected));
  }
  if (!(t_final_ > 0.0)) throw Error("time horizon must be positive");
}

PdeDefinition PdeDefinition::standard(PdeFamily family) {
  switch (family) {
    case PdeFamily::kKleinGordon:
      return {family, ParameterDomain({{-2.0, -1.0}, {0.0, 1.0}, {0.0, 1.0}}),
              5.0};
    case PdeFamily::kBurgers:
      return {family, ParameterDomain({{0.005, 1.0}}), 1.0};
    case PdeFamily::kAllenCahn:
      return {family, ParameterDomain({{0.0001, 0.001}, {1.0, 5.0}}), 1.0};
  }
  throw Error("unknown pde family");
}

int PdeDefinition::time_order() const {
  return family_ == PdeFamily::kKleinGordon ? 2 : 1;
}

Channels PdeDefinition::interior_channels() const {
  switch (family_) {
    case PdeFamily::kKleinGordon:
      return kValue | kDxx | kDtt;
    case PdeFamily::kBurgers:
      return kValue | kDx | kDt | kDxx;
    case PdeFamily::kAllenCahn:
      return kValue | kDt | kDxx;
  }
  return kValue;
}

double PdeDefinition::residual(const ExtendedState& ext, double x, double t,
                               const ParameterPoint& mu) const {
  switch (family_) {
    case PdeFamily::kKleinGordon:
      return kg_residual(ext, x, t, mu);
    case PdeFamily::kBurgers:
      return burgers_residual(ext, x, t, mu);
    case PdeFamily::kAllenCahn:
      return allen_cahn_residual(ext, x, t, mu);
  }
  return 0.0;
}

ResidualBatch PdeDefinition::interior_residual(const ExtendedBatch& ext,
                                               const PointBatch& points,
                                               const ParameterPoint& mu) const {
  PointResidual (*fn)(const ExtendedState&, double, double,
                      const ParameterPoint&) = nullptr;
  switch (family_) {
    case PdeFamily::kKleinGordon:
      check_dim(mu, 3, "klein-gordon");
      fn = &kg_point;
      break;
    case PdeFamily::kBurgers:
      check_dim(mu, 1, "burgers");
      fn = &burgers_point;
      break;
    case PdeFamily::kAllenCahn:
      check_dim(mu, 2, "allen-cahn");
      fn = &ac_point;
      break;
  }
  const Channels needed = interior_channels();
  const Eigen::Index n = points.size();
  ResidualBatch out;
  out.r.resize(n);
  std::array<bool, kNumChannels> used{};
  used[kU] = true;
  used[kUx] = (needed & kDx) != 0;
  used[kUt] = (needed & kDt) != 0;
  used[kUxx] = (needed & kDxx) != 0;
  used[kUtt] = (needed & kDtt) != 0;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (used[ch]) out.partial[ch].resize(n);
  }
  for (Eigen::Index p = 0; p < n; ++p) {
    const PointResidual pr = fn(ext.at(p), points.x(p), points.t(p), mu);
    out.r(p) = pr.r;
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (used[ch]) out.partial[ch](p) = pr.d[ch];
    }
  }
  return out;
}

double PdeDefinition::boundary_value(double x, double t) const {
  switch (family_) {
    case PdeFamily::kKleinGordon:
      // u(-1,t) = -cos t, u(1,t) = cos t
      return x * std::cos(t);
    case PdeFamily::kBurgers:
      return 0.0;
    case PdeFamily::kAllenCahn:
      return -1.0;
  }
  return 0.0;
}

double PdeDefinition::initial_value(double x) const {
  switch (family_) {
    case PdeFamily::kKleinGordon:
      return x;
    case PdeFamily::kBurgers:
      return -std::sin(std::numbers::pi * x);
    case PdeFamily::kAllenCahn:
      return x * x * std::cos(std::numbers::pi * x);
  }
  return 0.0;
}

double PdeDefinition::initial_velocity(double) const {
  if (!has_initial_velocity()) {
    throw Error("initial velocity is only defined for second-order equations");
  }
  return 0.0;
}

ResidualBatch boundary_residual(const PdeDefinition& pde,
                                const ExtendedBatch& ext,
                                const PointBatch& points) {
  ResidualBatch out;
  const Eigen::Index n = points.size();
  out.r.resize(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    out.r(p) = ext.u()(p) - pde.boundary_value(points.x(p), points.t(p));
  }
  out.partial[kU] = Vector::Ones(n);
  return out;
}

ResidualBatch initial_residual(const PdeDefinition& pde,
                               const ExtendedBatch& ext,
                               const PointBatch& points) {
  ResidualBatch out;
  const Eigen::Index n = points.size();
  out.r.resize(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    out.r(p) = ext.u()(p) - pde.initial_value(points.x(p));
  }
  out.partial[kU] = Vector::Ones(n);
  return out;
}

ResidualBatch initial_velocity_residual(const PdeDefinition& pde,
                                        const ExtendedBatch& ext,
                                        const PointBatch& points) {
  ResidualBatch out;
  const Eigen::Index n = points.size();
  out.r.resize(n);
  for (Eigen::Index p = 0; p < n; ++p) {
    out.r(p) = ext.u_t()(p) - pde.initial_velocity(points.x(p));
  }
  out.partial[kUt] = Vector::Ones(n);
  return out;
}

}  // namespace gptpinn
