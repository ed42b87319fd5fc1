#include "gptpinn/collocation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "gptpinn/error.hpp"

namespace gptpinn {

std::string_view to_string(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::kUniformRandom:
      return "uniform-random";
    case SamplingStrategy::kUniformGrid:
      return "uniform-grid";
    case SamplingStrategy::kLatinHypercube:
      return "latin-hypercube";
  }
  return "unknown";
}

SamplingStrategy sampling_strategy_from_string(std::string_view name) {
  if (name == "uniform-random") return SamplingStrategy::kUniformRandom;
  if (name == "uniform-grid") return SamplingStrategy::kUniformGrid;
  if (name == "latin-hypercube") return SamplingStrategy::kLatinHypercube;
  throw Error("unknown sampling strategy '" + std::string(name) + "'");
}

std::string_view to_string(FilterRule r) {
  switch (r) {
    case FilterRule::kNone:
      return "none";
    case FilterRule::kMaxFraction:
      return "max";
    case FilterRule::kQuantile:
      return "quantile";
  }
  return "unknown";
}

FilterRule filter_rule_from_string(std::string_view name) {
  if (name == "none") return FilterRule::kNone;
  if (name == "max") return FilterRule::kMaxFraction;
  if (name == "quantile") return FilterRule::kQuantile;
  throw Error("unknown filter rule '" + std::string(name) + "'");
}

bool same_points(const CollocationSet& a, const CollocationSet& b) {
  auto eq = [](const PointBatch& p, const PointBatch& q) {
    return p.x.size() == q.x.size() && p.x == q.x && p.t == q.t;
  };
  return eq(a.interior, b.interior) && eq(a.boundary, b.boundary) &&
         eq(a.initial, b.initial);
}

namespace {

// Uniform in the open interval (0, 1).
double open_unit(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = 0.0;
  do {
    v = u(rng);
  } while (v <= 0.0);
  return v;
}

PointBatch make_batch(Eigen::Index n) {
  PointBatch b;
  b.x.resize(n);
  b.t.resize(n);
  return b;
}

}  // namespace

std::vector<std::vector<double>> latin_hypercube(
    int n, const std::vector<Interval>& box, std::uint64_t seed) {
  if (n <= 0) throw Error("latin hypercube needs a positive sample count");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> samples(
      static_cast<std::size_t>(n), std::vector<double>(box.size()));
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (std::size_t d = 0; d < box.size(); ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const double width = (box[d].hi - box[d].lo) / n;
    for (int i = 0; i < n; ++i) {
      const double offset = open_unit(rng);
      double v = box[d].lo + (perm[static_cast<std::size_t>(i)] + offset) * width;
      // guard against rounding onto the upper edge of the stratum
      const double stratum_hi =
          box[d].lo + (perm[static_cast<std::size_t>(i)] + 1) * width;
      if (v >= stratum_hi) v = std::nextafter(stratum_hi, box[d].lo);
      samples[static_cast<std::size_t>(i)][d] = v;
    }
  }
  return samples;
}

CollocationSet sample_collocation(const PdeDefinition& pde,
                                  const CollocationCounts& counts,
                                  SamplingStrategy strategy,
                                  std::uint64_t seed) {
  if (counts.interior <= 0 || counts.boundary <= 0 || counts.initial <= 0) {
    throw Error("collocation counts must be positive");
  }
  const double x0 = pde.x_min(), x1 = pde.x_max(), tf = pde.t_final();
  CollocationSet out;
  out.strategy = strategy;
  out.seed = seed;
  out.interior = make_batch(counts.interior);
  out.boundary = make_batch(counts.boundary);
  out.initial = make_batch(counts.initial);
  out.initial.t.setZero();

  // Boundary points: first ceil(n/2) on x = x0, the rest on x = x1.
  const int left = (counts.boundary + 1) / 2;
  for (int i = 0; i < counts.boundary; ++i) out.boundary.x(i) = i < left ? x0 : x1;

  switch (strategy) {
    case SamplingStrategy::kUniformRandom: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> ux(x0, x1);
      std::uniform_real_distribution<double> ut(0.0, tf);
      for (int i = 0; i < counts.interior; ++i) {
        out.interior.x(i) = ux(rng);
        out.interior.t(i) = tf * open_unit(rng);
      }
      for (int i = 0; i < counts.boundary; ++i) out.boundary.t(i) = ut(rng);
      for (int i = 0; i < counts.initial; ++i) out.initial.x(i) = ux(rng);
      break;
    }
    case SamplingStrategy::kUniformGrid: {
      const int m = static_cast<int>(std::lround(std::sqrt(counts.interior)));
      if (m * m != counts.interior) {
        throw Error("grid sampling needs a perfect-square interior count");
      }
      if (counts.boundary % 2 != 0) {
        throw Error("grid sampling needs an even boundary count");
      }
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          out.interior.x(i * m + j) = x0 + (x1 - x0) * (i + 0.5) / m;
          out.interior.t(i * m + j) = tf * (j + 0.5) / m;
        }
      }
      const int per_side = counts.boundary / 2;
      for (int k = 0; k < per_side; ++k) {
        const double t = per_side == 1 ? 0.0 : tf * k / (per_side - 1);
        out.boundary.t(k) = t;
        out.boundary.t(per_side + k) = t;
      }
      for (int k = 0; k < counts.initial; ++k) {
        out.initial.x(k) = counts.initial == 1
                               ? 0.5 * (x0 + x1)
                               : x0 + (x1 - x0) * k / (counts.initial - 1);
      }
      break;
    }
    case SamplingStrategy::kLatinHypercube: {
      // Independent sub-seeds per set keep each set a valid hypercube.
      std::seed_seq seq{seed};
      std::array<std::uint64_t, 4> sub{};
      {
        std::array<std::uint32_t, 8> raw{};
        seq.generate(raw.begin(), raw.end());
        for (std::size_t k = 0; k < 4; ++k) {
          sub[k] = (static_cast<std::uint64_t>(raw[2 * k]) << 32) | raw[2 * k + 1];
        }
      }
      const auto inner = latin_hypercube(counts.interior, {{x0, x1}, {0.0, tf}}, sub[0]);
      for (int i = 0; i < counts.interior; ++i) {
        out.interior.x(i) = inner[static_cast<std::size_t>(i)][0];
        out.interior.t(i) = inner[static_cast<std::size_t>(i)][1];
      }
      const int right = counts.boundary - left;
      const auto bl = latin_hypercube(left, {{0.0, tf}}, sub[1]);
      for (int i = 0; i < left; ++i) out.boundary.t(i) = bl[static_cast<std::size_t>(i)][0];
      if (right > 0) {
        const auto br = latin_hypercube(right, {{0.0, tf}}, sub[2]);
        for (int i = 0; i < right; ++i) {
          out.boundary.t(left + i) = br[static_cast<std::size_t>(i)][0];
        }
      }
      const auto ini = latin_hypercube(counts.initial, {{x0, x1}}, sub[3]);
      for (int i = 0; i < counts.initial; ++i) {
        out.initial.x(i) = ini[static_cast<std::size_t>(i)][0];
      }
      break;
    }
  }
  return out;
}

PointBatch select_points(const PointBatch& points,
                         const std::vector<Eigen::Index>& rows) {
  PointBatch out = make_batch(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x(static_cast<Eigen::Index>(k)) = points.x(rows[k]);
    out.t(static_cast<Eigen::Index>(k)) = points.t(rows[k]);
  }
  return out;
}

namespace {

std::vector<Eigen::Index> keep_rows(const std::vector<Vector>& per_basis,
                                    Eigen::Index n, FilterRule rule,
                                    double fraction) {
  std::vector<bool> drop(static_cast<std::size_t>(n), false);
  if (rule != FilterRule::kNone) {
    for (const Vector& values : per_basis) {
      if (values.size() != n) {
        throw Error("stiff-point values do not match the collocation set");
      }
      if (n == 0) continue;
      const Vector mag = values.cwiseAbs();
      double threshold = 0.0;
      if (rule == FilterRule::kMaxFraction) {
        threshold = fraction * mag.maxCoeff();
      } else {
        std::vector<double> sorted(mag.data(), mag.data() + n);
        std::sort(sorted.begin(), sorted.end());
        auto idx = static_cast<std::size_t>(
            std::ceil(fraction * static_cast<double>(n)));
        idx = std::clamp<std::size_t>(idx, 1, static_cast<std::size_t>(n)) - 1;
        threshold = sorted[idx];
      }
      for (Eigen::Index p = 0; p < n; ++p) {
        if (mag(p) > threshold) drop[static_cast<std::size_t>(p)] = true;
      }
    }
  }
  std::vector<Eigen::Index> kept;
  for (Eigen::Index p = 0; p < n; ++p) {
    if (!drop[static_cast<std::size_t>(p)]) kept.push_back(p);
  }
  return kept;
}

}  // namespace

StiffFilterResult filter_stiff_points_indexed(const StiffValues& values,
                                              const CollocationSet& colloc,
                                              FilterRule rule,
                                              double fraction) {
  StiffFilterResult out;
  out.kept_interior = keep_rows(values.interior, colloc.interior.size(), rule, fraction);
  out.kept_boundary = keep_rows(values.boundary, colloc.boundary.size(), rule, fraction);
  out.kept_initial = keep_rows(values.initial, colloc.initial.size(), rule, fraction);
  out.set.strategy = colloc.strategy;
  out.set.seed = colloc.seed;
  out.set.interior = select_points(colloc.interior, out.kept_interior);
  out.set.boundary = select_points(colloc.boundary, out.kept_boundary);
  out.set.initial = select_points(colloc.initial, out.kept_initial);
  return out;
}

CollocationSet filter_stiff_points(const StiffValues& values,
                                   const CollocationSet& colloc,
                                   FilterRule rule, double fraction) {
  return filter_stiff_points_indexed(values, colloc, rule, fraction).set;
}

}  // namespace gptpinn
