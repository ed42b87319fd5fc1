#include <gtest/gtest.h>

#include <numbers>
#include <set>

#include "gptpinn/config.hpp"
#include "gptpinn/error.hpp"
#include "gptpinn/full_pinn.hpp"
#include "helpers.hpp"

using namespace gptpinn;

namespace {

ExtendedState state(double u, double ux = 0, double ut = 0, double uxx = 0,
                    double utt = 0) {
  return {u, ux, ut, uxx, utt};
}

const double kPi = std::numbers::pi;

}  // namespace

TEST(KgResidual, ExactSolutionVanishes) {
  for (double x : {-1.0, -0.3, 0.7}) {
    for (double t : {0.0, 1.3, 4.9}) {
      for (double alpha : {-2.0, -1.4, -1.0}) {
        const double u = x * std::cos(t);
        const double r = kg_residual(state(u, std::cos(t), -x * std::sin(t), 0, -u), x, t,
                                     {{alpha, 0.0, 1.0}});
        EXPECT_NEAR(r, 0.0, 1e-15);
      }
    }
  }
}

TEST(KgResidual, DirectArithmetic) {
  EXPECT_NEAR(kg_residual(state(0), 1.0, kPi / 2, {{-1.3, 0.2, 0.9}}), 0.0, 1e-16);
  EXPECT_EQ(kg_residual(state(1), 0.0, 0.0, {{-1.0, 1.0, 1.0}}), 2.0);
}

TEST(BurgersResidual, DirectArithmetic) {
  EXPECT_EQ(burgers_residual(state(3.5), 0.2, 0.4, {{0.1}}), 0.0);
  EXPECT_EQ(burgers_residual(state(0.5, 1.0), 0.5, 0.3, {{0.1}}), 0.5);
}

TEST(AllenCahnResidual, DirectArithmetic) {
  EXPECT_EQ(allen_cahn_residual(state(1), 0.1, 0.1, {{0.0005, 3.0}}), 0.0);
  EXPECT_EQ(allen_cahn_residual(state(0), 0.1, 0.1, {{0.0005, 3.0}}), 0.0);
  EXPECT_EQ(allen_cahn_residual(state(2), 0.1, 0.1, {{0.0005, 1.0}}), 6.0);
}

namespace {

// Crank-Nicolson in the diffusion with explicit flux-form convection,
// on nx intervals over [-1, 1], homogeneous Dirichlet data.
struct BurgersGrid {
  int nx;
  double h, dt;
  std::vector<Vector> u;  // one entry per time level
};

BurgersGrid burgers_cn(double nu, int nx, double dt, int steps) {
  BurgersGrid g{nx, 2.0 / nx, dt, {}};
  Vector u(nx + 1);
  for (int i = 0; i <= nx; ++i) u(i) = -std::sin(kPi * (-1.0 + i * g.h));
  u(0) = u(nx) = 0.0;
  g.u.push_back(u);
  const double r = nu * dt / (g.h * g.h);
  const int m = nx - 1;
  for (int s = 0; s < steps; ++s) {
    Vector rhs(m);
    for (int i = 1; i <= m; ++i) {
      const double conv = (u(i + 1) * u(i + 1) - u(i - 1) * u(i - 1)) / (4.0 * g.h);
      rhs(i - 1) = u(i) + 0.5 * r * (u(i + 1) - 2 * u(i) + u(i - 1)) - dt * conv;
    }
    // Thomas solve of (1 + r) v_i - r/2 (v_{i-1} + v_{i+1}) = rhs_i.
    Vector c(m), d(m);
    const double a = -0.5 * r, b = 1.0 + r;
    c(0) = a / b;
    d(0) = rhs(0) / b;
    for (int i = 1; i < m; ++i) {
      const double den = b - a * c(i - 1);
      c(i) = a / den;
      d(i) = (rhs(i) - a * d(i - 1)) / den;
    }
    Vector next = Vector::Zero(nx + 1);
    next(m) = d(m - 1);
    for (int i = m - 2; i >= 0; --i) next(i + 1) = d(i) - c(i) * next(i + 2);
    u = next;
    g.u.push_back(u);
  }
  return g;
}

}  // namespace

TEST(BurgersResidual, CrankNicolsonReferenceNearlySatisfiesEquation) {
  const double nu = 1.0;
  const int nx = 400;
  const double dt = 2e-5;
  const BurgersGrid g = burgers_cn(nu, nx, dt, 25000);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick_x(2, nx - 2);
  std::uniform_int_distribution<int> pick_t(2000, 24000);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int i = pick_x(rng), n = pick_t(rng);
    const Vector& um = g.u[n - 1];
    const Vector& u0 = g.u[n];
    const Vector& up = g.u[n + 1];
    ExtendedState e;
    e.u = u0(i);
    e.u_t = (up(i) - um(i)) / (2 * dt);
    e.u_x = (u0(i + 1) - u0(i - 1)) / (2 * g.h);
    e.u_xx = (u0(i + 1) - 2 * u0(i) + u0(i - 1)) / (g.h * g.h);
    worst = std::max(worst, std::abs(burgers_residual(e, -1 + i * g.h, n * dt, {{nu}})));
  }
  // Spatial O(h^2) with |u''''| <= pi^4 and the first-order convection
  // splitting O(dt * |u u_x|_t): both far below 1e-2.
  EXPECT_LT(worst, 1e-2);
  // A wrong viscosity gives an O(1) residual at the same points.
  ExtendedState e;
  const Vector& u0 = g.u[5000];
  const int i = nx / 4;
  e.u = u0(i);
  e.u_t = (g.u[5001](i) - g.u[4999](i)) / (2 * dt);
  e.u_x = (u0(i + 1) - u0(i - 1)) / (2 * g.h);
  e.u_xx = (u0(i + 1) - 2 * u0(i) + u0(i - 1)) / (g.h * g.h);
  EXPECT_GT(std::abs(burgers_residual(e, -0.5, 0.1, {{0.5}})), 10 * worst);
}

TEST(BoundaryInitial, ExactDataGivesZeros) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kKleinGordon);
  const CollocationSet set = gptpinn::testing::small_set(pde);
  AnalyticProvider exact([](double x, double t) {
    return ExtendedState{x * std::cos(t), std::cos(t), -x * std::sin(t), 0.0,
                         -x * std::cos(t)};
  });
  const auto r = boundary_initial_terms(pde, exact, set);
  EXPECT_NEAR(r.boundary.cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_EQ(r.initial.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.initial_velocity.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BoundaryInitial, BurgersConstantOne) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kBurgers);
  const CollocationSet set = gptpinn::testing::small_set(pde);
  AnalyticProvider one([](double, double) { return ExtendedState{1.0}; });
  const auto r = boundary_initial_terms(pde, one, set);
  EXPECT_TRUE((r.boundary.array() == 1.0).all());
  EXPECT_EQ(r.initial_velocity.size(), 0);
}

TEST(BoundaryInitial, KgInitialVelocityDeviation) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kKleinGordon);
  const CollocationSet set = gptpinn::testing::small_set(pde);
  // u = x (1 + t): u(x,0) = x, u_t(x,0) = x.
  AnalyticProvider f([](double x, double t) {
    return ExtendedState{x * (1 + t), 1 + t, x, 0.0, 0.0};
  });
  const auto r = boundary_initial_terms(pde, f, set);
  EXPECT_EQ(r.initial.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(r.initial_velocity == set.initial.x);
}

TEST(Collocation, FullScaleKgCounts) {
  const RunConfig c = RunConfig::defaults(PdeFamily::kKleinGordon);
  EXPECT_EQ(c.counts.interior, 10000);
  EXPECT_EQ(c.counts.boundary, 512);
  EXPECT_EQ(c.counts.initial, 512);
  const CollocationSet set = c.collocation();
  EXPECT_EQ(set.interior.size(), 10000);
  EXPECT_EQ(set.boundary.size(), 512);
  EXPECT_EQ(set.initial.size(), 512);
}

TEST(Collocation, PointsInTheirRegions) {
  for (auto family : {PdeFamily::kKleinGordon, PdeFamily::kBurgers, PdeFamily::kAllenCahn}) {
    const PdeDefinition pde = PdeDefinition::standard(family);
    for (auto strat : {SamplingStrategy::kUniformRandom, SamplingStrategy::kUniformGrid,
                       SamplingStrategy::kLatinHypercube}) {
      const CollocationSet s = sample_collocation(pde, {100, 20, 30}, strat, 4);
      EXPECT_EQ(s.counts().interior, 100);
      EXPECT_TRUE((s.interior.x.array() >= -1).all() && (s.interior.x.array() <= 1).all());
      EXPECT_TRUE((s.interior.t.array() >= 0).all() &&
                  (s.interior.t.array() <= pde.t_final()).all());
      EXPECT_TRUE((s.boundary.x.array().abs() == 1.0).all());
      EXPECT_TRUE((s.initial.t.array() == 0.0).all());
    }
  }
}

TEST(Collocation, LatinHypercubeOnePerStratum) {
  const auto pts = latin_hypercube(20, {{-1.0, 1.0}, {0.0, 1.0}}, 9);
  ASSERT_EQ(pts.size(), 20u);
  std::set<int> bx, bt;
  for (int i = 0; i < 20; ++i) {
    bx.insert(static_cast<int>(std::floor((pts[i][0] + 1.0) / 2.0 * 20)));
    bt.insert(static_cast<int>(std::floor(pts[i][1] * 20)));
  }
  EXPECT_EQ(bx.size(), 20u);
  EXPECT_EQ(bt.size(), 20u);
}

TEST(Collocation, SameSeedSamePoints) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kAllenCahn);
  const auto a = sample_collocation(pde, {50, 8, 8}, SamplingStrategy::kLatinHypercube, 21);
  const auto b = sample_collocation(pde, {50, 8, 8}, SamplingStrategy::kLatinHypercube, 21);
  const auto c = sample_collocation(pde, {50, 8, 8}, SamplingStrategy::kLatinHypercube, 22);
  EXPECT_TRUE(same_points(a, b));
  EXPECT_FALSE(same_points(a, c));
}

namespace {

CollocationSet line_set(int n) {
  CollocationSet s;
  s.interior.x = Vector::LinSpaced(n, -0.9, 0.9);
  s.interior.t = Vector::LinSpaced(n, 0.1, 0.9);
  s.boundary.x = Vector::Ones(2);
  s.boundary.t = Vector::Zero(2);
  s.initial.x = Vector::Zero(2);
  s.initial.t = Vector::Zero(2);
  return s;
}

StiffValues one_basis(const Vector& interior) {
  StiffValues v;
  v.interior = {interior};
  v.boundary = {Vector::Zero(2)};
  v.initial = {Vector::Zero(2)};
  return v;
}

}  // namespace

TEST(StiffFilter, RemovesAboveFraction) {
  Vector v(3);
  v << 0.0, 0.5, 1.0;
  const auto r = filter_stiff_points_indexed(one_basis(v), line_set(3));
  EXPECT_EQ(r.kept_interior, (std::vector<Eigen::Index>{0, 1}));
  EXPECT_EQ(r.set.boundary.size(), 2);
}

TEST(StiffFilter, AllEqualPositiveRemovesAll) {
  const auto r = filter_stiff_points_indexed(one_basis(Vector::Constant(4, 2.0)), line_set(4));
  EXPECT_TRUE(r.kept_interior.empty());
}

TEST(StiffFilter, UnionOverBases) {
  StiffValues v = one_basis((Vector(3) << 1.0, 0.1, 0.1).finished());
  v.interior.push_back((Vector(3) << 0.1, 1.0, 0.1).finished());
  v.boundary.push_back(Vector::Zero(2));
  v.initial.push_back(Vector::Zero(2));
  const auto r = filter_stiff_points_indexed(v, line_set(3));
  EXPECT_EQ(r.kept_interior, (std::vector<Eigen::Index>{2}));
}

TEST(StiffFilter, RandomTablesMatchDefinition) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    const int bases = std::uniform_int_distribution<int>(1, 4)(rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StiffValues v;
    for (int b = 0; b < bases; ++b) {
      Vector col(n);
      for (int i = 0; i < n; ++i) {
        // Ties with the max and exact-threshold values are both common.
        const double roll = u(rng);
        col(i) = roll < 0.1 ? 1.0 : roll < 0.2 ? 0.8 : u(rng);
      }
      v.interior.push_back(col);
      v.boundary.push_back(Vector::Zero(2));
      v.initial.push_back(Vector::Zero(2));
    }
    std::vector<Eigen::Index> expected;
    for (int i = 0; i < n; ++i) {
      bool flagged = false;
      for (const auto& col : v.interior) {
        flagged = flagged || std::abs(col(i)) > 0.8 * col.cwiseAbs().maxCoeff();
      }
      if (!flagged) expected.push_back(i);
    }
    const auto r = filter_stiff_points_indexed(v, line_set(n));
    ASSERT_EQ(r.kept_interior, expected) << "trial " << trial;
    ASSERT_EQ(r.set.interior.size(), static_cast<Eigen::Index>(expected.size()));
    for (std::size_t k = 0; k < expected.size(); ++k) {
      ASSERT_EQ(r.set.interior.x(static_cast<Eigen::Index>(k)),
                line_set(n).interior.x(expected[k]));
    }
  }
}

TEST(PinnLoss, AnalyticKgSolutionIsZero) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kKleinGordon);
  const CollocationSet set = gptpinn::testing::small_set(pde, 200, 40, 40);
  AnalyticProvider exact([](double x, double t) {
    return ExtendedState{x * std::cos(t), std::cos(t), -x * std::sin(t), 0.0,
                         -x * std::cos(t)};
  });
  for (double alpha : {-2.0, -1.5, -1.0}) {
    EXPECT_LT(pinn_loss(exact, pde, {{alpha, 0.0, 1.0}}, set), 1e-28);
  }
}

TEST(PinnLoss, NonNegativeAndMeanInvariant) {
  const PdeDefinition pde = PdeDefinition::standard(PdeFamily::kBurgers);
  const CollocationSet set = gptpinn::testing::small_set(pde, 30, 6, 6);
  CollocationSet twice = set;
  auto dup = [](PointBatch& b) {
    PointBatch d;
    d.x.resize(2 * b.size());
    d.t.resize(2 * b.size());
    d.x << b.x, b.x;
    d.t << b.t, b.t;
    b = d;
  };
  dup(twice.interior);
  dup(twice.boundary);
  dup(twice.initial);
  for (int s = 0; s < 5; ++s) {
    const MlpParams p = gptpinn::testing::random_params({2, 6, 1}, Activation::kTanh, s);
    MlpProvider prov(p);
    const double a = pinn_loss(prov, pde, {{0.2}}, set);
    const double b = pinn_loss(prov, pde, {{0.2}}, twice);
    EXPECT_GE(a, 0.0);
    EXPECT_NEAR(a, b, 1e-14 * a);
  }
}
