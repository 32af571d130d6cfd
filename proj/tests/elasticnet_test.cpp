#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "gcgs/elasticnet.hpp"
#include "gcgs/error.hpp"

namespace gcgs::enet {
namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (const double x : xs) v[i++] = x;
  return v;
}

ElasticNetProblem random_problem(Rng& rng, Eigen::Index m, Eigen::Index n, Loss loss,
                                 double lambda, double tau) {
  ElasticNetProblem p{.Z = gaussian_draws(rng, m, n), .y = Vec(m), .loss = loss,
                      .lambda = lambda, .tau = tau};
  for (Eigen::Index i = 0; i < m; ++i) {
    p.y[i] = loss == Loss::squared ? rng.normal() : (rng.below(2) == 0 ? -1.0 : 1.0);
  }
  p.validate();
  return p;
}

// Threshold theta with sum max(|v_i| - theta, 0) = tau, by bisection.
Vec bisection_projection(const Vec& v, double tau) {
  if (v.lpNorm<1>() <= tau) return v;
  double lo = 0.0;
  double hi = v.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((v.cwiseAbs().array() - mid).max(0.0).sum() > tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out[i] = std::copysign(std::max(std::abs(v[i]) - theta, 0.0), v[i]);
  }
  return out;
}

Vec random_ball_point(Rng& rng, Eigen::Index n, double tau) {
  Vec w = gaussian_draws(rng, n, 1).col(0);
  return w * (rng.uniform() * tau / w.lpNorm<1>());
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

TEST(Losses, ValuesAtOrigin) {
  Rng rng(1);
  auto p = random_problem(rng, 7, 3, Loss::squared, 0.1, 1.0);
  EXPECT_DOUBLE_EQ(loss_eval(p, Vec::Zero(3)), 0.5 * p.y.squaredNorm());
  p = random_problem(rng, 7, 3, Loss::logistic, 0.1, 1.0);
  EXPECT_NEAR(loss_eval(p, Vec::Zero(3)), 7.0 * std::log(2.0), 1e-12);
  p = random_problem(rng, 7, 3, Loss::squared_hinge, 0.1, 1.0);
  EXPECT_DOUBLE_EQ(loss_eval(p, Vec::Zero(3)), 7.0);
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  Rng rng(2);
  for (const Loss loss : {Loss::squared, Loss::logistic, Loss::squared_hinge}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto p = random_problem(rng, 12, 5, loss, 0.3, 1.0);
      const Vec x = gaussian_draws(rng, 5, 1).col(0);
      const Vec fd = finite_diff_grad([&](const Vec& v) { return objective(p, v); }, x);
      const Vec an = objective_grad(p, x);
      EXPECT_LE((fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff()), 1e-5)
          << to_string(loss);
    }
  }
}

TEST(Losses, LogisticIsOverflowSafe) {
  ElasticNetProblem p{.Z = Mat::Constant(1, 1, 1.0), .y = vec({1.0}), .loss = Loss::logistic};
  EXPECT_NEAR(loss_eval(p, vec({-800.0})), 800.0, 1e-9);
  EXPECT_EQ(loss_eval(p, vec({800.0})), 0.0);
  EXPECT_TRUE(loss_grad(p, vec({-800.0})).allFinite());
}

TEST(Problem, Validates) {
  ElasticNetProblem p{.Z = Mat::Ones(2, 2), .y = vec({1.0, 0.5}), .loss = Loss::logistic};
  EXPECT_THROW(p.validate(), DomainError);
  p.loss = Loss::squared;
  EXPECT_NO_THROW(p.validate());
  p.lambda = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_EQ(parse_loss("squared_hinge"), Loss::squared_hinge);
  EXPECT_FALSE(parse_loss("hinge").has_value());
}

TEST(ProjectL1, Examples) {
  EXPECT_EQ(project_l1(vec({0.2, -0.1}), 1.0), vec({0.2, -0.1}));
  EXPECT_EQ(project_l1(vec({3.0, 0.0}), 1.0), vec({1.0, 0.0}));
  EXPECT_EQ(project_l1(vec({1.0, 1.0}), 1.0), vec({0.5, 0.5}));
  EXPECT_THROW(project_l1(vec({1.0}), 0.0), DomainError);
}

TEST(ProjectL1, MatchesBisectionOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(50));
    const Vec v = gaussian_draws(rng, n, 1).col(0) * rng.uniform(0.1, 5.0);
    const double tau = rng.uniform(0.05, 3.0);
    const Vec p = project_l1(v, tau);
    EXPECT_LE((p - bisection_projection(v, tau)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(p.lpNorm<1>(), tau + 1e-12);
  }
}

TEST(ProjectL1, IsTheNearestFeasiblePoint) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(20));
    const Vec v = gaussian_draws(rng, n, 1).col(0) * 2.0;
    const double tau = rng.uniform(0.1, 2.0);
    const double d = (v - project_l1(v, tau)).norm();
    for (int k = 0; k < 100; ++k) {
      EXPECT_LE(d, (v - random_ball_point(rng, n, tau)).norm() + 1e-12);
    }
  }
}

TEST(EnOracle, Examples) {
  ElasticNetProblem p{.Z = Mat::Zero(1, 2), .y = Vec::Zero(1), .lambda = 0.5, .tau = 1.0};
  EXPECT_EQ(en_oracle(p, vec({-2.0, 0.0})), vec({1.0, 0.0}));
  EXPECT_EQ(en_oracle(p, Vec::Zero(2)), Vec::Zero(2));
}

TEST(EnOracle, MatchesGridSearch) {
  // Minimizes <g, s> + lambda s^T s over the 2-D unit L1 ball on a 1e-3 grid.
  Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    ElasticNetProblem p{.Z = Mat::Zero(1, 2), .y = Vec::Zero(1),
                        .lambda = rng.uniform(0.2, 2.0), .tau = 1.0};
    const Vec g = gaussian_draws(rng, 2, 1).col(0) * 2.0;
    const auto phi = [&](double a, double b) {
      return g[0] * a + g[1] * b + p.lambda * (a * a + b * b);
    };
    double best = std::numeric_limits<double>::infinity();
    Vec arg(2);
    for (int i = -1000; i <= 1000; ++i) {
      const double a = i * 1e-3;
      const int lim = 1000 - std::abs(i);
      for (int j = -lim; j <= lim; ++j) {
        const double v = phi(a, j * 1e-3);
        if (v < best) {
          best = v;
          arg << a, j * 1e-3;
        }
      }
    }
    const Vec s = en_oracle(p, g);
    EXPECT_LE(phi(s[0], s[1]), best + 1e-12);
    EXPECT_LE((s - arg).cwiseAbs().maxCoeff(), 2e-3);
  }
}

TEST(EnOracle, KktStructure) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_problem(rng, 10, 30, Loss::squared, rng.uniform(0.1, 1.0), 1.0);
    const Vec g = loss_grad(p, gaussian_draws(rng, 30, 1).col(0));
    const Vec s = en_oracle(p, g);
    const Vec u = -g / (2.0 * p.lambda);
    if (u.lpNorm<1>() <= p.tau) {
      EXPECT_EQ(s, u);
      continue;
    }
    // One threshold: every nonzero coordinate is shrunk by the same amount.
    EXPECT_NEAR(s.lpNorm<1>(), p.tau, 1e-12);
    double theta = -1.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] == 0.0) continue;
      const double t = std::abs(u[i]) - std::abs(s[i]);
      if (theta < 0.0) theta = t;
      EXPECT_NEAR(t, theta, 1e-10);
      EXPECT_EQ(std::signbit(s[i]), std::signbit(u[i]));
    }
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s[i] == 0.0) EXPECT_LE(std::abs(u[i]), theta + 1e-10);
    }
  }
}

TEST(L1Lmo, Examples) {
  EXPECT_EQ(l1_lmo(vec({1.0, -3.0}), 2.0), vec({0.0, 2.0}));
  EXPECT_EQ(l1_lmo(vec({5.0, 0.0, 0.0}), 1.0), vec({-1.0, 0.0, 0.0}));
  EXPECT_EQ(l1_lmo(vec({2.0, -2.0}), 1.0), vec({-1.0, 0.0}));
  EXPECT_EQ(l1_lmo(Vec::Zero(3), 1.5), vec({1.5, 0.0, 0.0}));
}

TEST(L1Lmo, SupportFunction) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec g = gaussian_draws(rng, 8, 1).col(0);
    const double tau = rng.uniform(0.1, 4.0);
    EXPECT_NEAR(g.dot(l1_lmo(g, tau)), -tau * g.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FixedPointResidual, MatchesDirectFormula) {
  Rng rng(8);
  const auto p = random_problem(rng, 20, 10, Loss::squared, 0.2, 0.7);
  // At 0: grad F = -Z^T y.
  const Vec step = p.Z.transpose() * p.y;
  const double direct = bisection_projection(step, p.tau).cwiseAbs().maxCoeff();
  EXPECT_NEAR(fixed_point_residual(p, Vec::Zero(10)), direct, 1e-10);

  ElasticNetProblem zero{.Z = Mat::Zero(3, 2), .y = Vec::Zero(3)};
  EXPECT_EQ(fixed_point_residual(zero, Vec::Zero(2)), 0.0);
}

TEST(ExactStep, ClosedFormMatchesLineSearch) {
  Rng rng(9);
  const ElasticNetObjective obj(random_problem(rng, 15, 6, Loss::squared, 0.3, 1.0));
  for (int trial = 0; trial < 20; ++trial) {
    const Vec x = random_ball_point(rng, 6, 1.0);
    const Vec s = random_ball_point(rng, 6, 1.0);
    const auto closed = obj.exact_step(x, s - x);
    ASSERT_TRUE(closed.has_value());
    const double search =
        golden_section_min([&](double a) { return obj.value(x + a * (s - x)); }, {.tol = 1e-12});
    EXPECT_NEAR(*closed, search, 1e-6);
  }
  const ElasticNetObjective logistic(random_problem(rng, 5, 2, Loss::logistic, 0.3, 1.0));
  EXPECT_FALSE(logistic.exact_step(Vec::Zero(2), Vec::Ones(2)).has_value());
}

TEST(ProjectedGradient, UnconstrainedLeastSquares) {
  Rng rng(10);
  auto p = random_problem(rng, 40, 8, Loss::squared, 0.5, 1e6);
  p.Z /= std::sqrt(40.0);  // well conditioned, so plain PG converges in budget
  const Mat h = p.Z.transpose() * p.Z + 2.0 * p.lambda * Mat::Identity(8, 8);
  const Vec opt = h.ldlt().solve(p.Z.transpose() * p.y);
  ProjectedGradientConfig cfg;
  cfg.residual_tol = 1e-12;
  for (auto* solver : {&spg_solve, &pg_solve}) {
    const auto r = solver(p, Vec::Zero(8), cfg);
    EXPECT_EQ(r.termination, Termination::residual_tol);
    EXPECT_LE((r.x - opt).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ProjectedGradient, OptimalStartStopsImmediately) {
  Rng rng(11);
  const auto p = random_problem(rng, 30, 5, Loss::squared, 0.5, 1e6);
  const Mat h = p.Z.transpose() * p.Z + 2.0 * p.lambda * Mat::Identity(5, 5);
  const Vec opt = h.ldlt().solve(p.Z.transpose() * p.y);
  EXPECT_EQ(spg_solve(p, opt).iterations, 0);
  EXPECT_EQ(pg_solve(p, opt).iterations, 0);
}

TEST(ProjectedGradient, SpgIteratesStayFeasible) {
  Rng rng(12);
  const auto p = random_problem(rng, 30, 20, Loss::logistic, 0.05, 0.8);
  ProjectedGradientConfig cfg;
  cfg.residual_tol = 0.0;
  for (int k = 1; k <= 25; ++k) {
    cfg.max_iter = k;
    const auto r = spg_solve(p, Vec::Zero(20), cfg);
    EXPECT_LE(r.x.lpNorm<1>(), p.tau + 1e-12);
  }
}

TEST(ProjectedGradient, TracesReportResidualAndGap) {
  Rng rng(13);
  const auto p = random_problem(rng, 30, 10, Loss::squared_hinge, 0.1, 1.0);
  const auto r = spg_solve(p, Vec::Zero(10));
  ASSERT_EQ(static_cast<int>(r.trace.size()), r.iterations + 1);
  for (const auto& rec : r.trace) {
    ASSERT_TRUE(rec.extra_residual.has_value());
    EXPECT_GE(rec.surrogate_gap, 0.0);
  }
  EXPECT_LE(*r.trace.back().extra_residual, 1e-5);
}

TEST(Solvers, AgreeOnStrictlyConvexInstance) {
  Rng rng(14);
  const auto p = random_problem(rng, 60, 25, Loss::logistic, 0.1, 1.5);
  const ElasticNetObjective obj(p);
  SolverConfig cfg;
  cfg.max_iter = 10000;
  cfg.gap_tol = 0.0;
  cfg.residual_tol = 1e-7;
  const auto cgs = solve(obj, Vec::Zero(25), cfg);
  EXPECT_EQ(cgs.termination, Termination::residual_tol);
  ProjectedGradientConfig pcfg;
  pcfg.residual_tol = 1e-7;
  const double ref = objective(p, spg_solve(p, Vec::Zero(25), pcfg).x);
  EXPECT_NEAR(objective(p, cgs.x), ref, 1e-6 * std::abs(ref));
  EXPECT_NEAR(objective(p, pg_solve(p, Vec::Zero(25), pcfg).x), ref, 1e-6 * std::abs(ref));
}

TEST(ToyData, ShapesAndSplit) {
  const auto d = make_toy_classification(200, 100, 10, 0);
  EXPECT_EQ(d.Z.rows(), 200);
  EXPECT_EQ(d.Z.cols(), 100);
  EXPECT_EQ(d.y.size(), 200);
  EXPECT_EQ(d.n_train, 160);
  EXPECT_EQ(make_toy_classification(13, 4, 2, 0).n_train, 10);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) EXPECT_EQ(std::abs(d.y[i]), 1.0);
  // Training rows are standardized.
  const Mat train = d.train_Z();
  EXPECT_LE(train.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(make_toy_classification(9, 4, 2, 0), DomainError);
  EXPECT_THROW(make_toy_classification(20, 4, 5, 0), DomainError);
}

TEST(ToyData, DeterministicPerSeed) {
  const auto a = make_toy_classification(50, 6, 3, 9);
  const auto b = make_toy_classification(50, 6, 3, 9);
  EXPECT_EQ(a.Z, b.Z);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(make_toy_classification(50, 6, 3, 10).Z, a.Z);
}

TEST(ToyData, ReferenceSolveBeatsChance) {
  const auto d = make_toy_classification(200, 10, 10, 3);
  const ElasticNetProblem p{.Z = d.train_Z(), .y = d.train_y(), .loss = Loss::logistic,
                            .lambda = 0.1, .tau = 5.0};
  const auto r = spg_solve(p, Vec::Zero(10));
  EXPECT_GT(accuracy(d.train_Z(), d.train_y(), r.x), 0.5);
}

TEST(CsvDataset, FourRowsSplitThreeOne) {
  const auto path = temp_file("gcgs_enet_four.csv");
  {
    std::ofstream out(path);
    out << "a,b,label\n1,2,1\n3,4,-1\n5,7,0\n-1,0.5,1\n";
  }
  const auto d = load_csv_dataset(path, "label");
  EXPECT_EQ(d.n_train, 3);
  EXPECT_EQ(d.Z.rows(), 4);
  EXPECT_EQ(d.y, vec({1.0, -1.0, -1.0, 1.0}));
  EXPECT_NEAR(d.mean[0], 3.0, 1e-15);
  std::filesystem::remove(path);
}

TEST(CsvDataset, ParseErrorsCarryLocation) {
  const auto path = temp_file("gcgs_enet_bad.csv");
  {
    std::ofstream out(path);
    out << "a,b,label\n1,2,1\n3,abc,-1\n";
  }
  try {
    load_csv_dataset(path, "label");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.column(), 2);
  }
  {
    std::ofstream out(path);
    out << "a,label\n1,2\n";
  }
  EXPECT_THROW(load_csv_dataset(path, "label"), ParseError);
  EXPECT_THROW(load_csv_dataset(path, "target"), ParseError);
  std::filesystem::remove(path);
}

TEST(CsvDataset, RoundTrip) {
  const auto d = make_toy_classification(30, 5, 2, 4);
  const auto path = temp_file("gcgs_enet_roundtrip.csv");
  save_csv_dataset(path, d);
  const auto back = load_csv_dataset(path, "label");
  EXPECT_EQ(back.raw, d.raw);
  EXPECT_EQ(back.Z, d.Z);
  EXPECT_EQ(back.y, d.y);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace gcgs::enet
