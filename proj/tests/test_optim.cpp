#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "melif/optim.hpp"
#include "oracles.hpp"

using namespace melif;
using namespace std::chrono_literals;

namespace {

const GridSpacing kSpacing{4};

GridPoint pt(std::vector<std::int64_t> steps) { return GridPoint(std::move(steps), kSpacing); }

std::vector<GridPoint> points_of(const SearchResult& r) {
  std::vector<GridPoint> out;
  for (const auto& e : r.evaluations) out.push_back(e.point);
  return out;
}

OptimizerConfig config(std::size_t dims, std::size_t threads = 1) {
  OptimizerConfig cfg;
  cfg.dims = dims;
  cfg.threads = threads;
  return cfg;
}

double sphere(std::span<const double> w) {
  double s = 0;
  for (double v : w) s += (v - 0.5) * (v - 0.5);
  return -s;
}

// hashed landscape with fine resolution so ties are practically absent
double fine_hash(std::span<const double> w, std::uint64_t seed) {
  return oracle::hashed_score(w, seed) + 1e-6 * oracle::hashed_score(w, seed + 7919);
}

void check_result_invariants(const SearchResult& r, const std::vector<GridPoint>& starts) {
  ASSERT_FALSE(r.evaluations.empty());
  std::set<std::vector<std::int64_t>> seen;
  double max_score = r.evaluations.front().score;
  for (const auto& e : r.evaluations) {
    EXPECT_TRUE(seen.insert({e.point.steps().begin(), e.point.steps().end()}).second) << "re-evaluated " << e.point.to_string();
    max_score = std::max(max_score, e.score);
  }
  EXPECT_EQ(r.best_score, max_score);
  auto first = std::find_if(r.evaluations.begin(), r.evaluations.end(), [&](auto& e) { return e.score == max_score; });
  EXPECT_EQ(r.best_point, first->point);
  for (const auto& s : starts) {
    auto it = std::find_if(r.evaluations.begin(), r.evaluations.end(), [&](auto& e) { return e.point == s; });
    if (it != r.evaluations.end()) {
      EXPECT_GE(r.best_score, it->score);
    }
  }
  for (std::size_t i = 1; i < r.evaluations.size(); ++i) EXPECT_LT(r.evaluations[i - 1].seq, r.evaluations[i].seq);
}

}  // namespace

TEST(Neighbors, OrderAndNegativeCoordinates) {
  auto n = neighbors(pt({4, 4}));
  ASSERT_EQ(n.size(), 4u);
  EXPECT_EQ(n[0].weights(), (std::vector<double>{1.25, 1}));
  EXPECT_EQ(n[1].weights(), (std::vector<double>{0.75, 1}));
  EXPECT_EQ(n[2].weights(), (std::vector<double>{1, 1.25}));
  EXPECT_EQ(n[3].weights(), (std::vector<double>{1, 0.75}));
  auto one = neighbors(pt({0}));
  EXPECT_EQ(one[0].weights(), std::vector<double>{0.25});
  EXPECT_EQ(one[1].weights(), std::vector<double>{-0.25});
}

TEST(Neighbors, RelationIsSymmetric) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> s(-10, 10);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::int64_t> steps(1 + static_cast<std::size_t>(rep % 4));
    for (auto& v : steps) v = s(rng);
    auto p = pt(steps);
    for (const auto& q : neighbors(p)) {
      auto back = neighbors(q);
      EXPECT_EQ(std::count(back.begin(), back.end(), p), 1);
    }
  }
}

TEST(StartingPoints, UnitVectorsThenAllOnes) {
  auto s = default_starting_points(3, kSpacing);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], pt({4, 0, 0}));
  EXPECT_EQ(s[3], pt({4, 4, 4}));
  EXPECT_EQ(default_starting_points(1, kSpacing).size(), 1u);
  EXPECT_THROW(GridSpacing::from_delta(0.3), Error);
  EXPECT_EQ(GridSpacing::from_delta(0.25).steps_per_unit(), 4);
}

TEST(Halt, PerfectBeatsEverything) {
  HaltSpec spec{75, 32, 1.0};
  EXPECT_EQ(check_halt({3, 3, 1.0}, spec), HaltReason::perfect);
  EXPECT_EQ(check_halt({75, 75, 1.0}, spec), HaltReason::perfect);
  EXPECT_EQ(check_halt({3, 3, 0.999}, spec), std::nullopt);
}

TEST(Halt, LimitAtExactlyMaxPoints) {
  HaltSpec spec{75, std::nullopt, 1.0};
  EXPECT_EQ(check_halt({74, 74, 0.5}, spec), std::nullopt);
  EXPECT_EQ(check_halt({75, 75, 0.5}, spec), HaltReason::limit);
  HaltSpec both{75, 10, 1.0};
  EXPECT_EQ(check_halt({75, 10, 0.5}, both), HaltReason::limit);
}

TEST(Halt, StagnationWindowBoundary) {
  HaltSpec spec{std::nullopt, 32, 1.0};
  EXPECT_EQ(check_halt({41, 10, 0.5}, spec), std::nullopt);
  EXPECT_EQ(check_halt({42, 10, 0.5}, spec), HaltReason::stagnation);

  HaltTracker t(spec);
  for (int i = 1; i <= 10; ++i) t.observe(0.1 * i * 0.05);
  for (int i = 11; i <= 41; ++i) {
    t.observe(0.0);
    ASSERT_FALSE(t.halted()) << i;
  }
  t.observe(0.0);
  EXPECT_EQ(t.reason(), HaltReason::stagnation);
  EXPECT_EQ(t.state().completed, 42u);
  t.observe(1.0);  // latched
  EXPECT_EQ(t.reason(), HaltReason::stagnation);
}

namespace {

std::vector<ArmState> arms_with(std::vector<std::pair<double, std::size_t>> stats, std::vector<bool> has_work = {}) {
  std::vector<ArmState> arms(stats.size());
  for (std::size_t i = 0; i < arms.size(); ++i) {
    arms[i].id = i;
    arms[i].mean_reward = stats[i].first;
    arms[i].pulls = stats[i].second;
    if (has_work.empty() || has_work[i]) arms[i].queue.push(pt({0}), 1.0);
  }
  return arms;
}

}  // namespace

TEST(Ucb, FormulaExample) {
  auto arms = arms_with({{0.5, 1}, {0.4, 1}});
  EXPECT_EQ(ucb_select(arms, 1.0), 0u);
  EXPECT_NEAR(0.5 + std::sqrt(2 * std::log(2.0)), 1.677, 1e-3);
  // arm 1 wins once it has enough of an exploration bonus
  auto arms2 = arms_with({{0.5, 10}, {0.4, 1}});
  EXPECT_EQ(ucb_select(arms2, 1.0), 1u);
}

TEST(Ucb, ColdStartAndEligibility) {
  EXPECT_EQ(ucb_select(arms_with({{0.9, 5}, {0.0, 0}, {0.0, 0}}), 1.0), 1u);
  EXPECT_EQ(ucb_select(arms_with({{0.9, 5}, {0.0, 0}, {0.0, 3}}, {true, false, true}), 1.0), 0u);
  EXPECT_EQ(ucb_select(arms_with({{0.1, 50}, {0.9, 1}}, {true, false}), 1.0), 0u);
  EXPECT_THROW(ucb_select(arms_with({{0.1, 1}}, {false}), 1.0), Error);
}

TEST(Ucb, ArgmaxInvariantUnderConstantShift) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1), shift(-3, 3);
  std::uniform_int_distribution<std::size_t> n(1, 40);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::pair<double, std::size_t>> stats(4);
    for (auto& s : stats) s = {u(rng), n(rng)};
    auto shifted = stats;
    double c = shift(rng);
    for (auto& s : shifted) s.first += c;
    EXPECT_EQ(ucb_select(arms_with(stats), 1.0), ucb_select(arms_with(shifted), 1.0));
  }
}

TEST(ArmState, MeanMatchesRewardLog) {
  ArmState a;
  for (double r : {0.2, 0.9, 0.4, 0.4}) a.record(r);
  EXPECT_EQ(a.pulls, 4u);
  EXPECT_NEAR(a.mean_reward, 0.475, 1e-15);
}

TEST(PendingQueue, MaxPriorityWithFifoTies) {
  PendingQueue q;
  q.push(pt({1}), 0.5);
  q.push(pt({2}), 0.7);
  q.push(pt({3}), 0.5);
  EXPECT_EQ(q.pop(), pt({2}));
  EXPECT_EQ(q.pop(), pt({1}));
  EXPECT_EQ(q.pop(), pt({3}));
}

TEST(MelifDescent, SphereReachesGridOptimum) {
  EvaluationService service(make_stub_objective(sphere));
  auto r = melif_descent(service, config(2));
  EXPECT_EQ(r.best_point, pt({2, 2}));
  EXPECT_EQ(r.best_score, oracle::grid_max(sphere, 2, 4, -4, 8));
  EXPECT_EQ(r.halt_reason, HaltReason::exhausted);
  check_result_invariants(r, default_starting_points(2, kSpacing));
}

TEST(MelifDescent, ConstantObjectiveStopsAfterOneFailedPass) {
  EvaluationService service(make_stub_objective([](auto) { return 0.3; }));
  auto cfg = config(2);
  auto r = melif_descent(service, cfg);
  EXPECT_EQ(r.best_point, pt({4, 0}));
  // three starts plus 2N neighbors of the first
  EXPECT_EQ(r.evaluations.size(), 3u + 4u);
  EXPECT_EQ(service.evaluations_run(), 7u);
}

TEST(MelifDescent, ImprovementRestartsAtDimensionZero) {
  auto f = [](std::span<const double> w) {
    if (w[0] == 1 && w[1] == 1) return 0.5;
    if (w[0] == 1 && w[1] == 1.25) return 0.6;
    return 0.0;
  };
  EvaluationService service(make_stub_objective(f));
  auto cfg = config(2);
  cfg.starting_points = {pt({4, 4})};
  auto r = melif_descent(service, cfg);
  std::vector<GridPoint> expected = {pt({4, 4}), pt({5, 4}), pt({3, 4}), pt({4, 5}),
                                     // restart: dim 0 again, then dim 1 (minus branch is a cache hit)
                                     pt({5, 5}), pt({3, 5}), pt({4, 6})};
  EXPECT_EQ(points_of(r), expected);
  EXPECT_EQ(r.best_point, pt({4, 5}));
  EXPECT_EQ(r.best_score, 0.6);
}

TEST(MelifDescent, MinusBranchMovesToTheMinusPoint) {
  auto f = [](std::span<const double> w) { return -std::abs(w[0] + 0.5); };
  EvaluationService service(make_stub_objective(f));
  auto cfg = config(1);
  auto r = melif_descent(service, cfg);
  EXPECT_EQ(r.best_point, pt({-2}));
  EXPECT_EQ(r.best_score, 0.0);
}

TEST(MelifDescent, EndsInLocalOptimum) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    EvaluationService service(make_stub_objective([seed](auto w) { return fine_hash(w, seed); }));
    auto r = melif_descent(service, config(3));
    for (const auto& nb : neighbors(r.best_point)) {
      auto c = service.cached(nb);
      ASSERT_TRUE(c) << "neighbor not evaluated";
      EXPECT_LE(c->score, r.best_score);
    }
    check_result_invariants(r, default_starting_points(3, kSpacing));
  }
}

TEST(MelifDescent, PerfectScoreStops) {
  EvaluationService service(make_stub_objective([](auto w) { return w[0] == 1 && w[1] == 1 ? 1.0 : 0.2; }));
  auto r = melif_descent(service, config(2));
  EXPECT_EQ(r.halt_reason, HaltReason::perfect);
  EXPECT_EQ(r.evaluations.size(), 3u);
}

TEST(MelifPlus, SingleThreadMatchesSequentialDescents) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto f = [seed](auto w) { return fine_hash(w, seed); };
    EvaluationService plus_service(make_stub_objective(f));
    auto plus = melif_plus(plus_service, config(3));
    double best = -1;
    for (const auto& s : default_starting_points(3, kSpacing)) {
      EvaluationService service(make_stub_objective(f));
      auto cfg = config(3);
      cfg.starting_points = {s};
      best = std::max(best, melif_descent(service, cfg).best_score);
    }
    EXPECT_EQ(plus.best_score, best);
    check_result_invariants(plus, default_starting_points(3, kSpacing));
  }
}

TEST(MelifPlus, UnimodalMatchesDescent) {
  EvaluationService a(make_stub_objective(sphere)), b(make_stub_objective(sphere));
  auto cfg = config(3, 4);
  EXPECT_EQ(melif_plus(a, cfg).best_score, melif_descent(b, config(3)).best_score);
  EXPECT_EQ(melif_plus(a, cfg).best_score, oracle::grid_max(sphere, 3, 4, -4, 8));
}

TEST(MelifPlus, ParallelDescentsOverlapInTime) {
  auto run = [](std::size_t threads) {
    EvaluationService service(make_stub_objective([](auto) { return 0.3; }, 50ms));
    auto cfg = config(4, threads);
    auto t0 = std::chrono::steady_clock::now();
    melif_plus(service, cfg);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  double t1 = run(1), t5 = run(5);
  EXPECT_LE(t5, 0.4 * t1) << "T=1 " << t1 << "s, T=5 " << t5 << "s";
}

TEST(PqMelif, PerfectHaltWithinStartingPoints) {
  EvaluationService service(make_stub_objective([](auto w) { return w[0] == 1 && w[1] == 1 ? 1.0 : 0.2; }));
  auto cfg = config(2);
  cfg.halt.max_points = 5;
  auto r = pq_melif(service, cfg);
  EXPECT_EQ(r.halt_reason, HaltReason::perfect);
  EXPECT_LE(r.evaluations.size(), 3u);
  EXPECT_EQ(r.best_score, 1.0);
}

TEST(PqMelif, StagnationCountsFromFirstEvaluation) {
  EvaluationService service(make_stub_objective([](auto) { return 0.4; }));
  auto cfg = config(2);
  cfg.starting_points = {pt({4, 4})};
  cfg.halt.stagnation_window = 32;
  auto r = pq_melif(service, cfg);
  EXPECT_EQ(r.halt_reason, HaltReason::stagnation);
  EXPECT_EQ(r.evaluations.size(), 1u + 32u);
}

TEST(PqMelif, LimitHaltsAtExactCount) {
  for (std::size_t limit : {75u, 100u, 125u}) {
    EvaluationService service(make_stub_objective([](auto w) { return fine_hash(w, 3); }));
    auto cfg = config(4);
    cfg.halt.max_points = limit;
    auto r = pq_melif(service, cfg);
    EXPECT_EQ(r.halt_reason, HaltReason::limit);
    EXPECT_EQ(r.evaluations.size(), limit);
  }
}

TEST(PqMelif, UnimodalFindsGridOptimum) {
  EvaluationService service(make_stub_objective(sphere));
  auto cfg = config(2);
  cfg.halt.max_points = 200;
  auto r = pq_melif(service, cfg);
  EXPECT_EQ(r.best_score, oracle::grid_max(sphere, 2, 4, -4, 8));
  check_result_invariants(r, default_starting_points(2, kSpacing));
}

TEST(PqMelif, SingleThreadIsDeterministic) {
  auto run = [] {
    EvaluationService service(make_stub_objective([](auto w) { return fine_hash(w, 11); }));
    auto cfg = config(3);
    cfg.halt.max_points = 80;
    auto r = pq_melif(service, cfg);
    std::vector<std::pair<GridPoint, double>> seq;
    for (const auto& e : r.evaluations) seq.emplace_back(e.point, e.score);
    return seq;
  };
  EXPECT_EQ(run(), run());
}

TEST(PqMelif, RequiresHaltSpec) {
  EvaluationService service(make_stub_objective(sphere));
  EXPECT_THROW(pq_melif(service, config(2)), Error);
}

TEST(PqMelif, ObjectiveErrorsPropagate) {
  auto f = [](std::span<const double> w) -> double {
    if (w[0] > 1.2) throw Error("bad point");
    return 0.5 * w[0];
  };
  for (std::size_t threads : {1u, 4u}) {
    EvaluationService service(make_stub_objective(f));
    auto cfg = config(2, threads);
    cfg.halt.max_points = 50;
    EXPECT_THROW(pq_melif(service, cfg), Error);
  }
  EvaluationService service(make_stub_objective(f));
  EXPECT_THROW(melif_descent(service, config(2)), Error);
}

TEST(MaMelif, SingleStartReducesToPq) {
  auto f = [](auto w) { return fine_hash(w, 5); };
  EvaluationService a(make_stub_objective(f)), b(make_stub_objective(f));
  auto cfg = config(3);
  cfg.starting_points = {pt({4, 4, 4})};
  cfg.halt.max_points = 60;
  auto pq = pq_melif(a, cfg);
  auto ma = ma_melif(b, cfg);
  EXPECT_EQ(points_of(pq), points_of(ma));
  ASSERT_EQ(ma.arm_pulls.size(), 1u);
  EXPECT_EQ(ma.arm_pulls[0], 60u);
}

TEST(MaMelif, GoodArmGetsMostPulls) {
  // every point on the w0 > w1 side scores 0.9, everything else 0.1
  auto f = [](std::span<const double> w) { return w[0] > w[1] ? 0.9 : 0.1; };
  EvaluationService service(make_stub_objective(f));
  auto cfg = config(2);
  cfg.starting_points = {pt({4, 0}), pt({0, 4})};
  cfg.halt.max_points = 200;
  auto r = ma_melif(service, cfg);
  ASSERT_EQ(r.arm_pulls.size(), 2u);
  EXPECT_GE(r.arm_pulls[0], 1u);
  EXPECT_GE(r.arm_pulls[1], 1u);
  EXPECT_GE(static_cast<double>(r.arm_pulls[0]), 0.6 * 200);
  std::size_t from_arms = 0;
  for (auto& a : r.arms) from_arms += a.has_value();
  EXPECT_EQ(from_arms, r.evaluations.size());
}

TEST(MaMelif, UnimodalFindsGridOptimum) {
  EvaluationService a(make_stub_objective(sphere)), b(make_stub_objective(sphere));
  auto cfg = config(2);
  cfg.halt.max_points = 200;
  auto ma = ma_melif(a, cfg);
  EXPECT_EQ(ma.best_score, oracle::grid_max(sphere, 2, 4, -4, 8));
  EXPECT_EQ(ma.best_score, pq_melif(b, cfg).best_score);
}

TEST(Parallel, NoPointEvaluatedTwiceAndInvariantsHold) {
  for (bool bandit : {false, true})
    for (std::size_t threads : {2u, 4u, 8u})
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mutex m;
        std::map<std::vector<std::int64_t>, int> calls;
        auto obj = [&, seed](const GridPoint& p) {
          {
            std::lock_guard lock(m);
            ++calls[{p.steps().begin(), p.steps().end()}];
          }
          std::this_thread::sleep_for(200us);
          return Evaluation{fine_hash(p.weights(), seed), {}};
        };
        EvaluationService service(obj);
        auto cfg = config(3, threads);
        cfg.halt.max_points = 60;
        auto r = bandit ? ma_melif(service, cfg) : pq_melif(service, cfg);
        for (auto& [p, n] : calls) ASSERT_EQ(n, 1);
        EXPECT_EQ(calls.size(), r.evaluations.size());
        EXPECT_GE(r.evaluations.size(), 60u);
        EXPECT_LE(r.evaluations.size(), 60u + threads - 1);
        check_result_invariants(r, default_starting_points(3, kSpacing));
      }
}

TEST(RunOptimizer, DispatchesByName) {
  EXPECT_EQ(parse_optimizer("melif+"), OptimizerKind::melif_plus);
  EXPECT_EQ(optimizer_name(OptimizerKind::ma), "ma");
  EXPECT_THROW(parse_optimizer("ga"), Error);
  EvaluationService service(make_stub_objective(sphere));
  auto r = run_optimizer(OptimizerKind::melif, service, config(2));
  EXPECT_EQ(r.best_point, pt({2, 2}));
}
