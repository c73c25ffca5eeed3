#include "trajsal/bench/corridor.hpp"
#include "trajsal/bench/experiment.hpp"
#include "trajsal/common/errors.hpp"
#include "trajsal/trajdata/preprocess.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

using namespace trajsal;
using namespace trajsal::bench;

namespace {

const std::vector<Trajectory>& pool() {
  static const std::vector<Trajectory> p = [] {
    Rng r(1);
    return gen_corridor_pool(CorridorSpec::standard(), 40, r);
  }();
  return p;
}

std::pair<int, int> pair_of(const Trajectory& t) { return {*t.entry(), *t.exit()}; }

}  // namespace

TEST(CorridorSpec, StandardLayout) {
  const auto s = CorridorSpec::standard();
  EXPECT_EQ(s.gates.size(), 14u);
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.gate(12).side, "left");
  EXPECT_THROW(s.gate(99), DataError);
  const auto back = corridor_from_json(to_json(s));
  EXPECT_EQ(back.gates.size(), s.gates.size());
  EXPECT_EQ(back.gate(7).x, s.gate(7).x);
  auto bad = s;
  bad.gates[1].id = 0;
  EXPECT_THROW(bad.validate(), DataError);
}

TEST(CorridorPool, TagsLabelsAndDirectPaths) {
  const auto spec = CorridorSpec::standard();
  std::map<std::pair<int, int>, int> per_pair;
  std::size_t erratic = 0;
  for (const auto& t : pool()) {
    ASSERT_TRUE(t.entry() && t.exit());
    ++per_pair[pair_of(t)];
    const auto& a = spec.gate(*t.entry());
    const auto& b = spec.gate(*t.exit());
    const double direct = std::hypot(a.x - b.x, a.y - b.y);
    if (t.label() == Label::salient) {
      ++erratic;
      EXPECT_GE(arc_length(t), 1.1 * direct) << t.id();
    }
    for (const auto& p : t.points()) {
      ASSERT_GE(p.x, -10);
      ASSERT_LE(p.x, spec.length + 10);
    }
  }
  EXPECT_EQ(per_pair.size(), gate_pairs(spec).size());
  for (const auto& [k, n] : per_pair) EXPECT_EQ(n, 40);
  const double frac = static_cast<double>(erratic) / static_cast<double>(pool().size());
  EXPECT_NEAR(frac, spec.erratic_fraction, 0.03);
}

TEST(CorridorPool, NoiselessDirectPathsAreStraight) {
  auto spec = CorridorSpec::standard();
  spec.noise = 0;
  spec.erratic_fraction = 0;
  Rng r(2);
  for (const auto& t : gen_corridor_pool(spec, 2, r)) {
    ASSERT_EQ(t.label(), Label::normal);
    const auto d = displacements(t);
    for (std::size_t i = 2; i < d.size(); ++i) ASSERT_NEAR(d[i].u * d[1].v - d[i].v * d[1].u, 0.0, 1e-9);
  }
}

TEST(CorridorPool, ErraticPathsAreLongerThanTheDirectMedian) {
  std::map<std::pair<int, int>, std::vector<double>> direct;
  for (const auto& t : pool())
    if (t.label() == Label::normal) direct[pair_of(t)].push_back(arc_length(t));
  for (const auto& t : pool()) {
    if (t.label() == Label::salient) {
      EXPECT_GT(arc_length(t), median_of(direct[pair_of(t)])) << t.id();
    }
  }
}

TEST(SalientPairs, DegreeRules) {
  const auto spec = CorridorSpec::standard();
  for (auto [e, x] : gate_pairs(spec)) {
    for (Degree d : {Degree::low, Degree::medium}) {
      const int gap = d == Degree::low ? 1 : 2;
      for (auto [se, sx] : salient_pairs(spec, pool(), e, x, d)) {
        const bool keeps_entry = se == e, keeps_exit = sx == x;
        ASSERT_NE(keeps_entry, keeps_exit);  // exactly one shared gate
        const auto& moved = spec.gate(keeps_entry ? sx : se);
        const auto& orig = spec.gate(keeps_entry ? x : e);
        ASSERT_EQ(moved.side, orig.side);
        ASSERT_EQ(std::abs(moved.index - orig.index), gap);
      }
    }
    for (auto [se, sx] : salient_pairs(spec, pool(), e, x, Degree::high)) {
      ASSERT_TRUE(se != e && se != x && sx != e && sx != x);
    }
  }
}

TEST(DtScenarios, RatioLabelsAndOrigin) {
  const auto spec = CorridorSpec::standard();
  Rng r(3);
  const auto sc = build_dt_scenarios(spec, pool(), Degree::low, 0.10, r);
  ASSERT_FALSE(sc.empty());
  for (const auto& s : sc) {
    std::size_t normals = s.size() - s.salient_count();
    EXPECT_EQ(s.salient_count(), static_cast<std::size_t>(std::lround(0.10 * static_cast<double>(normals))));
    EXPECT_NO_THROW(validate_scenario(s));
    for (const auto& t : s.trajectories) {
      EXPECT_EQ(t.front().x, 0.0);
      EXPECT_EQ(t.front().y, 0.0);
    }
  }
  EXPECT_THROW(build_dt_scenarios(spec, pool(), Degree::low, 0.0, r), DataError);
}

TEST(DtScenarios, APathCanBeNormalInOneScenarioAndSalientInAnother) {
  Rng r(4);
  const auto sc = build_dt_scenarios(CorridorSpec::standard(), pool(), Degree::medium, 0.15, r);
  std::set<std::string> normal, salient;
  for (const auto& s : sc)
    for (const auto& t : s.trajectories) {
      const std::string base = t.id().substr(0, t.id().find('@'));
      (t.label() == Label::salient ? salient : normal).insert(base);
    }
  bool both = false;
  for (const auto& id : salient) both |= normal.count(id) > 0;
  EXPECT_TRUE(both);
}

TEST(EtScenarios, ErraticPathsAreSalientInTheirOwnPair) {
  Rng r(5);
  const auto sc = build_et_scenarios(pool(), r);
  std::size_t salient = 0;
  for (const auto& s : sc) {
    std::set<std::pair<int, int>> pairs;
    for (const auto& t : s.trajectories) pairs.insert(pair_of(t));
    EXPECT_EQ(pairs.size(), 1u);
    salient += s.salient_count();
  }
  std::size_t erratic = 0;
  for (const auto& t : pool()) erratic += t.label() == Label::salient;
  EXPECT_EQ(salient, erratic);
}

TEST(FtScenarios, SubsampledCopiesMoveFaster) {
  Rng r(6);
  const auto sc = build_ft_scenarios(pool(), 3, 0.10, r);
  ASSERT_FALSE(sc.empty());
  // walker speeds differ, so only the pooled ratio is pinned near the factor
  double fast = 0, slow = 0;
  std::size_t nf = 0, ns = 0;
  for (const auto& s : sc) {
    for (const auto& t : s.trajectories) {
      if (t.label() == Label::salient) {
        fast += mean_displacement(t);
        ++nf;
      } else {
        slow += mean_displacement(t);
        ++ns;
      }
    }
    EXPECT_TRUE(std::any_of(s.trajectories.begin(), s.trajectories.end(),
                            [](const Trajectory& t) { return t.label() == Label::salient; }));
  }
  ASSERT_GT(nf, 0u);
  EXPECT_NEAR((fast / static_cast<double>(nf)) / (slow / static_cast<double>(ns)), 3.0, 0.3);
  EXPECT_THROW(build_ft_scenarios(pool(), 1, 0.1, r), DataError);
}

TEST(CorridorBatch, ShapeAndGrouping) {
  Rng r(7);
  const auto b = corridor_training_batch(pool(), 4, 5, false, r);
  EXPECT_EQ(b.size(), 20u);
  for (const auto& t : b.trajectories) {
    EXPECT_EQ(t.label(), Label::normal);
    EXPECT_EQ(t.front().x, 0.0);
  }
  for (const auto& g : b.groups()) {
    std::set<std::pair<int, int>> pairs;
    for (auto i : g) pairs.insert(pair_of(b.trajectories[i]));
    EXPECT_EQ(pairs.size(), 1u);
  }
  const auto src = corridor_source(pool(), 3);
  EXPECT_EQ(src(2).trajectories, src(2).trajectories);
}

TEST(Experiment, GridAxesBaselinesAndDeterminism) {
  Rng r(8);
  ae::ModelConfig c;
  c.encoder_dims = {8};
  c.code_dim = 4;
  c.decoder_hidden = 4;
  c.decoder_dims = {2};
  const auto m = ae::Model::initialized(c, r);
  ExperimentConfig cfg;
  cfg.degrees = {Degree::high, Degree::low};
  cfg.ratios = {0.05};
  cfg.variant = "tiny";
  const auto rows = run_experiment(m, CorridorSpec::standard(), pool(), cfg);
  ASSERT_EQ(rows.size(), 6u);  // (model + 2 baselines) x 2 degrees
  std::set<std::string> variants;
  for (const auto& row : rows) {
    variants.insert(row.variant);
    EXPECT_EQ(row.kind, "DT");
    EXPECT_NEAR(row.f_measure, f_measure(row.precision, row.recall), 1e-12);
  }
  EXPECT_EQ(variants, (std::set<std::string>{"tiny", "baseline-10%", "baseline-15%"}));
  std::ostringstream a, b;
  write_results_csv(a, rows);
  write_results_csv(b, run_experiment(m, CorridorSpec::standard(), pool(), cfg));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "variant,saliency_kind,degree,ratio,lambda,precision,recall,f_measure,fpr");
}
