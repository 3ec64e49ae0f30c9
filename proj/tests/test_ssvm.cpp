#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "idpr/error.hpp"
#include "idpr/inference.hpp"
#include "idpr/score.hpp"
#include "idpr/ssvm.hpp"
#include "oracle/oracle.hpp"
#include "test_util.hpp"

using namespace idpr;

namespace {

const std::vector<ModelMode> kAllModes = {
    ModelMode::kFull, ModelMode::kNoIdprs, ModelMode::kUnaryOnly};

struct ChainSetup {
  PartGraph graph{2, {{0, 1}}, 0};
  RelationModel relations{
      graph,
      {{Vec2{1, 0}, Vec2{-1, 0}}, {Vec2{0, 1}, Vec2{0, -1}, Vec2{1, 1}}}};
};

bool weights_equal(const Weights& a, const Weights& b) {
  return a.mode == b.mode && a.unary == b.unary && a.idpr == b.idpr &&
         a.deform == b.deform && a.prior_bias == b.prior_bias &&
         a.bias == b.bias;
}

}  // namespace

TEST_SUITE("ssvm") {

TEST_CASE("layout sizes count every trainable parameter") {
  ChainSetup s;
  CHECK(WeightLayout(s.graph, s.relations, ModelMode::kFull).size() ==
        2 + 2 + 4 * (2 + 3) + 1);
  CHECK(WeightLayout(s.graph, s.relations, ModelMode::kNoIdprs).size() ==
        2 + 4 * (2 + 3) + (2 + 3) + 1);
  CHECK(WeightLayout(s.graph, s.relations, ModelMode::kUnaryOnly).size() ==
        2 + 1);
}

TEST_CASE("pack and unpack are mutually inverse in every mode") {
  ChainSetup s;
  Rng rng(61);
  for (ModelMode mode : kAllModes) {
    const WeightLayout layout(s.graph, s.relations, mode);
    const Weights w = testutil::random_weights(rng, s.graph, s.relations, mode);
    const std::vector<double> flat = layout.pack(w);
    REQUIRE(static_cast<int>(flat.size()) == layout.size());
    CHECK(weights_equal(layout.unpack(flat), w));

    // Every slot accessor points into the packed vector consistently.
    for (int i = 0; i < 2; ++i) {
      CHECK(flat[layout.unary_slot(i)] == w.unary[i]);
    }
    if (mode == ModelMode::kFull) {
      for (int d = 0; d < 2; ++d) CHECK(flat[layout.idpr_slot(d)] == w.idpr[d]);
    }
    if (mode != ModelMode::kUnaryOnly) {
      for (int d = 0; d < 2; ++d) {
        for (int t = 0; t < s.relations.type_count(d); ++t) {
          for (int c = 0; c < 4; ++c) {
            CHECK(flat[layout.deform_slot(d, t, c)] == w.deform[d][t][c]);
          }
        }
      }
    }
    if (mode == ModelMode::kNoIdprs) {
      for (int d = 0; d < 2; ++d) {
        for (int t = 0; t < s.relations.type_count(d); ++t) {
          CHECK(flat[layout.prior_slot(d, t)] == w.prior_bias[d][t]);
        }
      }
    }
    CHECK(flat[layout.bias_slot()] == w.bias);
  }
}

TEST_CASE("slots that do not exist in a mode are refused") {
  ChainSetup s;
  const WeightLayout full(s.graph, s.relations, ModelMode::kFull);
  const WeightLayout noidpr(s.graph, s.relations, ModelMode::kNoIdprs);
  const WeightLayout unary(s.graph, s.relations, ModelMode::kUnaryOnly);
  CHECK_THROWS_AS(noidpr.idpr_slot(0), ConfigError);
  CHECK_THROWS_AS(unary.idpr_slot(0), ConfigError);
  CHECK_THROWS_AS(full.prior_slot(0, 0), ConfigError);
  CHECK_THROWS_AS(unary.deform_slot(0, 0, 0), ConfigError);
  CHECK(unary.quadratic_slots().empty());
}

TEST_CASE("quadratic slots are exactly the squared-term coefficients") {
  ChainSetup s;
  const WeightLayout layout(s.graph, s.relations, ModelMode::kFull);
  std::vector<int> expected;
  for (int d = 0; d < 2; ++d) {
    for (int t = 0; t < s.relations.type_count(d); ++t) {
      expected.push_back(layout.deform_slot(d, t, 1));
      expected.push_back(layout.deform_slot(d, t, 3));
    }
  }
  std::vector<int> got = layout.quadratic_slots();
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  CHECK(got == expected);
}

TEST_CASE("a single part yields one appearance entry plus the bias") {
  const PartGraph graph(1, {}, 0);
  const RelationModel relations(graph, {});
  Rng rng(62);
  const ScoreMapStack maps = testutil::random_maps(rng, graph, relations, 5, 5);
  Pose pose;
  pose.joints = {{3.2, 1.7}};
  const FeatureVector phi = build_feature_vector(
      maps, pose, TypeAssignment{}, graph, relations, ModelMode::kFull);
  REQUIRE(phi.entries.size() == 2);
  CHECK(phi.entries[0].first == 0);
  CHECK(phi.entries[0].second == static_cast<double>(maps.appearance(0)(3, 1)));
  CHECK(phi.entries[1].first == 1);
  CHECK(phi.entries[1].second == 1.0);
}

TEST_CASE("zero maps and zero residuals leave only the bias") {
  ChainSetup s;
  // Both mean offsets agree exactly with the pose displacement, so every
  // deformation feature is zero; the maps are zero-filled, so appearance
  // and type-evidence entries vanish too.
  const RelationModel aligned(s.graph, {{Vec2{1, 0}}, {Vec2{-1, 0}}});
  const ScoreMapStack maps = make_score_map_stack(s.graph, aligned, 8, 8, 1);
  Pose pose;
  pose.joints = {{3.0, 3.0}, {4.0, 3.0}};
  TypeAssignment types;
  types.types = {0, 0};
  const FeatureVector phi = build_feature_vector(
      maps, pose, types, s.graph, aligned, ModelMode::kFull);

  Rng rng(63);
  const Weights w =
      testutil::random_weights(rng, s.graph, aligned, ModelMode::kFull);
  const WeightLayout layout(s.graph, aligned, ModelMode::kFull);
  CHECK(phi.dot(layout.pack(w)) == doctest::Approx(w.bias));
  CHECK(full_score(pose, types, maps, w, s.graph, aligned) ==
        doctest::Approx(w.bias));
}

TEST_CASE("the feature vector reproduces the configuration score") {
  Rng rng(64);
  for (ModelMode mode : kAllModes) {
    for (int trial = 0; trial < 5; ++trial) {
      const PartGraph graph = testutil::random_tree(rng, rng.uniform_int(1, 4));
      const RelationModel relations =
          testutil::random_relations(rng, graph, 3, 3.0);
      const ScoreMapStack maps =
          testutil::random_maps(rng, graph, relations, 9, 7);
      const Weights w = testutil::random_weights(rng, graph, relations, mode);
      const WeightLayout layout(graph, relations, mode);
      const std::vector<double> flat = layout.pack(w);

      for (int n = 0; n < 20; ++n) {
        const Pose pose = testutil::real_pose(rng, graph.num_parts(), 9, 7);
        const TypeAssignment types = testutil::random_types(rng, relations);
        const FeatureVector phi =
            build_feature_vector(maps, pose, types, graph, relations, mode);
        const double via_dot = phi.dot(flat);
        const double direct =
            full_score(pose, types, maps, w, graph, relations);
        CHECK(via_dot == doctest::Approx(direct).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("objective values match hand computation and the reference") {
  std::vector<TrainingExample> examples;
  examples.push_back({FeatureVector{{{0, 2.0}}}, 1});
  examples.push_back({FeatureVector{{{0, -2.0}}}, -1});

  // Zero weights: every example contributes a full hinge of 1.
  CHECK(objective({0.0, 0.0}, examples, 3.0) == doctest::Approx(6.0));
  // Separating weights with margin 2: only the regularizer remains.
  CHECK(objective({1.0, 0.0}, examples, 3.0) == doctest::Approx(0.5));

  Rng rng(65);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrainingExample> batch;
    const int dim = rng.uniform_int(2, 6);
    for (int n = 0; n < 15; ++n) {
      FeatureVector f;
      for (int s = 0; s < dim; ++s) {
        if (rng.next_double() < 0.7) {
          f.entries.emplace_back(s, rng.uniform(-2.0, 2.0));
        }
      }
      batch.push_back({f, rng.next_double() < 0.5 ? 1 : -1});
    }
    std::vector<double> w(dim);
    for (double& v : w) v = rng.uniform(-1.5, 1.5);
    const double C = rng.uniform(0.1, 5.0);
    CHECK(objective(w, batch, C) ==
          doctest::Approx(oracle::hinge_objective(w, batch, C)).epsilon(1e-12));
  }
}

TEST_CASE("a one-dimensional margin problem trains to unit weight") {
  std::vector<TrainingExample> examples;
  examples.push_back({FeatureVector{{{0, 1.0}}}, 1});
  examples.push_back({FeatureVector{{{0, -1.0}}}, -1});
  for (double C : {1.0, 10.0}) {
    SsvmConfig config;
    config.C = C;
    config.epochs = 400;
    config.eta0 = 0.2;
    config.lambda = 1e-3;
    config.seed = 17;
    const std::vector<double> w = train_weights_raw(examples, 1, {}, config);
    REQUIRE(w.size() == 1);
    CHECK(w[0] > 0.9);
    CHECK(w[0] < 1.1);
    const double hinge =
        std::max(0.0, 1.0 - w[0]) + std::max(0.0, 1.0 - w[0]);
    CHECK(hinge < 0.21);
  }
}

TEST_CASE("vanishing C drives the weights toward zero") {
  std::vector<TrainingExample> examples;
  examples.push_back({FeatureVector{{{0, 1.0}}}, 1});
  examples.push_back({FeatureVector{{{0, -1.0}}}, -1});
  SsvmConfig config;
  config.C = 1e-6;
  config.epochs = 200;
  config.eta0 = 0.2;
  config.seed = 18;
  const std::vector<double> w = train_weights_raw(examples, 1, {}, config);
  CHECK(std::abs(w[0]) < 0.05);
}

TEST_CASE("the returned checkpoint objective never worsens with more epochs") {
  Rng rng(66);
  std::vector<TrainingExample> examples;
  for (int n = 0; n < 24; ++n) {
    FeatureVector f;
    for (int s = 0; s < 5; ++s) f.entries.emplace_back(s, rng.uniform(-1, 1));
    examples.push_back({f, n % 2 == 0 ? 1 : -1});
  }
  double previous = 1e300;
  for (int epochs = 1; epochs <= 6; ++epochs) {
    SsvmConfig config;
    config.C = 2.0;
    config.epochs = epochs;
    config.seed = 19;  // same seed => the shuffle stream is a prefix
    const std::vector<double> w = train_weights_raw(examples, 5, {}, config);
    const double obj = objective(w, examples, config.C);
    CHECK(obj <= previous + 1e-12);
    previous = obj;
  }
}

TEST_CASE("trained weights stay concave and validate") {
  ChainSetup s;
  Rng rng(67);
  const ScoreMapStack maps =
      testutil::random_maps(rng, s.graph, s.relations, 8, 8);
  std::vector<TrainingExample> examples;
  for (int n = 0; n < 20; ++n) {
    const Pose pose = testutil::real_pose(rng, 2, 8, 8);
    const TypeAssignment types = testutil::random_types(rng, s.relations);
    examples.push_back(
        {build_feature_vector(maps, pose, types, s.graph, s.relations,
                              ModelMode::kFull),
         n % 2 == 0 ? 1 : -1});
  }
  SsvmConfig config;
  config.epochs = 10;
  config.seed = 20;
  const Weights w =
      train_weights(examples, s.graph, s.relations, ModelMode::kFull, config);
  CHECK(w.mode == ModelMode::kFull);
  CHECK_NOTHROW(validate_weights(w, s.graph, s.relations));
  for (const auto& per_dir : w.deform) {
    for (const auto& coeffs : per_dir) {
      CHECK(coeffs[1] <= -kQuadEps);
      CHECK(coeffs[3] <= -kQuadEps);
    }
  }
}

TEST_CASE("training rejects malformed inputs") {
  std::vector<TrainingExample> examples;
  examples.push_back({FeatureVector{{{0, 1.0}}}, 1});
  examples.push_back({FeatureVector{{{0, -1.0}}}, -1});

  SsvmConfig bad_c;
  bad_c.C = 0.0;
  CHECK_THROWS_AS(train_weights_raw(examples, 1, {}, bad_c), ConfigError);

  std::vector<TrainingExample> bad_label = examples;
  bad_label[0].y = 0;
  CHECK_THROWS_AS(train_weights_raw(bad_label, 1, {}, SsvmConfig{}),
                  ConfigError);

  std::vector<TrainingExample> bad_slot = examples;
  bad_slot[0].features.entries[0].first = 7;
  CHECK_THROWS_AS(train_weights_raw(bad_slot, 1, {}, SsvmConfig{}),
                  ConfigError);

  std::vector<TrainingExample> one_sided;
  one_sided.push_back({FeatureVector{{{0, 1.0}}}, 1});
  one_sided.push_back({FeatureVector{{{0, 2.0}}}, 1});
  CHECK_THROWS_AS(train_weights_raw(one_sided, 1, {}, SsvmConfig{}),
                  DataError);
}

TEST_CASE("negative mining needs a negative image") {
  const PartGraph graph(2, {{0, 1}}, 0);
  const RelationModel relations(graph, {{Vec2{10, 0}}, {Vec2{-10, 0}}});
  const Weights snapshot =
      default_weights(ModelMode::kFull, graph, relations);
  CHECK_THROWS_AS(mine_negative_examples({}, {}, snapshot, graph, relations,
                                         1, 0.0, 1),
                  DataError);
}

TEST_CASE("mined negatives avoid the annotated configuration") {
  const PartGraph graph(2, {{0, 1}}, 0);
  const RelationModel relations(graph, {{Vec2{10, 0}}, {Vec2{-10, 0}}});
  const Weights snapshot = default_weights(ModelMode::kFull, graph, relations);

  // Appearance planes encode the cell so the feature values reveal where a
  // mined configuration landed: value = x + 100 y.
  ScoreMapStack pos_maps = make_score_map_stack(graph, relations, 40, 40, 1);
  for (int part = 0; part < 2; ++part) {
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        pos_maps.appearance(part)(x, y) = static_cast<float>(x + 100 * y);
      }
    }
  }
  Rng rng(68);
  ScoreMapStack neg_maps = testutil::random_maps(rng, graph, relations, 12, 9);

  LabeledInstance positive;
  positive.maps = &pos_maps;
  positive.pose.joints = {{5.0, 20.0}, {15.0, 20.0}};
  positive.types.types = {0, 0};

  const int per_positive = 4;
  const auto mined =
      mine_negative_examples({positive}, {&neg_maps}, snapshot, graph,
                             relations, per_positive, 0.0, 21);
  REQUIRE(mined.size() == 1 + per_positive);
  for (const TrainingExample& ex : mined) CHECK(ex.y == -1);

  // The hard negative from the background image scores exactly what
  // inference says the best configuration scores.
  const InferenceResult best = infer(neg_maps, snapshot, relations, graph,
                                     std::nullopt, ModelMode::kFull);
  const WeightLayout layout(graph, relations, ModelMode::kFull);
  CHECK(mined[0].features.dot(layout.pack(snapshot)) ==
        doctest::Approx(best.score).epsilon(1e-9));

  // Displaced copies moved every part beyond half its limb length (5 px);
  // after snapping that is still at least 5 - sqrt(2) cells away.
  const double limb_floor = 5.0 - 1.5;
  const std::vector<Vec2> original = {{5.0, 20.0}, {15.0, 20.0}};
  for (std::size_t n = 1; n < mined.size(); ++n) {
    for (int part = 0; part < 2; ++part) {
      const double code = mined[n].features.entries[part].second;
      const Vec2 cell{std::fmod(code, 100.0), std::floor(code / 100.0)};
      CHECK(distance(cell, original[part]) > limb_floor);
    }
  }
}

}  // TEST_SUITE
