#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "idpr/error.hpp"
#include "idpr/eval.hpp"
#include "idpr/rng.hpp"

using namespace idpr;

namespace {

Pose make_pose(std::vector<Vec2> joints) {
  Pose pose;
  pose.joints = std::move(joints);
  return pose;
}

const std::vector<LimbSpec> kOneLimb = {{"limb", 0, 1}};

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("the strict boundary is inclusive at half the limb length") {
  // Ground-truth limb of length 10: the tolerance radius is exactly 5.
  const Pose gt = make_pose({{0.0, 0.0}, {10.0, 0.0}});

  const Pose exact = gt;
  CHECK(strict_pcp(exact, gt, kOneLimb).verdicts[0] == LimbVerdict::kCorrect);

  const Pose at_radius = make_pose({{0.0, 5.0}, {10.0, -5.0}});
  CHECK(strict_pcp(at_radius, gt, kOneLimb).verdicts[0] ==
        LimbVerdict::kCorrect);

  const Pose past_radius = make_pose({{0.0, 6.0}, {10.0, 0.0}});
  CHECK(strict_pcp(past_radius, gt, kOneLimb).verdicts[0] ==
        LimbVerdict::kIncorrect);

  const PcpResult all = strict_pcp(exact, gt, kOneLimb);
  CHECK(all.mean == 1.0);
  CHECK(all.valid_count == 1);
}

TEST_CASE("strict requires both endpoints inside the radius") {
  const Pose gt = make_pose({{0.0, 0.0}, {10.0, 0.0}});
  // One endpoint perfect, the other 6 away: strict fails.
  const Pose one_bad = make_pose({{0.0, 0.0}, {10.0, 6.0}});
  CHECK(strict_pcp(one_bad, gt, kOneLimb).verdicts[0] ==
        LimbVerdict::kIncorrect);
}

TEST_CASE("the averaged variant forgives one bad endpoint") {
  const Pose gt = make_pose({{0.0, 0.0}, {10.0, 0.0}});
  // Endpoint errors 0 and 6: average 3 <= 5 passes the averaged test while
  // the strict one fails.
  const Pose lopsided = make_pose({{0.0, 0.0}, {10.0, 6.0}});
  CHECK(strict_pcp(lopsided, gt, kOneLimb).verdicts[0] ==
        LimbVerdict::kIncorrect);
  CHECK(buffy_pcp(lopsided, gt, kOneLimb).verdicts[0] ==
        LimbVerdict::kCorrect);

  // Average exactly at the radius is still correct (inclusive).
  const Pose at_avg = make_pose({{0.0, 4.0}, {10.0, 6.0}});
  CHECK(buffy_pcp(at_avg, gt, kOneLimb).verdicts[0] == LimbVerdict::kCorrect);
  // Average just past the radius fails.
  const Pose past_avg = make_pose({{0.0, 4.1}, {10.0, 6.0}});
  CHECK(buffy_pcp(past_avg, gt, kOneLimb).verdicts[0] ==
        LimbVerdict::kIncorrect);
}

TEST_CASE("identity predictions score a mean of one") {
  const Pose gt = make_pose({{1.0, 2.0}, {4.0, 6.0}, {9.0, 2.0}});
  const std::vector<LimbSpec> limbs = {{"a", 0, 1}, {"b", 1, 2}};
  for (auto* fn : {strict_pcp, buffy_pcp}) {
    const PcpResult r = fn(gt, gt, limbs);
    CHECK(r.mean == 1.0);
    CHECK(r.valid_count == 2);
  }
}

TEST_CASE("zero-length ground-truth limbs are excluded as invalid") {
  const Pose gt = make_pose({{3.0, 3.0}, {3.0, 3.0}, {9.0, 3.0}});
  const Pose pred = make_pose({{3.0, 3.0}, {3.0, 3.0}, {9.0, 3.0}});
  const std::vector<LimbSpec> limbs = {{"degenerate", 0, 1}, {"real", 1, 2}};
  const PcpResult r = strict_pcp(pred, gt, limbs);
  CHECK(r.verdicts[0] == LimbVerdict::kInvalid);
  CHECK(r.verdicts[1] == LimbVerdict::kCorrect);
  CHECK(r.valid_count == 1);
  CHECK(r.mean == 1.0);  // averaged over the single valid limb
}

TEST_CASE("every strict success also passes the averaged variant") {
  Rng rng(71);
  const std::vector<LimbSpec> limbs = {{"a", 0, 1}, {"b", 1, 2}};
  for (int trial = 0; trial < 1000; ++trial) {
    Pose gt;
    Pose pred;
    for (int j = 0; j < 3; ++j) {
      gt.joints.emplace_back(rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0));
      pred.joints.emplace_back(gt.joints[j].x + rng.uniform(-6.0, 6.0),
                               gt.joints[j].y + rng.uniform(-6.0, 6.0));
    }
    const PcpResult strict = strict_pcp(pred, gt, limbs);
    const PcpResult averaged = buffy_pcp(pred, gt, limbs);
    for (std::size_t l = 0; l < limbs.size(); ++l) {
      if (strict.verdicts[l] == LimbVerdict::kCorrect) {
        CHECK(averaged.verdicts[l] == LimbVerdict::kCorrect);
      }
      if (strict.verdicts[l] == LimbVerdict::kInvalid) {
        CHECK(averaged.verdicts[l] == LimbVerdict::kInvalid);
      }
    }
  }
}

TEST_CASE("joint detection rates follow the scaled threshold") {
  // Scale pair at distance 20, prediction error 3 on joint 0: detected at
  // threshold 0.2 (radius 4), missed at 0.1 (radius 2).
  const Pose gt = make_pose({{0.0, 0.0}, {0.0, 20.0}});
  const Pose pred = make_pose({{3.0, 0.0}, {0.0, 20.0}});
  const PdjCurve curve =
      pdj({pred}, {gt}, {0, 1}, {0.1, 0.2}, {0, 1});
  REQUIRE(curve.rates.size() == 2);
  CHECK(curve.rates[0][0] == 0.0);
  CHECK(curve.rates[1][0] == 1.0);
  CHECK(curve.rates[0][1] == 1.0);
  CHECK(curve.rates[1][1] == 1.0);
}

TEST_CASE("a zero threshold accepts only exact hits") {
  const Pose gt = make_pose({{0.0, 0.0}, {0.0, 20.0}});
  const Pose near = make_pose({{1e-9, 0.0}, {0.0, 20.0}});
  const PdjCurve exact = pdj({gt}, {gt}, {0}, {0.0}, {0, 1});
  CHECK(exact.rates[0][0] == 1.0);
  const PdjCurve off = pdj({near}, {gt}, {0}, {0.0}, {0, 1});
  CHECK(off.rates[0][0] == 0.0);
}

TEST_CASE("detection rates never decrease in the threshold") {
  Rng rng(72);
  std::vector<Pose> gts;
  std::vector<Pose> preds;
  for (int n = 0; n < 40; ++n) {
    Pose gt;
    Pose pred;
    for (int j = 0; j < 4; ++j) {
      gt.joints.emplace_back(rng.uniform(0.0, 30.0), rng.uniform(0.0, 30.0));
      pred.joints.emplace_back(gt.joints[j].x + rng.uniform(-8.0, 8.0),
                               gt.joints[j].y + rng.uniform(-8.0, 8.0));
    }
    gts.push_back(gt);
    preds.push_back(pred);
  }
  const std::vector<double> thresholds = {0.05, 0.1, 0.2, 0.5, 1.0};
  const PdjCurve curve = pdj(preds, gts, {0, 1, 2, 3}, thresholds, {0, 3});
  for (std::size_t t = 1; t < thresholds.size(); ++t) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(curve.rates[t][j] >= curve.rates[t - 1][j]);
    }
  }
}

TEST_CASE("zero-scale instances are dropped from the curve") {
  const Pose good_gt = make_pose({{0.0, 0.0}, {0.0, 20.0}});
  const Pose bad_gt = make_pose({{5.0, 5.0}, {5.0, 5.0}});  // zero scale
  const Pose pred = make_pose({{0.0, 0.0}, {0.0, 20.0}});
  const PdjCurve curve =
      pdj({pred, pred}, {good_gt, bad_gt}, {0}, {0.5}, {0, 1});
  // Only the valid instance counts; the perfect prediction gives rate 1.
  CHECK(curve.rates[0][0] == 1.0);
}

TEST_CASE("thresholds must be increasing and inside the unit interval") {
  const Pose gt = make_pose({{0.0, 0.0}, {0.0, 20.0}});
  CHECK_THROWS_AS(pdj({gt}, {gt}, {0}, {0.5, 0.2}, {0, 1}), ConfigError);
  CHECK_THROWS_AS(pdj({gt}, {gt}, {0}, {-0.1, 0.2}, {0, 1}), ConfigError);
  CHECK_THROWS_AS(pdj({gt}, {gt}, {0}, {0.5, 1.2}, {0, 1}), ConfigError);
  CHECK_THROWS_AS(pdj({gt, gt}, {gt}, {0}, {0.5}, {0, 1}), ConfigError);
}

TEST_CASE("aggregation recomputes category means from limb rates") {
  // Limb 0 correct in both images; limb 1 correct in one of two.
  PcpResult first;
  first.verdicts = {LimbVerdict::kCorrect, LimbVerdict::kCorrect};
  first.valid_count = 2;
  first.mean = 1.0;
  PcpResult second;
  second.verdicts = {LimbVerdict::kCorrect, LimbVerdict::kIncorrect};
  second.valid_count = 2;
  second.mean = 0.5;

  const std::vector<LimbCategory> categories = {{"arms", {0}}, {"legs", {1}}};
  const EvalReport report = aggregate_report({first, second}, categories);
  CHECK(report.num_images == 2);
  CHECK(report.limb_rates[0] == doctest::Approx(1.0));
  CHECK(report.limb_rates[1] == doctest::Approx(0.5));
  CHECK(report.limb_valid[0] == 2);
  CHECK(report.limb_valid[1] == 2);
  CHECK(report.category_rates[0] == doctest::Approx(1.0));
  CHECK(report.category_rates[1] == doctest::Approx(0.5));
  CHECK(report.mean_rate == doctest::Approx(0.75));
}

TEST_CASE("invalid verdicts shrink a limb's denominator") {
  PcpResult first;
  first.verdicts = {LimbVerdict::kInvalid, LimbVerdict::kCorrect};
  first.valid_count = 1;
  first.mean = 1.0;
  PcpResult second;
  second.verdicts = {LimbVerdict::kCorrect, LimbVerdict::kCorrect};
  second.valid_count = 2;
  second.mean = 1.0;
  const EvalReport report =
      aggregate_report({first, second}, {{"all", {0, 1}}});
  CHECK(report.limb_valid[0] == 1);
  CHECK(report.limb_rates[0] == doctest::Approx(1.0));
  CHECK(report.limb_valid[1] == 2);
  CHECK(report.mean_rate == doctest::Approx(1.0));
}

TEST_CASE("report renderings include every category") {
  PcpResult r;
  r.verdicts = {LimbVerdict::kCorrect, LimbVerdict::kIncorrect};
  r.valid_count = 2;
  r.mean = 0.5;
  const EvalReport report =
      aggregate_report({r}, {{"arms", {0}}, {"legs", {1}}});

  const std::string text = report_to_text(report);
  CHECK(text.find("arms") != std::string::npos);
  CHECK(text.find("legs") != std::string::npos);
  CHECK(text.find("Mean") != std::string::npos);
  CHECK(text.find("100.0") != std::string::npos);

  const std::string json = report_to_json(report);
  CHECK(json.find("\"arms\"") != std::string::npos);
  CHECK(json.find("\"mean_pcp\"") != std::string::npos);
}

TEST_CASE("the detection curve renders as one row per threshold") {
  PdjCurve curve;
  curve.thresholds = {0.1, 0.2};
  curve.rates = {{0.25, 0.5}, {0.75, 1.0}};
  const std::string csv = pdj_to_csv(curve, {"head", "wrist"});
  CHECK(csv.find("threshold") != std::string::npos);
  CHECK(csv.find("head") != std::string::npos);
  CHECK(csv.find("wrist") != std::string::npos);
  CHECK(csv.find("0.25") != std::string::npos);
  CHECK(csv.find("\n") != std::string::npos);
}

}  // TEST_SUITE
