#pragma once

#include <string>
#include <utility>
#include <vector>

#include "idpr/part_graph.hpp"

namespace idpr {

// A scored limb: the segment between two part indices.
struct LimbSpec {
  std::string name;
  int p = 0;
  int q = 0;
};

enum class LimbVerdict { kCorrect, kIncorrect, kInvalid };

// Per-limb verdicts for one image. `mean` averages over valid limbs only
// and is 0 when no limb is valid.
struct PcpResult {
  std::vector<LimbVerdict> verdicts;
  double mean = 0.0;
  int valid_count = 0;
};

// A limb is correct iff BOTH predicted endpoints lie within half the
// ground-truth limb length of their annotations (inclusive). Zero-length
// ground-truth limbs are flagged invalid, excluded, and warned about.
PcpResult strict_pcp(const Pose& pred, const Pose& gt,
                     const std::vector<LimbSpec>& limbs);

// Looser variant: the AVERAGE of the two endpoint errors must be within
// half the limb length (inclusive). Any limb that passes the strict test
// passes this one.
PcpResult buffy_pcp(const Pose& pred, const Pose& gt,
                    const std::vector<LimbSpec>& limbs);

// Detection-rate curve: rates[t][j] is the fraction of instances whose
// joint `joints[j]` lies within thresholds[t] * scale of the ground truth,
// where scale is the distance between the two scale_pair joints of the
// ground-truth pose. Rates are non-decreasing in the threshold.
struct PdjCurve {
  std::vector<double> thresholds;
  std::vector<std::vector<double>> rates;  // [threshold][joint slot]
};

// scale_pair is conventionally (left shoulder, right hip). Instances with
// zero scale are excluded with a warning; thresholds must be increasing
// within [0, 1].
PdjCurve pdj(const std::vector<Pose>& preds, const std::vector<Pose>& gts,
             const std::vector<int>& joints,
             const std::vector<double>& thresholds,
             std::pair<int, int> scale_pair);

// Named group of limb indices for the report columns.
struct LimbCategory {
  std::string name;
  std::vector<int> limbs;
};

// Per-limb rates are fractions of images where the limb was correct,
// counted over images where it was valid; a category's rate is the mean of
// its member limb rates, and mean_rate averages over every limb with data.
struct EvalReport {
  std::vector<std::string> category_names;
  std::vector<double> category_rates;
  std::vector<double> limb_rates;
  std::vector<int> limb_valid;  // images where the limb had valid ground truth
  double mean_rate = 0.0;
  int num_images = 0;
};

EvalReport aggregate_report(const std::vector<PcpResult>& per_image,
                            const std::vector<LimbCategory>& categories);

// Aligned plain-text table, one row of percentage columns plus Mean.
std::string report_to_text(const EvalReport& report);
// Same content as a JSON object.
std::string report_to_json(const EvalReport& report);
// CSV with a threshold column followed by one rate column per joint.
std::string pdj_to_csv(const PdjCurve& curve,
                       const std::vector<std::string>& joint_names);

}  // namespace idpr
