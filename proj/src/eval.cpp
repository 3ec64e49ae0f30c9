#include "idpr/eval.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "idpr/error.hpp"
#include "idpr/vec2.hpp"

namespace idpr {
namespace {

void check_limbs(const Pose& pred, const Pose& gt,
                 const std::vector<LimbSpec>& limbs) {
  if (pred.size() != gt.size()) {
    throw ConfigError("prediction and ground truth have different part counts");
  }
  for (const LimbSpec& limb : limbs) {
    if (limb.p == limb.q) {
      throw ConfigError("limb '" + limb.name + "' has identical endpoints");
    }
    if (limb.p < 0 || limb.p >= gt.size() || limb.q < 0 ||
        limb.q >= gt.size()) {
      throw ConfigError("limb '" + limb.name + "' references a missing part");
    }
  }
}

template <typename Criterion>
PcpResult pcp_common(const Pose& pred, const Pose& gt,
                     const std::vector<LimbSpec>& limbs, Criterion correct) {
  check_limbs(pred, gt, limbs);
  PcpResult result;
  result.verdicts.reserve(limbs.size());
  int num_correct = 0;
  for (const LimbSpec& limb : limbs) {
    const double length = distance(gt.joints[limb.p], gt.joints[limb.q]);
    if (length <= 0.0) {
      std::cerr << "warning: zero-length ground-truth limb '" << limb.name
                << "' excluded\n";
      result.verdicts.push_back(LimbVerdict::kInvalid);
      continue;
    }
    const double err_p = distance(pred.joints[limb.p], gt.joints[limb.p]);
    const double err_q = distance(pred.joints[limb.q], gt.joints[limb.q]);
    const bool ok = correct(err_p, err_q, 0.5 * length);
    result.verdicts.push_back(ok ? LimbVerdict::kCorrect
                                 : LimbVerdict::kIncorrect);
    ++result.valid_count;
    if (ok) ++num_correct;
  }
  result.mean = result.valid_count > 0
                    ? static_cast<double>(num_correct) / result.valid_count
                    : 0.0;
  return result;
}

}  // namespace

PcpResult strict_pcp(const Pose& pred, const Pose& gt,
                     const std::vector<LimbSpec>& limbs) {
  return pcp_common(pred, gt, limbs,
                    [](double err_p, double err_q, double threshold) {
                      return err_p <= threshold && err_q <= threshold;
                    });
}

PcpResult buffy_pcp(const Pose& pred, const Pose& gt,
                    const std::vector<LimbSpec>& limbs) {
  return pcp_common(pred, gt, limbs,
                    [](double err_p, double err_q, double threshold) {
                      return 0.5 * (err_p + err_q) <= threshold;
                    });
}

PdjCurve pdj(const std::vector<Pose>& preds, const std::vector<Pose>& gts,
             const std::vector<int>& joints,
             const std::vector<double>& thresholds,
             std::pair<int, int> scale_pair) {
  if (preds.size() != gts.size()) {
    throw ConfigError("prediction and ground-truth lists differ in length");
  }
  if (joints.empty() || thresholds.empty()) {
    throw ConfigError("need at least one joint and one threshold");
  }
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    if (thresholds[t] < 0.0 || thresholds[t] > 1.0 ||
        (t > 0 && thresholds[t] <= thresholds[t - 1])) {
      throw ConfigError("thresholds must be increasing within [0, 1]");
    }
  }

  PdjCurve curve;
  curve.thresholds = thresholds;
  curve.rates.assign(thresholds.size(),
                     std::vector<double>(joints.size(), 0.0));
  int used = 0;
  for (std::size_t n = 0; n < gts.size(); ++n) {
    const Pose& gt = gts[n];
    const Pose& pred = preds[n];
    if (pred.size() != gt.size()) {
      throw ConfigError("prediction and ground truth have different part counts");
    }
    if (scale_pair.first < 0 || scale_pair.first >= gt.size() ||
        scale_pair.second < 0 || scale_pair.second >= gt.size()) {
      throw ConfigError("scale pair references a missing part");
    }
    const double scale = distance(gt.joints[scale_pair.first],
                                  gt.joints[scale_pair.second]);
    if (scale <= 0.0) {
      std::cerr << "warning: zero scale in instance " << n
                << ", excluded from PDJ\n";
      continue;
    }
    ++used;
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const int joint = joints[j];
      if (joint < 0 || joint >= gt.size()) {
        throw ConfigError("PDJ joint index out of range");
      }
      const double err = distance(pred.joints[joint], gt.joints[joint]);
      for (std::size_t t = 0; t < thresholds.size(); ++t) {
        if (err <= thresholds[t] * scale) curve.rates[t][j] += 1.0;
      }
    }
  }
  if (used > 0) {
    for (auto& row : curve.rates) {
      for (double& r : row) r /= used;
    }
  }
  return curve;
}

EvalReport aggregate_report(const std::vector<PcpResult>& per_image,
                            const std::vector<LimbCategory>& categories) {
  if (per_image.empty()) throw DataError("no per-image results to aggregate");
  const std::size_t num_limbs = per_image.front().verdicts.size();
  for (const PcpResult& r : per_image) {
    if (r.verdicts.size() != num_limbs) {
      throw ConfigError("per-image results disagree on limb count");
    }
  }

  EvalReport report;
  report.num_images = static_cast<int>(per_image.size());
  report.limb_rates.assign(num_limbs, 0.0);
  report.limb_valid.assign(num_limbs, 0);
  std::vector<int> limb_correct(num_limbs, 0);
  for (const PcpResult& r : per_image) {
    for (std::size_t l = 0; l < num_limbs; ++l) {
      if (r.verdicts[l] == LimbVerdict::kInvalid) continue;
      ++report.limb_valid[l];
      if (r.verdicts[l] == LimbVerdict::kCorrect) ++limb_correct[l];
    }
  }
  for (std::size_t l = 0; l < num_limbs; ++l) {
    if (report.limb_valid[l] > 0) {
      report.limb_rates[l] =
          static_cast<double>(limb_correct[l]) / report.limb_valid[l];
    }
  }

  for (const LimbCategory& cat : categories) {
    double sum = 0.0;
    int counted = 0;
    for (int l : cat.limbs) {
      if (l < 0 || l >= static_cast<int>(num_limbs)) {
        throw ConfigError("category '" + cat.name +
                          "' references a missing limb");
      }
      if (report.limb_valid[l] == 0) continue;
      sum += report.limb_rates[l];
      ++counted;
    }
    report.category_names.push_back(cat.name);
    report.category_rates.push_back(counted > 0 ? sum / counted : 0.0);
  }

  double total = 0.0;
  int counted = 0;
  for (std::size_t l = 0; l < num_limbs; ++l) {
    if (report.limb_valid[l] == 0) continue;
    total += report.limb_rates[l];
    ++counted;
  }
  report.mean_rate = counted > 0 ? total / counted : 0.0;
  return report;
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  std::vector<std::string> headers = report.category_names;
  headers.push_back("Mean");
  std::vector<double> values = report.category_rates;
  values.push_back(report.mean_rate);

  std::vector<std::string> cells;
  for (double v : values) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
    cells.emplace_back(buf);
  }
  for (std::size_t i = 0; i < headers.size(); ++i) {
    const std::size_t width = std::max(headers[i].size(), cells[i].size());
    out << (i ? "  " : "") << std::string(width - headers[i].size(), ' ')
        << headers[i];
  }
  out << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::size_t width = std::max(headers[i].size(), cells[i].size());
    out << (i ? "  " : "") << std::string(width - cells[i].size(), ' ')
        << cells[i];
  }
  out << '\n';
  return out.str();
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::json j;
  j["num_images"] = report.num_images;
  j["mean_pcp"] = 100.0 * report.mean_rate;
  nlohmann::json cats = nlohmann::json::object();
  for (std::size_t c = 0; c < report.category_names.size(); ++c) {
    cats[report.category_names[c]] = 100.0 * report.category_rates[c];
  }
  j["categories"] = cats;
  j["limb_rates"] = report.limb_rates;
  j["limb_valid"] = report.limb_valid;
  return j.dump(2);
}

std::string pdj_to_csv(const PdjCurve& curve,
                       const std::vector<std::string>& joint_names) {
  if (!curve.rates.empty() &&
      joint_names.size() != curve.rates.front().size()) {
    throw ConfigError("joint name count does not match PDJ columns");
  }
  std::ostringstream out;
  out << "threshold";
  for (const std::string& name : joint_names) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < curve.thresholds.size(); ++t) {
    out << curve.thresholds[t];
    for (double r : curve.rates[t]) out << ',' << r;
    out << '\n';
  }
  return out.str();
}

}  // namespace idpr
