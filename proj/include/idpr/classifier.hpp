#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "idpr/image.hpp"
#include "idpr/patch.hpp"
#include "idpr/space_index.hpp"

namespace idpr {

struct ClassifierConfig {
  int patch_side = 36;
  PatchFeatureConfig features;
  int hidden_units = 64;
  int epochs = 30;
  double learning_rate = 0.1;
  double lr_decay = 0.05;  // lr_e = learning_rate / (1 + lr_decay * epoch)
  int batch_size = 32;
  double validation_fraction = 0.1;
};

// One-hidden-layer softmax network over patch features. The output layer
// starts at zero, so an untrained classifier predicts the uniform
// distribution over all labels.
class PatchClassifier {
public:
  struct Params {
    int input_dim = 0;
    int hidden = 0;
    int classes = 0;
    std::vector<double> w1;  // hidden x input, row-major
    std::vector<double> b1;
    std::vector<double> w2;  // classes x hidden, row-major
    std::vector<double> b2;
  };

  PatchClassifier() = default;
  PatchClassifier(ClassifierConfig config, Params params);

  const ClassifierConfig& config() const { return config_; }
  const Params& params() const { return params_; }
  int num_classes() const { return params_.classes; }
  int input_dim() const { return params_.input_dim; }

  // Softmax probabilities for a feature vector of input_dim entries.
  std::vector<double> predict_features(std::span<const double> features) const;

private:
  ClassifierConfig config_;
  Params params_;
};

// Probability vector over the label space for one patch; the patch side
// must match the classifier's configuration.
std::vector<double> predict_distribution(const PatchClassifier& classifier,
                                         const Image& patch);

// Seeded SGD with softmax cross-entropy; keeps the epoch checkpoint with
// the lowest training loss. A validation_fraction share of the examples is
// held out to report generalization, the rest trains.
PatchClassifier train_patch_classifier(
    const std::vector<std::pair<Image, PatchLabel>>& examples,
    const SpaceIndex& space, const ClassifierConfig& config,
    std::uint64_t seed);

}  // namespace idpr
