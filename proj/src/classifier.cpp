#include "idpr/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "idpr/error.hpp"
#include "idpr/rng.hpp"

namespace idpr {

namespace {

void softmax_inplace(std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : logits) v /= total;
}

void forward(const PatchClassifier::Params& p, std::span<const double> x,
             std::vector<double>& hidden, std::vector<double>& probs) {
  hidden.assign(p.hidden, 0.0);
  for (int h = 0; h < p.hidden; ++h) {
    const double* row = p.w1.data() + static_cast<std::size_t>(h) * p.input_dim;
    double z = p.b1[h];
    for (int i = 0; i < p.input_dim; ++i) z += row[i] * x[i];
    hidden[h] = z > 0.0 ? z : 0.0;
  }
  probs.assign(p.classes, 0.0);
  for (int c = 0; c < p.classes; ++c) {
    const double* row = p.w2.data() + static_cast<std::size_t>(c) * p.hidden;
    double z = p.b2[c];
    for (int h = 0; h < p.hidden; ++h) z += row[h] * hidden[h];
    probs[c] = z;
  }
  softmax_inplace(probs);
}

double mean_cross_entropy(const PatchClassifier::Params& p,
                          const std::vector<std::vector<double>>& xs,
                          const std::vector<int>& ys,
                          const std::vector<int>& subset) {
  if (subset.empty()) return 0.0;
  std::vector<double> hidden, probs;
  double total = 0.0;
  for (int n : subset) {
    forward(p, xs[n], hidden, probs);
    total += -std::log(std::max(probs[ys[n]], 1e-12));
  }
  return total / static_cast<double>(subset.size());
}

}  // namespace

PatchClassifier::PatchClassifier(ClassifierConfig config, Params params)
    : config_(std::move(config)), params_(std::move(params)) {
  if (params_.input_dim != feature_dim(config_.features, config_.patch_side)) {
    throw ConfigError("classifier input dimension does not match the patch "
                      "feature configuration");
  }
  const std::size_t h = static_cast<std::size_t>(params_.hidden);
  const std::size_t d = static_cast<std::size_t>(params_.input_dim);
  const std::size_t c = static_cast<std::size_t>(params_.classes);
  if (params_.hidden < 1 || params_.classes < 1 ||
      params_.w1.size() != h * d || params_.b1.size() != h ||
      params_.w2.size() != c * h || params_.b2.size() != c) {
    throw ConfigError("classifier parameter block has inconsistent shapes");
  }
}

std::vector<double> PatchClassifier::predict_features(
    std::span<const double> features) const {
  if (static_cast<int>(features.size()) != params_.input_dim) {
    throw ConfigError("feature vector has " + std::to_string(features.size()) +
                      " entries, classifier expects " +
                      std::to_string(params_.input_dim));
  }
  std::vector<double> hidden, probs;
  forward(params_, features, hidden, probs);
  return probs;
}

std::vector<double> predict_distribution(const PatchClassifier& classifier,
                                         const Image& patch) {
  if (patch.width() != classifier.config().patch_side ||
      patch.height() != classifier.config().patch_side) {
    throw ConfigError("patch is " + std::to_string(patch.width()) + "x" +
                      std::to_string(patch.height()) + ", classifier expects " +
                      std::to_string(classifier.config().patch_side));
  }
  const auto features = featurize_patch(patch, classifier.config().features);
  return classifier.predict_features(features);
}

PatchClassifier train_patch_classifier(
    const std::vector<std::pair<Image, PatchLabel>>& examples,
    const SpaceIndex& space, const ClassifierConfig& config,
    std::uint64_t seed) {
  if (examples.empty()) {
    throw DataError("cannot train a classifier on an empty example set");
  }
  if (config.hidden_units < 1 || config.epochs < 1 || config.batch_size < 1 ||
      config.learning_rate <= 0.0) {
    throw ConfigError("classifier hyperparameters out of range");
  }

  const int num_examples = static_cast<int>(examples.size());
  const int input_dim = feature_dim(config.features, config.patch_side);
  const int classes = space.flat_size();

  std::vector<std::vector<double>> xs(num_examples);
  std::vector<int> ys(num_examples);
  std::vector<int> class_seen(classes, 0);
  for (int n = 0; n < num_examples; ++n) {
    const auto& [patch, label] = examples[n];
    if (patch.width() != config.patch_side ||
        patch.height() != config.patch_side) {
      throw ConfigError("training patch does not match configured side");
    }
    xs[n] = featurize_patch(patch, config.features);
    ys[n] = space.encode(label);
    ++class_seen[ys[n]];
  }
  const int missing = static_cast<int>(
      std::count(class_seen.begin(), class_seen.end(), 0));
  if (missing > 0) {
    std::cerr << "warning: " << missing << " of " << classes
              << " classes have no training example\n";
  }

  Rng rng(seed);

  PatchClassifier::Params params;
  params.input_dim = input_dim;
  params.hidden = config.hidden_units;
  params.classes = classes;
  const double init_scale =
      std::sqrt(6.0 / (input_dim + config.hidden_units));
  params.w1.resize(static_cast<std::size_t>(params.hidden) * input_dim);
  for (double& w : params.w1) w = rng.uniform(-init_scale, init_scale);
  params.b1.assign(params.hidden, 0.0);
  // Zero output layer: the untrained classifier is exactly uniform.
  params.w2.assign(static_cast<std::size_t>(classes) * params.hidden, 0.0);
  params.b2.assign(classes, 0.0);

  std::vector<int> order(num_examples);
  std::iota(order.begin(), order.end(), 0);
  for (int n = num_examples - 1; n > 0; --n) {
    std::swap(order[n], order[rng.next_below(static_cast<std::uint64_t>(n + 1))]);
  }
  double vf = std::clamp(config.validation_fraction, 0.0, 0.5);
  int num_val = static_cast<int>(std::floor(num_examples * vf));
  std::vector<int> val_set(order.begin(), order.begin() + num_val);
  std::vector<int> train_set(order.begin() + num_val, order.end());
  if (train_set.empty()) {
    train_set = std::move(val_set);
    val_set.clear();
  }

  const double initial_val_loss =
      mean_cross_entropy(params, xs, ys, val_set.empty() ? train_set : val_set);

  PatchClassifier::Params best = params;
  double best_train_loss = mean_cross_entropy(params, xs, ys, train_set);

  std::vector<double> hidden, probs, delta_hidden;
  std::vector<double> gw1(params.w1.size()), gb1(params.b1.size());
  std::vector<double> gw2(params.w2.size()), gb2(params.b2.size());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.learning_rate / (1.0 + config.lr_decay * epoch);
    for (int n = static_cast<int>(train_set.size()) - 1; n > 0; --n) {
      std::swap(train_set[n],
                train_set[rng.next_below(static_cast<std::uint64_t>(n + 1))]);
    }
    for (std::size_t start = 0; start < train_set.size();
         start += config.batch_size) {
      const std::size_t stop =
          std::min(train_set.size(), start + config.batch_size);
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gb1.begin(), gb1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);
      std::fill(gb2.begin(), gb2.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const int n = train_set[b];
        forward(params, xs[n], hidden, probs);
        probs[ys[n]] -= 1.0;  // now the softmax-loss gradient
        delta_hidden.assign(params.hidden, 0.0);
        for (int c = 0; c < params.classes; ++c) {
          const double d2 = probs[c];
          if (d2 == 0.0) continue;
          double* gw2_row =
              gw2.data() + static_cast<std::size_t>(c) * params.hidden;
          const double* w2_row =
              params.w2.data() + static_cast<std::size_t>(c) * params.hidden;
          for (int h = 0; h < params.hidden; ++h) {
            gw2_row[h] += d2 * hidden[h];
            delta_hidden[h] += d2 * w2_row[h];
          }
          gb2[c] += d2;
        }
        for (int h = 0; h < params.hidden; ++h) {
          if (hidden[h] <= 0.0) continue;  // ReLU gate
          const double d1 = delta_hidden[h];
          double* gw1_row =
              gw1.data() + static_cast<std::size_t>(h) * params.input_dim;
          const auto& x = xs[n];
          for (int i = 0; i < params.input_dim; ++i) gw1_row[i] += d1 * x[i];
          gb1[h] += d1;
        }
      }
      const double step = lr / static_cast<double>(stop - start);
      for (std::size_t i = 0; i < params.w1.size(); ++i)
        params.w1[i] -= step * gw1[i];
      for (std::size_t i = 0; i < params.b1.size(); ++i)
        params.b1[i] -= step * gb1[i];
      for (std::size_t i = 0; i < params.w2.size(); ++i)
        params.w2[i] -= step * gw2[i];
      for (std::size_t i = 0; i < params.b2.size(); ++i)
        params.b2[i] -= step * gb2[i];
    }
    const double train_loss = mean_cross_entropy(params, xs, ys, train_set);
    if (train_loss < best_train_loss) {
      best_train_loss = train_loss;
      best = params;
    }
  }

  const double final_val_loss =
      mean_cross_entropy(best, xs, ys, val_set.empty() ? train_set : val_set);
  if (final_val_loss >= initial_val_loss) {
    std::cerr << "warning: held-out loss did not improve ("
              << initial_val_loss << " -> " << final_val_loss << ")\n";
  }

  return PatchClassifier(config, std::move(best));
}

}  // namespace idpr
