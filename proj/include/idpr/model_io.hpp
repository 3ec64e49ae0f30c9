#pragma once

#include <string>

#include "idpr/classifier.hpp"
#include "idpr/part_graph.hpp"
#include "idpr/relation_model.hpp"
#include "idpr/weights.hpp"

namespace idpr {

// Everything needed to run inference on a new image: the part tree, the
// learned relation types, the scoring weights, the patch classifier, and
// the stride its score maps were computed at.
struct Model {
  PartGraph graph;
  RelationModel relations;
  Weights weights;
  PatchClassifier classifier;
  int stride = 1;
};

// One human-readable JSON document; numbers are stored as decimal text
// that round-trips doubles exactly.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Classifier alone, in the same JSON dialect as the model file; used as a
// standalone stage checkpoint.
void save_classifier(const PatchClassifier& classifier,
                     const std::string& path);
PatchClassifier load_classifier(const std::string& path);

}  // namespace idpr
