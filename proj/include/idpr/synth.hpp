#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "idpr/dataset.hpp"

namespace idpr {

// Chain-skeleton stick figures: part i+1 hangs off part i at one of the
// planted angular modes for that limb. Limbs render as textured bright
// segments, joints as discs of per-part intensity, over a noisy background
// with optional distractor discs. Everything is driven by per-instance
// seeds derived from `seed`, so the dataset is byte-identical across runs
// and thread counts.
struct SynthConfig {
  int num_positives = 100;
  int num_negatives = 20;
  int width = 24;
  int height = 24;
  int num_parts = 4;
  std::vector<double> limb_lengths;                // per edge (i, i+1)
  std::vector<std::vector<double>> angle_modes_deg;  // planted modes per edge
  double angle_jitter_deg = 5.0;  // spread around the chosen mode
  double limb_width = 1.2;
  double limb_texture = 0.25;   // ripple amplitude along each limb
  double joint_disc_radius = 1.0;
  double noise_level = 0.05;    // background noise amplitude
  int num_distractors = 2;      // random background discs
  std::uint64_t seed = 0;
};

// Positives carry ground-truth poses (in bounds by construction) and a
// torso box around the first limb; negatives are background-only.
std::pair<std::vector<AnnotatedImage>, std::vector<AnnotatedImage>>
synth_stickfigures(const SynthConfig& config);

// The chain graph the generator's poses live on: edges (i, i+1), root 0.
PartGraph synth_graph(int num_parts);

}  // namespace idpr
