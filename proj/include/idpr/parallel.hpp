#pragma once

namespace idpr {

// Which path a kernel runs on. Serial is the reference implementation the
// tests compare against; Parallel is the OpenMP version. Both produce
// bit-identical output.
enum class Exec {
  kSerial,
  kParallel,
};

// Caps the number of OpenMP workers. 0 restores the hardware default.
void set_max_jobs(int jobs);
int max_jobs();

}  // namespace idpr
