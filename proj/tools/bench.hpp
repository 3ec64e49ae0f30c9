#pragma once

#include <string>

namespace idpr::bench {

// Times exact inference across T x L x K sweeps, prints the table plus the
// scaling-ratio checks (warnings only; timings are environment-dependent),
// then compares the parallel kernels against their serial references.
// json_path, when non-empty, additionally receives the rows as JSON.
void run(const std::string& json_path, int repeats, bool quick);

}  // namespace idpr::bench
