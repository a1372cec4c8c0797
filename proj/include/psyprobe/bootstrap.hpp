#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace psyprobe {

struct BootstrapPlan {
  int replicate_count = 32;
  std::uint64_t seed = 0;
  double lambda = 1.0;

  void validate() const;  // replicate_count >= 1, lambda > 0
};

// Emit each input line k times, k ~ Poisson(lambda), independently per line.
// Streaming: memory use is independent of corpus size. Deterministic for a
// fixed seed. Returns the number of input lines read.
long poisson_resample_stream(std::istream& in, std::ostream& out,
                             std::uint64_t seed, double lambda = 1.0);

// Write plan.replicate_count resampled copies of the corpus into out_dir as
// replicate_00.txt, replicate_01.txt, ... Replicate i uses seed plan.seed + i,
// so each one is reproducible in isolation. Returns the output paths.
std::vector<std::string> make_replicates(const std::string& corpus_path,
                                         const std::string& out_dir,
                                         const BootstrapPlan& plan);

}  // namespace psyprobe
