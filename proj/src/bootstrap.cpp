#include "psyprobe/bootstrap.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "psyprobe/error.hpp"
#include "psyprobe/rng.hpp"

namespace psyprobe {

void BootstrapPlan::validate() const {
  if (replicate_count < 1) {
    fail(ErrorCode::ConfigError, "replicate_count must be >= 1");
  }
  if (!(lambda > 0.0)) fail(ErrorCode::ConfigError, "lambda must be positive");
}

long poisson_resample_stream(std::istream& in, std::ostream& out,
                             std::uint64_t seed, double lambda) {
  Rng rng(seed);
  std::string line;
  long lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    const int k = rng.poisson(lambda);
    for (int i = 0; i < k; ++i) {
      out << line << '\n';
    }
  }
  return lines;
}

std::vector<std::string> make_replicates(const std::string& corpus_path,
                                         const std::string& out_dir,
                                         const BootstrapPlan& plan) {
  plan.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::string> paths;
  paths.reserve(plan.replicate_count);
  for (int i = 0; i < plan.replicate_count; ++i) {
    std::ifstream in(corpus_path);
    if (!in) fail(ErrorCode::IoError, "cannot open corpus '" + corpus_path + "'");
    char name[32];
    std::snprintf(name, sizeof(name), "replicate_%02d.txt", i);
    const std::string path = (std::filesystem::path(out_dir) / name).string();
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write replicate '" + path + "'");
    poisson_resample_stream(in, out, plan.seed + static_cast<std::uint64_t>(i),
                            plan.lambda);
    if (!out) fail(ErrorCode::IoError, "short write to '" + path + "'");
    paths.push_back(path);
  }
  return paths;
}

}  // namespace psyprobe
