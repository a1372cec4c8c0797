#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "psyprobe/commands.hpp"
#include "psyprobe/config.hpp"
#include "psyprobe/embedding.hpp"
#include "psyprobe/error.hpp"
#include "psyprobe/log.hpp"
#include "psyprobe/rng.hpp"

using namespace psyprobe;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / name;
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  TempDir dir("psyprobe_cli_config");

  SUBCASE("seed is mandatory") {
    write_file(dir.file("c.json"), R"({"output_dir": "out"})");
    const ErrorCode code =
        code_of([&] { load_experiment_config(dir.file("c.json")); });
    CHECK(code == ErrorCode::ConfigError);
    try {
      load_experiment_config(dir.file("c.json"));
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("seed") != std::string::npos);
    }
  }
  SUBCASE("missing file and bad json") {
    CHECK(code_of([&] { load_experiment_config(dir.file("absent.json")); }) ==
          ErrorCode::ConfigError);
    write_file(dir.file("bad.json"), "{nope");
    CHECK(code_of([&] { load_experiment_config(dir.file("bad.json")); }) ==
          ErrorCode::ConfigError);
  }
  SUBCASE("field errors carry the field path") {
    write_file(dir.file("c.json"),
               R"({"seed": 1, "output_dir": "o", "probe": {"cue_pairs": [{"cue1": "a"}]}})");
    try {
      load_experiment_config(dir.file("c.json"));
      CHECK(false);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("probe.cue_pairs[0]") != std::string::npos);
    }
  }
  SUBCASE("defaults and parsed values") {
    write_file(dir.file("c.json"), R"({
      "seed": 42, "output_dir": "o",
      "probe": {"granularity": "pooled", "family": "cumulative_normal",
                 "scoring": "mixed_vector_cosine"}
    })");
    const ExperimentConfig config = load_experiment_config(dir.file("c.json"));
    CHECK(config.seed == 42);
    CHECK(config.probe.pooled);
    CHECK(config.probe.family == PsyFamily::CumulativeNormal);
    CHECK(config.probe.scoring == ScoringMode::MixedVectorCosine);
    CHECK(config.bootstrap.lambda == 1.0);
    CHECK(config.resolved_alpha_grid().size() == 21);
    CHECK(config.config_hash.size() == 16);
  }
}

TEST_CASE("bootstrap command validates the corpus path") {
  TempDir dir("psyprobe_cli_boot");
  write_file(dir.file("c.json"), R"({"seed": 1, "output_dir": ")" +
                                     dir.file("out") + R"(", "corpus": ")" +
                                     dir.file("missing.txt") + R"("})");
  const ExperimentConfig config = load_experiment_config(dir.file("c.json"));
  try {
    cmd_bootstrap(config);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("corpus") != std::string::npos);
  }
}

TEST_CASE("probe command produces one bias row per pair x target") {
  TempDir dir("psyprobe_cli_probe");
  // four replicate tables with jittered cue/target geometry
  Rng rng(99);
  const std::string emb_dir = dir.file("embeddings");
  fs::create_directories(emb_dir);
  for (int r = 0; r < 4; ++r) {
    EmbeddingTable table(3);
    auto jitter = [&](double x, double y, double z) {
      return Vec{x + rng.uniform(-0.05, 0.05), y + rng.uniform(-0.05, 0.05),
                 z + rng.uniform(-0.05, 0.05)};
    };
    table.add("girl", jitter(1.0, 0.0, 0.0));
    table.add("boy", jitter(0.0, 1.0, 0.0));
    table.add("she", jitter(0.9, 0.1, 0.0));
    table.add("he", jitter(0.1, 0.9, 0.0));
    table.add("occ_a", jitter(0.8, 0.3, 0.1));
    table.add("occ_b", jitter(0.3, 0.8, 0.1));
    char name[32];
    std::snprintf(name, sizeof(name), "replicate_%02d.vec", r);
    save_embedding_file(table, (fs::path(emb_dir) / name).string());
  }
  write_file(dir.file("c.json"), R"({
    "seed": 5, "output_dir": ")" + dir.file("out") + R"(",
    "probe": {
      "cue_pairs": [{"cue1": "girl", "cue2": "boy"}, {"cue1": "she", "cue2": "he"}],
      "targets": ["occ_a", "occ_b"],
      "alpha_points": 21,
      "embedding_dir": ")" + emb_dir + R"("
    }
  })");
  const ExperimentConfig config = load_experiment_config(dir.file("c.json"));
  const auto outputs = cmd_probe(config);

  const std::string bias = read_file(dir.file("out") + "/probe/bias_reports.csv");
  // header + 2 pairs x 2 targets
  CHECK(std::count(bias.begin(), bias.end(), '\n') == 5);
  CHECK(bias.find("girl/boy,occ_a") != std::string::npos);
  CHECK(bias.find("she/he,occ_b") != std::string::npos);
  // manifest written and lists the outputs
  const std::string manifest = read_file(dir.file("out") + "/manifest_probe.json");
  CHECK(manifest.find("\"command\": \"probe\"") != std::string::npos);
  CHECK(manifest.find("bias_reports.csv") != std::string::npos);

  // targets biased toward their construction side
  std::istringstream rows(bias);
  std::string line;
  std::getline(rows, line);  // header
  while (std::getline(rows, line)) {
    if (line.find("occ_a") != std::string::npos) {
      CHECK(line.find("against_cue2") != std::string::npos);  // occ_a is cue1-like
    }
    if (line.find("occ_b") != std::string::npos) {
      CHECK(line.find("against_cue1") != std::string::npos);
    }
  }
}

TEST_CASE("probe cardinality at survey scale: 7 pairs x 10 targets x 32 replicates") {
  TempDir dir("psyprobe_cli_probe_scale");
  Rng rng(321);
  const std::string emb_dir = dir.file("embeddings");
  fs::create_directories(emb_dir);
  std::vector<std::string> cue_tokens = {"c1a", "c1b", "c2a", "c2b", "c3a", "c3b",
                                         "c4a", "c4b", "c5a", "c5b", "c6a", "c6b",
                                         "c7a", "c7b"};
  std::vector<std::string> targets;
  for (int t = 0; t < 10; ++t) targets.push_back("occ" + std::to_string(t));
  for (int r = 0; r < 32; ++r) {
    EmbeddingTable table(4);
    for (const std::string& tok : cue_tokens) {
      Vec v(4);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      table.add(tok, v);
    }
    for (const std::string& tok : targets) {
      Vec v(4);
      for (double& x : v) x = rng.uniform(-1.0, 1.0);
      table.add(tok, v);
    }
    char name[32];
    std::snprintf(name, sizeof(name), "replicate_%02d.vec", r);
    save_embedding_file(table, (fs::path(emb_dir) / name).string());
  }
  std::ostringstream pairs;
  for (int p = 0; p < 7; ++p) {
    pairs << (p ? "," : "") << R"({"cue1": "c)" << p + 1 << R"(a", "cue2": "c)" << p + 1
          << R"(b"})";
  }
  std::ostringstream target_list;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    target_list << (t ? "," : "") << '"' << targets[t] << '"';
  }
  write_file(dir.file("c.json"), R"({
    "seed": 9, "output_dir": ")" + dir.file("out") + R"(",
    "probe": {
      "cue_pairs": [)" + pairs.str() + R"(],
      "targets": [)" + target_list.str() + R"(],
      "alpha_points": 21,
      "embedding_dir": ")" + emb_dir + R"("
    }
  })");
  const ExperimentConfig config = load_experiment_config(dir.file("c.json"));
  cmd_probe(config);
  const std::string bias = read_file(dir.file("out") + "/probe/bias_reports.csv");
  // header + 7 x 10 rows
  CHECK(std::count(bias.begin(), bias.end(), '\n') == 71);
  CHECK(fs::exists(dir.file("out") + "/probe/scatter_pse_jnd.svg"));
  // one response CSV per combination, each with 32 x 21 records
  const std::string responses =
      read_file(dir.file("out") + "/probe/responses_c1a_c1b__occ0.csv");
  CHECK(std::count(responses.begin(), responses.end(), '\n') == 32 * 21 + 1);
}

TEST_CASE("command reruns are byte-identical") {
  TempDir dir("psyprobe_cli_detrm");
  std::ostringstream corpus;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    for (int w = 0; w < 6; ++w) {
      corpus << "tok" << rng.below(12) << (w + 1 < 6 ? ' ' : '\n');
    }
  }
  write_file(dir.file("corpus.txt"), corpus.str());
  write_file(dir.file("c.json"), R"({
    "seed": 2024, "output_dir": ")" + dir.file("out") + R"(",
    "corpus": ")" + dir.file("corpus.txt") + R"(",
    "bootstrap": {"replicates": 2},
    "embeddings": {"dim": 8, "epochs": 2, "min_token_count": 1}
  })");
  const ExperimentConfig config = load_experiment_config(dir.file("c.json"));
  cmd_bootstrap(config);
  cmd_train_embeddings(config, 2);
  const std::string rep0 = read_file(dir.file("out") + "/replicates/replicate_00.txt");
  const std::string vec0 = read_file(dir.file("out") + "/embeddings/replicate_00.vec");
  const std::string manifest = read_file(dir.file("out") + "/manifest_bootstrap.json");
  cmd_bootstrap(config);
  cmd_train_embeddings(config, 1);  // different job count, same bytes
  CHECK(read_file(dir.file("out") + "/replicates/replicate_00.txt") == rep0);
  CHECK(read_file(dir.file("out") + "/embeddings/replicate_00.vec") == vec0);
  CHECK(read_file(dir.file("out") + "/manifest_bootstrap.json") == manifest);
}

TEST_CASE("exit code classification") {
  CHECK(exit_code_for(Error(ErrorCode::ConfigError, "x")) == 2);
  CHECK(exit_code_for(Error(ErrorCode::IoError, "x")) == 3);
  CHECK(exit_code_for(Error(ErrorCode::MissingToken, "x")) == 3);
  CHECK(exit_code_for(Error(ErrorCode::DivergedLoss, "x")) == 4);
  CHECK(exit_code_for(Error(ErrorCode::AllOneClass, "x")) == 4);
  CHECK(exit_code_for(Error(ErrorCode::DivergentTrajectory, "x")) == 4);
}

TEST_CASE("atomic writes create parents and replace whole files") {
  TempDir dir("psyprobe_cli_atomic");
  const std::string path = dir.file("a/b/c.txt");
  write_text_atomic(path, "first");
  CHECK(read_file(path) == "first");
  write_text_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK_FALSE(fs::exists(path + ".tmp"));
}
