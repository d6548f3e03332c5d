#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "linearcl/harness.hpp"

using namespace linearcl;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSmallConfig = R"(
# two-task smoke grid
[generator]
name = spectrum_controlled
tasks = 2
samples = 12
dim = 6
decay = 0.5

[hyper]
lambda = 0.01
methods = sgd
seeds = 0
components = 2

[analysis]
run = cf,bounds,metrics

[output]
dir = OUTDIR
)";

std::string config_with_dir(const std::string& text, const fs::path& dir) {
  std::string out = text;
  const std::string key = "OUTDIR";
  out.replace(out.find(key), key.size(), dir.string());
  return out;
}

int count_rows(const fs::path& file) {
  std::ifstream in(file);
  std::string line;
  int rows = -1;  // skip header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  return rows;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("round trip of a full config") {
    const ExperimentConfig cfg = parse_config_text(config_with_dir(kSmallConfig, "out"));
    CHECK(cfg.generator.name == "spectrum_controlled");
    CHECK(cfg.generator.tasks == 2);
    CHECK(cfg.methods.size() == 1);
    CHECK(cfg.lambda == doctest::Approx(0.01));
    CHECK(cfg.analyses.count("cf") == 1);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_WITH_AS(parse_config_text("[hyper]\nbogus = 1\n"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("[nope]\n"), doctest::Contains("unknown section"),
                         std::invalid_argument);
  }
  SUBCASE("closed-form analyses demand positive lambda") {
    std::string text = "[hyper]\nlambda = 0\nmethods = sgd\nseeds = 0\n[analysis]\nrun = cf\n";
    CHECK_THROWS_AS(parse_config_text(text), std::invalid_argument);
  }
  SUBCASE("hash is stable and value-sensitive") {
    const ExperimentConfig a = parse_config_text(config_with_dir(kSmallConfig, "out"));
    ExperimentConfig b = a;
    CHECK(a.hash() == b.hash());
    b.lambda = 0.02;
    CHECK(a.hash() != b.hash());
  }
}

TEST_CASE("run_experiment writes one record per cell and pair") {
  TempDir dir("linearcl_run_small");
  const ExperimentConfig cfg = parse_config_text(config_with_dir(kSmallConfig, dir.path));
  run_experiment(cfg);
  CHECK(count_rows(dir.path / "runs.csv") == 3);   // a11, a21, a22
  CHECK(count_rows(dir.path / "drift.csv") == 1);  // single (1, 2) record
  CHECK(count_rows(dir.path / "failures.csv") == 0);
  CHECK(count_rows(dir.path / "metrics.csv") == 1);
}

TEST_CASE("identical configs produce byte-identical CSV bodies") {
  TempDir a("linearcl_det_run_a");
  TempDir b("linearcl_det_run_b");
  std::string text = R"(
[generator]
name = gaussian_linear
tasks = 3
samples = 10
dim = 5
noise_scale = 0.2

[hyper]
lambda = 0.05
methods = sgd,ogd,pca_ogd,gem_nt
seeds = 0,1
components = 2
memories = 0,2,4

[analysis]
run = cf,bounds,spectra,metrics
)";
  ExperimentConfig cfg_a = parse_config_text(text);
  ExperimentConfig cfg_b = cfg_a;
  cfg_a.out_dir = a.path.string();
  cfg_b.out_dir = b.path.string();
  run_experiment(cfg_a);
  run_experiment(cfg_b);
  for (const char* name : {"runs.csv", "drift.csv", "spectrum.csv", "metrics.csv",
                           "failures.csv"})
    CHECK(slurp(a.path / name) == slurp(b.path / name));
}

TEST_CASE("failing cells are isolated") {
  TempDir dir("linearcl_failures");
  // a_gem trains iteratively and the huge learning rate violates the bound;
  // the sgd cell runs closed-form and is unaffected.
  std::string text = R"(
[generator]
name = gaussian_linear
tasks = 2
samples = 8
dim = 4

[hyper]
lambda = 0.01
lr = 1000000
methods = sgd,a_gem
seeds = 0
components = 1

[analysis]
run = cf,metrics
)";
  ExperimentConfig cfg = parse_config_text(text);
  cfg.out_dir = dir.path.string();
  run_experiment(cfg);
  CHECK(count_rows(dir.path / "failures.csv") == 1);
  CHECK(count_rows(dir.path / "runs.csv") == 3);  // sgd rows survived
  const std::string failures = slurp(dir.path / "failures.csv");
  CHECK(failures.find("a_gem") != std::string::npos);
}

TEST_CASE("compare_report joins drops with drift records") {
  TempDir dir("linearcl_compare");
  std::string text = R"(
[generator]
name = spectrum_controlled
tasks = 3
samples = 16
dim = 8
decay = 0.5

[hyper]
lambda = 0.01
methods = sgd,pca_ogd
seeds = 0,1
components = 2

[analysis]
run = cf,bounds,metrics
)";
  ExperimentConfig cfg = parse_config_text(text);
  cfg.out_dir = dir.path.string();
  run_experiment(cfg);
  compare_report(dir.path.string());

  const std::string body = slurp(dir.path / "compare.csv");
  CHECK(body.find("max_overlap_eigenvalue") != std::string::npos);
  CHECK(count_rows(dir.path / "compare.csv") == count_rows(dir.path / "drift.csv"));

  // Drop column: performance of tau_s at its own end minus at tau_t's end.
  const auto runs = metrics_from_runs_csv((dir.path / "runs.csv").string());
  CHECK(runs.size() == 4);  // 2 methods x 2 seeds

  // Bound dominance holds row-wise in the emitted CSV.
  std::ifstream in(dir.path / "compare.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    cells.push_back(cur);
    const double cf = std::stod(cells[5]);
    const double closed = std::stod(cells[6]);
    const double bound = std::stod(cells[7]);
    CHECK(cf <= bound + 1e-8 * (1.0 + bound));
    CHECK(std::abs(cf - closed) <= 1e-6 * (1.0 + std::max(cf, closed)));
    ++rows;
  }
  CHECK(rows >= 1);
}

TEST_CASE("compare_report rejects mixed config hashes") {
  TempDir dir("linearcl_mixed");
  std::ofstream runs(dir.path / "runs.csv");
  runs << "config_hash,method,seed,after_task,task,kind,value\n"
       << "aaaa,sgd,0,1,1,neg_loss,-1\n"
       << "bbbb,sgd,0,2,1,neg_loss,-2\n";
  runs.close();
  std::ofstream drift(dir.path / "drift.csv");
  drift << "config_hash,method,seed,tau_s,tau_t,cf,cf_closed_form,bound,overlap_top,"
           "overlap_singulars\n";
  drift.close();
  CHECK_THROWS_AS(compare_report(dir.path.string()), std::invalid_argument);
}

TEST_CASE("iterative cross-check agrees with the closed form") {
  TempDir dir("linearcl_itcheck");
  std::string text = R"(
[generator]
name = gaussian_linear
tasks = 2
samples = 16
dim = 4

[hyper]
lambda = 0.1
lr = 0.005
grad_tol = 1e-12
methods = ogd
seeds = 0
components = 1
iterative_check = true

[analysis]
run = metrics
)";
  ExperimentConfig cfg = parse_config_text(text);
  cfg.out_dir = dir.path.string();
  const auto cells = run_cells(cfg);
  REQUIRE(cells.size() == 1);
  REQUIRE_FALSE(cells[0].failed);
  CHECK(cells[0].iterative_max_rel_error <= 1e-6);
}
