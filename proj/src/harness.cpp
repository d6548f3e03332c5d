#include "linearcl/harness.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace linearcl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("config: bad number for " + key + ": '" + s + "'");
  return v;
}

long to_long(const std::string& s, const std::string& key) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("config: bad integer for " + key + ": '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Hyper ExperimentConfig::hyper() const {
  Hyper h;
  h.lr = lr;
  h.max_iters = max_iters;
  h.grad_tol = grad_tol;
  h.mem_per_task = components;
  h.pca_samples = pca_samples;
  h.refresh_gem_gradients = refresh_gem_gradients;
  return h;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "generator.name=" << generator.name << "\n"
     << "generator.tasks=" << generator.tasks << "\n"
     << "generator.samples=" << generator.samples << "\n"
     << "generator.dim=" << generator.dim << "\n"
     << "generator.decay=" << format_double(generator.decay) << "\n"
     << "generator.degrees_per_task=" << format_double(generator.degrees_per_task) << "\n"
     << "generator.loc_x=" << format_double(generator.loc_x) << "\n"
     << "generator.scale_x=" << format_double(generator.scale_x) << "\n"
     << "generator.loc_w=" << format_double(generator.loc_w) << "\n"
     << "generator.scale_w=" << format_double(generator.scale_w) << "\n"
     << "generator.noise_scale=" << format_double(generator.noise_scale) << "\n"
     << "generator.path=" << generator.path << "\n"
     << "generator.classes=" << generator.classes << "\n"
     << "generator.map=" << generator.map << "\n"
     << "generator.map_dim=" << generator.map_dim << "\n"
     << "generator.map_seed=" << generator.map_seed << "\n";
  os << "methods=";
  for (std::size_t i = 0; i < methods.size(); ++i)
    os << (i ? "," : "") << to_string(methods[i]);
  os << "\nseeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
  os << "\nlambda=" << format_double(lambda) << "\nlr=" << format_double(lr)
     << "\nmax_iters=" << max_iters << "\ngrad_tol=" << format_double(grad_tol)
     << "\ncomponents=" << components << "\npca_samples=" << pca_samples << "\nmemories=";
  for (std::size_t i = 0; i < memories.size(); ++i) os << (i ? "," : "") << memories[i];
  os << "\niterative_check=" << iterative_check << "\nnormalize_drift=" << normalize_drift
     << "\nrefresh_gem_gradients=" << refresh_gem_gradients << "\nanalyses=";
  bool first = true;
  for (const std::string& a : analyses) {
    os << (first ? "" : ",") << a;
    first = false;
  }
  os << "\npairs=" << pairs << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> known_generators = {
      "gaussian_linear", "spectrum_controlled", "rotated", "permuted", "csv"};
  if (known_generators.find(generator.name) == known_generators.end())
    throw std::invalid_argument("config: unknown generator " + generator.name);
  if (generator.name == "csv" && generator.path.empty())
    throw std::invalid_argument("config: csv generator needs a path");
  if (methods.empty()) throw std::invalid_argument("config: no methods listed");
  if (seeds.empty()) throw std::invalid_argument("config: no seeds listed");
  if (lambda < 0.0) throw std::invalid_argument("config: lambda must be >= 0");
  const bool needs_closed_form =
      analyses.count("cf") > 0 || analyses.count("bounds") > 0 || analyses.count("spectra") > 0;
  bool any_closed = false;
  for (Method m : methods) any_closed = any_closed || m != Method::a_gem;
  if (needs_closed_form && any_closed && !(lambda > 0.0))
    throw std::invalid_argument("config: closed-form analyses require lambda > 0");
  for (const std::string& a : analyses)
    if (a != "cf" && a != "bounds" && a != "spectra" && a != "metrics")
      throw std::invalid_argument("config: unknown analysis " + a);
  if (pairs != "all" && pairs != "from_first")
    throw std::invalid_argument("config: pairs must be all or from_first");
  if (components < 0) throw std::invalid_argument("config: components must be >= 0");
  if (pca_samples < 1) throw std::invalid_argument("config: pca_samples must be >= 1");
  parse_map_kind(generator.map);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string::size_type hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " + std::to_string(line_no));
      section = line.substr(1, line.size() - 2);
      if (section != "generator" && section != "hyper" && section != "analysis" &&
          section != "output")
        throw std::invalid_argument("config: unknown section [" + section + "]");
      continue;
    }
    const std::string::size_type eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (section == "generator") {
      if (key == "name") cfg.generator.name = value;
      else if (key == "tasks") cfg.generator.tasks = static_cast<int>(to_long(value, key));
      else if (key == "samples") cfg.generator.samples = static_cast<int>(to_long(value, key));
      else if (key == "dim") cfg.generator.dim = static_cast<int>(to_long(value, key));
      else if (key == "decay") cfg.generator.decay = to_double(value, key);
      else if (key == "degrees_per_task") cfg.generator.degrees_per_task = to_double(value, key);
      else if (key == "loc_x") cfg.generator.loc_x = to_double(value, key);
      else if (key == "scale_x") cfg.generator.scale_x = to_double(value, key);
      else if (key == "loc_w") cfg.generator.loc_w = to_double(value, key);
      else if (key == "scale_w") cfg.generator.scale_w = to_double(value, key);
      else if (key == "noise_scale") cfg.generator.noise_scale = to_double(value, key);
      else if (key == "path") cfg.generator.path = value;
      else if (key == "classes") cfg.generator.classes = static_cast<int>(to_long(value, key));
      else if (key == "map") cfg.generator.map = value;
      else if (key == "map_dim") cfg.generator.map_dim = static_cast<int>(to_long(value, key));
      else if (key == "map_seed")
        cfg.generator.map_seed = static_cast<std::uint64_t>(to_long(value, key));
      else throw std::invalid_argument("config: unknown key " + key + " in [generator]");
    } else if (section == "hyper") {
      if (key == "lambda") cfg.lambda = to_double(value, key);
      else if (key == "lr") cfg.lr = to_double(value, key);
      else if (key == "max_iters") cfg.max_iters = static_cast<int>(to_long(value, key));
      else if (key == "grad_tol") cfg.grad_tol = to_double(value, key);
      else if (key == "components") cfg.components = static_cast<int>(to_long(value, key));
      else if (key == "pca_samples") cfg.pca_samples = static_cast<int>(to_long(value, key));
      else if (key == "memories") {
        cfg.memories.clear();
        for (const std::string& tok : split(value, ','))
          cfg.memories.push_back(static_cast<int>(to_long(trim(tok), key)));
      } else if (key == "methods") {
        cfg.methods.clear();
        for (const std::string& tok : split(value, ',')) cfg.methods.push_back(parse_method(trim(tok)));
      } else if (key == "seeds") {
        cfg.seeds.clear();
        for (const std::string& tok : split(value, ','))
          cfg.seeds.push_back(static_cast<std::uint64_t>(to_long(trim(tok), key)));
      } else if (key == "iterative_check") cfg.iterative_check = to_bool(value, key);
      else if (key == "normalize_drift") cfg.normalize_drift = to_bool(value, key);
      else if (key == "refresh_gem_gradients") cfg.refresh_gem_gradients = to_bool(value, key);
      else throw std::invalid_argument("config: unknown key " + key + " in [hyper]");
    } else if (section == "analysis") {
      if (key == "run") {
        cfg.analyses.clear();
        for (const std::string& tok : split(value, ',')) cfg.analyses.insert(trim(tok));
      } else if (key == "pairs") cfg.pairs = value;
      else throw std::invalid_argument("config: unknown key " + key + " in [analysis]");
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else throw std::invalid_argument("config: unknown key " + key + " in [output]");
    } else {
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(line_no));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

TaskSequence build_sequence(const GeneratorConfig& gen, std::uint64_t seed) {
  TaskSequence seq;
  if (gen.name == "gaussian_linear") {
    seq = gen_gaussian_linear(seed, gen.tasks, gen.samples, gen.dim, gen.loc_x, gen.scale_x,
                              gen.loc_w, gen.scale_w, gen.noise_scale);
  } else if (gen.name == "spectrum_controlled") {
    seq = gen_spectrum_controlled(seed, gen.tasks, gen.samples, gen.dim, gen.decay);
  } else if (gen.name == "rotated") {
    seq = gen_rotated(seed, gen.tasks, gen.samples, gen.dim, gen.degrees_per_task);
  } else if (gen.name == "permuted") {
    seq = gen_permuted(seed, gen.tasks, gen.samples, gen.dim);
  } else if (gen.name == "csv") {
    seq = load_csv(gen.path);
  } else {
    throw std::invalid_argument("unknown generator " + gen.name);
  }
  if (gen.classes > 0) seq = to_classification(seq, gen.classes);
  return seq;
}

FeatureMap build_feature_map(const GeneratorConfig& gen, int input_dim) {
  const MapKind kind = parse_map_kind(gen.map);
  const int param_dim = kind == MapKind::identity
                            ? input_dim
                            : (gen.map_dim > 0 ? gen.map_dim : input_dim);
  return FeatureMap::make(kind, input_dim, param_dim, gen.map_seed);
}

namespace {

CellResult run_cell(const ExperimentConfig& config, const TaskSequence& seq, Method method,
                    std::uint64_t seed) {
  CellResult cell;
  cell.method = method;
  cell.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const FeatureMap map = build_feature_map(config.generator, seq.input_dim());
    const EvalKind kind = seq.label_dim() == 1 ? EvalKind::neg_loss : EvalKind::accuracy;
    const TrainMode mode =
        method == Method::a_gem ? TrainMode::gradient_descent : TrainMode::closed_form;
    const Trajectory traj =
        train_sequence(method, map, seq, config.lambda, config.hyper(), seed, mode);
    cell.warnings = traj.warnings;

    if (config.iterative_check && method != Method::a_gem) {
      const Trajectory gd =
          train_sequence(method, map, seq, config.lambda, config.hyper(), seed,
                         TrainMode::gradient_descent);
      for (int tau = 1; tau <= seq.size(); ++tau) {
        const double ref = traj.optimum(tau).norm();
        const double err = (gd.optimum(tau) - traj.optimum(tau)).norm() / std::max(1.0, ref);
        cell.iterative_max_rel_error = std::max(cell.iterative_max_rel_error, err);
      }
    }

    cell.evals = EvalMatrix::empty(seq.size(), kind);
    for (int l = 1; l <= seq.size(); ++l) {
      Weights w = Weights::zeros(map.param_dim(), seq.label_dim());
      w.values = traj.optimum(l);
      for (int tau = 1; tau <= l; ++tau)
        cell.evals.at(l, tau) = evaluate(map, w, seq.task(tau), kind);
    }

    if (config.analyses.count("cf") > 0 || config.analyses.count("bounds") > 0) {
      const ForgettingAnalyzer analyzer(map, seq, traj, config.normalize_drift);
      for (int tau_s = 1; tau_s <= seq.size(); ++tau_s) {
        if (config.pairs == "from_first" && tau_s != 1) break;
        for (int tau_t = tau_s + 1; tau_t <= seq.size(); ++tau_t)
          cell.records.push_back(analyzer.record(tau_s, tau_t));
      }
      cell.warnings.insert(cell.warnings.end(), analyzer.warnings().begin(),
                           analyzer.warnings().end());
    }

    if (config.analyses.count("spectra") > 0 && seq.size() >= 2)
      cell.spectrum = spectrum_report(method, map, seq, config.memories, config.lambda,
                                      config.hyper(), seed);

    if (config.analyses.count("metrics") > 0) {
      MetricSummary m;
      m.average = average_accuracy(cell.evals);
      m.forgetting = seq.size() >= 2 ? forgetting_measure(cell.evals)
                                     : std::numeric_limits<double>::quiet_NaN();
      cell.metrics = m;
    }
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           start)
                     .count();
  return cell;
}

}  // namespace

std::vector<CellResult> run_cells(const ExperimentConfig& config) {
  config.validate();

  // One sequence per seed, shared read-only across the method cells.
  std::vector<TaskSequence> sequences;
  sequences.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) sequences.push_back(build_sequence(config.generator, seed));

  struct Cell {
    Method method;
    std::size_t seed_idx;
  };
  std::vector<Cell> cells;
  for (Method m : config.methods)
    for (std::size_t i = 0; i < config.seeds.size(); ++i) cells.push_back({m, i});

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        results[i] = run_cell(config, sequences[cells[i].seed_idx], cells[i].method,
                              config.seeds[cells[i].seed_idx]);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  return results;
}

namespace {

std::string join_values(const Vector& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v(i));
  }
  return out;
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
  const std::vector<CellResult> results = run_cells(config);
  const std::string hash = config.hash();
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(config.out_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name + " under " + config.out_dir);
    return out;
  };

  std::ofstream runs = open("runs.csv");
  runs << "config_hash,method,seed,after_task,task,kind,value\n";
  std::ofstream drift = open("drift.csv");
  drift << "config_hash,method,seed,tau_s,tau_t,cf,cf_closed_form,bound,overlap_top,"
           "overlap_singulars\n";
  std::ofstream spectrum = open("spectrum.csv");
  spectrum << "config_hash,method,seed,memory,index,singular_value\n";
  std::ofstream metrics = open("metrics.csv");
  metrics << "config_hash,method,seed,kind,average,forgetting\n";
  std::ofstream failures = open("failures.csv");
  failures << "config_hash,method,seed,error\n";
  std::ofstream meta = open("meta.txt");
  meta << "# run metadata (not covered by the determinism contract)\n" << config.canonical();

  for (const CellResult& cell : results) {
    const std::string prefix = hash + "," + to_string(cell.method) + "," +
                               std::to_string(cell.seed);
    meta << "cell " << to_string(cell.method) << " seed " << cell.seed << ": "
         << format_double(cell.wall_ms) << " ms";
    if (config.iterative_check && !cell.failed)
      meta << ", iterative check max rel error " << format_double(cell.iterative_max_rel_error);
    meta << "\n";
    for (const std::string& w : cell.warnings) meta << "  warning: " << w << "\n";

    if (cell.failed) {
      std::string sanitized = cell.error;
      for (char& ch : sanitized)
        if (ch == ',' || ch == '\n') ch = ';';
      failures << prefix << "," << sanitized << "\n";
      continue;
    }
    for (int l = 1; l <= cell.evals.tasks(); ++l)
      for (int tau = 1; tau <= l; ++tau)
        runs << prefix << "," << l << "," << tau << "," << to_string(cell.evals.kind) << ","
             << format_double(cell.evals.at(l, tau)) << "\n";
    for (const DriftRecord& rec : cell.records) {
      const Vector& top_spectrum = rec.overlap_singulars.at(rec.target);
      drift << prefix << "," << rec.source << "," << rec.target << "," << format_double(rec.cf)
            << "," << format_double(rec.cf_closed_form) << "," << format_double(rec.bound) << ","
            << format_double(top_spectrum.size() > 0 ? top_spectrum(0) : 0.0) << ","
            << join_values(top_spectrum) << "\n";
    }
    for (const SpectrumRow& row : cell.spectrum)
      spectrum << prefix << "," << row.memory << "," << row.index << ","
               << format_double(row.singular_value) << "\n";
    if (cell.metrics)
      metrics << prefix << "," << to_string(cell.evals.kind) << ","
              << format_double(cell.metrics->average) << ","
              << format_double(cell.metrics->forgetting) << "\n";
  }
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split(trim(line), ',');
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split(trim(line), ',');
    if (cells.size() != table.header.size())
      throw std::invalid_argument(path + ": row with " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

int column(const CsvTable& t, const std::string& name, const std::string& path) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return static_cast<int>(i);
  throw std::invalid_argument(path + ": missing column " + name);
}

}  // namespace

void compare_report(const std::string& dir) {
  namespace fs = std::filesystem;
  const CsvTable runs = read_csv((fs::path(dir) / "runs.csv").string());
  const CsvTable drifts = read_csv((fs::path(dir) / "drift.csv").string());

  const int r_hash = column(runs, "config_hash", "runs.csv");
  const int r_method = column(runs, "method", "runs.csv");
  const int r_seed = column(runs, "seed", "runs.csv");
  const int r_after = column(runs, "after_task", "runs.csv");
  const int r_task = column(runs, "task", "runs.csv");
  const int r_value = column(runs, "value", "runs.csv");

  std::string hash;
  std::map<std::string, double> eval;  // method|seed|after|task -> value
  for (const auto& row : runs.rows) {
    if (hash.empty()) hash = row[r_hash];
    if (row[r_hash] != hash)
      throw std::invalid_argument("compare: mixed config hashes in runs.csv");
    eval[row[r_method] + "|" + row[r_seed] + "|" + row[r_after] + "|" + row[r_task]] =
        to_double(row[r_value], "value");
  }

  const int d_hash = column(drifts, "config_hash", "drift.csv");
  const int d_method = column(drifts, "method", "drift.csv");
  const int d_seed = column(drifts, "seed", "drift.csv");
  const int d_s = column(drifts, "tau_s", "drift.csv");
  const int d_t = column(drifts, "tau_t", "drift.csv");
  const int d_cf = column(drifts, "cf", "drift.csv");
  const int d_cf_closed = column(drifts, "cf_closed_form", "drift.csv");
  const int d_bound = column(drifts, "bound", "drift.csv");
  const int d_top = column(drifts, "overlap_top", "drift.csv");

  std::ofstream out(fs::path(dir) / "compare.csv", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write compare.csv under " + dir);
  out << "config_hash,method,seed,tau_s,tau_t,cf,cf_closed_form,bound,max_overlap_eigenvalue,"
         "drop\n";
  for (const auto& row : drifts.rows) {
    if (!hash.empty() && row[d_hash] != hash)
      throw std::invalid_argument("compare: drift.csv hash differs from runs.csv");
    const std::string own =
        row[d_method] + "|" + row[d_seed] + "|" + row[d_s] + "|" + row[d_s];
    const std::string later =
        row[d_method] + "|" + row[d_seed] + "|" + row[d_t] + "|" + row[d_s];
    const auto a = eval.find(own);
    const auto b = eval.find(later);
    const double drop = (a != eval.end() && b != eval.end())
                            ? a->second - b->second
                            : std::numeric_limits<double>::quiet_NaN();
    out << row[d_hash] << "," << row[d_method] << "," << row[d_seed] << "," << row[d_s] << ","
        << row[d_t] << "," << row[d_cf] << "," << row[d_cf_closed] << "," << row[d_bound] << ","
        << row[d_top] << "," << format_double(drop) << "\n";
  }
}

std::vector<std::pair<std::string, MetricSummary>> metrics_from_runs_csv(const std::string& path) {
  const CsvTable runs = read_csv(path);
  const int r_method = column(runs, "method", path);
  const int r_seed = column(runs, "seed", path);
  const int r_after = column(runs, "after_task", path);
  const int r_task = column(runs, "task", path);
  const int r_kind = column(runs, "kind", path);
  const int r_value = column(runs, "value", path);

  struct Entry {
    int after;
    int task;
    double value;
    EvalKind kind;
  };
  std::map<std::string, std::vector<Entry>> groups;
  for (const auto& row : runs.rows) {
    groups[row[r_method] + "/" + row[r_seed]].push_back(
        {static_cast<int>(to_long(row[r_after], "after_task")),
         static_cast<int>(to_long(row[r_task], "task")), to_double(row[r_value], "value"),
         parse_eval_kind(row[r_kind])});
  }

  std::vector<std::pair<std::string, MetricSummary>> out;
  for (const auto& [label, entries] : groups) {
    int tasks = 0;
    for (const Entry& e : entries) tasks = std::max(tasks, e.after);
    EvalMatrix m = EvalMatrix::empty(tasks, entries.front().kind);
    for (const Entry& e : entries) m.at(e.after, e.task) = e.value;
    MetricSummary summary;
    summary.average = average_accuracy(m);
    summary.forgetting =
        tasks >= 2 ? forgetting_measure(m) : std::numeric_limits<double>::quiet_NaN();
    out.emplace_back(label, summary);
  }
  return out;
}

}  // namespace linearcl
