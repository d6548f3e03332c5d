#include "linearcl/tasks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "linearcl/rng.hpp"

namespace linearcl {

namespace {

Matrix gaussian_matrix(SplitRng& rng, int rows, int cols, double loc, double scale) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = loc + scale * rng.next_gaussian();
  return m;
}

// Deterministic orthonormal matrix: QR of a seeded Gaussian draw, with column
// signs fixed by the R diagonal.
Matrix random_rotation(SplitRng rng, int dim) {
  Matrix g = gaussian_matrix(rng, dim, dim, 0.0, 1.0);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_positive(int v, const char* name) {
  if (v < 1) throw std::invalid_argument(std::string(name) + " must be >= 1");
}

}  // namespace

const TaskDataset& TaskSequence::task(int tau) const {
  if (tau < 1 || tau > size()) throw std::out_of_range("task index out of range");
  return tasks[tau - 1];
}

void validate(const TaskSequence& seq) {
  if (seq.tasks.empty()) throw std::invalid_argument("task sequence is empty");
  const int q = seq.input_dim();
  const int c = seq.label_dim();
  for (int i = 0; i < seq.size(); ++i) {
    const TaskDataset& t = seq.tasks[i];
    if (t.task_id != i + 1) throw std::invalid_argument("task ids must be 1..T in order");
    if (t.samples() < 1) throw std::invalid_argument("task has no samples");
    if (t.features.cols() != q || t.labels.cols() != c)
      throw std::invalid_argument("inconsistent dimensions across tasks");
    if (t.labels.rows() != t.features.rows())
      throw std::invalid_argument("feature/label row counts differ");
    if (!t.features.allFinite() || !t.labels.allFinite())
      throw std::invalid_argument("non-finite entries in task data");
    if (c >= 2) {
      for (int r = 0; r < t.labels.rows(); ++r) {
        int ones = 0;
        for (int j = 0; j < c; ++j) {
          const double v = t.labels(r, j);
          if (v == 1.0)
            ++ones;
          else if (v != 0.0)
            throw std::invalid_argument("one-hot labels must contain only 0 and 1");
        }
        if (ones != 1) throw std::invalid_argument("one-hot labels need exactly one 1 per row");
      }
    }
  }
}

TaskSequence gen_gaussian_linear(std::uint64_t seed, int tasks, int samples, int dim, double loc_x,
                                 double scale_x, double loc_w, double scale_w,
                                 double noise_scale) {
  check_positive(tasks, "tasks");
  check_positive(samples, "samples");
  check_positive(dim, "dim");
  if (!(scale_x > 0.0) || !(scale_w > 0.0))
    throw std::invalid_argument("scales must be positive");
  if (noise_scale < 0.0) throw std::invalid_argument("noise_scale must be >= 0");

  SplitRng root(seed);
  TaskSequence seq;
  seq.generator.name = "gaussian_linear";
  seq.generator.params = {{"T", std::to_string(tasks)},       {"n", std::to_string(samples)},
                          {"p", std::to_string(dim)},         {"loc_x", fmt(loc_x)},
                          {"scale_x", fmt(scale_x)},          {"loc_w", fmt(loc_w)},
                          {"scale_w", fmt(scale_w)},          {"noise_scale", fmt(noise_scale)},
                          {"seed", std::to_string(seed)}};

  for (int tau = 1; tau <= tasks; ++tau) {
    SplitRng task_rng = root.derive(static_cast<std::uint64_t>(tau));
    TaskDataset t;
    t.task_id = tau;
    t.seed = seed;
    t.features = gaussian_matrix(task_rng, samples, dim, loc_x, scale_x);
    Vector w(dim);
    for (int j = 0; j < dim; ++j) w(j) = loc_w + scale_w * task_rng.next_gaussian();
    t.labels = t.features * w;
    if (noise_scale > 0.0) {
      for (int i = 0; i < samples; ++i) t.labels(i, 0) += noise_scale * task_rng.next_gaussian();
    }
    seq.tasks.push_back(std::move(t));
  }
  return seq;
}

namespace {

// Shared core for the structured generators: X = Z diag(decay^{i/2}) Q^T.
Matrix structured_features(SplitRng& rng, const Matrix& rotation, int samples, int dim,
                           double decay) {
  Matrix z = gaussian_matrix(rng, samples, dim, 0.0, 1.0);
  Vector scales(dim);
  for (int j = 0; j < dim; ++j) scales(j) = std::pow(decay, 0.5 * j);
  return (z * scales.asDiagonal()) * rotation.transpose();
}

}  // namespace

TaskSequence gen_spectrum_controlled(std::uint64_t seed, int tasks, int samples, int dim,
                                     double decay) {
  check_positive(tasks, "tasks");
  check_positive(samples, "samples");
  check_positive(dim, "dim");
  if (!(decay > 0.0) || decay > 1.0)
    throw std::invalid_argument("decay must lie in (0, 1]");

  SplitRng root(seed);
  Matrix rotation = random_rotation(root.derive("rotation"), dim);

  TaskSequence seq;
  seq.generator.name = "spectrum_controlled";
  seq.generator.params = {{"T", std::to_string(tasks)},
                          {"n", std::to_string(samples)},
                          {"p", std::to_string(dim)},
                          {"decay", fmt(decay)},
                          {"seed", std::to_string(seed)}};

  for (int tau = 1; tau <= tasks; ++tau) {
    SplitRng task_rng = root.derive(static_cast<std::uint64_t>(tau));
    TaskDataset t;
    t.task_id = tau;
    t.seed = seed;
    t.features = structured_features(task_rng, rotation, samples, dim, decay);
    Vector w(dim);
    for (int j = 0; j < dim; ++j) w(j) = task_rng.next_gaussian();
    t.labels = t.features * w;
    seq.tasks.push_back(std::move(t));
  }
  return seq;
}

TaskSequence gen_rotated(std::uint64_t seed, int tasks, int samples, int dim,
                         double degrees_per_task) {
  check_positive(tasks, "tasks");
  check_positive(samples, "samples");
  if (dim < 2) throw std::invalid_argument("gen_rotated needs dim >= 2");

  constexpr double kBaseDecay = 0.5;  // structure so the rotated plane is visible
  SplitRng root(seed);
  Matrix rotation = random_rotation(root.derive("rotation"), dim);
  SplitRng task_rng = root.derive(std::uint64_t{1});
  Matrix base = structured_features(task_rng, rotation, samples, dim, kBaseDecay);
  Vector w(dim);
  for (int j = 0; j < dim; ++j) w(j) = task_rng.next_gaussian();

  // Rotation plane: the two leading covariance directions.
  const Vector u = rotation.col(0);
  const Vector v = rotation.col(1);

  TaskSequence seq;
  seq.generator.name = "rotated";
  seq.generator.params = {{"T", std::to_string(tasks)},
                          {"n", std::to_string(samples)},
                          {"p", std::to_string(dim)},
                          {"degrees_per_task", fmt(degrees_per_task)},
                          {"base_decay", fmt(kBaseDecay)},
                          {"seed", std::to_string(seed)}};

  for (int tau = 1; tau <= tasks; ++tau) {
    const double angle = (tau - 1) * degrees_per_task * std::numbers::pi / 180.0;
    Matrix plane_rot = Matrix::Identity(dim, dim);
    plane_rot += (std::cos(angle) - 1.0) * (u * u.transpose() + v * v.transpose());
    plane_rot += std::sin(angle) * (v * u.transpose() - u * v.transpose());

    TaskDataset t;
    t.task_id = tau;
    t.seed = seed;
    t.features = base * plane_rot;
    t.labels = t.features * w;
    seq.tasks.push_back(std::move(t));
  }
  return seq;
}

TaskSequence gen_permuted(std::uint64_t seed, int tasks, int samples, int dim,
                          const std::vector<std::vector<int>>* forced_permutations) {
  check_positive(tasks, "tasks");
  check_positive(samples, "samples");
  check_positive(dim, "dim");
  if (forced_permutations && static_cast<int>(forced_permutations->size()) != tasks)
    throw std::invalid_argument("gen_permuted: need one forced permutation per task");

  constexpr double kBaseDecay = 0.5;
  SplitRng root(seed);
  Matrix rotation = random_rotation(root.derive("rotation"), dim);
  SplitRng task_rng = root.derive(std::uint64_t{1});
  Matrix base = structured_features(task_rng, rotation, samples, dim, kBaseDecay);
  Vector w(dim);
  for (int j = 0; j < dim; ++j) w(j) = task_rng.next_gaussian();
  Matrix base_labels = base * w;

  TaskSequence seq;
  seq.generator.name = "permuted";
  seq.generator.params = {{"T", std::to_string(tasks)},
                          {"n", std::to_string(samples)},
                          {"p", std::to_string(dim)},
                          {"base_decay", fmt(kBaseDecay)},
                          {"seed", std::to_string(seed)}};

  for (int tau = 1; tau <= tasks; ++tau) {
    std::vector<int> perm;
    if (forced_permutations) {
      perm = (*forced_permutations)[tau - 1];
      if (static_cast<int>(perm.size()) != dim)
        throw std::invalid_argument("gen_permuted: forced permutation has wrong length");
    } else if (tau == 1) {
      perm.resize(dim);
      for (int j = 0; j < dim; ++j) perm[j] = j;
    } else {
      perm = root.derive("perm").derive(static_cast<std::uint64_t>(tau)).permutation(dim);
    }

    TaskDataset t;
    t.task_id = tau;
    t.seed = seed;
    t.features.resize(samples, dim);
    for (int j = 0; j < dim; ++j) t.features.col(j) = base.col(perm[j]);
    t.labels = base_labels;
    seq.tasks.push_back(std::move(t));
  }
  return seq;
}

TaskSequence to_classification(const TaskSequence& seq, int classes) {
  if (classes < 2) throw std::invalid_argument("to_classification: need >= 2 classes");
  if (seq.label_dim() != 1)
    throw std::invalid_argument("to_classification: expects a regression sequence");

  TaskSequence out = seq;
  out.generator.params["classes"] = std::to_string(classes);
  for (TaskDataset& t : out.tasks) {
    const int n = t.samples();
    // Quantile thresholds of the linear response define the class buckets.
    std::vector<double> sorted(t.labels.data(), t.labels.data() + n);
    std::sort(sorted.begin(), sorted.end());
    Matrix onehot = Matrix::Zero(n, classes);
    for (int i = 0; i < n; ++i) {
      const auto pos = std::upper_bound(sorted.begin(), sorted.end(), t.labels(i, 0)) -
                       sorted.begin();
      int cls = static_cast<int>((pos - 1) * classes / n);
      cls = std::min(classes - 1, std::max(0, cls));
      onehot(i, cls) = 1.0;
    }
    t.labels = std::move(onehot);
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& cell, int line_no, int col_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value))
    throw std::invalid_argument("csv: non-numeric cell at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col_no + 1) + ": '" + cell + "'");
  return value;
}

long parse_index(const std::string& cell, int line_no, int col_no) {
  long value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::invalid_argument("csv: bad integer at line " + std::to_string(line_no) +
                                ", column " + std::to_string(col_no + 1) + ": '" + cell + "'");
  return value;
}

}  // namespace

TaskSequence load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::invalid_argument("csv: empty file " + path);
  std::vector<std::string> cols = split_line(header);
  if (cols.size() < 4 || cols[0] != "task" || cols[1] != "row")
    throw std::invalid_argument("csv: header must start with task,row");

  int c = 0;
  std::size_t k = 2;
  while (k < cols.size() && cols[k] == "y" + std::to_string(c)) {
    ++c;
    ++k;
  }
  int q = 0;
  while (k < cols.size() && cols[k] == "x" + std::to_string(q)) {
    ++q;
    ++k;
  }
  if (c < 1 || q < 1 || k != cols.size())
    throw std::invalid_argument("csv: header must list y0..y{c-1} then x0..x{q-1}");

  struct Row {
    long task;
    std::vector<double> y, x;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != cols.size())
      throw std::invalid_argument("csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(cols.size()));
    Row r;
    r.task = parse_index(cells[0], line_no, 0);
    parse_index(cells[1], line_no, 1);  // row index validated as numeric only
    for (int j = 0; j < c; ++j) r.y.push_back(parse_cell(cells[2 + j], line_no, 2 + j));
    for (int j = 0; j < q; ++j) r.x.push_back(parse_cell(cells[2 + c + j], line_no, 2 + c + j));
    if (!rows.empty() && r.task < rows.back().task)
      throw std::invalid_argument("csv: tasks must be contiguous ascending (line " +
                                  std::to_string(line_no) + ")");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument("csv: no data rows in " + path);

  TaskSequence seq;
  seq.generator.name = "csv";
  seq.generator.params = {{"path", path}};
  long expected = 1;
  std::size_t i = 0;
  while (i < rows.size()) {
    if (rows[i].task != expected)
      throw std::invalid_argument("csv: task ids must be contiguous starting at 1, found " +
                                  std::to_string(rows[i].task));
    std::size_t j = i;
    while (j < rows.size() && rows[j].task == expected) ++j;
    TaskDataset t;
    t.task_id = static_cast<int>(expected);
    t.features.resize(static_cast<int>(j - i), q);
    t.labels.resize(static_cast<int>(j - i), c);
    for (std::size_t r = i; r < j; ++r) {
      for (int col = 0; col < q; ++col) t.features(static_cast<int>(r - i), col) = rows[r].x[col];
      for (int col = 0; col < c; ++col) t.labels(static_cast<int>(r - i), col) = rows[r].y[col];
    }
    seq.tasks.push_back(std::move(t));
    i = j;
    ++expected;
  }
  validate(seq);
  return seq;
}

void save_csv(const TaskSequence& seq, const std::string& path) {
  validate(seq);
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw std::runtime_error("csv: cannot write " + path);

  const int q = seq.input_dim();
  const int c = seq.label_dim();
  out << "task,row";
  for (int j = 0; j < c; ++j) out << ",y" << j;
  for (int j = 0; j < q; ++j) out << ",x" << j;
  out << "\n";

  char buf[64];
  auto write_value = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    out.write(buf, ptr - buf);
  };
  for (const TaskDataset& t : seq.tasks) {
    for (int r = 0; r < t.samples(); ++r) {
      out << t.task_id << ',' << r;
      for (int j = 0; j < c; ++j) {
        out << ',';
        write_value(t.labels(r, j));
      }
      for (int j = 0; j < q; ++j) {
        out << ',';
        write_value(t.features(r, j));
      }
      out << "\n";
    }
  }
}

}  // namespace linearcl
