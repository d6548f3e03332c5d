#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "linearcl/spectral.hpp"

namespace linearcl {

struct TaskDataset {
  Matrix features;  // n x q
  Matrix labels;    // n x c (c = 1 regression, one-hot rows otherwise)
  int task_id = 0;  // 1-based position in the sequence
  std::uint64_t seed = 0;

  int samples() const { return static_cast<int>(features.rows()); }
};

struct GeneratorSpec {
  std::string name;
  std::map<std::string, std::string> params;  // ordered for stable serialization
};

struct TaskSequence {
  std::vector<TaskDataset> tasks;
  GeneratorSpec generator;

  int size() const { return static_cast<int>(tasks.size()); }
  int input_dim() const { return tasks.empty() ? 0 : static_cast<int>(tasks[0].features.cols()); }
  int label_dim() const { return tasks.empty() ? 0 : static_cast<int>(tasks[0].labels.cols()); }
  const TaskDataset& task(int tau) const;  // 1-based
};

// Throws std::invalid_argument when shapes, ids or label rows are inconsistent.
void validate(const TaskSequence& seq);

// Per task: X ~ N(loc_x, scale_x^2) i.i.d., a fresh weight vector
// w ~ N(loc_w, scale_w^2), y = X w + N(0, noise_scale^2).
TaskSequence gen_gaussian_linear(std::uint64_t seed, int tasks, int samples, int dim,
                                 double loc_x = 0.0, double scale_x = 1.0, double loc_w = 0.0,
                                 double scale_w = 1.0, double noise_scale = 0.0);

// Gaussian features with covariance eigenvalues decay^i along one shared
// seeded rotation; decay = 1 is the uniform worst case. Labels are noiseless
// linear responses under per-task weights.
TaskSequence gen_spectrum_controlled(std::uint64_t seed, int tasks, int samples, int dim,
                                     double decay);

// Task tau = task 1 right-multiplied by a plane rotation of
// (tau-1)*degrees_per_task degrees in the plane of the two leading covariance
// directions; one fixed weight vector, labels recomputed from the rotated
// features.
TaskSequence gen_rotated(std::uint64_t seed, int tasks, int samples, int dim,
                         double degrees_per_task);

// Task 1 has structured (decaying) covariance; each later task is task 1 with
// a fresh uniform column permutation. forced_permutations is a testing hook
// (one permutation per task, task 1 included).
TaskSequence gen_permuted(std::uint64_t seed, int tasks, int samples, int dim,
                          const std::vector<std::vector<int>>* forced_permutations = nullptr);

// Buckets the linear responses of a regression sequence into `classes`
// equally-populated one-hot classes per task.
TaskSequence to_classification(const TaskSequence& seq, int classes);

// CSV schema: header `task,row,y0..y{c-1},x0..x{q-1}`, tasks contiguous and
// ascending, LF line endings, '.' decimals.
TaskSequence load_csv(const std::string& path);
void save_csv(const TaskSequence& seq, const std::string& path);

}  // namespace linearcl
