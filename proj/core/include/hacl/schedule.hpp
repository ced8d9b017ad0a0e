#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

namespace hacl {

// Self-training schedule: a burn-in phase on the initial labels only, then
// cosine ramps of the learning rate and of the two branch loss weights.
struct ScheduleConfig {
  std::int64_t total_iters = 40000;
  std::int64_t burn_in_iters = 4000;
  double lr_start = 0.01;
  double lr_end = 0.0;
  double label_weight_start = 1.0;
  double label_weight_end = 0.0;
  double teacher_weight_start = 2.0;
  double teacher_weight_end = 3.0;
  double ema_momentum = 0.9996;

  void validate() const;
};

// 0 through burn-in, then linear to 1 at total_iters. Throws IterOutOfRange.
double progress(std::int64_t iter, const ScheduleConfig& cfg);

// end + (start - end) * (1 + cos(pi p)) / 2
double cosine_interp(double start, double end, double p) noexcept;

struct LossWeights {
  double label;
  double teacher;  // 0 while the teacher branch is inactive (burn-in)
};

bool in_burn_in(std::int64_t iter, const ScheduleConfig& cfg);
LossWeights loss_weights(std::int64_t iter, const ScheduleConfig& cfg);
double learning_rate(std::int64_t iter, const ScheduleConfig& cfg);

using ParamVector = std::vector<double>;

/// m * teacher + (1 - m) * student, elementwise. Throws LengthMismatch.
ParamVector ema_update(std::span<const double> teacher, std::span<const double> student, double m);

// Teacher bookkeeping across iterations: no teacher during burn-in, a copy of
// the student at the first post-burn-in step, EMA afterwards.
class TeacherTracker {
 public:
  explicit TeacherTracker(ScheduleConfig cfg);

  // Call once per iteration with the student weights after that iteration.
  void observe(std::int64_t iter, std::span<const double> student);

  bool active() const noexcept { return !teacher_.empty(); }
  const ParamVector& teacher() const noexcept { return teacher_; }

 private:
  ScheduleConfig cfg_;
  ParamVector teacher_;
};

/// CSV "iter,lr,alpha_label,alpha_teacher" with one row per iteration 0..total.
void write_schedule_csv(std::ostream& out, const ScheduleConfig& cfg);

}  // namespace hacl
