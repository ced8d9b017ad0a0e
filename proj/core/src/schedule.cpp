#include "hacl/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hacl/error.hpp"
#include "io_util.hpp"

namespace hacl {

void ScheduleConfig::validate() const {
  if (total_iters <= 0) throw Error(Errc::InvalidConfig, "total_iters must be positive");
  if (burn_in_iters < 0 || burn_in_iters >= total_iters) {
    throw Error(Errc::InvalidConfig, "burn_in_iters must lie in [0, total_iters)");
  }
  if (!(ema_momentum >= 0.0 && ema_momentum <= 1.0)) {
    throw Error(Errc::InvalidConfig, "ema_momentum must lie in [0, 1]");
  }
}

namespace {

void check_iter(std::int64_t iter, const ScheduleConfig& cfg) {
  if (iter < 0 || iter > cfg.total_iters) {
    throw Error(Errc::IterOutOfRange,
                "iteration " + std::to_string(iter) + " outside [0, " + std::to_string(cfg.total_iters) + "]");
  }
}

}  // namespace

double progress(std::int64_t iter, const ScheduleConfig& cfg) {
  check_iter(iter, cfg);
  if (iter <= cfg.burn_in_iters) return 0.0;
  const double p = double(iter - cfg.burn_in_iters) / double(cfg.total_iters - cfg.burn_in_iters);
  return std::clamp(p, 0.0, 1.0);
}

double cosine_interp(double start, double end, double p) noexcept {
  return end + (start - end) * (1.0 + std::cos(std::numbers::pi * p)) / 2.0;
}

bool in_burn_in(std::int64_t iter, const ScheduleConfig& cfg) {
  check_iter(iter, cfg);
  return iter < cfg.burn_in_iters;
}

LossWeights loss_weights(std::int64_t iter, const ScheduleConfig& cfg) {
  if (in_burn_in(iter, cfg)) return {cfg.label_weight_start, 0.0};
  const double p = progress(iter, cfg);
  return {cosine_interp(cfg.label_weight_start, cfg.label_weight_end, p),
          cosine_interp(cfg.teacher_weight_start, cfg.teacher_weight_end, p)};
}

double learning_rate(std::int64_t iter, const ScheduleConfig& cfg) {
  if (in_burn_in(iter, cfg)) return cfg.lr_start;
  return cosine_interp(cfg.lr_start, cfg.lr_end, progress(iter, cfg));
}

ParamVector ema_update(std::span<const double> teacher, std::span<const double> student, double m) {
  if (teacher.size() != student.size()) {
    throw Error(Errc::LengthMismatch, "teacher has " + std::to_string(teacher.size()) +
                                          " parameters, student " + std::to_string(student.size()));
  }
  if (!(m >= 0.0 && m <= 1.0)) throw Error(Errc::InvalidConfig, "EMA momentum outside [0, 1]");
  ParamVector out(teacher.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = m * teacher[i] + (1.0 - m) * student[i];
  return out;
}

TeacherTracker::TeacherTracker(ScheduleConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void TeacherTracker::observe(std::int64_t iter, std::span<const double> student) {
  if (in_burn_in(iter, cfg_)) return;
  if (teacher_.empty()) {
    teacher_.assign(student.begin(), student.end());
    return;
  }
  teacher_ = ema_update(teacher_, student, cfg_.ema_momentum);
}

void write_schedule_csv(std::ostream& out, const ScheduleConfig& cfg) {
  cfg.validate();
  out << "iter,lr,alpha_label,alpha_teacher\n";
  for (std::int64_t iter = 0; iter <= cfg.total_iters; ++iter) {
    const auto w = loss_weights(iter, cfg);
    out << iter << ',' << detail::format_double(learning_rate(iter, cfg)) << ','
        << detail::format_double(w.label) << ',' << detail::format_double(w.teacher) << '\n';
  }
}

}  // namespace hacl
