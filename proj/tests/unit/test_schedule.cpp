#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hacl/error.hpp"
#include "hacl/schedule.hpp"

using namespace hacl;

TEST_CASE("progress") {
  ScheduleConfig cfg;
  cfg.burn_in_iters = 8000;
  CHECK(progress(0, cfg) == 0.0);
  CHECK(progress(8000, cfg) == 0.0);
  CHECK(progress(24000, cfg) == 0.5);
  CHECK(progress(40000, cfg) == 1.0);
  CHECK_THROWS_AS(progress(-1, cfg), Error);
  CHECK_THROWS_AS(progress(40001, cfg), Error);
}

TEST_CASE("cosine interpolation") {
  CHECK(cosine_interp(1.0, 0.0, 0.0) == 1.0);
  CHECK(cosine_interp(1.0, 0.0, 1.0) == 0.0);
  CHECK(cosine_interp(1.0, 0.0, 0.5) == doctest::Approx(0.5));
  CHECK(cosine_interp(2.0, 3.0, 0.5) == doctest::Approx(2.5));
  CHECK(cosine_interp(0.01, 0.0, 0.25) == doctest::Approx(0.008536).epsilon(1e-4));
  CHECK(cosine_interp(0.01, 0.0, 0.25) == doctest::Approx(0.01 * (1 + std::cos(M_PI / 4)) / 2));
}

TEST_CASE("loss weights and learning rate") {
  const ScheduleConfig cfg;
  const auto start = loss_weights(cfg.burn_in_iters, cfg);
  CHECK(start.label == 1.0);
  CHECK(start.teacher == 2.0);
  const auto end = loss_weights(cfg.total_iters, cfg);
  CHECK(end.label == 0.0);
  CHECK(end.teacher == 3.0);
  const auto mid_burn = loss_weights(cfg.burn_in_iters / 2, cfg);
  CHECK(mid_burn.label == 1.0);
  CHECK(mid_burn.teacher == 0.0);
  CHECK(in_burn_in(0, cfg));
  CHECK_FALSE(in_burn_in(cfg.burn_in_iters, cfg));

  CHECK(learning_rate(0, cfg) == 0.01);
  CHECK(learning_rate(cfg.burn_in_iters, cfg) == 0.01);
  CHECK(learning_rate(cfg.total_iters, cfg) == 0.0);
}

TEST_CASE("schedule is monotone after burn-in") {
  ScheduleConfig cfg;
  cfg.total_iters = 5000;
  cfg.burn_in_iters = 500;
  auto prev = loss_weights(cfg.burn_in_iters, cfg);
  double prev_lr = learning_rate(cfg.burn_in_iters, cfg);
  for (std::int64_t it = cfg.burn_in_iters + 1; it <= cfg.total_iters; ++it) {
    const auto w = loss_weights(it, cfg);
    const double lr = learning_rate(it, cfg);
    REQUIRE(w.label <= prev.label);
    REQUIRE(w.teacher >= prev.teacher);
    REQUIRE(lr <= prev_lr);
    prev = w;
    prev_lr = lr;
  }
}

TEST_CASE("schedule config validation") {
  ScheduleConfig cfg;
  cfg.burn_in_iters = cfg.total_iters;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.total_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.ema_momentum = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("ema update") {
  const std::vector<double> t{0, 2}, s{2, 0};
  CHECK(ema_update(t, s, 0.75) == std::vector<double>{0.5, 1.5});
  CHECK(ema_update(t, s, 1.0) == t);
  CHECK(ema_update(t, s, 0.0) == s);
  const std::vector<double> short_s{1};
  CHECK_THROWS_AS(ema_update(t, short_s, 0.5), Error);
  CHECK_THROWS_AS(ema_update(t, s, -0.1), Error);
}

TEST_CASE("repeated ema converges geometrically") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> teacher(10), student(10);
  for (auto& v : teacher) v = g(rng);
  for (auto& v : student) v = g(rng);
  auto dist = [&](const std::vector<double>& a) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - student[i]) * (a[i] - student[i]);
    return std::sqrt(d);
  };
  const double d0 = dist(teacher);
  const double m = 0.9;
  auto cur = teacher;
  for (int k = 1; k <= 50; ++k) {
    cur = ema_update(cur, student, m);
    CHECK(dist(cur) == doctest::Approx(d0 * std::pow(m, k)).epsilon(1e-9));
  }
}

TEST_CASE("teacher tracker") {
  ScheduleConfig cfg;
  cfg.total_iters = 10;
  cfg.burn_in_iters = 3;
  cfg.ema_momentum = 0.5;
  TeacherTracker tracker(cfg);
  const std::vector<double> a{1, 1}, b{3, 5};
  for (int it = 0; it < 3; ++it) tracker.observe(it, a);
  CHECK_FALSE(tracker.active());
  tracker.observe(3, a);
  CHECK(tracker.active());
  CHECK(tracker.teacher() == a);
  tracker.observe(4, b);
  CHECK(tracker.teacher() == std::vector<double>{2, 3});
}

TEST_CASE("schedule csv") {
  ScheduleConfig cfg;
  cfg.total_iters = 4;
  cfg.burn_in_iters = 2;
  std::ostringstream os;
  write_schedule_csv(os, cfg);
  CHECK(os.str() ==
        "iter,lr,alpha_label,alpha_teacher\n"
        "0,0.01,1,0\n"
        "1,0.01,1,0\n"
        "2,0.01,1,2\n"
        "3,0.005,0.5,2.5\n"
        "4,0,0,3\n");
}
