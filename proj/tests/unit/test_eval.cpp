#include <doctest.h>

#include <random>

#include "hacl/dataset_json.hpp"
#include "hacl/error.hpp"
#include "hacl/eval.hpp"
#include "synthetic.hpp"

using namespace hacl;

namespace {

Bitmap from_rows(std::uint32_t w, std::uint32_t h, const std::string& bits) {
  Bitmap bm(w, h);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) bm.set(x, y, bits[y * w + x] == '1');
  }
  return bm;
}

GroundTruth gt_box(std::int64_t id, std::int64_t image, Box b) {
  GroundTruth g;
  g.id = id;
  g.image_id = image;
  g.box = b;
  g.area = b.area();
  return g;
}

Detection det_box(std::int64_t image, Box b, double score) {
  Detection d;
  d.image_id = image;
  d.box = b;
  d.score = score;
  return d;
}

}  // namespace

TEST_CASE("compressed RLE matches the reference encoder") {
  const Bitmap bm = from_rows(7, 5, "00011010001110000000110110000001110");
  const RleMask rle = RleMask::encode(bm);
  CHECK(rle.to_compressed() == "3190H1021MO011OO1");
  CHECK(RleMask::from_compressed(5, 7, "3190H1021MO011OO1") == rle);
  CHECK(rle.decode() == bm);
  CHECK(rle.area() == bm.area());
  CHECK(rle.bbox() == bm.bbox());

  const RleMask zeros = RleMask::encode(Bitmap(1, 3));
  CHECK(zeros.to_compressed() == "3");
  CHECK(zeros.counts() == std::vector<std::uint32_t>{3});
  CHECK_THROWS_AS(RleMask::from_compressed(5, 7, "3190H1"), Error);
  CHECK_THROWS_AS(RleMask(2, 2, {1, 2}), Error);
}

TEST_CASE("RLE operations agree with dense bitmaps") {
  std::mt19937_64 rng(64);
  for (int t = 0; t < 100; ++t) {
    const Bitmap a = testing::random_bitmap(rng, 13, 9, 0.2 + 0.005 * t);
    const Bitmap b = testing::random_bitmap(rng, 13, 9, 0.5);
    const RleMask ra = RleMask::encode(a), rb = RleMask::encode(b);
    CHECK(ra.decode() == a);
    CHECK(RleMask::from_compressed(9, 13, ra.to_compressed()) == ra);
    CHECK(ra.corner_count() == a.corner_count());
    CHECK(ra.bbox() == a.bbox());
    if (!a.empty() || !b.empty()) CHECK(mask_iou(ra, rb) == bitmap_iou(a, b));
  }
}

TEST_CASE("mask IoU") {
  Bitmap a(30, 30), b(30, 30);
  a.fill_rect(0, 0, 10, 10);
  b.fill_rect(5, 0, 10, 10);
  const RleMask ra = RleMask::encode(a), rb = RleMask::encode(b);
  CHECK(mask_iou(ra, ra) == 1.0);
  CHECK(mask_iou(ra, rb) == doctest::Approx(1.0 / 3.0));
  Bitmap c(30, 30);
  c.fill_rect(20, 20, 5, 5);
  CHECK(mask_iou(ra, RleMask::encode(c)) == 0.0);
  CHECK(intersection_area(ra, rb) == 50);
  CHECK_THROWS_AS(mask_iou(RleMask::encode(Bitmap(30, 30)), RleMask::encode(Bitmap(30, 30))), Error);
  CHECK_THROWS_AS(mask_iou(ra, RleMask::encode(Bitmap(30, 31))), Error);
  CHECK(box_iou({0, 0, 10, 10}, {5, 0, 10, 10}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("size buckets") {
  CHECK(size_bucket(1023) == SizeBucket::Small);
  CHECK(size_bucket(1024) == SizeBucket::Medium);
  CHECK(size_bucket(9215) == SizeBucket::Medium);
  CHECK(size_bucket(9216) == SizeBucket::Large);
}

TEST_CASE("iou thresholds follow linspace rounding") {
  const auto t = standard_iou_thresholds();
  REQUIRE(t.size() == 10);
  CHECK(t[0] == 0.5);
  CHECK(t[8] == 0.8999999999999999);
  CHECK(t[9] == 0.95);
}

TEST_CASE("single pair at IoU 0.6 recalls at three thresholds") {
  const std::vector<GroundTruth> gts{gt_box(1, 1, {0, 0, 10, 10})};
  const std::vector<Detection> dets{det_box(1, {0, 0, 6, 10}, 0.9)};
  const auto thr = standard_iou_thresholds();
  const auto rr = match_and_recall(dets, gts, thr, 100, IouType::Box);
  CHECK(rr.matched == std::vector<std::size_t>{1, 1, 1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(rr.average() == 0.3);
  const auto m = evaluate_metrics(gts, dets, IouType::Box);
  CHECK(m.ar.back() == 0.3);
  CHECK(m.ar_small == 0.3);
  CHECK(m.ar_medium == -1);
}

TEST_CASE("three-detection AP matches the reference evaluator") {
  const std::vector<GroundTruth> gts{gt_box(1, 1, {0, 0, 10, 10}), gt_box(2, 1, {50, 50, 10, 10})};
  const std::vector<Detection> dets{det_box(1, {0, 0, 10, 10}, 0.9), det_box(1, {20, 20, 10, 10}, 0.8),
                                    det_box(1, {50, 50, 10, 10}, 0.7)};
  // Reference values from the public COCO evaluation toolkit on the same input.
  constexpr double kReferenceAp = 0.8349834983498348;
  CHECK(average_precision(dets, gts, 0.5, IouType::Box) == doctest::Approx(kReferenceAp).epsilon(1e-12));
  const auto m = evaluate_metrics(gts, dets, IouType::Box);
  CHECK(m.ap == doctest::Approx(kReferenceAp).epsilon(1e-12));
  CHECK(m.ap50 == doctest::Approx(kReferenceAp).epsilon(1e-12));
}

TEST_CASE("perfect and empty predictors") {
  std::vector<GroundTruth> gts{gt_box(1, 1, {0, 0, 10, 10}), gt_box(2, 1, {20, 20, 40, 40}),
                               gt_box(3, 2, {5, 5, 100, 100})};
  std::vector<Detection> dets;
  for (const auto& g : gts) dets.push_back(det_box(g.image_id, g.box, 1.0));
  const auto perfect = evaluate_metrics(gts, dets, IouType::Box);
  for (double ar : perfect.ar) CHECK(ar == 1.0);
  CHECK(perfect.ap == 1.0);
  CHECK(perfect.ar_small == 1.0);
  CHECK(perfect.ar_medium == 1.0);
  CHECK(perfect.ar_large == 1.0);

  const auto none = evaluate_metrics(gts, {}, IouType::Box);
  for (double ar : none.ar) CHECK(ar == 0.0);
  CHECK(none.ap == 0.0);

  const auto false_only = evaluate_metrics(gts, std::vector<Detection>{det_box(1, {80, 80, 5, 5}, 1.0)}, IouType::Box);
  CHECK(false_only.ap == 0.0);
  CHECK(evaluate_metrics({}, dets, IouType::Box).ap == -1);
}

TEST_CASE("recall properties") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 50), s(5, 30), sc(0, 1);
  for (int t = 0; t < 50; ++t) {
    std::vector<GroundTruth> gts;
    std::vector<Detection> dets;
    for (int k = 0; k < 6; ++k) gts.push_back(gt_box(k + 1, 1 + k % 2, {u(rng), u(rng), s(rng), s(rng)}));
    for (int k = 0; k < 12; ++k) dets.push_back(det_box(1 + k % 2, {u(rng), u(rng), s(rng), s(rng)}, sc(rng)));
    const auto thr = standard_iou_thresholds();
    const std::vector<double> lenient{0.5};
    const auto base = match_and_recall(dets, gts, thr, 100, IouType::Box);
    CHECK(match_and_recall(dets, gts, lenient, 100, IouType::Box).average() >= base.average());
    CHECK(match_and_recall(dets, gts, thr, 3, IouType::Box).average() <= base.average());
    auto more = dets;
    more.push_back(det_box(1, {u(rng), u(rng), s(rng), s(rng)}, sc(rng)));
    const auto added = match_and_recall(more, gts, thr, 100, IouType::Box);
    for (std::size_t i = 0; i < thr.size(); ++i) CHECK(added.matched[i] >= base.matched[i]);
    // A ground truth no detection can reach only grows the denominator.
    auto extra = gts;
    extra.push_back(gt_box(99, 1, {500, 500, s(rng), s(rng)}));
    CHECK(match_and_recall(dets, extra, thr, 100, IouType::Box).average() <= base.average() + 1e-12);
  }
}

TEST_CASE("mask evaluation and per-level recall") {
  Bitmap a(40, 40), b(40, 40);
  a.fill_rect(0, 0, 20, 20);
  b.fill_rect(25, 25, 10, 10);
  std::vector<GroundTruth> gts(2);
  gts[0].id = 1;
  gts[0].image_id = 7;
  gts[0].mask = RleMask::encode(a);
  gts[0].box = a.bbox();
  gts[0].area = 400;
  gts[1].id = 2;
  gts[1].image_id = 7;
  gts[1].mask = RleMask::encode(b);
  gts[1].box = b.bbox();
  gts[1].area = 100;
  std::vector<Detection> dets(1);
  dets[0].image_id = 7;
  dets[0].mask = gts[0].mask;
  dets[0].box = gts[0].box;
  dets[0].level = HierLevel::Whole;
  const auto result = evaluate(gts, dets);
  REQUIRE(result.mask);
  CHECK(result.mask->ar.back() == 0.5);
  CHECK(result.box.ar.back() == 0.5);
  CHECK(result.per_level_ar.at(HierLevel::Whole) == 0.5);
}

TEST_CASE("dataset and result parsing") {
  const std::string gt = R"({"images":[{"id":1,"width":7,"height":5,"file_name":"a.png"}],
    "annotations":[{"id":3,"image_id":1,"category_id":2,"bbox":[1,0,4,5],
                    "segmentation":{"size":[5,7],"counts":"3190H1021MO011OO1"},"source_threshold":0.2}]})";
  const Dataset ds = parse_dataset(gt, "gt.json");
  REQUIRE(ds.annotations.size() == 1);
  CHECK(ds.annotations[0].level == HierLevel::Part);
  CHECK(ds.annotations[0].area == 13);
  CHECK(ds.source_thresholds[0] == 0.2);
  CHECK(ds.images[0].file_name == "a.png");

  const auto dets = parse_detections(R"([{"image_id":1,"bbox":[0,0,2,2],"score":0.5}])");
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].score == 0.5);
  CHECK(parse_detections(gt).size() == 1);

  try {
    parse_dataset("{\"images\": [}", "broken.json");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find("broken.json at byte") != std::string::npos);
  }
  try {
    parse_dataset(R"({"images":[],"annotations":[{"image_id":1,"segmentation":[[1,2,3]]}]})", "poly.json");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/annotations/0") != std::string::npos);
  }
}
