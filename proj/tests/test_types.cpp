#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "mot/types.hpp"

using namespace mot;

namespace {

Detection det(int frame, double x = 0, double y = 0, double w = 10,
              double h = 10) {
  Detection d;
  d.frame = frame;
  d.box = BBox{x, y, w, h};
  d.confidence = 0.9;
  return d;
}

}  // namespace

TEST_CASE("bbox accessors") {
  BBox b{2.0, 3.0, 10.0, 20.0};
  CHECK(b.cx() == doctest::Approx(7.0));
  CHECK(b.cy() == doctest::Approx(13.0));
  CHECK(b.area() == doctest::Approx(200.0));
  CHECK(b.valid());
  CHECK_FALSE(BBox{0, 0, -1, 5}.valid());
  CHECK_FALSE(BBox{0, 0, 0, 5}.valid());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(BBox{nan, 0, 1, 1}.valid());
}

TEST_CASE("tracklet construction validates frame order") {
  CHECK_THROWS_AS(Tracklet(1, {}), std::invalid_argument);
  CHECK_THROWS_AS(Tracklet(1, {det(3), det(2)}), std::invalid_argument);
  CHECK_THROWS_AS(Tracklet(1, {det(3), det(3)}), std::invalid_argument);

  Tracklet t(7, {det(2), det(5), det(9)});
  CHECK(t.id() == 7);
  CHECK(t.start() == 2);
  CHECK(t.end() == 9);
  CHECK(t.size() == 3);
  CHECK(t.first().frame == 2);
  CHECK(t.last().frame == 9);
  CHECK(t.with_id(3).id() == 3);
  CHECK(t.with_id(3).size() == 3);
}

TEST_CASE("bundle detection bookkeeping") {
  SequenceBundle b;
  b.frame_count = 3;
  b.frames.resize(3);
  CHECK(b.add_detection(det(1)) == 0);
  CHECK(b.add_detection(det(1)) == 1);
  CHECK(b.add_detection(det(3)) == 0);
  CHECK(b.detections_in(1).size() == 2);
  CHECK(b.detections_in(2).empty());
  CHECK(b.detection_count() == 3);
  CHECK(b.detections_in(1)[1].det_index == 1);
  CHECK_THROWS(b.add_detection(det(0)));
  CHECK_THROWS(b.add_detection(det(4)));
  CHECK(b.embedding_dim() == 0);
  Detection with_emb = det(2);
  with_emb.embedding = std::vector<double>{1.0, 2.0, 3.0};
  b.add_detection(with_emb);
  CHECK(b.embedding_dim() == 3);
}

TEST_CASE("bundle validation reports each violation") {
  SequenceBundle b;
  b.frame_count = 2;
  b.frames.resize(2);
  CHECK(validate_bundle(b).empty());

  b.add_detection(det(1));
  Detection bad = det(2);
  bad.box.w = -1.0;
  b.add_detection(bad);
  const auto problems = validate_bundle(b);
  CHECK(!problems.empty());

  SequenceBundle mismatched;
  mismatched.frame_count = 1;
  mismatched.frames.resize(1);
  Detection d = det(1);
  mismatched.add_detection(d);
  mismatched.frames[0][0].frame = 9;  // corrupt the stored frame number
  CHECK(!validate_bundle(mismatched).empty());
}
