#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <map>

#include "doctest.h"
#include "mot/gtmatch.hpp"

using namespace mot;

namespace {

Detection det(int frame, double x, double y, double w = 10, double h = 10) {
  Detection d;
  d.frame = frame;
  d.box = BBox{x, y, w, h};
  d.confidence = 0.9;
  return d;
}

GtRecord gt(int frame, int identity, double x, double y, double w = 10,
            double h = 10) {
  GtRecord r;
  r.frame = frame;
  r.identity = identity;
  r.box = BBox{x, y, w, h};
  return r;
}

}  // namespace

TEST_CASE("attribution requires ground truth") {
  SequenceBundle b;
  b.frame_count = 1;
  b.frames.resize(1);
  CHECK_THROWS_AS(attribute_detections(b), std::invalid_argument);
}

TEST_CASE("each ground-truth box claims at most one detection") {
  SequenceBundle b;
  b.frame_count = 1;
  b.frames.resize(1);
  b.add_detection(det(1, 0, 0));      // IoU 1.0 with gt 7
  b.add_detection(det(1, 1, 0));      // IoU 0.8 with gt 7, duplicate
  b.add_detection(det(1, 100, 100));  // matches nothing
  b.ground_truth = std::vector<GtRecord>{gt(1, 7, 0, 0)};

  const auto attr = attribute_detections(b);
  REQUIRE(attr.size() == 2);  // slot per frame, 1-based
  CHECK(attr[1] == std::vector<int>{7, kBackground, kBackground});
}

TEST_CASE("matching is jointly optimal, not greedy") {
  // Greedy by best IoU would hand det0 to gt 1 (IoU 0.82) and leave det1
  // unmatched; the optimal pairing covers both ground-truth boxes.
  SequenceBundle b;
  b.frame_count = 1;
  b.frames.resize(1);
  b.add_detection(det(1, 0, 0));  // IoU 0.82 with gt 1, 0.54 with gt 2
  b.add_detection(det(1, 4, 0));  // IoU 0.54 with gt 1, below gate with gt 2
  b.ground_truth = std::vector<GtRecord>{gt(1, 1, 1, 0), gt(1, 2, -3, 0)};

  const auto attr = attribute_detections(b, 0.5);
  CHECK(attr[1] == std::vector<int>{2, 1});
}

TEST_CASE("iou gate boundary is inclusive") {
  SequenceBundle b;
  b.frame_count = 2;
  b.frames.resize(2);
  // IoU with the 10x10 gt box: overlap 10x5 = 50, union 150 -> exactly 1/3.
  b.add_detection(det(1, 0, 5));
  b.add_detection(det(2, 0, 5));
  b.ground_truth = std::vector<GtRecord>{gt(1, 3, 0, 0), gt(2, 3, 0, 0)};

  CHECK(attribute_detections(b, 1.0 / 3.0)[1][0] == 3);
  CHECK(attribute_detections(b, 1.0 / 3.0 + 1e-9)[2][0] == kBackground);
}

TEST_CASE("majority vote tie rules") {
  CHECK(majority_vote({}) == kBackground);
  CHECK(majority_vote({{4, 2}}) == 4);
  CHECK(majority_vote({{1, 3}, {2, 3}}) == 1);            // smaller id wins tie
  CHECK(majority_vote({{kBackground, 3}, {2, 3}}) == 2);  // identity beats bg
  CHECK(majority_vote({{kBackground, 4}, {2, 3}}) == kBackground);
  CHECK(majority_vote({{5, 1}, {3, 2}, {9, 2}}) == 3);
}

TEST_CASE("tracklet identity and purity") {
  SequenceBundle b;
  b.frame_count = 5;
  b.frames.resize(5);
  std::vector<Detection> members;
  for (int f = 1; f <= 5; ++f) {
    Detection d = det(f, 0, 0);
    d.det_index = b.add_detection(d);
    members.push_back(d);
  }
  // Frames 1-4 overlap identity 2; frame 5's ground truth is elsewhere.
  std::vector<GtRecord> records;
  for (int f = 1; f <= 4; ++f) records.push_back(gt(f, 2, 0, 0));
  records.push_back(gt(5, 2, 200, 200));
  b.ground_truth = records;

  const auto attr = attribute_detections(b);
  const Tracklet t(1, members);
  CHECK(tracklet_identity(t, attr) == 2);
  CHECK(tracklet_purity(t, 2, attr) == doctest::Approx(0.8));
  CHECK(tracklet_purity(t, kBackground, attr) == doctest::Approx(0.2));
  CHECK(tracklet_purity(t, 99, attr) == doctest::Approx(0.0));
}
