#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "iotids/knn.hpp"
#include "iotids/svm.hpp"

using namespace iotids;

namespace {

Matrix points(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST(Knn, SelfNearestWithKOne) {
  const auto b = fixtures::axis_blobs(3, 30, 4, 1.0, 2);
  const auto m = fit_knn(b.x, b.y, 1, 3);
  EXPECT_EQ(predict_knn(m, b.x), b.y);
}

TEST(Knn, KEqualsRowsGivesModalClass) {
  const auto x = points({{0}, {1}, {2}, {3}, {4}});
  const std::vector<int> y{1, 0, 1, 2, 1};
  const auto m = fit_knn(x, y, 5, 3);
  const auto q = points({{-100}, {2.5}, {100}});
  EXPECT_EQ(predict_knn(m, q), (std::vector<int>{1, 1, 1}));
}

TEST(Knn, DuplicateRowsLowerIndexWins) {
  const auto x = points({{1, 1}, {1, 1}, {5, 5}});
  EXPECT_EQ(predict_knn(fit_knn(x, {1, 0, 0}, 1, 2), points({{1, 1}}))[0], 1);
  EXPECT_EQ(predict_knn(fit_knn(x, {0, 1, 1}, 1, 2), points({{1, 1}}))[0], 0);
}

TEST(Knn, ForcedMajority) {
  const auto x = points({{0}, {1}, {2}, {10}});
  const auto m = fit_knn(x, {0, 0, 1, 1}, 3, 2);
  EXPECT_EQ(predict_knn(m, points({{0.5}}))[0], 0);
}

TEST(Knn, SumDistanceBreaksVoteTies) {
  // Five points; the query's two nearest are one A and one B, B closer.
  const auto x = points({{1.0, 0.0}, {0.0, 0.5}, {3.0, 3.0}, {-4.0, 1.0}, {2.0, -5.0}});
  const std::vector<int> y{0, 1, 0, 0, 1};
  const auto q = points({{0.0, 0.0}});
  std::vector<std::pair<double, int>> d;
  for (std::size_t i = 0; i < x.rows; ++i) {
    d.push_back({std::hypot(x(i, 0) - q(0, 0), x(i, 1) - q(0, 1)), y[i]});
  }
  std::sort(d.begin(), d.end());
  ASSERT_NE(d[0].second, d[1].second);
  const int expect = d[0].second;  // the nearer of the two carries the smaller sum
  EXPECT_EQ(predict_knn(fit_knn(x, y, 2, 2), q)[0], expect);
  EXPECT_EQ(expect, 1);
}

TEST(Knn, BadK) {
  for (std::size_t k : {0u, 4u}) {
    try {
      fit_knn(points({{0}, {1}, {2}}), {0, 1, 0}, k, 2);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BadK);
    }
  }
}

TEST(Svm, SeparableTwoDimensions) {
  const auto x = points({{0.0, 0.0}, {0.1, 0.2}, {0.2, 0.1}, {1.0, 1.0}, {0.9, 0.8}, {0.8, 1.0}});
  const std::vector<int> y{-1, -1, -1, 1, 1, 1};
  SvmParams p;
  p.c = 10.0;
  p.epochs = 200;
  p.seed = 1;
  const auto m = fit_linear_svm(x, y, p);
  const auto pred = predict_svm(m, x);
  EXPECT_EQ(pred.labels, y);
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) hinge += std::max(0.0, 1.0 - y[i] * pred.margins[i]);
  EXPECT_EQ(hinge, 0.0);
}

TEST(Svm, LabelFlipNegatesSolution) {
  const auto b = fixtures::axis_blobs(2, 40, 3, 3.0, 4);
  std::vector<int> y(b.y.size()), neg(b.y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = b.y[i] ? 1 : -1;
    neg[i] = -y[i];
  }
  SvmParams p;
  p.seed = 8;
  const auto a = fit_linear_svm(b.x, y, p);
  const auto f = fit_linear_svm(b.x, neg, p);
  for (std::size_t j = 0; j < a.w.size(); ++j) EXPECT_NEAR(f.w[j], -a.w[j], 1e-12);
  EXPECT_NEAR(f.b, -a.b, 1e-12);
}

TEST(Svm, ContradictoryPair) {
  const auto x = points({{2.0, 3.0}, {2.0, 3.0}});
  const auto m = fit_linear_svm(x, std::vector<int>{1, -1}, SvmParams{});
  const auto pred = predict_svm(m, x);
  EXPECT_EQ(pred.labels[0], pred.labels[1]);
}

TEST(Svm, BoundaryAndHandMargins) {
  SvmModel m{{1.0, 0.0}, 0.0, 1.0, 0, {}};
  auto p = predict_svm(m, points({{3.0, 7.0}, {0.0, 5.0}, {-1.0, 2.0}}));
  EXPECT_EQ(p.margins[0], 3.0);
  EXPECT_EQ(p.labels, (std::vector<int>{1, 1, -1}));

  SvmModel h{{0.5, -2.0, 0.25}, 0.125, 1.0, 0, {}};
  const auto x = points({{1.0, 2.0, 4.0}, {-3.0, 0.5, 8.0}});
  p = predict_svm(h, x);
  EXPECT_NEAR(p.margins[0], 0.125 + 0.5 - 4.0 + 1.0, 1e-12);
  EXPECT_NEAR(p.margins[1], 0.125 - 1.5 - 1.0 + 2.0, 1e-12);
}

TEST(Svm, RejectsBadLabels) {
  const auto x = points({{0.0}, {1.0}});
  EXPECT_THROW(fit_linear_svm(x, std::vector<int>{0, 1}, SvmParams{}), Error);
  try {
    fit_linear_svm(x, std::vector<int>{1, 1}, SvmParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingleClass);
  }
}
