#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "iotids/neural/train.hpp"

using namespace iotids;
using namespace iotids::nn;

TEST(Glorot, BoundsAndSamples) {
  EXPECT_NEAR(glorot_bound(6, 6), 0.7071067812, 1e-9);
  EXPECT_EQ(glorot_bound(1, 5), 1.0);
  Rng rng(3);
  const auto w = glorot_uniform(6, 6, rng, 20000);
  const double b = glorot_bound(6, 6);
  for (double v : w) {
    ASSERT_LT(v, b);
    ASSERT_GT(v, -b);
  }
  Rng r1(9), r2(9);
  EXPECT_EQ(glorot_uniform(4, 3, r1), glorot_uniform(4, 3, r2));
  Rng r3(9);
  EXPECT_EQ(glorot_uniform(4, 3, r3).size(), 12u);
}

TEST(Activations, Relu) {
  EXPECT_EQ(relu(3.5).value, 3.5);
  EXPECT_EQ(relu(3.5).grad, 1.0);
  EXPECT_EQ(relu(-2.0).value, 0.0);
  EXPECT_EQ(relu(0.0).value, 0.0);
  EXPECT_EQ(relu(0.0).grad, 0.0);
}

TEST(Activations, Elu) {
  EXPECT_EQ(elu(0.0, 1.0).value, 0.0);
  EXPECT_EQ(elu(2.0, 0.3).value, 2.0);
  EXPECT_EQ(elu(2.0, 0.3).grad, 1.0);
  EXPECT_NEAR(elu(-1.0, 1.0).value, std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(elu(-1.0, 1.0).value, -0.6321205588, 1e-9);
  EXPECT_NEAR(elu(-1.0, 2.0).grad, 2.0 * std::exp(-1.0), 1e-15);
}

TEST(Softmax, Examples) {
  for (double c : {-5.0, 0.0, 3.0, 700.0}) {
    const std::vector<double> z(4, c);
    for (double p : softmax(z)) EXPECT_NEAR(p, 0.25, 1e-15);
  }
  const std::vector<double> z{0.0, std::log(3.0)};
  const auto p = softmax(z);
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
  const std::vector<double> a{1.0, -2.0, 0.5}, b{11.0, 8.0, 10.5};
  const auto pa = softmax(a), pb = softmax(b);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(pa[i], pb[i], 1e-15);
}

TEST(CrossEntropy, Examples) {
  const std::vector<double> hot{0, 1, 0};
  EXPECT_EQ(categorical_cross_entropy(std::vector<double>{0, 1, 0}, hot), 0.0);
  const std::vector<double> uniform(7, 1.0 / 7.0);
  std::vector<double> y7(7, 0.0);
  y7[3] = 1.0;
  EXPECT_NEAR(categorical_cross_entropy(uniform, y7), std::log(7.0), 1e-12);
  EXPECT_NEAR(categorical_cross_entropy(uniform, y7), 1.9459101491, 1e-9);
  EXPECT_NEAR(categorical_cross_entropy(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}), 0.6931471806,
              1e-9);
  for (const auto& bad : {std::vector<double>{1, 1}, std::vector<double>{0.5, 0.5}, std::vector<double>{0, 0}}) {
    try {
      categorical_cross_entropy(std::vector<double>{0.5, 0.5}, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::BadOneHot);
    }
  }
}

TEST(ElasticNet, Examples) {
  const std::vector<double> w{-2.0};
  EXPECT_NEAR(elastic_net_value(w, 0.1, 0.05), 0.4, 1e-15);
  std::vector<double> g{1.5};
  elastic_net_grad(w, 0.0, 0.0, g);
  EXPECT_EQ(g[0], 1.5);
  EXPECT_EQ(elastic_net_value(w, 0.0, 0.0), 0.0);
  std::vector<double> g0{0.0};
  elastic_net_grad(std::vector<double>{0.0}, 0.1, 0.05, g0);
  EXPECT_EQ(g0[0], 0.0);
  std::vector<double> g2{0.0};
  elastic_net_grad(w, 0.1, 0.05, g2);
  EXPECT_NEAR(g2[0], -0.1 - 0.2, 1e-15);
}

TEST(BuildAnn, DefaultShapes) {
  Network net(build_ann(36, 7), 1);
  const std::vector<std::size_t> expect{36 * 128, 128, 128, 128, 128 * 64, 64, 64, 64,
                                        64 * 32,  32,  32,  32,  32 * 7,   7,  7,  7};
  EXPECT_EQ(parameter_sizes(net), expect);
  const auto spec = build_ann(36, 2);
  EXPECT_EQ(spec.layers.size(), 15u);
  EXPECT_EQ(spec.layers[12].units, 2u);
  EXPECT_EQ(spec.layers.back().kind, "softmax");
  EXPECT_EQ(spec.layers[2].kind, "elu");
  EXPECT_EQ(spec.layers[3].rate, 0.2);
}

TEST(BuildAnn, Overrides) {
  AnnOptions o;
  o.hidden = {16, 8, 4};
  Network net(build_ann(10, 3, o), 1);
  const std::vector<std::size_t> expect{160, 16, 16, 16, 128, 8, 8, 8, 32, 4, 4, 4, 12, 3, 3, 3};
  EXPECT_EQ(parameter_sizes(net), expect);
}

TEST(BuildCnn, DefaultShapes) {
  Network net(build_cnn(36, 7), 1);
  const std::vector<std::size_t> expect{32 * 3, 32, 544 * 64, 64, 64 * 7, 7};
  EXPECT_EQ(parameter_sizes(net), expect);
  const auto spec = build_cnn(36, 7);
  std::vector<std::string> kinds;
  for (const auto& l : spec.layers) kinds.push_back(l.kind);
  EXPECT_EQ(kinds, (std::vector<std::string>{"conv1d", "relu", "maxpool1d", "dropout", "flatten", "dense", "relu",
                                             "dense", "softmax"}));
  Tensor x({1, 36});
  Network copy(spec, 2);
  auto& layers = copy.layers();
  Tensor t = layers[0]->forward(x, Mode::Eval, nullptr);
  EXPECT_EQ(t.shape, (std::vector<std::size_t>{1, 32, 34}));
  t = layers[1]->forward(t, Mode::Eval, nullptr);
  t = layers[2]->forward(t, Mode::Eval, nullptr);
  EXPECT_EQ(t.shape, (std::vector<std::size_t>{1, 32, 17}));
}

TEST(BuildCnn, NarrowInputs) {
  Network net(build_cnn(3, 2), 1);
  const auto out = net.predict_proba(Matrix(2, 3));
  EXPECT_EQ(out.cols, 2u);
  try {
    build_cnn(2, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputTooNarrow);
  }
}

TEST(MaxPool, PairMaximum) {
  MaxPool1d pool(2);
  Tensor x({1, 1, 2});
  x.data = {5.0, 1.0};
  const auto y = pool.forward(x, Mode::Eval, nullptr);
  EXPECT_EQ(y.data, (std::vector<double>{5.0}));
  Tensor g({1, 1, 1});
  g.data = {2.0};
  EXPECT_EQ(pool.backward(g).data, (std::vector<double>{2.0, 0.0}));
}

TEST(GradCheck, LinearNetMatchesClosedForm) {
  NetworkSpec spec;
  spec.name = "linear";
  spec.input_width = 3;
  spec.class_count = 3;
  spec.lambda1 = 0.0;
  spec.lambda2 = 0.0;
  spec.layers = {{.kind = "dense", .units = 3}, {.kind = "softmax"}};
  Network net(spec, 4);
  const auto b = fixtures::axis_blobs(3, 3, 3, 1.0, 5);
  EXPECT_LE(grad_check(net, b.x, b.y), 1e-7);

  // Closed form: dL/dW = X^T (P - Y) / n.
  net.zero_grad();
  net.loss(Tensor::from_matrix(b.x), b.y, Mode::Eval, nullptr, true);
  const auto p = net.predict_proba(b.x);
  const auto& kernel = *net.params()[0];
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      double g = 0.0;
      for (std::size_t r = 0; r < b.x.rows; ++r) {
        g += b.x(r, i) * (p(r, k) - (static_cast<std::size_t>(b.y[r]) == k ? 1.0 : 0.0));
      }
      EXPECT_NEAR(kernel.grad[i * 3 + k], g / static_cast<double>(b.x.rows), 1e-12);
    }
  }
}

TEST(GradCheck, SmallAnnAndCnn) {
  AnnOptions ao;
  ao.hidden = {3};
  Network ann(build_ann(4, 2, ao), 7);
  const auto a = fixtures::axis_blobs(2, 4, 4, 1.0, 6);
  EXPECT_LE(grad_check(ann, a.x, a.y), 1e-4);

  CnnOptions co;
  co.filters = 2;
  co.dense = 4;
  Network cnn(build_cnn(8, 2, co), 7);
  const auto c = fixtures::axis_blobs(2, 4, 8, 1.0, 6);
  EXPECT_LE(grad_check(cnn, c.x, c.y), 1e-4);
}

TEST(TrainNetwork, ZeroLearningRateLeavesParameters) {
  CnnOptions co;
  co.filters = 4;
  co.dense = 8;
  Network net(build_cnn(6, 2, co), 3);
  const auto before = net.arrays();
  const auto b = fixtures::axis_blobs(2, 20, 6, 3.0, 2);
  TrainParams tp;
  tp.lr = 0.0;
  tp.epochs = 4;
  tp.patience = 10;
  tp.batch = 8;
  const auto curve = train_network(net, b.x, b.y, b.x, b.y, tp);
  EXPECT_EQ(net.arrays(), before);
  ASSERT_EQ(curve.val_loss.size(), 4u);
  for (double v : curve.val_loss) EXPECT_EQ(v, curve.val_loss[0]);
}

TEST(TrainNetwork, AnnOnSeparableBlobs) {
  const auto b = fixtures::axis_blobs(2, 300, 4, 5.0, 12);
  const auto p = fixtures::split_and_scale(b, 2, {0.7, 0.0, 0.3}, 4);
  AnnOptions ao;
  ao.hidden = {16, 8};
  Network net(build_ann(4, 2, ao), 5);
  TrainParams tp;
  tp.epochs = 30;
  tp.batch = 32;
  tp.lr = 1e-2;
  tp.seed = 6;
  const auto curve = train_network(net, p.x_train, p.y_train, p.x_val, p.y_val, tp);
  EXPECT_LE(curve.stopped_epoch, 30u);
  EXPECT_GE(curve.val_accuracy[curve.best_epoch - 1], 0.98);
  EXPECT_GE(fixtures::accuracy(p.y_val, net.predict(p.x_val)), 0.98);
}

TEST(TrainNetwork, PlantedMinimumRestoresBest) {
  const auto f = fixtures::planted_minimum(8);
  AnnOptions ao;
  ao.hidden = {64, 64};
  ao.dropout = 0.0;
  ao.lambda1 = 0.0;
  ao.lambda2 = 0.0;
  Network net(build_ann(f.x_train.cols, 2, ao), 2);
  TrainParams tp;
  tp.epochs = 300;
  tp.batch = 16;
  tp.lr = 3e-3;
  tp.patience = 5;
  tp.seed = 3;
  const auto curve = train_network(net, f.x_train, f.y_train, f.x_val, f.y_val, tp);
  EXPECT_GT(curve.best_epoch, 1u);
  EXPECT_LT(curve.stopped_epoch, tp.epochs);
  const auto it = std::min_element(curve.val_loss.begin(), curve.val_loss.end());
  EXPECT_EQ(curve.best_epoch, static_cast<std::size_t>(it - curve.val_loss.begin()) + 1);
  EXPECT_LE(curve.stopped_epoch - curve.best_epoch, tp.patience);
  EXPECT_NEAR(evaluate_network(net, f.x_val, f.y_val).first, *it, 1e-12);
}

TEST(TrainNetwork, Errors) {
  Network net(build_ann(2, 2), 1);
  const Matrix x(4, 2);
  const std::vector<int> y{0, 1, 0, 1};
  try {
    train_network(net, x, y, Matrix(0, 2), std::vector<int>{}, TrainParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyValidation);
  }
  try {
    train_network(net, Matrix(4, 3), y, Matrix(4, 3), y, TrainParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
  }
  TrainParams huge;
  huge.lr = 1e300;
  huge.epochs = 3;
  Matrix big(4, 2);
  for (auto& v : big.data) v = 1e200;
  EXPECT_THROW(train_network(net, big, y, big, y, huge), Error);
}

TEST(Network, CopyIsIndependentAndDeterministic) {
  Network a(build_ann(3, 2), 11), b(build_ann(3, 2), 11);
  EXPECT_EQ(a.arrays(), b.arrays());
  Network c = a;
  c.params()[0]->value[0] += 1.0;
  EXPECT_NE(c.arrays(), a.arrays());
}
