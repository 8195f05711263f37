#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "algoseek/gae.hpp"
#include "algoseek/random.hpp"
#include "support/gae_fixtures.hpp"

using namespace algoseek::gae;
using algoseek::testing::random_graph_input;
using algoseek::testing::two_cliques;
using algoseek::testing::dense_adjacency;
using algoseek::testing::oracle_encode;
using algoseek::testing::oracle_normalized;
using algoseek::testing::relative_error;

namespace {

// ROC area by sweeping every distinct threshold and integrating with the
// trapezoid rule.
double sweep_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::vector<double> thresholds(pos);
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double area = 0, prev_tpr = 0, prev_fpr = 0;
  for (double t : thresholds) {
    const double tpr = static_cast<double>(std::count_if(pos.begin(), pos.end(),
                                                         [t](double s) { return s >= t; })) /
                       static_cast<double>(pos.size());
    const double fpr = static_cast<double>(std::count_if(neg.begin(), neg.end(),
                                                         [t](double s) { return s >= t; })) /
                       static_cast<double>(neg.size());
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

}  // namespace

// ------------------------------------------------------------ normalization

TEST(NormalizeAdjacency, SingleNode) {
  EXPECT_EQ(normalize_adjacency(Matrix::Zero(1, 1)), Matrix::Ones(1, 1));
}

TEST(NormalizeAdjacency, SingleEdge) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1;
  EXPECT_TRUE(normalize_adjacency(a).isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
}

TEST(NormalizeAdjacency, NonSquare) {
  EXPECT_THROW(normalize_adjacency(Matrix::Zero(2, 3)), NonSquare);
}

TEST(NormalizeAdjacency, SymmetricAndMatchesOracle) {
  algoseek::Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const GraphInput g = random_graph_input(rng, 1 + static_cast<int>(algoseek::uniform_index(rng, 12)), 2);
    const Matrix a = dense_adjacency(g);
    const Matrix ah = normalize_adjacency(a);
    EXPECT_EQ(ah, ah.transpose());
    EXPECT_LE((ah - oracle_normalized(a)).cwiseAbs().maxCoeff(), 1e-15);
    const Matrix sparse = Matrix(normalize_adjacency(g.n, g.edges));
    EXPECT_LE((sparse - ah).cwiseAbs().maxCoeff(), 1e-15);
  }
}

// ------------------------------------------------------------------ encode

TEST(Encode, SingleNodeIdentityWeights) {
  GaeModel m = init_model(3, 3, 0);
  m.W0 = Matrix::Identity(3, 3);
  m.W1 = Matrix::Identity(3, 3);
  Matrix x(1, 3);
  x << 1, 2, 3;
  EXPECT_EQ(encode(m, x, Matrix::Zero(1, 1)), x);
}

TEST(Encode, SingleNodePaddedToH) {
  GaeModel m = init_model(2, 4, 0);
  m.W0 = Matrix::Identity(2, 4);
  m.W1 = Matrix::Identity(4, 4);
  Matrix x(1, 2);
  x << 0.5, 2;
  Matrix want(1, 4);
  want << 0.5, 2, 0, 0;
  EXPECT_EQ(encode(m, x, Matrix::Zero(1, 1)), want);
}

TEST(Encode, ZeroFeatures) {
  const GaeModel m = init_model(4, 8, 3);
  algoseek::Rng rng(3);
  const GraphInput g = random_graph_input(rng, 6, 4);
  EXPECT_TRUE(encode(m, Matrix::Zero(6, 4), dense_adjacency(g)).isZero());
}

TEST(Encode, MatchesDenseOracle) {
  algoseek::Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const GaeModel m = init_model(5, 7, 100 + t);
    const GraphInput g = random_graph_input(rng, 6, 5);
    const Matrix a = dense_adjacency(g);
    const Matrix z = encode(m, g.x, a);
    EXPECT_LE((z - oracle_encode(m, g.x, a)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Encode, ShapeMismatch) {
  const GaeModel m = init_model(4, 8, 3);
  EXPECT_THROW(encode(m, Matrix::Zero(3, 5), Matrix::Zero(3, 3)), ShapeMismatch);
  EXPECT_THROW(encode(m, Matrix::Zero(2, 4), Matrix::Zero(3, 3)), ShapeMismatch);
}

TEST(Encode, PermutationEquivariant) {
  algoseek::Rng rng(8);
  for (int t = 0; t < 10; ++t) {
    const GaeModel m = init_model(4, 6, 50 + t);
    const GraphInput g = random_graph_input(rng, 8, 4);
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    algoseek::shuffle(std::span(perm), rng);
    GraphInput q;
    q.n = g.n;
    q.x.resize(g.n, 4);
    for (int i = 0; i < g.n; ++i) q.x.row(perm[i]) = g.x.row(i);
    for (auto [u, v] : g.edges) q.edges.emplace_back(perm[u], perm[v]);
    const Matrix z = encode(m, g.x, dense_adjacency(g));
    const Matrix zq = encode(m, q.x, dense_adjacency(q));
    for (int i = 0; i < g.n; ++i)
      EXPECT_LE((zq.row(perm[i]) - z.row(i)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// ------------------------------------------------------------------ decode

TEST(Decode, Examples) {
  Matrix z = Matrix::Zero(3, 2);
  z(1, 0) = 4;
  EXPECT_EQ(decode_edge(z, 0, 1), 0.5);
  EXPECT_EQ(decode_edge(z, 0, 2), 0.5);
  Matrix w(2, 1);
  w << std::sqrt(std::log(3.0)), std::sqrt(std::log(3.0));
  EXPECT_NEAR(decode_edge(w, 0, 1), 0.75, 1e-15);
  Matrix r(2, 3);
  r << 0.3, -1, 2, 0.7, 0.1, -0.4;
  EXPECT_EQ(decode_edge(r, 0, 1), decode_edge(r, 1, 0));
  EXPECT_THROW(decode_edge(r, 0, 2), algoseek::icfg::UnknownNode);
}

// -------------------------------------------------------------------- loss

TEST(Loss, Examples) {
  const Matrix z = Matrix::Zero(2, 3);
  EXPECT_NEAR(loss(z, {{0, 1}}, {{1, 0}}), 2 * std::log(2.0), 1e-15);
  Matrix big(3, 1);
  big << 100, 100, -100;
  const double perfect = loss(big, {{0, 1}}, {{0, 2}});
  EXPECT_GE(perfect, 0.0);
  EXPECT_LE(perfect, 2 * 1e-11);
  EXPECT_THROW(loss(z, {}, {}), EmptyBatch);
}

TEST(Loss, ShuffleInvariant) {
  algoseek::Rng rng(4);
  Matrix z(6, 3);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = algoseek::normal(rng);
  std::vector<NodePair> pos = {{0, 1}, {2, 3}, {4, 5}, {1, 4}};
  std::vector<NodePair> neg = {{0, 5}, {1, 3}, {2, 2}, {3, 0}};
  const double base = loss(z, pos, neg);
  std::reverse(pos.begin(), pos.end());
  std::rotate(neg.begin(), neg.begin() + 1, neg.end());
  EXPECT_NEAR(loss(z, pos, neg), base, 1e-12);
}

TEST(Gradients, MatchCentralDifferences) {
  algoseek::Rng rng(20);
  const double step = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const GaeModel m = init_model(3, 4, static_cast<std::uint64_t>(t));
    const GraphInput g = random_graph_input(rng, 5, 3);
    const SparseMatrix ah = normalize_adjacency(g.n, g.edges);
    const std::vector<NodePair> pos = {{0, 1}, {1, 2}, {3, 4}};
    const std::vector<NodePair> neg = {{0, 4}, {2, 3}, {1, 3}};
    const Gradients an = loss_gradients(m, g.x, ah, pos, neg);
    EXPECT_NEAR(an.loss, loss(encode_normalized(m, g.x, ah), pos, neg), 1e-12);
    const Matrix n0 = algoseek::testing::numeric_gradient(m, g.x, ah, pos, neg, true, step);
    const Matrix n1 = algoseek::testing::numeric_gradient(m, g.x, ah, pos, neg, false, step);
    EXPECT_LE(relative_error(an.d_w0, n0), 1e-4) << "instance " << t;
    EXPECT_LE(relative_error(an.d_w1, n1), 1e-4) << "instance " << t;
  }
}

// --------------------------------------------------------------------- AUC

TEST(Auc, RankSumMatchesThresholdSweep) {
  algoseek::Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> pos, neg;
    const auto np = 1 + algoseek::uniform_index(rng, 20);
    const auto nn = 1 + algoseek::uniform_index(rng, 20);
    // Coarse values force ties.
    for (std::size_t i = 0; i < np; ++i) pos.push_back(static_cast<double>(algoseek::uniform_index(rng, 6)));
    for (std::size_t i = 0; i < nn; ++i) neg.push_back(static_cast<double>(algoseek::uniform_index(rng, 5)));
    EXPECT_NEAR(auc(pos, neg), sweep_auc(pos, neg), 1e-9);
  }
  EXPECT_EQ(auc({3, 4}, {1, 2}), 1.0);
  EXPECT_EQ(auc({1}, {1}), 0.5);
  EXPECT_THROW(auc({}, {1}), EmptyBatch);
}

// ------------------------------------------------------------------- train

TEST(Train, TwoCliquesReachHighAuc) {
  TrainConfig cfg;
  cfg.max_epochs = 200;
  const TrainResult r = train({two_cliques(0)}, cfg, 0);
  ASSERT_FALSE(r.history.empty());
  double best = 0;
  for (const auto& e : r.history) best = std::max(best, e.auc);
  EXPECT_GE(best, 0.9);
  EXPECT_EQ(r.history[static_cast<std::size_t>(r.best_epoch - 1)].auc, best);
  EXPECT_LE(static_cast<int>(r.history.size()), 200);
}

TEST(Train, Deterministic) {
  TrainConfig cfg;
  cfg.h = 32;
  cfg.max_epochs = 15;
  const TrainResult a = train({two_cliques(1)}, cfg, 7);
  const TrainResult b = train({two_cliques(1)}, cfg, 7);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
    EXPECT_EQ(a.history[i].auc, b.history[i].auc);
  }
  EXPECT_NE(train({two_cliques(1)}, cfg, 8).model, a.model);
}

TEST(Train, LossDecreasesEarly) {
  TrainConfig cfg;
  cfg.max_epochs = 10;
  cfg.patience = 10;
  const TrainResult r = train({two_cliques(0)}, cfg, 0);
  ASSERT_EQ(r.history.size(), 10u);
  double best = r.history[0].loss;
  for (const auto& e : r.history) {
    EXPECT_LE(e.loss, best + 1e-6) << "epoch " << e.epoch;
    best = std::min(best, e.loss);
  }
}

TEST(Train, EarlyStoppingHonoursPatience) {
  TrainConfig cfg;
  cfg.h = 16;
  cfg.max_epochs = 500;
  cfg.patience = 3;
  const TrainResult r = train({two_cliques(2)}, cfg, 1);
  ASSERT_LT(static_cast<int>(r.history.size()), 500);
  EXPECT_EQ(static_cast<int>(r.history.size()), r.best_epoch + 3);
}

TEST(Train, InsufficientEdges) {
  GraphInput g;
  g.n = 3;
  g.x = Matrix::Ones(3, 2);
  g.edges = {{0, 1}, {1, 0}, {2, 2}};
  EXPECT_THROW(train({g}, {}, 0), InsufficientEdges);
  g.n = 2;
  g.x = Matrix::Ones(2, 2);
  g.edges = {{0, 1}};
  EXPECT_THROW(train({g}, {}, 0), InsufficientEdges);
  EXPECT_THROW(train({}, {}, 0), InsufficientEdges);
}

TEST(Train, CompleteGraphsUseCrossGraphNegatives) {
  GraphInput k3;
  k3.n = 3;
  k3.x = Matrix::Identity(3, 3);
  k3.edges = {{0, 1}, {1, 2}, {0, 2}};
  TrainConfig cfg;
  cfg.h = 8;
  cfg.max_epochs = 3;
  EXPECT_NO_THROW(train({k3, k3}, cfg, 0));
  EXPECT_THROW(train({k3}, cfg, 0), InsufficientEdges);
}

TEST(Train, InvalidConfig) {
  TrainConfig cfg;
  cfg.split_ratio = 1.0;
  EXPECT_THROW(train({two_cliques(0)}, cfg, 0), algoseek::UsageError);
}

// ------------------------------------------------------------------- embed

TEST(Embed, FinalIsZConcatX) {
  algoseek::Rng rng(2);
  const GaeModel m = init_model(4, 6, 1);
  const GraphInput g = random_graph_input(rng, 7, 4);
  const Embedding e = embed(m, g);
  ASSERT_EQ(e.final.cols(), 10);
  EXPECT_EQ(e.final.leftCols(6), e.z);
  EXPECT_EQ(e.final.rightCols(4), g.x);
  EXPECT_EQ(e.z, encode(m, g.x, dense_adjacency(g)));
}

TEST(Embed, ZeroFeaturesAndMismatch) {
  const GaeModel m = init_model(4, 6, 1);
  GraphInput g;
  g.n = 2;
  g.x = Matrix::Zero(2, 4);
  g.edges = {{0, 1}};
  EXPECT_TRUE(embed(m, g).final.isZero());
  g.x = Matrix::Zero(2, 5);
  EXPECT_THROW(embed(m, g), DimensionMismatch);
}

// -------------------------------------------------------------------- JSON

TEST(ModelJson, RoundTripIsExact) {
  GaeModel m = init_model(5, 9, 12345678901234ULL);
  m.config_hash = "abc123";
  EXPECT_EQ(model_from_json(to_json(m)), m);
  const auto path = std::filesystem::temp_directory_path() / "algoseek_model_test.json";
  write_model(m, path);
  EXPECT_EQ(read_model(path), m);
  std::filesystem::remove(path);
}

TEST(ModelJson, Malformed) {
  EXPECT_THROW(model_from_json("{}"), algoseek::Error);
  EXPECT_THROW(model_from_json("[1,2]"), algoseek::Error);
  EXPECT_THROW(model_from_json(R"({"version":1,"d_in":1,"h":1,"W0":[[1,2]],"W1":[[1]],"seed":0,"config_hash":""})"),
               algoseek::Error);
  EXPECT_THROW(model_from_json(R"({"version":2,"d_in":1,"h":1,"W0":[[1]],"W1":[[1]],"seed":0,"config_hash":""})"),
               algoseek::Error);
}
