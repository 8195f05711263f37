#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "algoseek/error.hpp"
#include "algoseek/icfg.hpp"

// Graph autoencoder: two-layer GCN encoder, inner-product decoder, trained by
// link prediction with sampled negatives.
namespace algoseek::gae {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class NonSquare : public Error {
 public:
  NonSquare(Eigen::Index rows, Eigen::Index cols);
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(Eigen::Index model_d_in, Eigen::Index features);
};

class EmptyBatch : public Error {
 public:
  EmptyBatch() : Error("loss needs at least one edge") {}
};

class InsufficientEdges : public Error {
 public:
  using Error::Error;
};

struct GaeModel {
  int d_in = 0;
  int h = 0;
  Matrix W0;  // d_in x h
  Matrix W1;  // h x h
  std::uint64_t seed = 0;
  std::string config_hash;

  bool operator==(const GaeModel&) const;
};

// Uniform Glorot initialisation from a seeded generator.
GaeModel init_model(int d_in, int h, std::uint64_t seed);

// D^-1/2 B D^-1/2 with B = min(1, A + A^T + I) and D the row sums of B.
Matrix normalize_adjacency(const Matrix& a);

// The same normalisation built from an undirected edge list over n nodes.
SparseMatrix normalize_adjacency(int n, const std::vector<std::pair<int, int>>& edges);

// Z = Â ReLU(Â X W0) W1.
Matrix encode(const GaeModel& model, const Matrix& x, const Matrix& a);
Matrix encode_normalized(const GaeModel& model, const Matrix& x,
                         const SparseMatrix& a_hat);

// sigmoid(z_i . z_j).
double decode_edge(const Matrix& z, int i, int j);

struct NodePair {
  int i = 0;
  int j = 0;
};

inline constexpr double kProbabilityFloor = 1e-12;

// Summed cross-entropy over positives (label 1) and negatives (label 0),
// probabilities clamped to [1e-12, 1 - 1e-12].
double loss(const Matrix& z, const std::vector<NodePair>& positives,
            const std::vector<NodePair>& negatives);

struct Gradients {
  double loss = 0.0;
  Matrix d_w0;
  Matrix d_w1;
};

// Loss and its gradient with respect to W0 and W1 for one graph.
Gradients loss_gradients(const GaeModel& model, const Matrix& x,
                         const SparseMatrix& a_hat,
                         const std::vector<NodePair>& positives,
                         const std::vector<NodePair>& negatives);

// Probability that a random positive outscores a random negative, ties
// counting one half (Mann-Whitney U / (|pos| |neg|)).
double auc(const std::vector<double>& positive_scores,
           const std::vector<double>& negative_scores);

struct GraphInput {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // directed; duplicates allowed
  Matrix x;                                // n x d_in
};

GraphInput graph_input(const icfg::Icfg& g, Matrix features);

struct TrainConfig {
  int h = 512;
  double learning_rate = 0.01;
  int batch_size = 2048;
  double split_ratio = 0.8;
  int max_epochs = 200;
  int patience = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;  // summed over the epoch's batches
  double auc = 0.0;   // validation
};

struct TrainResult {
  GaeModel model;  // weights of the best validation epoch
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

// Pools undirected edges over all graphs, splits them by a seeded shuffle,
// and trains with Adam; validation edges are withheld from the training
// adjacency. Negatives are drawn per batch from non-edges of the same graph,
// falling back to cross-graph pairs when a graph is complete.
TrainResult train(const std::vector<GraphInput>& graphs, const TrainConfig& config,
                  std::uint64_t seed);

struct Embedding {
  Matrix z;      // n x h
  Matrix final;  // n x (h + d_in), rows z_i ‖ x_i
};

Embedding embed(const GaeModel& model, const GraphInput& graph);

std::string to_json(const GaeModel& model);
GaeModel model_from_json(std::string_view text);
void write_model(const GaeModel& model, const std::filesystem::path& path);
GaeModel read_model(const std::filesystem::path& path);

}  // namespace algoseek::gae
