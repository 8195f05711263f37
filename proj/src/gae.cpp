#include "algoseek/gae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "algoseek/random.hpp"

namespace algoseek::gae {

NonSquare::NonSquare(Eigen::Index rows, Eigen::Index cols)
    : Error("adjacency matrix is " + std::to_string(rows) + "x" +
            std::to_string(cols) + ", expected square") {}

DimensionMismatch::DimensionMismatch(Eigen::Index model_d_in, Eigen::Index features)
    : Error("model expects " + std::to_string(model_d_in) +
            " input features, graph has " + std::to_string(features)) {}

bool GaeModel::operator==(const GaeModel& o) const {
  return d_in == o.d_in && h == o.h && W0 == o.W0 && W1 == o.W1 &&
         seed == o.seed && config_hash == o.config_hash;
}

namespace {

GaeModel init_from(int d_in, int h, Rng& rng) {
  if (d_in <= 0 || h <= 0) throw ShapeMismatch("model dimensions must be positive");
  GaeModel m;
  m.d_in = d_in;
  m.h = h;
  auto glorot = [&](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Matrix w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = uniform(rng, -limit, limit);
    return w;
  };
  m.W0 = glorot(d_in, h);
  m.W1 = glorot(h, h);
  return m;
}

double sigmoid(double s) {
  if (s >= 0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

struct Forward {
  Matrix p;  // Â X
  Matrix h;  // P W0
  Matrix m;  // Â ReLU(H)
  Matrix z;  // M W1
};

Forward forward(const GaeModel& model, const Matrix& p, const SparseMatrix& a_hat) {
  Forward f;
  f.p = p;
  f.h = p * model.W0;
  f.m = a_hat * f.h.cwiseMax(0.0);
  f.z = f.m * model.W1;
  return f;
}

// Adds the cross-entropy of one labelled pair to `loss` and its gradient with
// respect to Z to `dz`.
void accumulate_pair(const Matrix& z, int i, int j, double label, double& loss,
                     Matrix& dz) {
  double p = sigmoid(z.row(i).dot(z.row(j)));
  double g = p - label;
  if (p < kProbabilityFloor) {
    p = kProbabilityFloor;
    g = 0.0;
  } else if (p > 1.0 - kProbabilityFloor) {
    p = 1.0 - kProbabilityFloor;
    g = 0.0;
  }
  loss -= label * std::log(p) + (1.0 - label) * std::log(1.0 - p);
  if (g != 0.0) {
    const Eigen::RowVectorXd zi = z.row(i), zj = z.row(j);
    dz.row(i) += g * zj;
    dz.row(j) += g * zi;
  }
}

Gradients backward(const GaeModel& model, const Forward& f, const SparseMatrix& a_hat,
                   const std::vector<NodePair>& positives,
                   const std::vector<NodePair>& negatives) {
  Gradients out;
  Matrix dz = Matrix::Zero(f.z.rows(), f.z.cols());
  for (const NodePair& e : positives) accumulate_pair(f.z, e.i, e.j, 1.0, out.loss, dz);
  for (const NodePair& e : negatives) accumulate_pair(f.z, e.i, e.j, 0.0, out.loss, dz);
  out.d_w1 = f.m.transpose() * dz;
  const Matrix dm = dz * model.W1.transpose();
  Matrix dh = a_hat * dm;
  dh.array() *= (f.h.array() > 0.0).cast<double>();
  out.d_w0 = f.p.transpose() * dh;
  return out;
}

void check_pairs(const std::vector<NodePair>& pairs, Eigen::Index n) {
  for (const NodePair& e : pairs) {
    if (e.i < 0 || e.i >= n) throw icfg::UnknownNode(e.i);
    if (e.j < 0 || e.j >= n) throw icfg::UnknownNode(e.j);
  }
}

}  // namespace

GaeModel init_model(int d_in, int h, std::uint64_t seed) {
  Rng rng(seed);
  GaeModel m = init_from(d_in, h, rng);
  m.seed = seed;
  return m;
}

Matrix normalize_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw NonSquare(a.rows(), a.cols());
  const Eigen::Index n = a.rows();
  Matrix b = a + a.transpose() + Matrix::Identity(n, n);
  b = (b.array() > 0.0).cast<double>();
  const Eigen::VectorXd inv_sqrt = b.rowwise().sum().cwiseSqrt().cwiseInverse();
  return inv_sqrt.asDiagonal() * b * inv_sqrt.asDiagonal();
}

SparseMatrix normalize_adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(edges.size() * 2 + static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n) throw icfg::UnknownNode(u);
    if (v < 0 || v >= n) throw icfg::UnknownNode(v);
    t.emplace_back(u, v, 1.0);
    t.emplace_back(v, u, 1.0);
  }
  SparseMatrix b(n, n);
  b.setFromTriplets(t.begin(), t.end(), [](double, double) { return 1.0; });
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(b.row(i).sum());
  for (int r = 0; r < b.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(b, r); it; ++it)
      it.valueRef() = inv_sqrt[it.row()] * inv_sqrt[it.col()];
  return b;
}

namespace {

void check_shapes(const GaeModel& model, const Matrix& x, const SparseMatrix& a_hat) {
  if (x.cols() != model.d_in)
    throw ShapeMismatch("features have " + std::to_string(x.cols()) +
                        " columns, model expects " + std::to_string(model.d_in));
  if (x.rows() != a_hat.rows())
    throw ShapeMismatch("features have " + std::to_string(x.rows()) +
                        " rows, adjacency has " + std::to_string(a_hat.rows()));
}

}  // namespace

Matrix encode_normalized(const GaeModel& model, const Matrix& x,
                         const SparseMatrix& a_hat) {
  check_shapes(model, x, a_hat);
  const Matrix p = a_hat * x;
  return forward(model, p, a_hat).z;
}

Matrix encode(const GaeModel& model, const Matrix& x, const Matrix& a) {
  const Matrix dense = normalize_adjacency(a);
  return encode_normalized(model, x, dense.sparseView());
}

double decode_edge(const Matrix& z, int i, int j) {
  check_pairs({{i, j}}, z.rows());
  return sigmoid(z.row(i).dot(z.row(j)));
}

double loss(const Matrix& z, const std::vector<NodePair>& positives,
            const std::vector<NodePair>& negatives) {
  if (positives.empty() && negatives.empty()) throw EmptyBatch();
  check_pairs(positives, z.rows());
  check_pairs(negatives, z.rows());
  double total = 0.0;
  Matrix scratch = Matrix::Zero(z.rows(), z.cols());
  for (const NodePair& e : positives) accumulate_pair(z, e.i, e.j, 1.0, total, scratch);
  for (const NodePair& e : negatives) accumulate_pair(z, e.i, e.j, 0.0, total, scratch);
  return total;
}

Gradients loss_gradients(const GaeModel& model, const Matrix& x,
                         const SparseMatrix& a_hat,
                         const std::vector<NodePair>& positives,
                         const std::vector<NodePair>& negatives) {
  if (positives.empty() && negatives.empty()) throw EmptyBatch();
  check_pairs(positives, x.rows());
  check_pairs(negatives, x.rows());
  check_shapes(model, x, a_hat);
  return backward(model, forward(model, a_hat * x, a_hat), a_hat, positives, negatives);
}

double auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw EmptyBatch();
  // Midranks over the pooled scores.
  std::vector<std::pair<double, int>> all;
  for (double s : pos) all.emplace_back(s, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second) rank_sum += mid;
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1) / 2.0) / (np * nn);
}

GraphInput graph_input(const icfg::Icfg& g, Matrix features) {
  if (features.rows() != static_cast<Eigen::Index>(g.size()))
    throw ShapeMismatch("feature matrix has " + std::to_string(features.rows()) +
                        " rows for a graph of " + std::to_string(g.size()) + " nodes");
  GraphInput in;
  in.n = static_cast<int>(g.size());
  for (const icfg::IcfgEdge& e : g.edges) in.edges.emplace_back(e.src, e.dst);
  in.x = std::move(features);
  return in;
}

void TrainConfig::validate() const {
  if (h <= 0) throw UsageError("gae.h must be positive");
  if (!(learning_rate > 0)) throw UsageError("gae.learning_rate must be positive");
  if (batch_size <= 0) throw UsageError("gae.batch_size must be positive");
  if (!(split_ratio > 0 && split_ratio < 1)) throw UsageError("gae.split_ratio must lie in (0, 1)");
  if (max_epochs <= 0) throw UsageError("gae.max_epochs must be positive");
  if (patience <= 0) throw UsageError("gae.patience must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
    throw UsageError("Adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0)) throw UsageError("gae.adam_epsilon must be positive");
}

// ----------------------------------------------------------------- training

namespace {

// All graphs as one block-diagonal system over global node indices.
struct Corpus {
  int n = 0;
  int d_in = 0;
  Matrix x;
  std::vector<int> offset;                 // first global index per graph
  std::vector<int> size;                   // nodes per graph
  std::vector<std::int64_t> non_edges;     // unordered non-adjacent pairs
  std::vector<NodePair> edges;             // unique unordered, no self-loops
  std::vector<int> edge_graph;             // owning graph per edge
  std::unordered_set<std::uint64_t> edge_set;

  std::uint64_t key(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
           static_cast<std::uint64_t>(j);
  }
};

Corpus pool(const std::vector<GraphInput>& graphs) {
  Corpus c;
  if (graphs.empty()) throw InsufficientEdges("no graphs to train on");
  c.d_in = static_cast<int>(graphs.front().x.cols());
  for (const GraphInput& g : graphs) {
    if (g.x.rows() != g.n || g.x.cols() != c.d_in)
      throw ShapeMismatch("graph features must be n x " + std::to_string(c.d_in));
    c.offset.push_back(c.n);
    c.size.push_back(g.n);
    c.n += g.n;
  }
  c.x.resize(c.n, c.d_in);
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const GraphInput& g = graphs[gi];
    if (g.n > 0) c.x.middleRows(c.offset[gi], g.n) = g.x;
    std::vector<std::pair<int, int>> local;
    for (auto [u, v] : g.edges) {
      if (u < 0 || u >= g.n) throw icfg::UnknownNode(u);
      if (v < 0 || v >= g.n) throw icfg::UnknownNode(v);
      if (u == v) continue;
      local.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(local.begin(), local.end());
    local.erase(std::unique(local.begin(), local.end()), local.end());
    for (auto [u, v] : local) {
      const NodePair e{c.offset[gi] + u, c.offset[gi] + v};
      c.edges.push_back(e);
      c.edge_graph.push_back(static_cast<int>(gi));
      c.edge_set.insert(c.key(e.i, e.j));
    }
    const std::int64_t n = g.n;
    c.non_edges.push_back(n * (n - 1) / 2 - static_cast<std::int64_t>(local.size()));
  }
  return c;
}

NodePair sample_negative(const Corpus& c, int graph, Rng& rng) {
  const int base = c.offset[graph], n = c.size[graph];
  if (c.non_edges[graph] > 0) {
    for (;;) {
      const int i = base + static_cast<int>(uniform_index(rng, n));
      const int j = base + static_cast<int>(uniform_index(rng, n));
      if (i != j && !c.edge_set.contains(c.key(i, j))) return {i, j};
    }
  }
  // Complete graph: pair a node with one from a different graph.
  const int i = base + static_cast<int>(uniform_index(rng, n));
  const auto outside = static_cast<std::size_t>(c.n - n);
  auto j = static_cast<int>(uniform_index(rng, outside));
  if (j >= base) j += n;
  return {i, j};
}

struct Adam {
  Matrix m0, v0, m1, v1;
  int t = 0;

  Adam(const GaeModel& model)
      : m0(Matrix::Zero(model.W0.rows(), model.W0.cols())),
        v0(m0),
        m1(Matrix::Zero(model.W1.rows(), model.W1.cols())),
        v1(m1) {}

  void step(GaeModel& model, const Gradients& g, const TrainConfig& cfg) {
    ++t;
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    auto update = [&](Matrix& w, Matrix& m, Matrix& v, const Matrix& grad) {
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
      w.array() -= cfg.learning_rate * (m.array() / c1) /
                   ((v.array() / c2).sqrt() + cfg.adam_epsilon);
    };
    update(model.W0, m0, v0, g.d_w0);
    update(model.W1, m1, v1, g.d_w1);
  }
};

}  // namespace

TrainResult train(const std::vector<GraphInput>& graphs, const TrainConfig& config,
                  std::uint64_t seed) {
  config.validate();
  Corpus c = pool(graphs);
  if (c.edges.size() < 2)
    throw InsufficientEdges("training needs at least 2 distinct edges, found " +
                            std::to_string(c.edges.size()));
  const bool any_non_edge =
      std::any_of(c.non_edges.begin(), c.non_edges.end(), [](auto k) { return k > 0; });
  if (!any_non_edge && graphs.size() < 2)
    throw InsufficientEdges("the only graph is complete; no negatives to sample");

  Rng rng(seed);
  TrainResult result;
  result.model = init_from(c.d_in, config.h, rng);
  result.model.seed = seed;

  std::vector<std::size_t> order(c.edges.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(std::span(order), rng);
  auto n_train = static_cast<std::size_t>(config.split_ratio * static_cast<double>(order.size()));
  n_train = std::clamp<std::size_t>(n_train, 1, order.size() - 1);

  std::vector<std::size_t> train_edges(order.begin(), order.begin() + static_cast<long>(n_train));
  std::vector<NodePair> val_pos, val_neg;
  std::vector<std::pair<int, int>> train_adj;
  for (std::size_t k : train_edges) train_adj.emplace_back(c.edges[k].i, c.edges[k].j);
  for (std::size_t k = n_train; k < order.size(); ++k) {
    val_pos.push_back(c.edges[order[k]]);
    val_neg.push_back(sample_negative(c, c.edge_graph[order[k]], rng));
  }
  const SparseMatrix a_hat = normalize_adjacency(c.n, train_adj);
  const Matrix p = a_hat * c.x;

  Adam adam(result.model);
  GaeModel& model = result.model;
  GaeModel best = model;
  double best_auc = -1.0;
  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span(train_edges), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_edges.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train_edges.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<NodePair> pos, neg;
      for (std::size_t k = start; k < stop; ++k) {
        pos.push_back(c.edges[train_edges[k]]);
        neg.push_back(sample_negative(c, c.edge_graph[train_edges[k]], rng));
      }
      const Gradients g = backward(model, forward(model, p, a_hat), a_hat, pos, neg);
      epoch_loss += g.loss;
      adam.step(model, g, config);
    }
    const Matrix z = forward(model, p, a_hat).z;
    std::vector<double> sp, sn;
    for (const NodePair& e : val_pos) sp.push_back(z.row(e.i).dot(z.row(e.j)));
    for (const NodePair& e : val_neg) sn.push_back(z.row(e.i).dot(z.row(e.j)));
    const double val_auc = auc(sp, sn);
    result.history.push_back({epoch, epoch_loss, val_auc});
    if (val_auc > best_auc) {
      best_auc = val_auc;
      best = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  result.model = std::move(best);
  return result;
}

Embedding embed(const GaeModel& model, const GraphInput& graph) {
  if (graph.x.cols() != model.d_in) throw DimensionMismatch(model.d_in, graph.x.cols());
  if (graph.x.rows() != graph.n)
    throw ShapeMismatch("feature rows do not match node count");
  Embedding e;
  e.z = encode_normalized(model, graph.x, normalize_adjacency(graph.n, graph.edges));
  e.final.resize(graph.n, model.h + model.d_in);
  e.final << e.z, graph.x;
  return e;
}

// --------------------------------------------------------------------- JSON

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const nlohmann::json& j, int rows, int cols, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    throw Error(std::string("model field ") + name + " must have " +
                std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw Error(std::string("model field ") + name + " must have " +
                  std::to_string(cols) + " columns");
    for (int c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error(std::string("model field ") + name + " holds a non-number");
      m(r, c) = v.get<double>();
      if (!std::isfinite(m(r, c))) throw Error(std::string("model field ") + name + " is not finite");
    }
  }
  return m;
}

}  // namespace

std::string to_json(const GaeModel& model) {
  nlohmann::json j = {{"version", 1},
                      {"d_in", model.d_in},
                      {"h", model.h},
                      {"W0", matrix_json(model.W0)},
                      {"W1", matrix_json(model.W1)},
                      {"seed", model.seed},
                      {"config_hash", model.config_hash}};
  return j.dump() + "\n";
}

GaeModel model_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1)
      throw Error("unsupported model version " + j.at("version").dump());
    GaeModel m;
    m.d_in = j.at("d_in").get<int>();
    m.h = j.at("h").get<int>();
    if (m.d_in <= 0 || m.h <= 0) throw Error("model dimensions must be positive");
    m.W0 = matrix_from(j.at("W0"), m.d_in, m.h, "W0");
    m.W1 = matrix_from(j.at("W1"), m.h, m.h, "W1");
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

void write_model(const GaeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(model);
}

GaeModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace algoseek::gae
