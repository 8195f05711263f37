#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "algoseek/error.hpp"

// Textbook pseudo code to p-code: indentation and keywords give the control
// flow; label propagation decides whether each remaining statement is a math
// expression or a natural-language description.
namespace algoseek::pseudoconv {

enum class Label { Math, NaturalLanguage, Unlabeled };

struct LineSample {
  std::string text;
  Label label = Label::Unlabeled;
  Eigen::VectorXd features;
};

struct PropagationConfig {
  double alpha = 0.99;
  double sigma = 1.0;
  int max_iterations = 10000;
  // Iteration stops once the a-posteriori bound on the distance to the fixed
  // point, alpha / (1 - alpha) * max|F(t+1) - F(t)|, falls below epsilon.
  double epsilon = 1e-6;

  void validate() const;
};

class MissingClass : public Error {
 public:
  explicit MissingClass(Label missing);
};

class StructureError : public Error {
 public:
  StructureError(int line, const std::string& reason);
  int line() const { return line_; }

 private:
  int line_;
};

// Layout: 7 operator categories (log1p counts), digit density, stop-word
// ratio, log1p token count, then kTrigramBuckets hashed character trigrams.
inline constexpr int kTrigramBuckets = 64;
inline constexpr int kFeatureDim = 7 + 3 + kTrigramBuckets;
inline constexpr int kStopwordIndex = 8;

Eigen::VectorXd featurize(std::string_view line);

bool is_stopword(std::string_view lowercase_word);

// Row-normalized RBF affinity with a zero diagonal:
// W_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)), S = D^-1 W.
Eigen::MatrixXd affinity(const Eigen::MatrixXd& features, double sigma);

// One-hot seed matrix, columns {math, natural-language}; unlabeled rows are
// zero. Throws MissingClass when a column is empty.
Eigen::MatrixXd seed_matrix(const std::vector<LineSample>& samples);

struct PropagationResult {
  std::vector<Label> labels;  // hard labels, never Unlabeled
  Eigen::MatrixXd scores;     // n x 2 class scores
  int iterations = 0;
  bool converged = false;
};

// F <- alpha S F + (1 - alpha) Y from F = Y. Labeled samples keep their label;
// the rest take the higher score, ties going to math.
PropagationResult propagate(const std::vector<LineSample>& samples,
                            const PropagationConfig& config = {});

std::vector<Label> propagate_labels(const std::vector<LineSample>& samples,
                                    const PropagationConfig& config = {});

// Featurized lines are unit vectors, so pairwise distances lie in [0, 2]; a
// bandwidth of 1 would make every pair look alike.
inline constexpr PropagationConfig kClassifierDefaults{0.99, 0.15, 10000, 1e-6};

// Classifies statement text using labeled seed lines plus the unlabeled
// statements of the current document.
class StatementClassifier {
 public:
  StatementClassifier(std::vector<std::string> comment_lines,
                      std::vector<std::string> code_lines,
                      PropagationConfig config = kClassifierDefaults);

  // Seed files hold one sample per non-blank line.
  static StatementClassifier from_files(const std::filesystem::path& comments,
                                        const std::filesystem::path& code,
                                        PropagationConfig config = kClassifierDefaults);

  // Lines containing operators or an assignment are math without consulting
  // the propagation.
  static bool forced_math(std::string_view text);

  std::vector<Label> classify(const std::vector<std::string>& statements) const;

 private:
  std::vector<LineSample> seeds_;
  PropagationConfig config_;
};

// Pseudo code to p-code text accepted by plang::parse_source. A first line of
// the form `NAME(params)` names the function; otherwise the body is wrapped
// in ALGORITHM().
std::string convert(std::string_view pseudo, const StatementClassifier& classifier);

}  // namespace algoseek::pseudoconv
