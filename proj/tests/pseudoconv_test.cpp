#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "algoseek/plang.hpp"
#include "algoseek/pseudoconv.hpp"
#include "algoseek/random.hpp"
#include "support/propagation_oracles.hpp"

using namespace algoseek::pseudoconv;
namespace plang = algoseek::plang;
using algoseek::testing::closed_form;
using algoseek::testing::point;
using algoseek::testing::two_gaussians;

namespace {

const std::string kSeedDir = std::string(ALGOSEEK_SOURCE_DIR) + "/data/seed/";

const StatementClassifier& shipped_classifier() {
  static const StatementClassifier c = StatementClassifier::from_files(
      kSeedDir + "comments.txt", kSeedDir + "code.txt");
  return c;
}

std::string fn_body(const std::string& pcode) {
  const auto open = pcode.find('{');
  return pcode.substr(open);
}

}  // namespace

// ---------------------------------------------------------------- featurize

TEST(Featurize, OperatorLine) {
  const Eigen::VectorXd v = featurize("x = x + 1");
  ASSERT_EQ(v.size(), kFeatureDim);
  EXPECT_GT(v[0], 0.0);  // AddSub
  EXPECT_EQ(v[kStopwordIndex], 0.0);
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
}

TEST(Featurize, NaturalLanguageLine) {
  const Eigen::VectorXd v = featurize("sort the edges of G into nondecreasing order");
  EXPECT_GT(v[kStopwordIndex], 0.0);
  EXPECT_TRUE(v.head(7).isZero());
}

TEST(Featurize, EmptyIsZero) {
  EXPECT_TRUE(featurize("").isZero());
  EXPECT_TRUE(featurize("  };").isZero());
}

TEST(Featurize, TerminatorsIgnored) {
  EXPECT_EQ(featurize("return result;"), featurize("return result"));
  EXPECT_EQ(featurize("} else {"), featurize("else"));
}

// ---------------------------------------------------------- propagate_labels

TEST(Propagation, CoincidentWithMathSeed) {
  const std::vector<LineSample> xs = {point({0, 0}, Label::Math),
                                      point({10, 10}, Label::NaturalLanguage),
                                      point({0, 0}, Label::Unlabeled)};
  EXPECT_EQ(propagate_labels(xs)[2], Label::Math);
}

TEST(Propagation, AllLabeledUnchanged) {
  const std::vector<LineSample> xs = {point({0}, Label::NaturalLanguage),
                                      point({0.1}, Label::Math),
                                      point({5}, Label::NaturalLanguage),
                                      point({5.1}, Label::Math)};
  EXPECT_EQ(propagate_labels(xs),
            (std::vector<Label>{Label::NaturalLanguage, Label::Math,
                                Label::NaturalLanguage, Label::Math}));
}

TEST(Propagation, MissingClass) {
  EXPECT_THROW(propagate_labels({point({0}, Label::Math), point({1}, Label::Unlabeled)}),
               MissingClass);
  EXPECT_THROW(propagate_labels({point({0}, Label::NaturalLanguage)}), MissingClass);
}

TEST(Propagation, TiesGoToMath) {
  // The unlabeled point sits exactly between the two seeds.
  const std::vector<LineSample> xs = {point({-1}, Label::Math),
                                      point({1}, Label::NaturalLanguage),
                                      point({0}, Label::Unlabeled)};
  const auto r = propagate(xs);
  EXPECT_EQ(r.scores(2, 0), r.scores(2, 1));
  EXPECT_EQ(r.labels[2], Label::Math);
}

TEST(Propagation, InvalidConfig) {
  const std::vector<LineSample> xs = {point({0}, Label::Math),
                                      point({1}, Label::NaturalLanguage)};
  EXPECT_THROW(propagate(xs, {1.0, 1.0, 10, 1e-6}), algoseek::UsageError);
  EXPECT_THROW(propagate(xs, {0.5, 0.0, 10, 1e-6}), algoseek::UsageError);
  EXPECT_THROW(propagate(xs, {0.5, 1.0, 0, 1e-6}), algoseek::UsageError);
}

TEST(Propagation, TwoGaussianClusters) {
  algoseek::Rng rng(2024);
  const auto xs = two_gaussians(rng, 20, 6.0);
  const auto r = propagate(xs);
  ASSERT_TRUE(r.converged);
  int agree = 0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    agree += r.labels[i] == (i < 20 ? Label::Math : Label::NaturalLanguage);
  EXPECT_GE(agree, 38);  // 95% of 40
  EXPECT_LE((r.scores - closed_form(xs, 0.99, 1.0)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Propagation, MatchesClosedForm) {
  algoseek::Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(algoseek::uniform_index(rng, 199));
    const int dim = 1 + static_cast<int>(algoseek::uniform_index(rng, 5));
    std::vector<LineSample> xs(n);
    for (int i = 0; i < n; ++i) {
      xs[i].features = Eigen::VectorXd(dim);
      for (int k = 0; k < dim; ++k) xs[i].features[k] = algoseek::normal(rng, 0, 1.5);
      const double u = algoseek::uniform01(rng);
      xs[i].label = u < 0.1 ? Label::Math : u < 0.2 ? Label::NaturalLanguage : Label::Unlabeled;
    }
    xs[0].label = Label::Math;
    xs[1].label = Label::NaturalLanguage;
    PropagationConfig cfg;
    cfg.alpha = algoseek::uniform(rng, 0.5, 0.99);
    cfg.sigma = algoseek::uniform(rng, 0.5, 2.0);
    const auto r = propagate(xs, cfg);
    ASSERT_TRUE(r.converged);
    EXPECT_LE((r.scores - closed_form(xs, cfg.alpha, cfg.sigma)).cwiseAbs().maxCoeff(), 1e-6)
        << "instance " << t << " n=" << n;
    for (int i = 0; i < n; ++i)
      if (xs[i].label != Label::Unlabeled) EXPECT_EQ(r.labels[i], xs[i].label);
  }
}

TEST(Propagation, PermutationInvariant) {
  algoseek::Rng rng(5);
  auto xs = two_gaussians(rng, 15, 2.0);
  const auto base = propagate_labels(xs);
  std::vector<std::size_t> perm(xs.size());
  std::iota(perm.begin(), perm.end(), 0);
  algoseek::shuffle(std::span(perm), rng);
  std::vector<LineSample> ys;
  for (std::size_t p : perm) ys.push_back(xs[p]);
  const auto permuted = propagate_labels(ys);
  for (std::size_t k = 0; k < perm.size(); ++k) EXPECT_EQ(permuted[k], base[perm[k]]);
}

// ------------------------------------------------------------ classifier

TEST(Classifier, ForcedMath) {
  EXPECT_TRUE(StatementClassifier::forced_math("sum = sum + i"));
  EXPECT_TRUE(StatementClassifier::forced_math("A ← ∅"));
  EXPECT_TRUE(StatementClassifier::forced_math("v ∈ G.V"));
  EXPECT_FALSE(StatementClassifier::forced_math("sort the vertices by degree"));
}

TEST(Classifier, ShippedSeedSet) {
  const auto labels = shipped_classifier().classify(
      {"sort the vertices by degree", "x = 1", "print the path", "NIL", "key"});
  EXPECT_EQ(labels, (std::vector<Label>{Label::NaturalLanguage, Label::Math,
                                        Label::NaturalLanguage, Label::Math,
                                        Label::Math}));
}

TEST(Classifier, EmptySeeds) {
  EXPECT_THROW(StatementClassifier({}, {"x = 1;"}), MissingClass);
  EXPECT_THROW(StatementClassifier({"a comment"}, {}), MissingClass);
}

// ---------------------------------------------------------------- convert

TEST(Convert, ForLoopSplit) {
  const std::string out =
      convert("for i = 1 to n\n    sum = sum + i\n", shipped_classifier());
  EXPECT_NE(out.find("for $i = 1$ to $n$ {"), std::string::npos) << out;
  EXPECT_NE(out.find("$sum = sum + i$"), std::string::npos) << out;
  EXPECT_TRUE(out.starts_with("ALGORITHM()")) << out;
  const auto prog = plang::parse_source(out);
  ASSERT_EQ(prog.functions.size(), 1u);
  ASSERT_EQ(prog.functions[0].body.size(), 1u);
}

TEST(Convert, NaturalLanguageUnderLoop) {
  const std::string out = convert(
      "for each v in G.V\n  sort the vertices by degree\n", shipped_classifier());
  EXPECT_NE(out.find("@sort the vertices by degree@"), std::string::npos) << out;
  EXPECT_NE(out.find("for each"), std::string::npos);
}

TEST(Convert, InconsistentDedent) {
  try {
    convert("while x\n    a = 1\n  b = 2\n", shipped_classifier());
    FAIL() << "expected StructureError";
  } catch (const StructureError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(Convert, StructuralErrors) {
  const auto& c = shipped_classifier();
  EXPECT_THROW(convert("", c), StructureError);
  EXPECT_THROW(convert("else\n  x = 1\n", c), StructureError);
  EXPECT_THROW(convert("repeat\n  x = 1\n", c), StructureError);
  EXPECT_THROW(convert("while x > 0\ny = 1\n", c), StructureError);
  EXPECT_THROW(convert("  x = 1\ny = 2\n", c), StructureError);
}

TEST(Convert, NumberedTextbookListing) {
  const std::string pseudo =
      "INSERTION-SORT(A)\n"
      "1  for j = 2 to A.length\n"
      "2      key = A[j]\n"
      "3      // Insert A[j] into the sorted sequence A[1 .. j - 1].\n"
      "4      i = j - 1\n"
      "5      while i > 0 and A[i] > key\n"
      "6          A[i + 1] = A[i]\n"
      "7          i = i - 1\n"
      "8      A[i + 1] = key\n";
  const std::string out = convert(pseudo, shipped_classifier());
  const std::string want =
      "INSERTION-SORT(A) {\n"
      "  for $j = 2$ to $A.length$ {\n"
      "    $key = A[j]$\n"
      "    $i = j - 1$\n"
      "    while $i > 0$ and $A[i] > key$ {\n"
      "      $A[i + 1] = A[i]$\n"
      "      $i = i - 1$\n"
      "    }\n"
      "    $A[i + 1] = key$\n"
      "  }\n"
      "}\n";
  EXPECT_EQ(out, want);
}

TEST(Convert, IfChainRepeatReturnAndCalls) {
  const std::string pseudo =
      "MST-KRUSKAL(G, w)\n"
      "    A = ∅\n"
      "    for each vertex v ∈ G.V\n"
      "        MAKE-SET(v)\n"
      "    sort the edges of G.E into nondecreasing order by weight w\n"
      "    if A.size > 0 then\n"
      "        x = 1\n"
      "    else if done\n"
      "        y = 2\n"
      "    else\n"
      "        UNION(u, v)\n"
      "    repeat\n"
      "        k = k - 1\n"
      "    until k == 0 or not found\n"
      "    return A\n";
  const std::string out = convert(pseudo, shipped_classifier());
  const auto prog = plang::parse_source(out);
  const auto& fn = prog.functions.at(0);
  EXPECT_EQ(fn.name, "MST-KRUSKAL");
  EXPECT_EQ(fn.params.size(), 2u);
  ASSERT_EQ(fn.body.size(), 6u);
  EXPECT_NE(out.find("MAKE-SET(v)"), std::string::npos);
  EXPECT_NE(out.find("@sort the edges of G.E into nondecreasing order by weight w@"),
            std::string::npos) << out;
  const auto& branch = std::get<plang::IfStmt>(fn.body[3].node);
  EXPECT_EQ(branch.elifs.size(), 1u);
  ASSERT_TRUE(branch.else_body.has_value());
  EXPECT_TRUE(std::holds_alternative<plang::CallStmt>((*branch.else_body)[0].node));
  const auto& loop = std::get<plang::RepeatStmt>(fn.body[4].node);
  EXPECT_TRUE(std::holds_alternative<plang::OrTest>(loop.until.node));
  EXPECT_TRUE(std::holds_alternative<plang::ReturnStmt>(fn.body[5].node));
}

TEST(Convert, InlineBodiesAndContinuations) {
  const std::string out = convert(
      "while i < n do i = i + 1\n"
      "if found then return i\n"
      "x = a +\n"
      "    b\n", shipped_classifier());
  EXPECT_EQ(fn_body(out),
            "{\n"
            "  while $i < n$ {\n"
            "    $i = i + 1$\n"
            "  }\n"
            "  if $found$ {\n"
            "    return $i$\n"
            "  }\n"
            "  $x = a + b$\n"
            "}\n") << out;
}

TEST(Convert, DelimiterCharactersStripped) {
  const std::string out = convert("cost = $5 + @x\n", shipped_classifier());
  EXPECT_NE(out.find("$cost = 5 + x$"), std::string::npos) << out;
}

TEST(Convert, FuzzAlwaysParses) {
  algoseek::Rng rng(31);
  const std::vector<std::string> simple = {
      "x = x + 1", "sort the list", "A[i] = key", "MAKE-SET(v)", "return",
      "return x", "print the answer", "NIL", "u.d = v.d + w(u, v)", "i = i - 1"};
  const std::vector<std::string> heads = {
      "if x > 0", "if the queue is empty then", "while i < n", "while not done do",
      "for i = 1 to n", "for i = n downto 1 do", "for each edge (u, v) in E",
      "repeat"};
  for (int t = 0; t < 100; ++t) {
    std::string text;
    // Random nesting: each line either opens a block, continues, or closes.
    std::vector<std::string> pending_until;
    int depth = 0;
    auto emit = [&](const std::string& line) {
      text += std::string(static_cast<std::size_t>(depth) * 4, ' ') + line + "\n";
    };
    const int lines = 3 + static_cast<int>(algoseek::uniform_index(rng, 15));
    bool need_body = false;
    for (int l = 0; l < lines; ++l) {
      const auto r = algoseek::uniform_index(rng, 10);
      if (!need_body && depth > 0 && r < 2) {
        --depth;
        if (!pending_until.back().empty()) emit(pending_until.back());
        pending_until.pop_back();
        continue;
      }
      if (r < 5 && depth < 4) {
        const std::string& h = heads[algoseek::uniform_index(rng, heads.size())];
        emit(h);
        pending_until.push_back(h == "repeat" ? "until x == 0" : "");
        ++depth;
        need_body = true;
      } else {
        emit(simple[algoseek::uniform_index(rng, simple.size())]);
        need_body = false;
      }
    }
    if (need_body) emit("x = 0");
    while (depth > 0) {
      --depth;
      if (!pending_until.back().empty()) emit(pending_until.back());
      pending_until.pop_back();
    }
    std::string out;
    ASSERT_NO_THROW(out = convert(text, shipped_classifier())) << text;
    ASSERT_NO_THROW(plang::parse_source(out)) << text << "\n---\n" << out;
  }
}
