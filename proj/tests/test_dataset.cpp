#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dcl0/dataset.hpp"
#include "support.hpp"

namespace dcl0 {
namespace {

Dataset libsvm(const std::string& text, std::ostream* warn = nullptr) {
  std::istringstream in(text);
  return parse_libsvm(in, "mem", warn);
}

TEST(Libsvm, ParsesSparseRows) {
  const auto ds = libsvm("+1 1:0.5 3:2\n-1\n");
  ASSERT_EQ(ds.rows(), 2u);
  ASSERT_EQ(ds.cols(), 3u);
  EXPECT_EQ(ds.labels[0], 1);
  EXPECT_EQ(ds.labels[1], -1);
  EXPECT_EQ(ds.features(0, 0), 0.5);
  EXPECT_EQ(ds.features(0, 1), 0.0);
  EXPECT_EQ(ds.features(0, 2), 2.0);
  EXPECT_EQ(ds.features.row(1).cwiseAbs().sum(), 0.0);
}

TEST(Libsvm, Errors) {
  try {
    libsvm("+1 1:1\n1 3:1 2:1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("mem:2:"), std::string::npos);
  }
  EXPECT_THROW(libsvm("+1 1:1 1:2\n"), ParseError);
  EXPECT_THROW(libsvm("x 1:1\n"), ParseError);
  EXPECT_THROW(libsvm("3 1:1\n"), ParseError);
  EXPECT_THROW(libsvm("1 1-1\n"), ParseError);
  EXPECT_THROW(libsvm("1 0:1\n"), ParseError);
  EXPECT_THROW(libsvm("1 1:abc\n"), ParseError);
  EXPECT_THROW(libsvm("1 1:nan\n"), ParseError);
  EXPECT_THROW(load_libsvm("/nonexistent/file.libsvm"), Error);
}

TEST(Libsvm, RemapsZeroAndTwoWithWarning) {
  std::ostringstream warn;
  const auto ds = libsvm("0 1:1\n2 1:2\n1 1:3\n", &warn);
  EXPECT_EQ(ds.labels, (std::vector<int>{-1, -1, 1}));
  EXPECT_NE(warn.str().find("2 label(s)"), std::string::npos);
}

TEST(Libsvm, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  Dataset ds;
  ds.features = testing::uniform_matrix(20, 7, rng, -1e3, 1e3);
  ds.features(3, 2) = 0;
  ds.features(5, 0) = 1e-300;
  ds.features(6, 6) = -0.1;
  for (int i = 0; i < 20; ++i) ds.labels.push_back(i % 3 ? 1 : -1);
  std::ostringstream os;
  write_libsvm(os, ds);
  const auto back = libsvm(os.str());
  EXPECT_EQ(back.labels, ds.labels);
  ASSERT_EQ(back.cols(), ds.cols());
  EXPECT_TRUE((back.features.array() == ds.features.array()).all());
}

TEST(Csv, ParsesWithLabelColumn) {
  std::istringstream in("f1,label,f2\n0.5,1,2\n-1,-1,3\n");
  const auto ds = parse_csv(in, "mem", "label");
  ASSERT_EQ(ds.rows(), 2u);
  EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"f1", "f2"}));
  EXPECT_EQ(ds.features(1, 1), 3.0);
  EXPECT_EQ(ds.labels[1], -1);
}

TEST(Csv, Errors) {
  std::istringstream ragged("a,y\n1,1\n2\n");
  EXPECT_THROW(parse_csv(ragged, "mem", "y"), ParseError);
  std::istringstream badlabel("a,y\n1,5\n");
  EXPECT_THROW(parse_csv(badlabel, "mem", "y"), ParseError);
  std::istringstream nolabel("a,b\n1,1\n");
  EXPECT_THROW(parse_csv(nolabel, "mem", "y"), ParseError);
}

TEST(Folds, PartitionAndDeterminism) {
  const auto f = kfold_indices(10, 5, 7);
  ASSERT_EQ(f.size(), 5u);
  std::set<std::size_t> all;
  for (const auto& fold : f) {
    EXPECT_EQ(fold.size(), 2u);
    all.insert(fold.begin(), fold.end());
  }
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(*all.rbegin(), 9u);
  EXPECT_EQ(f, kfold_indices(10, 5, 7));
  EXPECT_NE(f, kfold_indices(10, 5, 8));
  const auto g = kfold_indices(11, 3, 1);
  EXPECT_EQ(g[0].size() + g[1].size() + g[2].size(), 11u);
  EXPECT_THROW(kfold_indices(3, 5, 1), InvalidArgument);
  EXPECT_THROW(kfold_indices(3, 1, 1), InvalidArgument);
}

TEST(Standardize, TrainStatistics) {
  std::mt19937_64 rng(5);
  Dataset tr, te;
  tr.features = testing::uniform_matrix(30, 4, rng, -3, 7);
  tr.features.col(2).setConstant(4.0);
  tr.labels.assign(30, 1);
  te.features = testing::uniform_matrix(5, 4, rng);
  te.labels.assign(5, -1);
  std::ostringstream warn;
  const auto [a, b] = standardize(tr, te, &warn);
  for (Eigen::Index c : {0, 1, 3}) {
    EXPECT_NEAR(a.features.col(c).mean(), 0.0, 1e-10);
    EXPECT_NEAR(a.features.col(c).squaredNorm() / 30.0, 1.0, 1e-10);
  }
  EXPECT_EQ(a.features.col(2).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NE(warn.str().find("1 constant"), std::string::npos);
  const double mean0 = tr.features.col(0).mean();
  EXPECT_NEAR(b.features(0, 0) * std::sqrt((tr.features.col(0).array() - mean0).square().mean()) + mean0, te.features(0, 0), 1e-12);
}

TEST(DatasetOps, InstanceSplitsByLabel) {
  const auto ds = libsvm("+1 1:1\n-1 1:2\n+1 1:3\n");
  const auto inst = ds.instance(0.3);
  EXPECT_EQ(inst.n_a(), 2u);
  EXPECT_EQ(inst.b()(0, 0), 2.0);
  EXPECT_THROW(libsvm("+1 1:1\n").instance(0.3), InvalidArgument);
  auto w = ds;
  w.widen(3);
  EXPECT_EQ(w.cols(), 3u);
  const std::vector<std::size_t> idx{2, 0};
  EXPECT_EQ(ds.subset(idx).features(0, 0), 3.0);
}

}  // namespace
}  // namespace dcl0
