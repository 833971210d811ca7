#include <gtest/gtest.h>

#include <sstream>

#include "lcpool/errors.hpp"
#include "lcpool/generators.hpp"
#include "lcpool/sparse.hpp"
#include "support.hpp"

namespace lcpool {
namespace {

using test::dense_of;
using test::mm;
using test::path;

CsrMatrix random_int(Rng& rng, std::size_t r, std::size_t c) {
  return gen::integer_sparse(rng, r, c, 0.05 + 0.4 * std::uniform_real_distribution<>(0, 1)(rng), -3, 3);
}

TEST(CsrMatrix, FromTripletsSumsDuplicatesAndDropsZeros) {
  const CsrMatrix a = CsrMatrix::from_triplets(
      2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 3.0}, {0, 0, 5.0}, {0, 0, -5.0}});
  a.validate();
  EXPECT_EQ(a.nnz(), 2u);
  EXPECT_EQ(a.at(0, 1), 2.0);
  EXPECT_EQ(a.at(1, 2), 4.0);
  EXPECT_FALSE(a.contains(0, 0));
  EXPECT_EQ(a.row_ptr(), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(CsrMatrix, RejectsOutOfRangeTriplet) {
  EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), Error);
}

TEST(CsrMatrix, FromRawRejectsNonCanonicalInput) {
  EXPECT_NO_THROW(CsrMatrix::from_raw(2, 2, {0, 1, 2}, {1, 0}, {1.0, 1.0}));
  // Unsorted columns.
  EXPECT_THROW(CsrMatrix::from_raw(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), Error);
  // Explicit zero.
  EXPECT_THROW(CsrMatrix::from_raw(1, 2, {0, 1}, {0}, {0.0}), Error);
  // row_ptr does not end at nnz.
  EXPECT_THROW(CsrMatrix::from_raw(1, 2, {0, 2}, {0}, {1.0}), Error);
  // Non-finite value.
  EXPECT_THROW(CsrMatrix::from_raw(1, 1, {0, 1}, {0}, {std::nan("")}), Error);
}

TEST(Spgemm, IdentityTimesAIsA) {
  const CsrMatrix a = path(3);
  EXPECT_EQ(spgemm(CsrMatrix::identity(3), a), a);
}

TEST(Spgemm, PathSquaredHasDistanceZeroOrTwoPattern) {
  const CsrMatrix p2 = spgemm(path(4), path(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      EXPECT_EQ(p2.contains(i, j), dist == 0 || dist == 2) << i << "," << j;
    }
  EXPECT_EQ(p2.at(0, 0), 1.0);
  EXPECT_EQ(p2.at(1, 1), 2.0);
  EXPECT_EQ(p2.at(2, 2), 2.0);
  EXPECT_EQ(p2.at(3, 3), 1.0);
  EXPECT_EQ(dense_of(p2), mm(dense_of(path(4)), dense_of(path(4))));
}

TEST(Spgemm, ZeroMatrixAnnihilates) {
  EXPECT_EQ(spgemm(CsrMatrix(4, 4), path(4)).nnz(), 0u);
}

TEST(Spgemm, RejectsShapeMismatch) {
  EXPECT_THROW(spgemm(CsrMatrix(2, 3), CsrMatrix(2, 3)), Error);
}

TEST(Spmm, Examples) {
  const DenseMatrix x{{1}, {2}, {3}, {4}};
  EXPECT_EQ(spmm(CsrMatrix::identity(4), x), x);
  EXPECT_EQ(spmm(path(4), x), (DenseMatrix{{2}, {4}, {6}, {3}}));
  const CsrMatrix empty_row = CsrMatrix::from_triplets(2, 4, {{1, 0, 1.0}});
  EXPECT_EQ(spmm(empty_row, x), (DenseMatrix{{0}, {1}}));
}

TEST(Transpose, Examples) {
  EXPECT_EQ(transpose(path(4)), path(4));
  const CsrMatrix a = CsrMatrix::from_triplets(3, 3, {{0, 2, 5.0}});
  const CsrMatrix t = transpose(a);
  EXPECT_EQ(t.nnz(), 1u);
  EXPECT_EQ(t.at(2, 0), 5.0);
}

TEST(Add, Examples) {
  const CsrMatrix a = path(4);
  EXPECT_EQ(add(a, CsrMatrix(4, 4)), a);
  EXPECT_EQ(add(a, scale(a, -1.0)).nnz(), 0u);
  const CsrMatrix doubled = add(a, a);
  EXPECT_TRUE(doubled.same_pattern(a));
  EXPECT_TRUE(doubled.all_values_equal(2.0));
}

TEST(AddSelfLoops, Examples) {
  EXPECT_EQ(add_self_loops(CsrMatrix(3, 3)), CsrMatrix::identity(3));
  const CsrMatrix l = add_self_loops(path(4));
  EXPECT_EQ(dense_of(l), test::with_identity(dense_of(path(4))));
  EXPECT_TRUE(ones_pattern(add_self_loops(l)).same_pattern(l));
}

TEST(OnesPattern, Examples) {
  const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 2.5}, {0, 1, -3.0}, {1, 1, 7.0}});
  const CsrMatrix o = ones_pattern(a);
  EXPECT_TRUE(o.same_pattern(a));
  EXPECT_TRUE(o.all_values_equal(1.0));
  EXPECT_EQ(ones_pattern(CsrMatrix(3, 3)).nnz(), 0u);
  EXPECT_EQ(ones_pattern(o), o);
}

TEST(SelectCols, Examples) {
  const CsrMatrix a = path(4);
  EXPECT_EQ(select_cols(a, IndexSet::range(4)), a);
  const CsrMatrix s = select_cols(CsrMatrix::identity(4), IndexSet({1, 3}));
  EXPECT_EQ(s.n_rows(), 4u);
  EXPECT_EQ(s.n_cols(), 2u);
  EXPECT_EQ(s.nnz(), 2u);
  EXPECT_EQ(s.at(1, 0), 1.0);
  EXPECT_EQ(s.at(3, 1), 1.0);
  const DenseMatrix d = dense_of(select_cols(a, IndexSet({0, 1})));
  const DenseMatrix full = dense_of(a);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(d(r, c), full(r, c));
}

TEST(SelectRowsCols, Examples) {
  const CsrMatrix a = path(4);
  EXPECT_EQ(select_rows_cols(a, IndexSet::range(4)), a);
  const CsrMatrix s02 = select_rows_cols(a, IndexSet({0, 2}));
  EXPECT_EQ(s02.n_rows(), 2u);
  EXPECT_EQ(s02.nnz(), 0u);
  const CsrMatrix s12 = select_rows_cols(a, IndexSet({1, 2}));
  EXPECT_EQ(dense_of(s12), (DenseMatrix{{0, 1}, {1, 0}}));
}

TEST(IndexSetTest, RejectsUnsortedOrDuplicate) {
  EXPECT_THROW(IndexSet({2, 1}), Error);
  EXPECT_THROW(IndexSet({1, 1}), Error);
  EXPECT_THROW(select_cols(path(3), IndexSet({0, 3})), Error);
}

TEST(HopClosure, PathOfFourIsComplete) {
  const CsrMatrix h = hop_closure(path(4), true);
  EXPECT_EQ(h.nnz(), 16u);
  EXPECT_TRUE(h.all_values_equal(1.0));
}

TEST(HopClosure, IsolatedNodeAndTriangle) {
  EXPECT_EQ(hop_closure(CsrMatrix(1, 1), true).nnz(), 0u);
  const CsrMatrix tri = CsrMatrix::from_triplets(
      3, 3, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}, {2, 1, 1}, {0, 2, 1}, {2, 0, 1}});
  EXPECT_EQ(hop_closure(tri, true).nnz(), 9u);
}

TEST(HopClosure, SymmetricVariantRejectsDirectedInput) {
  const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}});
  EXPECT_THROW(hop_closure(a, true), Error);
  EXPECT_NO_THROW(hop_closure(a, false));
}

TEST(IsSymmetric, Examples) {
  EXPECT_TRUE(is_symmetric(path(4)));
  EXPECT_FALSE(is_symmetric(CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}})));
  EXPECT_TRUE(is_symmetric(CsrMatrix(3, 3)));
}

TEST(DenseConversion, Examples) {
  const CsrMatrix a = path(5);
  EXPECT_EQ(from_dense(to_dense(a), 0.0), a);
  EXPECT_EQ(from_dense(DenseMatrix(3, 3), 0.0).nnz(), 0u);
  const CsrMatrix s = from_dense(DenseMatrix{{0, 2}, {0, 0}});
  EXPECT_EQ(s.nnz(), 1u);
  EXPECT_EQ(s.at(0, 1), 2.0);
}

TEST(DumpTriplets, WritesRowMajorLines) {
  std::ostringstream os;
  dump_triplets(os, CsrMatrix::from_triplets(2, 2, {{1, 0, 0.5}, {0, 1, 2.0}}));
  EXPECT_EQ(os.str(), "0 1 2\n1 0 0.5\n");
}

// ---- properties on random integer matrices ---------------------------------

class SparseProperty : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(SparseProperty, OpsMatchDenseOracle) {
  Rng rng(GetParam());
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = gen::index(rng, 1, 40), m = gen::index(rng, 1, 40), k = gen::index(rng, 1, 40);
    const CsrMatrix a = random_int(rng, n, m), b = random_int(rng, m, k), c = random_int(rng, n, m);
    const DenseMatrix x = gen::uniform(rng, m, 3);

    const CsrMatrix ab = spgemm(a, b);
    ab.validate();
    EXPECT_EQ(dense_of(ab), mm(dense_of(a), dense_of(b)));
    EXPECT_LE(test::max_abs_diff(spmm(a, x), mm(dense_of(a), x)), 1e-12);
    EXPECT_EQ(dense_of(transpose(a)), test::tr(dense_of(a)));
    EXPECT_EQ(dense_of(add(a, c)), test::plus(dense_of(a), dense_of(c)));
    EXPECT_EQ(add(a, c), add(c, a));
    EXPECT_EQ(transpose(transpose(a)), a);
  }
}

TEST_P(SparseProperty, SpgemmIsAssociative) {
  Rng rng(GetParam() + 100);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = gen::index(rng, 1, 25), m = gen::index(rng, 1, 25),
                      k = gen::index(rng, 1, 25), l = gen::index(rng, 1, 25);
    const CsrMatrix a = random_int(rng, n, m), b = random_int(rng, m, k), c = random_int(rng, k, l);
    EXPECT_EQ(spgemm(spgemm(a, b), c), spgemm(a, spgemm(b, c)));
  }
}

TEST_P(SparseProperty, SelectedColumnProductEqualsSelectedBlock) {
  Rng rng(GetParam() + 200);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = gen::index(rng, 1, 40), k = gen::index(rng, 1, 40);
    const CsrMatrix s = random_int(rng, n, k), a = random_int(rng, n, n);
    const IndexSet idx = gen::subset(rng, k);
    const CsrMatrix sc = select_cols(s, idx);
    const CsrMatrix lhs = spgemm(transpose(sc), spgemm(a, sc));
    const CsrMatrix rhs = select_rows_cols(spgemm(transpose(s), spgemm(a, s)), idx);
    EXPECT_EQ(lhs, rhs);
  }
}

TEST_P(SparseProperty, HopClosureMatchesExpandedProduct) {
  Rng rng(GetParam() + 300);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = gen::index(rng, 1, 20);
    const double p = std::uniform_real_distribution<>(0.0, 0.4)(rng);
    for (bool sym : {true, false}) {
      const CsrMatrix a = sym ? gen::undirected(rng, n, p) : gen::directed(rng, n, p);
      const DenseMatrix ad = dense_of(a), ia = test::with_identity(ad);
      const DenseMatrix expect = mm(test::tr(ia), mm(ad, ia));
      const CsrMatrix h = hop_closure(a, sym);
      h.validate();
      EXPECT_TRUE(test::same_nonzeros(dense_of(h), expect));
      EXPECT_TRUE(h.all_values_equal(1.0));
      if (sym) {
        EXPECT_EQ(h, hop_closure(a, false));
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, SparseProperty, ::testing::Values(1u, 2u, 3u, 4u));

}  // namespace
}  // namespace lcpool
