#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace adagnn;
using namespace testing_support;

namespace {

void write_toy(const std::filesystem::path& dir) {
  write_file(dir / "edges.tsv", "10\t20\n");
  write_file(dir / "features.tsv", "10\t1\n20\t0\n");
  write_file(dir / "labels.tsv", "10\t0\n20\t1\n");
}

/// Column ranges (max - min) of a dense matrix.
Vector column_ranges(const Matrix& h) { return h.colwise().maxCoeff() - h.colwise().minCoeff(); }

}  // namespace

TEST(LoadDataset, ToyDirectory) {
  const auto dir = scratch_dir("toy");
  write_toy(dir);
  const auto ds = load_dataset(dir);
  EXPECT_EQ(ds.num_nodes(), 2);
  EXPECT_EQ(ds.graph.num_edges(), 1);
  EXPECT_EQ(ds.num_features(), 1);
  EXPECT_EQ(ds.num_classes, 2);
  EXPECT_EQ(ds.node_ids, (std::vector<std::int64_t>{10, 20}));
  EXPECT_EQ(ds.features.coeff(0, 0), 1.0);
  EXPECT_EQ(ds.features.nnz(), 1);
  EXPECT_FALSE(ds.has_split());
}

TEST(LoadDataset, SaveLoadRoundTrip) {
  const auto dir = scratch_dir("toy_rt");
  write_toy(dir);
  const auto a = load_dataset(dir);
  const auto out = scratch_dir("toy_rt_out");
  save_dataset(a, out);
  const auto b = load_dataset(out);
  EXPECT_TRUE(a == b);
  save_dataset(b, out);
  EXPECT_TRUE(load_dataset(out) == b);
}

TEST(LoadDataset, IdempotentOnLargerFixture) {
  CitationLikeOptions o;
  o.nodes = 300;
  o.features = 60;
  o.classes = 4;
  o.seed = 5;
  auto ds = synthetic_citation(o);
  // Non-trivial values and ids exercise the number formatting.
  std::vector<Triplet> t;
  Rng rng(1);
  for (Index r = 0; r < ds.num_nodes(); ++r)
    for (Index c : ds.features.row_cols(r)) t.push_back({r, c, rng.uniform(0.0, 1.0) / 3.0});
  ds.features = SparseMatrix::from_coo(t, ds.num_nodes(), ds.num_features());
  for (auto& id : ds.node_ids) id = id * 7 + 1000003;
  const auto dir = scratch_dir("idem");
  save_dataset(ds, dir);
  const auto back = load_dataset(dir);
  EXPECT_TRUE(back == ds);
  const auto dir2 = scratch_dir("idem2");
  save_dataset(back, dir2);
  EXPECT_EQ(read_file(dir / "features.tsv"), read_file(dir2 / "features.tsv"));
  EXPECT_EQ(read_file(dir / "edges.tsv"), read_file(dir2 / "edges.tsv"));
}

TEST(LoadDataset, DenseAndSparseFeatureForms) {
  const auto dense = scratch_dir("dense");
  write_file(dense / "edges.tsv", "1\t2\n2\t3\n");
  write_file(dense / "features.tsv", "1\t0\t0.5\t0\n2\t1\t0\t0\n3\t0\t0\t2\n");
  write_file(dense / "labels.tsv", "1\t0\n2\t1\n3\t0\n");
  const auto sparse = scratch_dir("sparse");
  write_file(sparse / "edges.tsv", "1\t2\n2\t3\n");
  write_file(sparse / "features.tsv", "# dim=3\n1\t1:0.5\n2\t0:1\n3\t2:2\n");
  write_file(sparse / "labels.tsv", "1\t0\n2\t1\n3\t0\n");
  EXPECT_TRUE(load_dataset(dense) == load_dataset(sparse));
}

TEST(LoadDataset, SparseWidthFromHeaderOrMaxColumn) {
  const auto dir = scratch_dir("width");
  write_file(dir / "edges.tsv", "0\t1\n");
  write_file(dir / "features.tsv", "0\t4:1\n1\t\n");
  write_file(dir / "labels.tsv", "0\t0\n1\t0\n");
  EXPECT_EQ(load_dataset(dir).num_features(), 5);
  write_file(dir / "features.tsv", "# dim=9\n0\t4:1\n1\t\n");
  EXPECT_EQ(load_dataset(dir).num_features(), 9);
  write_file(dir / "features.tsv", "# dim=3\n0\t4:1\n1\t\n");
  EXPECT_THROW(load_dataset(dir), DataError);
}

TEST(LoadDataset, RemappingIgnoresLineOrder) {
  const auto a = scratch_dir("order_a");
  write_file(a / "edges.tsv", "5\t9\n9\t2\n2\t5\n");
  write_file(a / "features.tsv", "9\t1\t0\n2\t0\t1\n5\t1\t1\n");
  write_file(a / "labels.tsv", "5\t1\n2\t0\n9\t1\n");
  const auto b = scratch_dir("order_b");
  write_file(b / "edges.tsv", "2\t5\n5\t9\n2\t9\n9\t5\n");
  write_file(b / "features.tsv", "2\t0\t1\n5\t1\t1\n9\t1\t0\n");
  write_file(b / "labels.tsv", "9\t1\n5\t1\n2\t0\n");
  const auto da = load_dataset(a);
  const auto db = load_dataset(b);
  EXPECT_TRUE(da == db);
  EXPECT_EQ(da.node_ids, (std::vector<std::int64_t>{2, 5, 9}));
  EXPECT_EQ(da.labels, (Labels{0, 1, 1}));
  EXPECT_EQ(db.source_edge_lines, 4);
  EXPECT_EQ(db.graph.num_edges(), 3);
}

TEST(LoadDataset, Errors) {
  const auto dir = scratch_dir("errors");
  EXPECT_THROW(load_dataset(dir), DataError);  // missing files

  write_toy(dir);
  write_file(dir / "features.tsv", "10\t1\t0\n20\t0\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // ragged

  write_toy(dir);
  write_file(dir / "labels.tsv", "10\t0\n20\t-1\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // out of range

  write_toy(dir);
  write_file(dir / "labels.tsv", "10\t0\n20\t2\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // label 1 never used

  write_toy(dir);
  write_file(dir / "labels.tsv", "10\t0\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // unlabeled node

  write_toy(dir);
  write_file(dir / "edges.tsv", "10\t30\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // unknown node

  write_toy(dir);
  write_file(dir / "features.tsv", "10\tx\n20\t0\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // unparsable

  write_toy(dir);
  write_file(dir / "split.tsv", "10\ttrain\n20\tholdout\n");
  EXPECT_THROW(load_dataset(dir), DataError);  // unknown split name
}

TEST(LoadDataset, SplitFilePassthrough) {
  const auto dir = scratch_dir("split");
  write_file(dir / "edges.tsv", "0\t1\n1\t2\n2\t3\n");
  write_file(dir / "features.tsv", "0\t1\n1\t1\n2\t1\n3\t1\n");
  write_file(dir / "labels.tsv", "0\t0\n1\t1\n2\t0\n3\t1\n");
  write_file(dir / "split.tsv", "3\ttrain\n0\tval\n1\ttest\n");
  const auto ds = load_dataset(dir);
  EXPECT_EQ(ds.train_mask, (Mask{false, false, false, true}));
  EXPECT_EQ(ds.val_mask, (Mask{true, false, false, false}));
  EXPECT_EQ(ds.test_mask, (Mask{false, true, false, false}));
  // planetoid keeps file masks
  EXPECT_TRUE(apply_split(ds, SplitSpec::parse("planetoid"), 0) == ds);
  EXPECT_TRUE(apply_split(ds, SplitSpec::parse("file"), 0) == ds);
}

TEST(RandomSplit, SizesAndDeterminism) {
  CitationLikeOptions o;
  o.nodes = 100;
  o.features = 20;
  o.classes = 4;
  const auto ds = synthetic_citation(o);
  const auto a = random_split(ds, 0.1, 0.2, 3);
  EXPECT_EQ(mask_count(a.train_mask), 10);
  EXPECT_EQ(mask_count(a.val_mask), 20);
  EXPECT_EQ(mask_count(a.test_mask), 70);
  EXPECT_NO_THROW(a.validate());
  const auto b = random_split(ds, 0.1, 0.2, 3);
  EXPECT_EQ(a.train_mask, b.train_mask);
  EXPECT_EQ(a.val_mask, b.val_mask);
  const auto c = random_split(ds, 0.1, 0.2, 4);
  EXPECT_NE(a.train_mask, c.train_mask);
}

TEST(RandomSplit, SizesWithinOneOfRequest) {
  CitationLikeOptions o;
  o.nodes = 137;
  o.features = 20;
  o.classes = 3;
  const auto ds = synthetic_citation(o);
  for (auto [tr, va] : std::vector<std::pair<double, double>>{{0.1, 0.2}, {0.33, 0.33}, {0.05, 0.9}}) {
    const auto s = random_split(ds, tr, va, 1);
    EXPECT_LE(std::abs(static_cast<double>(mask_count(s.train_mask)) - tr * 137), 1.0);
    EXPECT_LE(std::abs(static_cast<double>(mask_count(s.val_mask)) - va * 137), 1.0);
    EXPECT_EQ(mask_count(s.train_mask) + mask_count(s.val_mask) + mask_count(s.test_mask), 137);
  }
}

TEST(RandomSplit, InvalidFractions) {
  const auto ds = synthetic_two_channel(10, Topology::path);
  EXPECT_THROW(random_split(ds, 0.5, 0.5, 0), std::invalid_argument);
  EXPECT_THROW(random_split(ds, 0.0, 0.5, 0), std::invalid_argument);
  EXPECT_THROW(random_split(ds, 0.7, 0.4, 0), std::invalid_argument);
  EXPECT_THROW(SplitSpec::parse("random:0.1"), std::invalid_argument);
  EXPECT_THROW(SplitSpec::parse("kfold"), std::invalid_argument);
}

TEST(PlanetoidSplit, StandardSizes) {
  CitationLikeOptions o;
  o.nodes = 2708;
  o.classes = 7;
  o.features = 100;
  o.seed = 9;
  const auto ds = planetoid_split(synthetic_citation(o), 20, 500, 1000);
  EXPECT_EQ(mask_count(ds.train_mask), 140);
  EXPECT_EQ(mask_count(ds.val_mask), 500);
  EXPECT_EQ(mask_count(ds.test_mask), 1000);
  EXPECT_NO_THROW(ds.validate());
  // Oracle: the train set is the first 20 nodes of each class in index order.
  std::vector<int> seen(7, 0);
  for (std::size_t v = 0; v < ds.labels.size(); ++v) {
    const bool expect = seen[static_cast<std::size_t>(ds.labels[v])]++ < 20;
    EXPECT_EQ(ds.train_mask[v], expect) << v;
  }
  // Validation is the first 500 non-train nodes; test the last 1000.
  Index first_nontrain_val = 0;
  for (std::size_t v = 0; v < ds.labels.size() && first_nontrain_val < 500; ++v) {
    if (!ds.train_mask[v]) {
      EXPECT_TRUE(ds.val_mask[v]);
      ++first_nontrain_val;
    }
  }
  for (std::size_t v = ds.labels.size() - 1000; v < ds.labels.size(); ++v) EXPECT_TRUE(ds.test_mask[v] || ds.train_mask[v]);
}

TEST(PlanetoidSplit, Errors) {
  const auto ds = synthetic_two_channel(6, Topology::path);
  EXPECT_THROW(planetoid_split(ds, 0, 1, 1), std::invalid_argument);
  EXPECT_THROW(planetoid_split(ds, 5, 1, 1), DataError);
  EXPECT_THROW(planetoid_split(ds, 1, 3, 3), DataError);
  EXPECT_NO_THROW(planetoid_split(ds, 1, 2, 2));
}

TEST(RowNormalize, RowsSumToOne) {
  const auto m = SparseMatrix::from_coo({{0, 0, 1.0}, {0, 2, 3.0}, {2, 1, 5.0}}, 3, 3);
  const Matrix d = row_normalize(m).to_dense();
  EXPECT_DOUBLE_EQ(d(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(d(0, 2), 0.75);
  EXPECT_DOUBLE_EQ(d(2, 1), 1.0);
  EXPECT_TRUE(d.row(1).isZero(0.0));
}

TEST(SyntheticTwoChannel, PathHasTwoSources) {
  const auto ds = synthetic_two_channel(5, Topology::path);
  EXPECT_EQ(ds.features.nnz(), 2);
  EXPECT_EQ(ds.num_features(), 2);
  EXPECT_EQ(ds.features.coeff(0, 0), 1.0);
  EXPECT_EQ(ds.features.coeff(2, 1), 1.0);
  EXPECT_EQ(ds.labels, (Labels{0, 0, 1, 1, 1}));
  EXPECT_NO_THROW(ds.validate());
}

TEST(SyntheticTwoChannel, StarCenterCarriesSecondChannel) {
  const auto ds = synthetic_two_channel(5, Topology::star);
  const Index center = 2;
  EXPECT_EQ(ds.graph.degree(center), 4);
  EXPECT_EQ(ds.features.coeff(center, 1), 1.0);
  EXPECT_EQ(ds.features.nnz(), 2);
}

TEST(SyntheticTwoChannel, CycleAndErrors) {
  const auto ds = synthetic_two_channel(6, Topology::cycle);
  EXPECT_EQ(ds.graph.num_edges(), 6);
  EXPECT_THROW(synthetic_two_channel(1, Topology::path), std::invalid_argument);
}

// Exact column ranges after repeated unit-filter propagation on the 5-node
// star, worked out symbolically.
// Two steps do not reach 20% of the initial unit range under either
// normalization; the symmetric operator never flattens a signal because its
// limit is proportional to sqrt(degree).
TEST(SyntheticTwoChannel, StarPropagationRanges) {
  const auto ds = synthetic_two_channel(5, Topology::star);
  const Matrix x = ds.features.to_dense();
  const double r10 = std::sqrt(10.0);
  const std::vector<std::array<double, 2>> sym = {
      {0.5, -0.2 + r10 / 10}, {0.25, 0.44 - 7 * r10 / 100}, {-0.12 + 79 * r10 / 1000, 0.368 - 79 * r10 / 1000}};
  const std::vector<std::array<double, 2>> rw = {{0.5, 0.3}, {0.25, 0.09}, {0.125, 0.027}};
  Matrix hs = x, hr = x;
  const auto ls = laplacian(ds.graph, LaplacianKind::sym, true);
  const auto lr = laplacian(ds.graph, LaplacianKind::rw, true);
  for (std::size_t k = 0; k < 3; ++k) {
    hs = layer_filter(hs, ls, Vector::Ones(2));
    hr = layer_filter(hr, lr, Vector::Ones(2));
    const Vector rs = column_ranges(hs), rr = column_ranges(hr);
    for (int c = 0; c < 2; ++c) {
      EXPECT_NEAR(rs[c], sym[k][static_cast<std::size_t>(c)], 1e-14);
      EXPECT_NEAR(rr[c], rw[k][static_cast<std::size_t>(c)], 1e-14);
    }
  }
  // Mean aggregation flattens both channels below 20% from the third step on.
  EXPECT_LT(column_ranges(hr).maxCoeff(), 0.2);
}

TEST(SyntheticCitation, ShapeAndHomophily) {
  CitationLikeOptions o;
  o.nodes = 600;
  o.classes = 4;
  o.features = 80;
  o.seed = 3;
  const auto ds = synthetic_citation(o);
  EXPECT_EQ(ds.num_nodes(), 600);
  EXPECT_EQ(ds.num_features(), 80);
  EXPECT_EQ(ds.num_classes, 4);
  EXPECT_NO_THROW(ds.validate());
  for (Index v = 0; v < ds.num_nodes(); ++v) EXPECT_GE(ds.graph.degree(v), 1);
  Index same = 0;
  for (auto [u, v] : ds.graph.edges()) same += ds.labels[static_cast<std::size_t>(u)] == ds.labels[static_cast<std::size_t>(v)];
  EXPECT_GT(static_cast<double>(same) / static_cast<double>(ds.graph.num_edges()), 0.6);
  EXPECT_TRUE(synthetic_citation(o) == ds);
}

TEST(DatasetFingerprint, ChangesWithContent) {
  const auto dir = scratch_dir("fp");
  write_toy(dir);
  const auto a = dataset_fingerprint(dir);
  EXPECT_EQ(a, dataset_fingerprint(dir));
  write_file(dir / "labels.tsv", "10\t1\n20\t0\n");
  EXPECT_NE(a, dataset_fingerprint(dir));
}
