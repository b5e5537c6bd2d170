#pragma once

#include "adagnn/common.hpp"
#include "adagnn/graph.hpp"
#include "adagnn/model.hpp"
#include "adagnn/sparse.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace adagnn {

/// Attributed graph with labels and train/val/test masks.
struct Dataset {
  Graph graph;
  SparseMatrix features;  // N x F
  Labels labels;
  Index num_classes = 0;
  Mask train_mask;
  Mask val_mask;
  Mask test_mask;
  std::vector<std::int64_t> node_ids;  // original id of each remapped node
  Index source_edge_lines = 0;         // edge records read, repeats included

  Index num_nodes() const { return graph.num_nodes(); }
  Index num_features() const { return features.cols(); }

  bool has_split() const {
    auto any = [](const Mask& m) { return std::find(m.begin(), m.end(), true) != m.end(); };
    return any(train_mask) || any(val_mask) || any(test_mask);
  }

  /// Content equality; ignores how many raw edge lines the source had.
  bool operator==(const Dataset& o) const {
    return graph.num_nodes() == o.graph.num_nodes() && graph.edges() == o.graph.edges() && features == o.features &&
           labels == o.labels && num_classes == o.num_classes && train_mask == o.train_mask &&
           val_mask == o.val_mask && test_mask == o.test_mask && node_ids == o.node_ids;
  }

  /// Throws DataError when an invariant does not hold.
  void validate() const {
    const auto n = static_cast<std::size_t>(num_nodes());
    if (features.rows() != num_nodes()) throw DataError("dataset: feature rows differ from node count");
    if (labels.size() != n) throw DataError("dataset: label count differs from node count");
    if (num_features() < 1) throw DataError("dataset: no feature channels");
    if (num_classes < 1) throw DataError("dataset: no classes");
    std::vector<char> seen(static_cast<std::size_t>(num_classes), 0);
    for (int l : labels) {
      if (l < 0 || l >= num_classes) throw DataError("dataset: label " + std::to_string(l) + " out of range");
      seen[static_cast<std::size_t>(l)] = 1;
    }
    for (Index c = 0; c < num_classes; ++c) {
      if (!seen[static_cast<std::size_t>(c)]) throw DataError("dataset: class " + std::to_string(c) + " has no nodes");
    }
    if (train_mask.size() != n || val_mask.size() != n || test_mask.size() != n) {
      throw DataError("dataset: mask length differs from node count");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (int(train_mask[i]) + int(val_mask[i]) + int(test_mask[i]) > 1) {
        throw DataError("dataset: node " + std::to_string(i) + " is in more than one mask");
      }
    }
  }
};

inline Index mask_count(const Mask& m) { return static_cast<Index>(std::count(m.begin(), m.end(), true)); }

/// Rows scaled to sum to one; all-zero rows are left alone.
inline SparseMatrix row_normalize(const SparseMatrix& x) {
  Vector scale(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (double v : x.row_values(r)) s += v;
    scale[r] = s != 0.0 ? 1.0 / s : 1.0;
  }
  return diag_left_mul(scale, x);
}

// ---------------------------------------------------------------------------
// TSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, const std::string& where) {
  T v{};
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError(where + ": cannot parse '" + std::string(tok) + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

/// Reads non-empty lines; `#` lines are passed to on_header.
template <typename OnLine, typename OnHeader>
void read_lines(const std::filesystem::path& path, OnLine&& on_line, OnHeader&& on_header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);
    if (sv.empty()) continue;
    const std::string where = path.filename().string() + ":" + std::to_string(lineno);
    if (sv.front() == '#') {
      on_header(sv, where);
      continue;
    }
    on_line(sv, where);
  }
}

}  // namespace detail

/// Loads `edges.tsv`, `features.tsv`, `labels.tsv` and, when present,
/// `split.tsv` from a directory. Nodes are the ids listed in features.tsv,
/// remapped to 0..N-1 in ascending id order.
///
/// features.tsv rows are either `id<TAB>f1<TAB>...<TAB>fF` or the sparse
/// form `id<TAB>col:val col:val ...`; a `# dim=F` header fixes F for the
/// sparse form (otherwise F = largest column + 1).
inline Dataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  for (const char* name : {"edges.tsv", "features.tsv", "labels.tsv"}) {
    if (!fs::exists(dir / name)) throw DataError("missing " + (dir / name).string());
  }

  struct Row {
    std::int64_t id;
    std::vector<std::pair<Index, double>> entries;
  };
  std::vector<Row> rows;
  std::optional<Index> declared_dim;
  std::optional<Index> dense_width;
  bool any_sparse = false;
  detail::read_lines(
      dir / "features.tsv",
      [&](std::string_view line, const std::string& where) {
        const auto tab = line.find('\t');
        const auto head = line.substr(0, tab);
        Row row{detail::parse_number<std::int64_t>(head, where), {}};
        const auto rest = tab == std::string_view::npos ? std::string_view{} : line.substr(tab + 1);
        const auto toks = detail::split_ws(rest);
        const bool sparse = rest.find(':') != std::string_view::npos;
        if (sparse) {
          any_sparse = true;
          for (auto tok : toks) {
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) throw DataError(where + ": expected col:val, got '" + std::string(tok) + "'");
            const auto col = detail::parse_number<Index>(tok.substr(0, colon), where);
            if (col < 0) throw DataError(where + ": negative feature column");
            row.entries.emplace_back(col, detail::parse_number<double>(tok.substr(colon + 1), where));
          }
        } else {
          const auto width = static_cast<Index>(toks.size());
          if (dense_width && *dense_width != width) {
            throw DataError(where + ": ragged feature row (" + std::to_string(width) + " values, expected " +
                            std::to_string(*dense_width) + ")");
          }
          dense_width = width;
          for (Index c = 0; c < width; ++c) {
            const double v = detail::parse_number<double>(toks[static_cast<std::size_t>(c)], where);
            if (v != 0.0) row.entries.emplace_back(c, v);
          }
        }
        rows.push_back(std::move(row));
      },
      [&](std::string_view line, const std::string& where) {
        const auto pos = line.find("dim=");
        if (pos != std::string_view::npos) {
          auto tok = detail::split_ws(line.substr(pos + 4));
          if (tok.empty()) throw DataError(where + ": empty dim header");
          declared_dim = detail::parse_number<Index>(tok.front(), where);
        }
      });
  if (rows.empty()) throw DataError("features.tsv has no rows");
  if (any_sparse && dense_width && *dense_width > 0) throw DataError("features.tsv mixes dense and sparse rows");

  std::vector<std::int64_t> ids;
  ids.reserve(rows.size());
  for (const auto& r : rows) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw DataError("features.tsv lists a node id twice");
  std::unordered_map<std::int64_t, Index> index_of;
  index_of.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index_of.emplace(ids[i], static_cast<Index>(i));
  const auto n = static_cast<Index>(ids.size());
  auto lookup = [&](std::int64_t id, const std::string& where) {
    const auto it = index_of.find(id);
    if (it == index_of.end()) throw DataError(where + ": unknown node id " + std::to_string(id));
    return it->second;
  };

  Index f = dense_width.value_or(0);
  if (any_sparse) {
    for (const auto& r : rows)
      for (const auto& [c, v] : r.entries) f = std::max(f, c + 1);
  }
  if (declared_dim) {
    if (*declared_dim < f) throw DataError("features.tsv: column beyond declared dim=" + std::to_string(*declared_dim));
    f = *declared_dim;
  }
  std::vector<Triplet> trip;
  for (const auto& r : rows) {
    const Index node = index_of.at(r.id);
    for (const auto& [c, v] : r.entries) trip.push_back({node, c, v});
  }

  Dataset ds;
  ds.node_ids = ids;
  ds.features = SparseMatrix::from_coo(std::move(trip), n, f);

  ds.labels.assign(static_cast<std::size_t>(n), -1);
  detail::read_lines(
      dir / "labels.tsv",
      [&](std::string_view line, const std::string& where) {
        const auto toks = detail::split_ws(line);
        if (toks.size() != 2) throw DataError(where + ": expected 'id<TAB>label'");
        const Index node = lookup(detail::parse_number<std::int64_t>(toks[0], where), where);
        const int label = detail::parse_number<int>(toks[1], where);
        if (label < 0) throw DataError(where + ": label out of range (" + std::to_string(label) + ")");
        ds.labels[static_cast<std::size_t>(node)] = label;
      },
      [](std::string_view, const std::string&) {});
  int max_label = -1;
  for (Index i = 0; i < n; ++i) {
    const int l = ds.labels[static_cast<std::size_t>(i)];
    if (l < 0) throw DataError("labels.tsv: node id " + std::to_string(ids[static_cast<std::size_t>(i)]) + " has no label");
    max_label = std::max(max_label, l);
  }
  ds.num_classes = max_label + 1;

  std::vector<Edge> edges;
  detail::read_lines(
      dir / "edges.tsv",
      [&](std::string_view line, const std::string& where) {
        const auto toks = detail::split_ws(line);
        if (toks.size() != 2) throw DataError(where + ": expected 'src<TAB>dst'");
        edges.emplace_back(lookup(detail::parse_number<std::int64_t>(toks[0], where), where),
                           lookup(detail::parse_number<std::int64_t>(toks[1], where), where));
      },
      [](std::string_view, const std::string&) {});
  ds.source_edge_lines = static_cast<Index>(edges.size());
  ds.graph = Graph::from_edges(n, edges);

  ds.train_mask.assign(static_cast<std::size_t>(n), false);
  ds.val_mask.assign(static_cast<std::size_t>(n), false);
  ds.test_mask.assign(static_cast<std::size_t>(n), false);
  if (fs::exists(dir / "split.tsv")) {
    detail::read_lines(
        dir / "split.tsv",
        [&](std::string_view line, const std::string& where) {
          const auto toks = detail::split_ws(line);
          if (toks.size() != 2) throw DataError(where + ": expected 'id<TAB>{train|val|test}'");
          const auto node = static_cast<std::size_t>(lookup(detail::parse_number<std::int64_t>(toks[0], where), where));
          if (ds.train_mask[node] || ds.val_mask[node] || ds.test_mask[node]) {
            throw DataError(where + ": node assigned twice");
          }
          if (toks[1] == "train") ds.train_mask[node] = true;
          else if (toks[1] == "val") ds.val_mask[node] = true;
          else if (toks[1] == "test") ds.test_mask[node] = true;
          else throw DataError(where + ": unknown split '" + std::string(toks[1]) + "'");
        },
        [](std::string_view, const std::string&) {});
  }
  ds.validate();
  return ds;
}

/// Writes the four TSV files (split.tsv only when some mask is set), using
/// the sparse feature form and the original node ids.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto id = [&](Index i) { return std::to_string(ds.node_ids[static_cast<std::size_t>(i)]); };
  {
    std::ofstream out(dir / "features.tsv");
    out << "# dim=" << ds.num_features() << '\n';
    for (Index r = 0; r < ds.num_nodes(); ++r) {
      out << id(r) << '\t';
      const auto cols = ds.features.row_cols(r);
      const auto vals = ds.features.row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k) out << ' ';
        out << cols[k] << ':' << detail::format_double(vals[k]);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.tsv");
    for (Index r = 0; r < ds.num_nodes(); ++r) out << id(r) << '\t' << ds.labels[static_cast<std::size_t>(r)] << '\n';
  }
  {
    std::ofstream out(dir / "edges.tsv");
    for (auto [u, v] : ds.graph.edges()) out << id(u) << '\t' << id(v) << '\n';
  }
  const auto split_path = dir / "split.tsv";
  if (ds.has_split()) {
    std::ofstream out(split_path);
    for (Index r = 0; r < ds.num_nodes(); ++r) {
      const auto i = static_cast<std::size_t>(r);
      if (ds.train_mask[i]) out << id(r) << "\ttrain\n";
      else if (ds.val_mask[i]) out << id(r) << "\tval\n";
      else if (ds.test_mask[i]) out << id(r) << "\ttest\n";
    }
  } else if (std::filesystem::exists(split_path)) {
    std::filesystem::remove(split_path);
  }
}

/// Order-independent fingerprint of the dataset files in a directory.
inline std::string dataset_fingerprint(const std::filesystem::path& dir) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char* name : {"edges.tsv", "features.tsv", "labels.tsv", "split.tsv"}) {
    const auto path = dir / name;
    h = fnv1a(std::string(name), h);
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    h = fnv1a(ss.str(), h);
  }
  return hex64(h);
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

/// Shuffled split: round(train*N) train, round(val*N) val, the rest test.
inline Dataset random_split(Dataset ds, double train_frac, double val_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0) || !(val_frac > 0.0) || !(train_frac + val_frac < 1.0)) {
    throw std::invalid_argument("random_split: fractions must be positive with sum < 1 (got " +
                                std::to_string(train_frac) + ", " + std::to_string(val_frac) + ")");
  }
  const Index n = ds.num_nodes();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n)));
  ds.train_mask.assign(static_cast<std::size_t>(n), false);
  ds.val_mask.assign(static_cast<std::size_t>(n), false);
  ds.test_mask.assign(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto v = static_cast<std::size_t>(order[k]);
    if (k < n_train) ds.train_mask[v] = true;
    else if (k < n_train + n_val) ds.val_mask[v] = true;
    else ds.test_mask[v] = true;
  }
  return ds;
}

/// Fixed split in node order: the first `per_class_train` nodes of each
/// class train, the next `val_size` remaining nodes validate, and the last
/// `test_size` remaining nodes test.
inline Dataset planetoid_split(Dataset ds, Index per_class_train, Index val_size, Index test_size) {
  if (per_class_train < 1) throw std::invalid_argument("planetoid_split: per_class_train must be >= 1");
  if (val_size < 0 || test_size < 0) throw std::invalid_argument("planetoid_split: negative split size");
  const Index n = ds.num_nodes();
  const auto un = static_cast<std::size_t>(n);
  ds.train_mask.assign(un, false);
  ds.val_mask.assign(un, false);
  ds.test_mask.assign(un, false);
  std::vector<Index> taken(static_cast<std::size_t>(ds.num_classes), 0);
  for (std::size_t v = 0; v < un; ++v) {
    auto& t = taken[static_cast<std::size_t>(ds.labels[v])];
    if (t < per_class_train) {
      ds.train_mask[v] = true;
      ++t;
    }
  }
  for (Index c = 0; c < ds.num_classes; ++c) {
    if (taken[static_cast<std::size_t>(c)] < per_class_train) {
      throw DataError("planetoid_split: class " + std::to_string(c) + " has only " +
                      std::to_string(taken[static_cast<std::size_t>(c)]) + " nodes, need " +
                      std::to_string(per_class_train));
    }
  }
  Index need_val = val_size;
  for (std::size_t v = 0; v < un && need_val > 0; ++v) {
    if (!ds.train_mask[v]) {
      ds.val_mask[v] = true;
      --need_val;
    }
  }
  Index need_test = test_size;
  for (std::size_t v = un; v-- > 0 && need_test > 0;) {
    if (!ds.train_mask[v] && !ds.val_mask[v]) {
      ds.test_mask[v] = true;
      --need_test;
    }
  }
  if (need_val > 0 || need_test > 0) {
    throw DataError("planetoid_split: not enough nodes for " + std::to_string(val_size) + " val + " +
                    std::to_string(test_size) + " test");
  }
  return ds;
}

/// How masks are obtained for a run.
struct SplitSpec {
  enum class Kind { file, planetoid, random } kind = Kind::planetoid;
  double train_frac = 0.1;
  double val_frac = 0.2;
  Index per_class_train = 20;
  Index val_size = 500;
  Index test_size = 1000;

  /// "file", "planetoid" or "random:0.1,0.2".
  static SplitSpec parse(const std::string& s) {
    SplitSpec out;
    if (s == "file") {
      out.kind = Kind::file;
    } else if (s == "planetoid") {
      out.kind = Kind::planetoid;
    } else if (s.rfind("random", 0) == 0) {
      out.kind = Kind::random;
      if (s.size() > 6) {
        if (s[6] != ':') throw std::invalid_argument("bad split '" + s + "'");
        const auto comma = s.find(',', 7);
        if (comma == std::string::npos) throw std::invalid_argument("bad split '" + s + "', expected random:train,val");
        out.train_frac = std::stod(s.substr(7, comma - 7));
        out.val_frac = std::stod(s.substr(comma + 1));
      }
    } else {
      throw std::invalid_argument("unknown split '" + s + "' (file|planetoid|random:frac,frac)");
    }
    return out;
  }

  std::string str() const {
    switch (kind) {
      case Kind::file: return "file";
      case Kind::planetoid: return "planetoid";
      case Kind::random: return "random:" + detail::format_double(train_frac) + "," + detail::format_double(val_frac);
    }
    return "?";
  }
};

/// Applies a split. `planetoid` keeps masks that came from split.tsv.
inline Dataset apply_split(Dataset ds, const SplitSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case SplitSpec::Kind::file:
      if (!ds.has_split()) throw DataError("split=file but the dataset has no split.tsv");
      return ds;
    case SplitSpec::Kind::planetoid:
      if (ds.has_split()) return ds;
      return planetoid_split(std::move(ds), spec.per_class_train, spec.val_size, spec.test_size);
    case SplitSpec::Kind::random:
      return random_split(std::move(ds), spec.train_frac, spec.val_frac, seed);
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures
// ---------------------------------------------------------------------------

enum class Topology { path, star, cycle };

inline Topology parse_topology(std::string_view s) {
  if (s == "path") return Topology::path;
  if (s == "star") return Topology::star;
  if (s == "cycle") return Topology::cycle;
  throw std::invalid_argument("unknown topology '" + std::string(s) + "'");
}

/// Two feature channels on a small graph: node 0 carries channel 0, the
/// middle node n/2 (the hub of the star) carries channel 1. Label 0 for
/// nodes at least as close to node 0 as to the middle node, else 1.
inline Dataset synthetic_two_channel(Index n, Topology topo) {
  if (n < 2) throw std::invalid_argument("synthetic_two_channel: n must be >= 2");
  const Index mid = n / 2;
  std::vector<Edge> edges;
  switch (topo) {
    case Topology::path:
      for (Index v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
      break;
    case Topology::cycle:
      for (Index v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
      if (n > 2) edges.emplace_back(n - 1, 0);
      break;
    case Topology::star:
      for (Index v = 0; v < n; ++v)
        if (v != mid) edges.emplace_back(mid, v);
      break;
  }
  Dataset ds;
  ds.graph = Graph::from_edges(n, edges);
  ds.source_edge_lines = static_cast<Index>(edges.size());
  ds.features = SparseMatrix::from_coo({{0, 0, 1.0}, {mid, 1, 1.0}}, n, 2);
  ds.num_classes = 2;
  ds.node_ids.resize(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) ds.node_ids[static_cast<std::size_t>(v)] = v;

  auto bfs = [&](Index src) {
    std::vector<Index> dist(static_cast<std::size_t>(n), -1);
    std::vector<Index> queue{src};
    dist[static_cast<std::size_t>(src)] = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const Index v = queue[h];
      for (Index u : ds.graph.adjacency().row_cols(v)) {
        if (dist[static_cast<std::size_t>(u)] < 0) {
          dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(u);
        }
      }
    }
    return dist;
  };
  const auto d0 = bfs(0);
  const auto dm = bfs(mid);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (std::size_t v = 0; v < static_cast<std::size_t>(n); ++v) ds.labels[v] = d0[v] <= dm[v] ? 0 : 1;

  const auto un = static_cast<std::size_t>(n);
  ds.train_mask.assign(un, false);
  ds.val_mask.assign(un, false);
  ds.test_mask.assign(un, false);
  ds.train_mask[0] = true;
  ds.train_mask[static_cast<std::size_t>(mid)] = true;
  bool to_val = true;
  for (std::size_t v = 1; v < un; ++v) {
    if (ds.train_mask[v]) continue;
    (to_val ? ds.val_mask : ds.test_mask)[v] = true;
    to_val = !to_val;
  }
  return ds;
}

/// Parameters of a planted-partition graph with bag-of-words features,
/// shaped like a small citation network.
struct CitationLikeOptions {
  Index nodes = 1000;
  Index classes = 5;
  Index features = 500;
  double avg_degree = 4.0;
  double homophily = 0.8;      // probability an edge stays inside its class
  Index words_per_node = 15;
  double topic_word_prob = 0.5;  // probability a word comes from the class vocabulary
  std::uint64_t seed = 0;
};

/// Random labelled graph: each class owns a slice of the vocabulary, nodes
/// draw binary words mostly from their class slice, and edges connect nodes
/// of the same class with probability `homophily`. Every node gets at least
/// one edge. Masks follow the planetoid convention (20/class, 500, 1000)
/// when the node count allows, otherwise 10%/20%/70%.
inline Dataset synthetic_citation(const CitationLikeOptions& o) {
  if (o.nodes < 2 || o.classes < 2 || o.features < o.classes) {
    throw std::invalid_argument("synthetic_citation: need nodes >= 2, classes >= 2, features >= classes");
  }
  Rng rng(o.seed);
  const auto n = static_cast<std::size_t>(o.nodes);
  Dataset ds;
  ds.num_classes = o.classes;
  ds.labels.resize(n);
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(o.classes));
  for (std::size_t v = 0; v < n; ++v) {
    // Round-robin first so that every class is populated, then random.
    const int c = v < static_cast<std::size_t>(o.classes) ? static_cast<int>(v)
                                                          : static_cast<int>(rng.below(static_cast<std::uint64_t>(o.classes)));
    ds.labels[v] = c;
    members[static_cast<std::size_t>(c)].push_back(static_cast<Index>(v));
  }

  const Index slice = o.features / o.classes;
  std::vector<Triplet> trip;
  for (std::size_t v = 0; v < n; ++v) {
    const Index base = ds.labels[v] * slice;
    for (Index w = 0; w < o.words_per_node; ++w) {
      const Index col = rng.uniform() < o.topic_word_prob
                            ? base + static_cast<Index>(rng.below(static_cast<std::uint64_t>(slice)))
                            : static_cast<Index>(rng.below(static_cast<std::uint64_t>(o.features)));
      trip.push_back({static_cast<Index>(v), col, 1.0});
    }
  }
  // Repeated words collapse to 1.
  SparseMatrix counts = SparseMatrix::from_coo(std::move(trip), o.nodes, o.features);
  ds.features = counts.with_values(std::vector<double>(static_cast<std::size_t>(counts.nnz()), 1.0));

  std::vector<Edge> edges;
  auto pick_partner = [&](Index u) {
    const auto& same = members[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(u)])];
    if (rng.uniform() < o.homophily && same.size() > 1) return same[rng.below(same.size())];
    return static_cast<Index>(rng.below(n));
  };
  for (std::size_t v = 0; v < n; ++v) edges.emplace_back(static_cast<Index>(v), pick_partner(static_cast<Index>(v)));
  const auto extra = static_cast<std::size_t>(std::max(0.0, o.avg_degree / 2.0 - 1.0) * static_cast<double>(n));
  for (std::size_t e = 0; e < extra; ++e) {
    const auto u = static_cast<Index>(rng.below(n));
    edges.emplace_back(u, pick_partner(u));
  }
  ds.graph = Graph::from_edges(o.nodes, edges);
  ds.source_edge_lines = static_cast<Index>(edges.size());
  ds.node_ids.resize(n);
  for (std::size_t v = 0; v < n; ++v) ds.node_ids[v] = static_cast<std::int64_t>(v);

  ds.train_mask.assign(n, false);
  ds.val_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  if (o.nodes >= 20 * o.classes + 1500) {
    ds = planetoid_split(std::move(ds), 20, 500, 1000);
  } else {
    ds = random_split(std::move(ds), 0.1, 0.2, o.seed + 1);
  }
  ds.validate();
  return ds;
}

}  // namespace adagnn
