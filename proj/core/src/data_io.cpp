#include "owarank/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "owarank/rng.hpp"

namespace owarank {

namespace {

using nlohmann::json;

constexpr int kDatasetFormatVersion = 1;

[[noreturn]] void parse_error(std::size_t line_number, const std::string& message) {
  throw std::runtime_error("parse_letor: line " + std::to_string(line_number) + ": " +
                           message);
}

double softplus(double x) {
  // log(1 + exp(x)) without overflow for large |x|.
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

}  // namespace

ParsedLetor parse_letor(std::istream& input, int feature_dim) {
  struct SparseRow {
    double label = 0.0;
    std::int64_t qid = 0;
    std::vector<std::pair<int, double>> features;  // 1-based ids
  };
  std::vector<SparseRow> rows;
  int max_feature_id = 0;

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(input, line)) {
    ++line_number;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.resize(comment);
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;  // blank line

    SparseRow row;
    try {
      std::size_t used = 0;
      row.label = std::stod(token, &used);
      if (used != token.size()) parse_error(line_number, "bad label '" + token + "'");
    } catch (const std::logic_error&) {
      parse_error(line_number, "bad label '" + token + "'");
    }

    if (!(tokens >> token) || token.rfind("qid:", 0) != 0) {
      parse_error(line_number, "expected qid:<id>");
    }
    try {
      row.qid = std::stoll(token.substr(4));
    } catch (const std::logic_error&) {
      parse_error(line_number, "bad query id '" + token + "'");
    }

    while (tokens >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        parse_error(line_number, "bad feature token '" + token + "'");
      }
      int fid = 0;
      double value = 0.0;
      try {
        fid = std::stoi(token.substr(0, colon));
        value = std::stod(token.substr(colon + 1));
      } catch (const std::logic_error&) {
        parse_error(line_number, "bad feature token '" + token + "'");
      }
      if (fid < 1) parse_error(line_number, "feature ids are 1-based");
      for (const auto& [existing, _] : row.features) {
        if (existing == fid) {
          parse_error(line_number,
                      "duplicate feature id " + std::to_string(fid) + " on one line");
        }
      }
      row.features.emplace_back(fid, value);
      max_feature_id = std::max(max_feature_id, fid);
    }
    rows.push_back(std::move(row));
  }

  ParsedLetor parsed;
  parsed.feature_dim = feature_dim > 0 ? feature_dim : max_feature_id;
  if (feature_dim > 0 && max_feature_id > feature_dim) {
    throw std::runtime_error("parse_letor: feature id " +
                             std::to_string(max_feature_id) +
                             " exceeds declared dimension " +
                             std::to_string(feature_dim));
  }
  if (rows.empty()) return parsed;

  // Group consecutive runs of the same qid, preserving file order.
  std::vector<std::pair<std::int64_t, std::vector<std::size_t>>> groups;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (groups.empty() || groups.back().first != rows[r].qid) {
      groups.push_back({rows[r].qid, {}});
    }
    groups.back().second.push_back(r);
  }
  for (const auto& [qid, indices] : groups) {
    RawQuery query;
    query.qid = qid;
    query.features = Matrix(indices.size(), parsed.feature_dim, 0.0);
    query.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const SparseRow& row = rows[indices[i]];
      query.labels.push_back(row.label);
      for (const auto& [fid, value] : row.features) {
        query.features(i, fid - 1) = value;
      }
    }
    parsed.queries.push_back(std::move(query));
  }
  return parsed;
}

ParsedLetor parse_letor_file(const std::string& path, int feature_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_letor: cannot open " + path);
  return parse_letor(in, feature_dim);
}

std::vector<double> quantile_thresholds(std::span<const double> values,
                                        int num_groups) {
  require(num_groups >= 2, "quantile_thresholds: need at least two groups");
  require(!values.empty(), "quantile_thresholds: empty value set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> thresholds(num_groups - 1);
  for (int k = 1; k < num_groups; ++k) {
    const double q = static_cast<double>(k) / static_cast<double>(num_groups);
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    thresholds[k - 1] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
  }
  return thresholds;
}

int quantile_bucket(double value, std::span<const double> thresholds) {
  int bucket = 0;
  for (double t : thresholds) {
    if (value > t) ++bucket;  // ties stay in the lower bucket
  }
  return bucket;
}

std::vector<std::vector<int>> assign_groups(const std::vector<RawQuery>& queries,
                                            int feature_id, int num_groups) {
  require(!queries.empty(), "assign_groups: empty corpus");
  require(feature_id >= 0 &&
              feature_id < static_cast<int>(queries.front().features.cols()),
          "assign_groups: feature id out of range");
  std::vector<double> values;
  for (const RawQuery& query : queries) {
    for (std::size_t i = 0; i < query.features.rows(); ++i) {
      values.push_back(query.features(i, feature_id));
    }
  }
  const std::vector<double> thresholds = quantile_thresholds(values, num_groups);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    throw std::runtime_error(
        "assign_groups: grouping feature " + std::to_string(feature_id) +
        " is constant over the corpus; every bucket collapses. Pick another "
        "feature.");
  }
  return assign_groups(queries, feature_id, thresholds);
}

std::vector<std::vector<int>> assign_groups(const std::vector<RawQuery>& queries,
                                            int feature_id,
                                            std::span<const double> thresholds) {
  std::vector<std::vector<int>> labels;
  labels.reserve(queries.size());
  for (const RawQuery& query : queries) {
    std::vector<int> query_labels(query.features.rows());
    for (std::size_t i = 0; i < query.features.rows(); ++i) {
      query_labels[i] = quantile_bucket(query.features(i, feature_id), thresholds);
    }
    labels.push_back(std::move(query_labels));
  }
  return labels;
}

Dataset normalize_lists(const std::vector<RawQuery>& queries,
                        const std::vector<std::vector<int>>& group_labels,
                        int list_size, int num_groups, std::uint64_t seed,
                        NormalizeReport* report) {
  require(list_size >= 2, "normalize_lists: list size must be >= 2");
  require(queries.size() == group_labels.size(),
          "normalize_lists: labels do not match queries");
  (void)seed;  // reserved for sampling-based selection; truncation is deterministic

  NormalizeReport counts;
  Dataset dataset;
  dataset.list_size = list_size;
  dataset.num_groups = num_groups;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const RawQuery& query = queries[q];
    const int n = static_cast<int>(query.labels.size());
    if (n < list_size) {
      ++counts.dropped;
      continue;
    }
    std::vector<int> keep(n);
    std::iota(keep.begin(), keep.end(), 0);
    if (n > list_size) {
      // Top items by ground-truth relevance, document order on ties.
      std::stable_sort(keep.begin(), keep.end(), [&](int a, int b) {
        return query.labels[a] > query.labels[b];
      });
      keep.resize(list_size);
      std::sort(keep.begin(), keep.end());  // restore document order
      ++counts.truncated;
    }

    QuerySample sample;
    sample.qid = query.qid;
    sample.features = Matrix(list_size, query.features.cols());
    sample.relevance.reserve(list_size);
    std::vector<int> labels;
    labels.reserve(list_size);
    for (int row = 0; row < list_size; ++row) {
      const int src = keep[row];
      sample.relevance.push_back(query.labels[src]);
      labels.push_back(group_labels[q][src]);
      for (std::size_t j = 0; j < query.features.cols(); ++j) {
        sample.features(row, j) = query.features(src, j);
      }
    }
    sample.groups = GroupAssignment::from_labels(std::move(labels), num_groups);
    for (double y : sample.relevance) {
      require(std::isfinite(y) && y >= 0.0,
              "normalize_lists: relevance must be finite and non-negative");
    }
    dataset.samples.push_back(std::move(sample));
    dataset.feature_dim = static_cast<int>(query.features.cols());
  }
  if (dataset.samples.empty()) {
    throw std::runtime_error("normalize_lists: no query has at least " +
                             std::to_string(list_size) + " items");
  }
  dataset.provenance = "letor";
  if (report) *report = counts;
  return dataset;
}

Dataset synthesize(const SynthSpec& spec) {
  require(spec.num_queries >= 1, "synthesize: need at least one query");
  require(spec.list_size >= 2, "synthesize: list size must be >= 2");
  require(spec.feature_dim >= 1, "synthesize: feature_dim must be >= 1");
  require(spec.num_groups >= 1, "synthesize: num_groups must be >= 1");
  require(spec.group_feature >= 0 && spec.group_feature < spec.feature_dim,
          "synthesize: group feature out of range");
  require(spec.noise >= 0.0, "synthesize: noise must be >= 0");

  Rng rng(spec.seed);
  std::vector<double> hidden(spec.feature_dim);
  for (double& v : hidden) v = rng.normal();

  struct PendingQuery {
    Matrix features;
    std::vector<double> relevance;
  };
  std::vector<PendingQuery> pending(spec.num_queries);
  std::vector<double> group_values;
  for (int q = 0; q < spec.num_queries; ++q) {
    PendingQuery& query = pending[q];
    query.features = Matrix(spec.list_size, spec.feature_dim);
    for (double& v : query.features.data()) v = rng.normal();
    query.relevance.resize(spec.list_size);
    for (int i = 0; i < spec.list_size; ++i) {
      double activation = 0.0;
      for (int j = 0; j < spec.feature_dim; ++j) {
        activation += query.features(i, j) * hidden[j];
      }
      query.relevance[i] = softplus(activation + spec.noise * rng.normal());
      group_values.push_back(query.features(i, spec.group_feature));
    }
  }

  std::vector<double> thresholds;
  if (spec.num_groups >= 2) {
    thresholds = quantile_thresholds(group_values, spec.num_groups);
  }

  Dataset dataset;
  dataset.feature_dim = spec.feature_dim;
  dataset.list_size = spec.list_size;
  dataset.num_groups = spec.num_groups;
  dataset.provenance = "synthetic seed=" + std::to_string(spec.seed);
  for (int q = 0; q < spec.num_queries; ++q) {
    QuerySample sample;
    sample.qid = q + 1;
    sample.features = std::move(pending[q].features);
    sample.relevance = std::move(pending[q].relevance);
    std::vector<int> labels(spec.list_size, 0);
    for (int i = 0; i < spec.list_size; ++i) {
      labels[i] = quantile_bucket(sample.features(i, spec.group_feature), thresholds);
    }
    sample.groups = GroupAssignment::from_labels(std::move(labels), spec.num_groups);
    dataset.samples.push_back(std::move(sample));
  }
  return dataset;
}

std::array<Dataset, 3> split(const Dataset& dataset, const SplitFractions& fractions,
                             std::uint64_t seed) {
  const double total = fractions.train + fractions.valid + fractions.test;
  require(std::abs(total - 1.0) <= 1e-9, "split: fractions must sum to 1");
  const std::size_t count = dataset.samples.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_train =
      static_cast<std::size_t>(std::llround(fractions.train * count));
  const std::size_t n_valid =
      static_cast<std::size_t>(std::llround(fractions.valid * count));
  require(n_train >= 1 && n_valid >= 1 && n_train + n_valid < count,
          "split: a split is empty");

  auto subset = [&](std::size_t begin, std::size_t end, const char* name) {
    Dataset out;
    out.feature_dim = dataset.feature_dim;
    out.list_size = dataset.list_size;
    out.num_groups = dataset.num_groups;
    out.provenance = dataset.provenance + " " + name;
    for (std::size_t i = begin; i < end; ++i) {
      out.samples.push_back(dataset.samples[order[i]]);
    }
    return out;
  };
  return {subset(0, n_train, "train"), subset(n_train, n_train + n_valid, "valid"),
          subset(n_train + n_valid, count, "test")};
}

void save_dataset(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  json header = {
      {"format", "owarank-dataset"},
      {"version", kDatasetFormatVersion},
      {"feature_dim", dataset.feature_dim},
      {"list_size", dataset.list_size},
      {"num_groups", dataset.num_groups},
      {"provenance", dataset.provenance},
      {"queries", dataset.samples.size()},
  };
  out << header.dump() << '\n';
  for (const QuerySample& sample : dataset.samples) {
    json features = json::array();
    for (std::size_t i = 0; i < sample.features.rows(); ++i) {
      const auto row = sample.features.row(i);
      features.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json record = {
        {"qid", sample.qid},
        {"relevance", sample.relevance},
        {"groups", sample.groups.labels},
        {"features", std::move(features)},
    };
    out << record.dump() << '\n';
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_dataset: empty file " + path);
  }
  const json header = json::parse(line);
  if (header.value("format", "") != "owarank-dataset" ||
      header.value("version", -1) != kDatasetFormatVersion) {
    throw std::runtime_error("load_dataset: unsupported dataset format in " + path);
  }
  Dataset dataset;
  dataset.feature_dim = header.at("feature_dim").get<int>();
  dataset.list_size = header.at("list_size").get<int>();
  dataset.num_groups = header.at("num_groups").get<int>();
  dataset.provenance = header.at("provenance").get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json record = json::parse(line);
    QuerySample sample;
    sample.qid = record.at("qid").get<std::int64_t>();
    sample.relevance = record.at("relevance").get<std::vector<double>>();
    const auto labels = record.at("groups").get<std::vector<int>>();
    const json& features = record.at("features");
    sample.features = Matrix(features.size(), dataset.feature_dim);
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto row = features[i].get<std::vector<double>>();
      require(row.size() == static_cast<std::size_t>(dataset.feature_dim),
              "load_dataset: bad feature row");
      for (std::size_t j = 0; j < row.size(); ++j) sample.features(i, j) = row[j];
    }
    sample.groups = GroupAssignment::from_labels(labels, dataset.num_groups);
    dataset.samples.push_back(std::move(sample));
  }
  return dataset;
}

}  // namespace owarank
