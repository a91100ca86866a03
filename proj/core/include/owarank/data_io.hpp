#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "owarank/matrix.hpp"
#include "owarank/policy.hpp"

namespace owarank {

// One query as parsed from a LETOR/SVMLight file, before grouping and
// list-size normalization.
struct RawQuery {
  std::int64_t qid = 0;
  std::vector<double> labels;  // relevance per item, file order
  Matrix features;             // items x feature_dim
};

struct ParsedLetor {
  std::vector<RawQuery> queries;  // file order
  int feature_dim = 0;
};

// Parses `<label> qid:<id> <fid>:<val> ... # comment` lines. Sparse
// features become dense rows (absent ids are 0); feature ids are 1-based
// in the file. feature_dim 0 means infer from the largest id seen.
ParsedLetor parse_letor(std::istream& input, int feature_dim = 0);
ParsedLetor parse_letor_file(const std::string& path, int feature_dim = 0);

// All items of one query, ready for the optimizer.
struct QuerySample {
  std::int64_t qid = 0;
  Matrix features;              // n x d
  GroupAssignment groups;
  std::vector<double> relevance;  // non-negative, size n
};

struct Dataset {
  std::vector<QuerySample> samples;
  int feature_dim = 0;
  int list_size = 0;
  int num_groups = 0;
  std::string provenance;

  std::size_t size() const { return samples.size(); }
};

// (k/m)-quantile thresholds of `values`, k = 1..m-1, linear interpolation.
std::vector<double> quantile_thresholds(std::span<const double> values, int num_groups);

// Bucket index of a value given ascending thresholds; ties at a threshold
// fall into the lower bucket.
int quantile_bucket(double value, std::span<const double> thresholds);

// Protected-group labels per query from corpus-level quantiles of one
// feature column. Throws if the feature is constant over the corpus
// (every bucket would collapse); pick another feature in that case.
std::vector<std::vector<int>> assign_groups(const std::vector<RawQuery>& queries,
                                            int feature_id, int num_groups);
std::vector<std::vector<int>> assign_groups(const std::vector<RawQuery>& queries,
                                            int feature_id,
                                            std::span<const double> thresholds);

struct NormalizeReport {
  int truncated = 0;
  int dropped = 0;
};

// Fixes every query to exactly `list_size` items: longer queries keep the
// top items by ground-truth relevance (ties by document order), shorter
// ones are dropped. The seed is reserved for sampling-based selection;
// relevance truncation does not consume it.
Dataset normalize_lists(const std::vector<RawQuery>& queries,
                        const std::vector<std::vector<int>>& group_labels,
                        int list_size, int num_groups, std::uint64_t seed,
                        NormalizeReport* report = nullptr);

struct SynthSpec {
  int num_queries = 200;
  int list_size = 20;
  int feature_dim = 16;
  int num_groups = 2;
  double noise = 0.0;
  std::uint64_t seed = 0;
  int group_feature = 0;  // column whose corpus quantiles define groups
};

// Seeded synthetic corpus: standard-normal features, a hidden weight
// vector, relevance = softplus(x . hidden + noise * eps) so scores are
// non-negative and learnable, groups from quantiles of one column.
Dataset synthesize(const SynthSpec& spec);

struct SplitFractions {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

// Seeded shuffle of query indices, then partition.
std::array<Dataset, 3> split(const Dataset& dataset, const SplitFractions& fractions,
                             std::uint64_t seed);

// Versioned JSON-lines dataset files; values round-trip exactly.
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

}  // namespace owarank
