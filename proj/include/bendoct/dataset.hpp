#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bendoct {

/// Raised for malformed input files and encoding specifications.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ColumnKind { categorical, continuous, label };

struct Column {
  std::string name;
  ColumnKind kind;
};

/// Tabular data as read from disk, before any binary encoding.
struct RawDataset {
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t n_samples() const { return rows.size(); }
  std::size_t label_index() const;
};

/// Parses comma-delimited text with a header row. Column kinds are inferred
/// (every value numeric-parseable -> continuous) unless listed in `overrides`.
/// Rows with an empty field are rejected; the error names the 1-based data row.
RawDataset parse_csv(std::istream& in, const std::string& label_column,
                     const std::map<std::string, ColumnKind>& overrides = {});
RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                    const std::map<std::string, ColumnKind>& overrides = {});

/// Interior quantile cut points for q-quantile discretisation.
///
/// For m = 1..q-1 the nearest-rank order statistic v = x_(ceil(m*n/q)) is
/// taken and the cut is placed at the midpoint between v and the next larger
/// distinct value. Cuts with no larger value are dropped and duplicates are
/// merged, so every returned cut separates at least one pair of values.
std::vector<double> quantile_cutpoints(std::span<const double> values, int q);

enum class ContinuousScheme { bucket, threshold };

struct ContinuousEncoding {
  ContinuousScheme scheme = ContinuousScheme::threshold;
  int quantiles = 5;
};

/// Per-column encoding choices. Categorical columns are always one-hot, but
/// must still be listed so that a missing column is detected.
struct EncodingSpec {
  std::map<std::string, ContinuousEncoding> continuous;
  std::vector<std::string> categorical;

  /// Same scheme for every continuous column of `raw`.
  static EncodingSpec uniform(const RawDataset& raw, ContinuousScheme scheme, int q = 5);
};

enum class FeatureKind { category, bucket, threshold };

/// Provenance of one binary feature.
struct FeatureDescriptor {
  int source_column = -1;
  std::string source_name;
  FeatureKind kind = FeatureKind::category;
  std::string category;     // category: level that maps to 1
  double lower = 0.0;       // bucket: lower bound (inclusive), -inf for the first
  double upper = 0.0;       // bucket: upper bound (exclusive), +inf for the last
  double threshold = 0.0;   // threshold: bit is value >= threshold
  int index_in_source = 0;  // bucket/threshold ordinal within its source column

  std::string describe() const;
  bool operator==(const FeatureDescriptor&) const = default;
};

/// Immutable binary sample matrix with class labels.
class BinaryDataset {
 public:
  BinaryDataset() = default;
  /// `bits` is row-major |I| x |F| with entries 0/1, `labels` in [0, class_names.size()).
  BinaryDataset(std::vector<std::uint8_t> bits, int n_features, std::vector<int> labels,
                std::vector<std::string> class_names, std::vector<FeatureDescriptor> features = {});

  int n_samples() const { return static_cast<int>(labels_.size()); }
  int n_features() const { return n_features_; }
  int n_classes() const { return static_cast<int>(class_names_.size()); }

  std::uint8_t x(int sample, int feature) const {
    return bits_[static_cast<std::size_t>(sample) * n_features_ + feature];
  }
  std::span<const std::uint8_t> row(int sample) const {
    return {bits_.data() + static_cast<std::size_t>(sample) * n_features_,
            static_cast<std::size_t>(n_features_)};
  }
  int y(int sample) const { return labels_[sample]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::vector<FeatureDescriptor>& features() const { return features_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::vector<int> all_samples() const;
  std::vector<int> class_counts() const;
  int majority_class() const;

  bool operator==(const BinaryDataset&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
  int n_features_ = 0;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::vector<FeatureDescriptor> features_;
};

/// Encodes every non-label column of `raw`. Categorical columns with k >= 3
/// observed levels become k indicators, two-level columns a single indicator
/// of the second level, constant columns nothing. Continuous columns follow
/// their ContinuousEncoding; empty buckets are never emitted. Class labels are
/// indexed in order of first appearance.
BinaryDataset binarize(const RawDataset& raw, const EncodingSpec& spec);

/// Columnar text format used for fixtures:
///
///   bendoct-binary 1
///   samples <I> features <F> classes <K>
///   class <k> <name>                      (K lines)
///   feature <f> <descriptor>              (F lines)
///   data
///   <F characters of 0/1> <class index>   (I lines)
void write_binary_dataset(std::ostream& out, const BinaryDataset& data);
BinaryDataset read_binary_dataset(std::istream& in);

}  // namespace bendoct
