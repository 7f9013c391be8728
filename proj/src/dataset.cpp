#include "bendoct/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace bendoct {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  out.push_back(trim(field));
  return out;
}

bool parse_double(const std::string& s, double& value) {
  if (s.empty()) return false;
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(value);
}

double to_double(const std::string& s, std::size_t row, const std::string& column) {
  double v = 0.0;
  if (!parse_double(s, v)) {
    throw DataError("row " + std::to_string(row + 1) + ": column '" + column +
                    "' is not numeric: '" + s + "'");
  }
  return v;
}

std::string sanitize(std::string s) {
  for (auto& c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  }
  return s.empty() ? std::string("_") : s;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::size_t RawDataset::label_index() const {
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].kind == ColumnKind::label) return j;
  }
  throw DataError("dataset has no label column");
}

RawDataset parse_csv(std::istream& in, const std::string& label_column,
                     const std::map<std::string, ColumnKind>& overrides) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty input: missing header row");
  const auto header = split_fields(line);

  RawDataset raw;
  std::set<std::string> seen;
  for (const auto& name : header) {
    if (name.empty()) throw DataError("header contains an empty column name");
    if (!seen.insert(name).second) throw DataError("duplicate column name '" + name + "'");
    raw.columns.push_back({name, ColumnKind::continuous});
  }
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw DataError("unknown label column '" + label_column + "'");
  for (const auto& [name, kind] : overrides) {
    if (!seen.contains(name)) throw DataError("override for unknown column '" + name + "'");
    if (kind == ColumnKind::label && name != label_column) {
      throw DataError("only the label column may have kind label");
    }
  }

  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("row " + std::to_string(data_row + 1) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (fields[j].empty() || fields[j] == "?") {
        throw DataError("row " + std::to_string(data_row + 1) + ": missing value in column '" +
                        header[j] + "'");
      }
    }
    raw.rows.push_back(std::move(fields));
    ++data_row;
  }
  if (raw.rows.empty()) throw DataError("dataset has no rows");

  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    auto& col = raw.columns[j];
    if (col.name == label_column) {
      col.kind = ColumnKind::label;
      continue;
    }
    if (auto it = overrides.find(col.name); it != overrides.end()) {
      col.kind = it->second;
      continue;
    }
    double dummy = 0.0;
    const bool numeric = std::all_of(raw.rows.begin(), raw.rows.end(),
                                     [&](const auto& r) { return parse_double(r[j], dummy); });
    col.kind = numeric ? ColumnKind::continuous : ColumnKind::categorical;
  }
  return raw;
}

RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                    const std::map<std::string, ColumnKind>& overrides) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_csv(in, label_column, overrides);
}

std::vector<double> quantile_cutpoints(std::span<const double> values, int q) {
  if (values.empty()) throw DataError("quantile_cutpoints: no values");
  if (q < 2) throw DataError("quantile_cutpoints: q must be at least 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<long long>(sorted.size());

  std::vector<double> cuts;
  for (int m = 1; m < q; ++m) {
    const long long rank = (m * n + q - 1) / q;  // ceil(m n / q), 1-based
    const double v = sorted[static_cast<std::size_t>(std::max(1LL, rank) - 1)];
    const auto next = std::upper_bound(sorted.begin(), sorted.end(), v);
    if (next == sorted.end()) continue;
    const double cut = v + (*next - v) / 2.0;
    if (cuts.empty() || cuts.back() != cut) cuts.push_back(cut);
  }
  return cuts;
}

EncodingSpec EncodingSpec::uniform(const RawDataset& raw, ContinuousScheme scheme, int q) {
  EncodingSpec spec;
  for (const auto& col : raw.columns) {
    if (col.kind == ColumnKind::continuous) spec.continuous[col.name] = {scheme, q};
    if (col.kind == ColumnKind::categorical) spec.categorical.push_back(col.name);
  }
  return spec;
}

std::string FeatureDescriptor::describe() const {
  std::ostringstream os;
  switch (kind) {
    case FeatureKind::category:
      os << source_name << "==" << category;
      break;
    case FeatureKind::bucket:
      os << source_name << " in [" << format_double(lower) << "," << format_double(upper) << ")";
      break;
    case FeatureKind::threshold:
      os << source_name << ">=" << format_double(threshold);
      break;
  }
  return os.str();
}

BinaryDataset::BinaryDataset(std::vector<std::uint8_t> bits, int n_features,
                             std::vector<int> labels, std::vector<std::string> class_names,
                             std::vector<FeatureDescriptor> features)
    : bits_(std::move(bits)),
      n_features_(n_features),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)),
      features_(std::move(features)) {
  if (n_features_ < 0) throw DataError("negative feature count");
  if (bits_.size() != labels_.size() * static_cast<std::size_t>(n_features_)) {
    throw DataError("bit matrix size does not match samples x features");
  }
  if (class_names_.size() < 2) throw DataError("a dataset needs at least two classes");
  for (auto b : bits_) {
    if (b > 1) throw DataError("feature values must be 0 or 1");
  }
  for (int k : labels_) {
    if (k < 0 || k >= n_classes()) throw DataError("label out of range");
  }
  if (features_.empty()) {
    for (int f = 0; f < n_features_; ++f) {
      FeatureDescriptor d;
      d.source_column = f;
      d.source_name = "x" + std::to_string(f);
      d.category = "1";
      features_.push_back(d);
    }
  }
  if (features_.size() != static_cast<std::size_t>(n_features_)) {
    throw DataError("feature descriptor count does not match feature count");
  }
}

std::vector<int> BinaryDataset::all_samples() const {
  std::vector<int> ids(labels_.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

std::vector<int> BinaryDataset::class_counts() const {
  std::vector<int> counts(class_names_.size(), 0);
  for (int k : labels_) ++counts[k];
  return counts;
}

int BinaryDataset::majority_class() const {
  const auto counts = class_counts();
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

BinaryDataset binarize(const RawDataset& raw, const EncodingSpec& spec) {
  const std::size_t label_col = raw.label_index();
  const std::size_t n = raw.n_samples();
  if (n == 0) throw DataError("dataset has no rows");

  std::vector<std::vector<std::uint8_t>> columns;  // one bit column per binary feature
  std::vector<FeatureDescriptor> features;

  for (std::size_t j = 0; j < raw.columns.size(); ++j) {
    const auto& col = raw.columns[j];
    if (j == label_col) continue;

    if (col.kind == ColumnKind::categorical) {
      if (std::find(spec.categorical.begin(), spec.categorical.end(), col.name) ==
          spec.categorical.end()) {
        throw DataError("encoding spec does not cover column '" + col.name + "'");
      }
      std::vector<std::string> levels;
      for (const auto& r : raw.rows) {
        if (std::find(levels.begin(), levels.end(), r[j]) == levels.end()) levels.push_back(r[j]);
      }
      std::sort(levels.begin(), levels.end());
      if (levels.size() <= 2) levels.erase(levels.begin());  // constant -> none, binary -> one bit
      for (std::size_t m = 0; m < levels.size(); ++m) {
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i) bits[i] = raw.rows[i][j] == levels[m] ? 1 : 0;
        FeatureDescriptor d;
        d.source_column = static_cast<int>(j);
        d.source_name = col.name;
        d.kind = FeatureKind::category;
        d.category = levels[m];
        d.index_in_source = static_cast<int>(m);
        columns.push_back(std::move(bits));
        features.push_back(std::move(d));
      }
      continue;
    }

    const auto it = spec.continuous.find(col.name);
    if (it == spec.continuous.end()) {
      throw DataError("encoding spec does not cover column '" + col.name + "'");
    }
    if (it->second.quantiles < 2) throw DataError("quantile count must be at least 2");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = to_double(raw.rows[i][j], i, col.name);
    const auto cuts = quantile_cutpoints(values, it->second.quantiles);

    if (it->second.scheme == ContinuousScheme::threshold) {
      for (std::size_t m = 0; m < cuts.size(); ++m) {
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i) bits[i] = values[i] >= cuts[m] ? 1 : 0;
        FeatureDescriptor d;
        d.source_column = static_cast<int>(j);
        d.source_name = col.name;
        d.kind = FeatureKind::threshold;
        d.threshold = cuts[m];
        d.index_in_source = static_cast<int>(m);
        columns.push_back(std::move(bits));
        features.push_back(std::move(d));
      }
    } else {
      if (cuts.empty()) continue;  // a single bucket can never split
      const double inf = std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m <= cuts.size(); ++m) {
        const double lo = m == 0 ? -inf : cuts[m - 1];
        const double hi = m == cuts.size() ? inf : cuts[m];
        std::vector<std::uint8_t> bits(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
          bits[i] = (values[i] >= lo && values[i] < hi) ? 1 : 0;
          any = any || bits[i];
        }
        if (!any) continue;
        FeatureDescriptor d;
        d.source_column = static_cast<int>(j);
        d.source_name = col.name;
        d.kind = FeatureKind::bucket;
        d.lower = lo;
        d.upper = hi;
        d.index_in_source = static_cast<int>(m);
        columns.push_back(std::move(bits));
        features.push_back(std::move(d));
      }
    }
  }

  std::vector<std::string> class_names;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = raw.rows[i][label_col];
    auto pos = std::find(class_names.begin(), class_names.end(), v);
    if (pos == class_names.end()) {
      class_names.push_back(v);
      pos = class_names.end() - 1;
    }
    labels[i] = static_cast<int>(pos - class_names.begin());
  }
  if (class_names.size() < 2) throw DataError("label column has a single class");

  const int n_features = static_cast<int>(columns.size());
  std::vector<std::uint8_t> bits(n * static_cast<std::size_t>(n_features));
  for (std::size_t i = 0; i < n; ++i) {
    for (int f = 0; f < n_features; ++f) bits[i * n_features + f] = columns[f][i];
  }
  return BinaryDataset(std::move(bits), n_features, std::move(labels), std::move(class_names),
                       std::move(features));
}

void write_binary_dataset(std::ostream& out, const BinaryDataset& data) {
  out << "bendoct-binary 1\n";
  out << "samples " << data.n_samples() << " features " << data.n_features() << " classes "
      << data.n_classes() << "\n";
  for (int k = 0; k < data.n_classes(); ++k) {
    out << "class " << k << " " << sanitize(data.class_names()[k]) << "\n";
  }
  for (int f = 0; f < data.n_features(); ++f) {
    const auto& d = data.features()[f];
    out << "feature " << f << " ";
    switch (d.kind) {
      case FeatureKind::category:
        out << "category " << d.source_column << " " << sanitize(d.source_name) << " "
            << d.index_in_source << " " << sanitize(d.category);
        break;
      case FeatureKind::bucket:
        out << "bucket " << d.source_column << " " << sanitize(d.source_name) << " "
            << d.index_in_source << " " << format_double(d.lower) << " "
            << format_double(d.upper);
        break;
      case FeatureKind::threshold:
        out << "threshold " << d.source_column << " " << sanitize(d.source_name) << " "
            << d.index_in_source << " " << format_double(d.threshold);
        break;
    }
    out << "\n";
  }
  out << "data\n";
  for (int i = 0; i < data.n_samples(); ++i) {
    for (auto b : data.row(i)) out << (b ? '1' : '0');
    out << " " << data.y(i) << "\n";
  }
}

BinaryDataset read_binary_dataset(std::istream& in) {
  auto fail = [](const std::string& what) -> DataError {
    return DataError("binary dataset: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || trim(line) != "bendoct-binary 1") throw fail("bad magic line");

  std::string w1, w2, w3;
  int n_samples = 0, n_features = 0, n_classes = 0;
  if (!std::getline(in, line)) throw fail("missing size line");
  {
    std::istringstream ls(line);
    if (!(ls >> w1 >> n_samples >> w2 >> n_features >> w3 >> n_classes) || w1 != "samples" ||
        w2 != "features" || w3 != "classes" || n_samples < 0 || n_features < 0) {
      throw fail("malformed size line");
    }
  }
  std::vector<std::string> class_names(n_classes);
  for (int k = 0; k < n_classes; ++k) {
    if (!std::getline(in, line)) throw fail("truncated class table");
    std::istringstream ls(line);
    int idx = -1;
    if (!(ls >> w1 >> idx >> class_names[k]) || w1 != "class" || idx != k) {
      throw fail("malformed class line");
    }
  }
  auto num = [&](const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    if (!parse_double(s, v)) throw fail("bad number '" + s + "'");
    return v;
  };
  std::vector<FeatureDescriptor> features(n_features);
  for (int f = 0; f < n_features; ++f) {
    if (!std::getline(in, line)) throw fail("truncated feature table");
    std::istringstream ls(line);
    int idx = -1;
    std::string kind;
    auto& d = features[f];
    if (!(ls >> w1 >> idx >> kind >> d.source_column >> d.source_name >> d.index_in_source) ||
        w1 != "feature" || idx != f) {
      throw fail("malformed feature line");
    }
    if (kind == "category") {
      d.kind = FeatureKind::category;
      if (!(ls >> d.category)) throw fail("malformed category feature");
    } else if (kind == "bucket") {
      d.kind = FeatureKind::bucket;
      std::string lo, hi;
      if (!(ls >> lo >> hi)) throw fail("malformed bucket feature");
      d.lower = num(lo);
      d.upper = num(hi);
    } else if (kind == "threshold") {
      d.kind = FeatureKind::threshold;
      std::string t;
      if (!(ls >> t)) throw fail("malformed threshold feature");
      d.threshold = num(t);
    } else {
      throw fail("unknown feature kind '" + kind + "'");
    }
  }
  if (!std::getline(in, line) || trim(line) != "data") throw fail("missing data marker");
  std::vector<std::uint8_t> bits;
  bits.reserve(static_cast<std::size_t>(n_samples) * n_features);
  std::vector<int> labels;
  for (int i = 0; i < n_samples; ++i) {
    if (!std::getline(in, line)) throw fail("truncated data section");
    std::istringstream ls(line);
    std::string row;
    int k = -1;
    if (n_features == 0) {
      if (!(ls >> k)) throw fail("malformed data row");
    } else if (!(ls >> row >> k)) {
      throw fail("malformed data row");
    }
    if (static_cast<int>(row.size()) != n_features) throw fail("data row has wrong width");
    for (char c : row) {
      if (c != '0' && c != '1') throw fail("data row contains a non-binary value");
      bits.push_back(c == '1' ? 1 : 0);
    }
    labels.push_back(k);
  }
  return BinaryDataset(std::move(bits), n_features, std::move(labels), std::move(class_names),
                       std::move(features));
}

}  // namespace bendoct
