#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"

#include "bendoct/dataset.hpp"
#include "bendoct/driver.hpp"

using namespace bendoct;

namespace {

std::string data_file(const char* name) { return std::string(BENDOCT_DATA_DIR) + "/" + name; }

// Smallest value whose count of values <= it reaches the rank, then the
// midpoint to the next larger value.
std::vector<double> counting_quantiles(const std::vector<double>& values, int q) {
  const int n = static_cast<int>(values.size());
  std::set<double> distinct(values.begin(), values.end());
  std::vector<double> cuts;
  for (int m = 1; m < q; ++m) {
    const int rank = (m * n + q - 1) / q;
    for (double v : distinct) {
      int le = 0;
      for (double x : values) le += x <= v;
      if (le < rank) continue;
      auto next = distinct.upper_bound(v);
      if (next != distinct.end()) {
        const double cut = (v + *next) / 2;
        if (std::find(cuts.begin(), cuts.end(), cut) == cuts.end()) cuts.push_back(cut);
      }
      break;
    }
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace

TEST_CASE("csv loading infers column kinds") {
  std::istringstream in("a,b,label\n1.5,x,p\n2,y,q\n3,\"x\",p\n");
  const auto raw = parse_csv(in, "label");
  CHECK(raw.n_samples() == 3);
  CHECK(raw.columns[0].kind == ColumnKind::continuous);
  CHECK(raw.columns[1].kind == ColumnKind::categorical);
  CHECK(raw.columns[2].kind == ColumnKind::label);
  CHECK(raw.rows[2][1] == "x");
}

TEST_CASE("csv errors") {
  SUBCASE("missing value names the row") {
    std::istringstream in("a,b,label\n1,2,p\n3,,q\n");
    try {
      parse_csv(in, "label");
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("short row") {
    std::istringstream in("a,b,label\n1,2,p\n3,q\n");
    CHECK_THROWS_AS(parse_csv(in, "label"), DataError);
  }
  SUBCASE("unknown label") {
    std::istringstream in("a,b\n1,2\n");
    CHECK_THROWS_AS(parse_csv(in, "label"), DataError);
  }
  SUBCASE("empty") {
    std::istringstream in("a,label\n");
    CHECK_THROWS_AS(parse_csv(in, "label"), DataError);
  }
}

TEST_CASE("named datasets load with their Table 3 shapes") {
  const auto iris = load_csv(data_file("iris.csv"), "class");
  CHECK(iris.n_samples() == 150);
  int cont = 0;
  for (const auto& c : iris.columns) cont += c.kind == ColumnKind::continuous;
  CHECK(cont == 4);

  const auto monk = load_csv(data_file("monk1.csv"), "class");
  CHECK(monk.n_samples() == 124);
  int cat = 0;
  for (const auto& c : monk.columns) cat += c.kind == ColumnKind::categorical;
  CHECK(cat == 6);
  const auto bin = encode(monk, Encoding::onehot);
  CHECK(bin.n_classes() == 2);
}

TEST_CASE("quantile cutpoints") {
  SUBCASE("1..100 in fifths") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    const auto cuts = quantile_cutpoints(v, 5);
    CHECK(cuts.size() == 4);
    CHECK(cuts == counting_quantiles(v, 5));
  }
  SUBCASE("constant column") {
    std::vector<double> v(17, 3.25);
    CHECK(quantile_cutpoints(v, 5).empty());
  }
  SUBCASE("two values repeated") {
    std::vector<double> v;
    for (int i = 0; i < 20; ++i) v.push_back(i % 2);
    const auto cuts = quantile_cutpoints(v, 5);
    REQUIRE(cuts.size() == 1);
    CHECK(cuts[0] > 0.0);
    CHECK(cuts[0] < 1.0);
  }
  SUBCASE("random samples agree with the counting rule") {
    std::mt19937 rng(7);
    for (int t = 0; t < 200; ++t) {
      std::uniform_int_distribution<int> n(1, 60), val(0, 12);
      std::vector<double> v(n(rng));
      for (auto& x : v) x = val(rng) * 0.5;
      const int q = 2 + t % 6;
      CHECK(quantile_cutpoints(v, q) == counting_quantiles(v, q));
    }
  }
}

TEST_CASE("binary encodings reproduce Table 3 feature counts") {
  const auto iris = load_csv(data_file("iris.csv"), "class");
  const auto wine = load_csv(data_file("wine.csv"), "class");
  const auto monk = load_csv(data_file("monk1.csv"), "class");
  CHECK(encode(iris, Encoding::qb5).n_features() == 20);
  CHECK(encode(iris, Encoding::qt5).n_features() == 16);
  CHECK(encode(wine, Encoding::qb5).n_features() == 65);
  CHECK(encode(wine, Encoding::qt5).n_features() == 52);
  CHECK(encode(monk, Encoding::onehot).n_features() == 15);
  CHECK_THROWS_AS(encode(monk, Encoding::qt5), DataError);
}

TEST_CASE("bucket bits are one-hot and threshold bits are monotone") {
  const auto wine = load_csv(data_file("wine.csv"), "class");
  for (auto enc : {Encoding::qb5, Encoding::qt5}) {
    const auto d = encode(wine, enc);
    std::map<int, std::vector<int>> by_source;
    for (int f = 0; f < d.n_features(); ++f) by_source[d.features()[f].source_column].push_back(f);
    for (const auto& [src, fs] : by_source) {
      for (int i = 0; i < d.n_samples(); ++i) {
        if (enc == Encoding::qb5) {
          int s = 0;
          for (int f : fs) s += d.x(i, f);
          CHECK(s == 1);
        } else {
          for (std::size_t m = 1; m < fs.size(); ++m) CHECK(d.x(i, fs[m - 1]) >= d.x(i, fs[m]));
        }
      }
    }
    std::set<std::string> descriptors;
    for (const auto& fd : d.features()) descriptors.insert(fd.describe());
    CHECK(descriptors.size() == static_cast<std::size_t>(d.n_features()));
    CHECK(encode(wine, enc) == d);
  }
}

TEST_CASE("threshold bits compare against raw values") {
  const auto iris = load_csv(data_file("iris.csv"), "class");
  const auto d = encode(iris, Encoding::qt5);
  for (int f = 0; f < d.n_features(); ++f) {
    const auto& fd = d.features()[f];
    REQUIRE(fd.kind == FeatureKind::threshold);
    for (int i = 0; i < d.n_samples(); ++i) {
      const double v = std::stod(iris.rows[i][fd.source_column]);
      CHECK(d.x(i, f) == (v >= fd.threshold));
    }
  }
}

TEST_CASE("labels are indexed in order of first appearance") {
  std::istringstream in("a,label\nx,zeta\ny,alpha\nx,zeta\nz,mid\n");
  const auto d = encode(parse_csv(in, "label"), Encoding::onehot);
  CHECK(d.class_names() == std::vector<std::string>{"zeta", "alpha", "mid"});
  CHECK(d.labels() == std::vector<int>{0, 1, 0, 2});
  CHECK(d.n_features() == 3);
}

TEST_CASE("binary dataset text round trip") {
  const auto d = encode(load_csv(data_file("iris.csv"), "class"), Encoding::qb5);
  std::stringstream s;
  write_binary_dataset(s, d);
  const auto back = read_binary_dataset(s);
  CHECK(back == d);

  std::istringstream bad("samples 1 features 1 classes 2\nclass 0 a\nclass 1 b\nfeature 0 nonsense\n");
  CHECK_THROWS_AS(read_binary_dataset(bad), DataError);
}
