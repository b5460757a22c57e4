#include "robsens/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "doctest.h"
#include "robsens/errors.hpp"
#include "support.hpp"

using namespace robsens;

namespace {

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& content) {
    path = std::string("robsens_test_") + std::to_string(rand()) + ".csv";
    std::ofstream out(path);
    out << content;
  }
  ~TempCsv() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_csv keeps already-canonical order") {
  TempCsv f("y,z,a\n1,1,0.1\n2,1,0.2\n3,0,0.3\n4,0,0.4\n");
  Dataset d = load_csv(f.path, {"y", "z", {}});
  CHECK(d.n1() == 2);
  CHECK(d.n0() == 2);
  CHECK(d.original_index() == std::vector<int>{0, 1, 2, 3});
  CHECK(d.y() == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("load_csv stable-reorders treated first") {
  TempCsv f("y,z,a\n1,0,0.1\n2,1,0.2\n3,0,0.3\n4,1,0.4\n");
  Dataset d = load_csv(f.path, {"y", "z", {}});
  CHECK(d.n1() == 2);
  // first two canonical rows are the original rows 2 and 4 (1-based)
  CHECK(d.original_index() == std::vector<int>{1, 3, 0, 2});
  CHECK(d.y() == std::vector<double>{2, 4, 1, 3});
  CHECK(d.z() == std::vector<int>{1, 1, 0, 0});
}

TEST_CASE("reordering preserves the row multiset") {
  TempCsv f("y,z,a,b\n5,0,1,2\n6,1,3,4\n7,0,5,6\n8,1,7,8\n9,1,9,10\n");
  Dataset d = load_csv(f.path, {"y", "z", {}});
  std::multiset<double> ys(d.y().begin(), d.y().end());
  CHECK(ys == std::multiset<double>{5, 6, 7, 8, 9});
  for (int i = 0; i < d.n(); ++i) {
    const int orig = d.original_index()[i];
    CHECK(d.y()[i] == doctest::Approx(5.0 + orig));
  }
}

TEST_CASE("csv errors") {
  SUBCASE("non-binary treatment") {
    TempCsv f("y,z\n1,2\n2,0\n");
    CHECK_THROWS_AS(load_csv(f.path, {"y", "z", {}}), NonBinaryTreatmentError);
  }
  SUBCASE("missing column") {
    TempCsv f("y,w\n1,0\n");
    CHECK_THROWS_AS(load_csv(f.path, {"y", "z", {}}), MissingColumnError);
  }
  SUBCASE("non-numeric outcome") {
    TempCsv f("y,z\nfoo,0\n1,1\n");
    CHECK_THROWS_AS(load_csv(f.path, {"y", "z", {}}), NonNumericValueError);
  }
  SUBCASE("all treated") {
    TempCsv f("y,z\n1,1\n2,1\n");
    CHECK_THROWS_AS(load_csv(f.path, {"y", "z", {}}),
                    AllTreatedOrAllControlError);
  }
  SUBCASE("semicolon delimiter") {
    TempCsv f("y;z;a\n1;1;2\n2;0;3\n");
    CsvSchema schema{"y", "z", {}, ';'};
    Dataset d = load_csv(f.path, schema);
    CHECK(d.n() == 2);
    CHECK(d.x()(0, 0) == doctest::Approx(2.0));
  }
}

TEST_CASE("identity designs get an intercept column in s only") {
  Dataset d = testsupport::toy_dataset({1, 2, 3, 4}, {1, 1, 0, 0},
                                       {{1, 5}, {2, 6}, {3, 9}, {4, 8}});
  TransformSpec spec = TransformSpec::identity({"x1", "x2"}, {"x1"});
  Dataset built = build_designs(d, spec);
  REQUIRE(built.s_design().cols() == 3);
  CHECK(built.s_design().col(0).isApprox(Eigen::VectorXd::Ones(4)));
  CHECK(built.s_design().col(1).isApprox(built.x().col(0)));
  REQUIRE(built.g_design().cols() == 1);
  CHECK(built.g_design().col(0).isApprox(built.x().col(0)));
}

TEST_CASE("standardizing a constant column is rank deficient") {
  Dataset d = testsupport::toy_dataset({1, 2, 3, 4}, {1, 1, 0, 0},
                                       {{7}, {7}, {7}, {7}});
  TransformSpec spec;
  spec.s_columns = {parse_transform("standardize(x1)")};
  CHECK_THROWS_AS(build_designs(d, spec), RankDeficientDesignError);
}

TEST_CASE("duplicated columns are rank deficient") {
  Dataset d = testsupport::toy_dataset({1, 2, 3, 4}, {1, 1, 0, 0},
                                       {{1}, {2}, {3}, {4}});
  TransformSpec spec = TransformSpec::identity({"x1", "x1"}, {});
  CHECK_THROWS_AS(build_designs(d, spec), RankDeficientDesignError);
}

TEST_CASE("product transform multiplies elementwise") {
  Dataset d =
      testsupport::toy_dataset({0, 0, 0}, {1, 0, 0}, {{1, 2}, {3, 4}, {1, 1}});
  TransformSpec spec = TransformSpec::identity({"x1"}, {});
  spec.g_columns = {parse_transform("product(x1,x2)")};
  Dataset built = build_designs(d, spec);
  CHECK(built.g_design()(0, 0) == doctest::Approx(2.0));
  CHECK(built.g_design()(1, 0) == doctest::Approx(12.0));
  CHECK(built.g_design()(2, 0) == doctest::Approx(1.0));
}

TEST_CASE("build_designs is deterministic") {
  testsupport::kInf;  // silence unused include warnings in some compilers
  Dataset d = testsupport::toy_dataset({1, 2, 3, 4, 5}, {1, 0, 1, 0, 1},
                                       {{1.5}, {2.5}, {-1}, {0.25}, {9}});
  TransformSpec spec;
  spec.s_columns = {parse_transform("standardize(x1)")};
  spec.g_columns = {parse_transform("x1")};
  Dataset a = build_designs(d, spec);
  Dataset b = build_designs(d, spec);
  CHECK(a.s_design() == b.s_design());
  CHECK(a.g_design() == b.g_design());
}

TEST_CASE("transform parsing") {
  ColumnTransform t1 = parse_transform("age");
  CHECK(t1.kind == TransformKind::Identity);
  CHECK(t1.a == "age");
  ColumnTransform t2 = parse_transform("standardize(income)");
  CHECK(t2.kind == TransformKind::Standardize);
  CHECK(t2.a == "income");
  ColumnTransform t3 = parse_transform("product(age, income)");
  CHECK(t3.kind == TransformKind::Product);
  CHECK(t3.a == "age");
  CHECK(t3.b == "income");
  CHECK_THROWS_AS(parse_transform("product(age)"), ConfigError);
}

TEST_CASE("unknown selector raises MissingColumn") {
  Dataset d = testsupport::toy_dataset({1, 2}, {1, 0}, {{1}, {2}});
  TransformSpec spec = TransformSpec::identity({"nope"}, {});
  CHECK_THROWS_AS(build_designs(d, spec), MissingColumnError);
}
