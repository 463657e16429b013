#include <gtest/gtest.h>

#include <fstream>

#include "histcheck/json_io.hpp"

using namespace histcheck;

namespace {

Json load(const std::string& name) {
  std::ifstream in(std::string(HISTCHECK_DATA_DIR) + "/" + name);
  return Json::parse(in);
}

}  // namespace

TEST(JsonIo, MatrixRoundTrip) {
  const auto u = haar_random_unitary(3, std::uint64_t{6});
  EXPECT_EQ(matrix_from_json(Json::parse(to_json(u).dump())), u);
}

TEST(JsonIo, MatrixRejectsMalformed) {
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"dim":2,"entries":[[[1,0],[0,0]],[[0,0]]]})")), ParseError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"dim":1,"entries":[[[1]]]})")), ParseError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"dim":1,"entries":[[["x",0]]]})")), ParseError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"entries":[]})")), ParseError);
  EXPECT_THROW(matrix_from_json(Json::parse(R"({"dim":-1,"entries":[]})")), ParseError);
}

TEST(JsonIo, PartitionBothEncodings) {
  const auto groups = partition_from_json(Json::parse(R"({"dim":3,"basis_groups":[[0,2],[1]]})"));
  EXPECT_EQ(groups.ranks(), (std::vector<std::size_t>{2, 1}));
  const auto again = partition_from_json(Json::parse(to_json(groups).dump()));
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0], groups[0]);
  EXPECT_EQ(again[1], groups[1]);
}

TEST(JsonIo, OverlappingProjectorsFile) {
  try {
    bundle_from_json(load("overlapping_projectors.json"));
    FAIL();
  } catch (const PartitionError& e) {
    EXPECT_EQ(e.kind(), PartitionError::Kind::NotOrthogonal);
  }
}

TEST(JsonIo, BundledInputs) {
  const auto h = bundle_from_json(load("hadamard_k2.json"));
  ASSERT_TRUE(h.unitary && h.rho);
  EXPECT_LT((h.unitary->eigen() - hadamard().eigen()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(h.rho->matrix()(0, 0), Complex(1.0));
  const auto id = bundle_from_json(load("identity_k3.json"));
  EXPECT_TRUE(is_fine_grained(id.partition));
  const auto coarse = bundle_from_json(load("coarse_d3.json"));
  EXPECT_EQ(coarse.partition.ranks(), (std::vector<std::size_t>{1, 2}));
  EXPECT_TRUE(is_unitary(*coarse.unitary, 1e-12));
  const auto again = bundle_from_json(Json::parse(to_json(h).dump()));
  EXPECT_EQ(*again.unitary, *h.unitary);
}

TEST(JsonIo, DensityRejectsNonPositive) {
  auto j = to_json(ComplexMatrix::diagonal({1.5, -0.5}));
  j["type"] = "density";
  EXPECT_THROW(density_from_json(j), InvalidArgument);
  j["type"] = "unitary";
  EXPECT_THROW(density_from_json(j), ParseError);
}

TEST(JsonIo, GramSparseRoundTrip) {
  const auto rho = DensityOperator::validated(ComplexMatrix::diagonal({1.0, 0.0}));
  const auto g = full_gram(hadamard(), fine_grained_partition(2), rho, 2);
  const auto j = to_json(g);
  // 4 diagonal + 4 nonzero off-diagonal entries.
  EXPECT_EQ(j.at("entries").size(), 8u);
  const auto back = gram_from_json(Json::parse(j.dump()));
  for (HistoryCode a = 0; a < 4; ++a)
    for (HistoryCode b = 0; b < 4; ++b) EXPECT_EQ(back(a, b), g(a, b));
  EXPECT_THROW(gram_from_json(Json::parse(R"({"k":1,"m":2,"entries":[[0,5,1,0]]})")), ParseError);
}

TEST(JsonIo, ReportRoundTripAllWitnessKinds) {
  std::vector<CheckReport> reports;
  const auto rho = DensityOperator::validated(ComplexMatrix::diagonal({1.0, 0.0}));
  const auto p = fine_grained_partition(2);
  reports.push_back(check_approx_strong(hadamard(), p, rho, 2, Epsilon(0.5)));
  reports.push_back(check_commutators(hadamard(), p, 2));
  reports.push_back(check_loop_condition(hadamard(), p, 1, Epsilon(0.01)));
  reports.push_back(check_classicality_preservation(hadamard(), p));
  reports.push_back(check_exact_all_partition_states(ComplexMatrix::identity(2), p, 2));
  for (const auto& r : reports) {
    const auto j = to_json(r);
    EXPECT_EQ(report_from_json(Json::parse(j.dump())), r) << j.dump();
  }
  const auto j = to_json(reports[0]);
  EXPECT_EQ(j.at("witness").at("type"), "history_pair");
  EXPECT_EQ(to_json(reports[2]).at("witness").at("type"), "loop");
  EXPECT_EQ(to_json(reports[3]).at("witness").at("type"), "block_unit");
}

TEST(JsonIo, ExperimentJsonl) {
  const auto r = run_theorem1_experiment(Ensemble{EnsembleKind::permutation, 2, {}, 3, 1}, 2, 2, 1e-9);
  const auto text = to_jsonl(r);
  std::istringstream lines(text);
  std::string line;
  std::vector<Json> parsed;
  while (std::getline(lines, line)) parsed.push_back(Json::parse(line));
  ASSERT_EQ(parsed.size(), 4u);
  EXPECT_EQ(parsed[0].at("type"), "trial");
  EXPECT_EQ(parsed[3].at("type"), "summary");
  EXPECT_EQ(parsed[3].at("counts").at("all_pass"), 3);
  EXPECT_EQ(parsed[3].at("ensemble").at("kind"), "permutation");
  EXPECT_EQ(text, to_jsonl(run_theorem1_experiment(Ensemble{EnsembleKind::permutation, 2, {}, 3, 1}, 2, 2, 1e-9)));
}
