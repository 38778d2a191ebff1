#include <gtest/gtest.h>

#include "utstar/io.hpp"

using namespace utstar;

TEST(GroupJson, RoundTrip) {
  for (const auto& g : {GroupSpec::free(3), GroupSpec::cyclic(6),
                        GroupSpec::table({{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}}, 0)})
    EXPECT_EQ(group_from_json(group_to_json(g)), g);
}

TEST(GroupJson, Errors) {
  EXPECT_THROW(group_from_json(parse_json(R"({"kind":"dihedral","order":4})")), ParseError);
  EXPECT_THROW(group_from_json(parse_json(R"({"kind":"cyclic"})")), ParseError);
  EXPECT_THROW(group_from_json(parse_json(R"({"kind":"cyclic","order":"x"})")), ParseError);
  EXPECT_THROW(group_from_json(parse_json(R"({"kind":"table","size":2,"mul":[[0,1],[1,1]],"identity":0})")),
               ParseError);
  EXPECT_THROW(group_from_json(parse_json(R"({"kind":"table","size":3,"mul":[[0,1],[1,0]],"identity":0})")),
               ParseError);
  EXPECT_THROW(parse_json("{not json"), ParseError);
}

TEST(GradingJson, ParseSample) {
  auto g = grading_from_json(parse_json(R"({"group":{"kind":"free","rank":2},"n":3,"superdiagonal":["r1","r2"]})"));
  EXPECT_EQ(g, ElementaryGrading::fine(3));
  EXPECT_EQ(grading_from_json(grading_to_json(g)), g);
  auto z = grading_from_json(parse_json(R"({"group":{"kind":"cyclic","order":2},"n":2,"superdiagonal":[1]})"));
  EXPECT_EQ(z.superdiagonal()[0], GroupElement::cyclic(1));
}

TEST(GradingJson, Errors) {
  EXPECT_THROW(grading_from_json(parse_json(R"({"group":{"kind":"free","rank":2},"n":3,"superdiagonal":["r1"]})")),
               ParseError);
  EXPECT_THROW(grading_from_json(parse_json(R"({"group":{"kind":"free","rank":1},"n":3,"superdiagonal":["r1","r2"]})")),
               ParseError);
  EXPECT_THROW(grading_from_json(parse_json(R"({"n":2,"superdiagonal":["1"]})")), ParseError);
  EXPECT_THROW(load_grading("/nonexistent/grading.json"), IoError);
}

TEST(GradingJson, SampleFiles) {
  for (const char* f : {"z2_ut2.json", "z2_ut3.json", "z2_ut3_conflict.json", "fine_ut3.json", "klein_ut4.json"})
    EXPECT_NO_THROW(load_grading(std::string(UTSTAR_SAMPLES_DIR) + "/" + f)) << f;
}

TEST(PolynomialJson, RoundTrip) {
  auto p = expand_commutator({3, 1, 2}, true) * variable(4) + variable(5, true) * Rational(1, 2);
  auto j = polynomial_to_json(p);
  EXPECT_EQ(polynomial_from_json(j), p);
  EXPECT_EQ(j["terms"][0]["factors"][0]["var"], 1);
}

TEST(ReportJson, RoundTrip) {
  CodimRequest req;
  req.n = 2;
  req.m = 3;
  req.involution = InvolutionKind::Orthogonal;
  req.grading = ElementaryGrading(GroupSpec::cyclic(2), 2, {GroupElement::cyclic(1)});
  auto rep = codim(req);
  auto back = report_from_json(parse_json(report_to_json(rep).dump()));
  EXPECT_EQ(back, rep);
  EXPECT_FALSE(report_to_json(rep).contains("elapsed_ms"));
  EXPECT_TRUE(report_to_json(rep, true).contains("elapsed_ms"));
}

TEST(TableJson, RoundTrip) {
  auto t = asymptotic_report(2, 4, std::nullopt, InvolutionKind::Orthogonal);
  EXPECT_EQ(table_from_json(parse_json(table_to_json(t).dump())), t);
}

TEST(VerifyJson, RoundTrip) {
  auto v = verify_drensky_independence(2, 4);
  auto back = verify_from_json(verify_to_json(v));
  EXPECT_EQ(back.target, v.target);
  EXPECT_EQ(back.observed, v.observed);
  EXPECT_EQ(back.evidence, v.evidence);
}

TEST(TextOutput, AlignedColumns) {
  EXPECT_EQ(aligned({{"a", "bb"}, {"ccc", "d"}}), "a    bb\nccc  d\n");
  EXPECT_EQ(csv({{"x", "a,b"}, {"1", "say \"hi\""}}), "x,\"a,b\"\n1,\"say \"\"hi\"\"\"\n");
}

TEST(TextOutput, CsvTableUsesExactRationals) {
  auto t = asymptotic_report(3, 2, std::nullopt, std::nullopt);
  auto text = table_to_csv(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "m,c_m,target,ratio,mode");
  EXPECT_NE(text.find("1/3"), std::string::npos);
}
