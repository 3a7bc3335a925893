#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "catsim/runner.hpp"

using namespace catsim;
using namespace catsim::runner;

namespace {

AmplifyConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string csv(const Table& t) {
  std::ostringstream os;
  write_csv(t, os);
  return os.str();
}

}  // namespace

TEST(ParseConfig, AllKeys) {
  const auto cfg = parse(
      "# comment\n"
      "cutoff = 24\n"
      "eta=0.5   # trailing\n"
      "format = json\n"
      "out = /tmp/x.json\n"
      "\n"
      "source = mixed-photon\n"
      "r = 0.1\n"
      "p = 0.25\n"
      "phi = 0\n"
      "alpha_target = 1.5\n"
      "n_iterations = 2\n"
      "max_rank = 8\n");
  EXPECT_EQ(cfg.run.cutoff, 24);
  EXPECT_EQ(cfg.run.eta, 0.5);
  EXPECT_EQ(cfg.run.format, Format::json);
  EXPECT_EQ(*cfg.run.output_path, "/tmp/x.json");
  EXPECT_EQ(cfg.source.kind, SourceKind::mixed_photon);
  EXPECT_EQ(*cfg.source.r, 0.1);
  EXPECT_EQ(cfg.source.p, 0.25);
  EXPECT_EQ(cfg.source.phi, 0.0);
  EXPECT_EQ(cfg.alpha_target, 1.5);
  EXPECT_EQ(cfg.n_iterations, 2);
  EXPECT_EQ(cfg.max_rank, 8);
  EXPECT_NO_THROW(validate(cfg));
}

TEST(ParseConfig, Defaults) {
  const auto cfg = parse("");
  EXPECT_EQ(cfg.run.cutoff, 30);
  EXPECT_EQ(cfg.run.eta, 1.0);
  EXPECT_EQ(cfg.source.kind, SourceKind::squeezed_photon);
  EXPECT_FALSE(cfg.source.r.has_value());
  EXPECT_EQ(cfg.alpha_target, 2.0);
  EXPECT_EQ(cfg.n_iterations, 4);
}

TEST(ParseConfig, RejectsBadInput) {
  EXPECT_THROW(parse("etta = 0.5\n"), ConfigError);
  EXPECT_THROW(parse("eta = 0.5\neta = 0.6\n"), ConfigError);
  EXPECT_THROW(parse("eta 0.5\n"), ConfigError);
  EXPECT_THROW(parse("eta = half\n"), ConfigError);
  EXPECT_THROW(parse("cutoff = 3.5\n"), ConfigError);
  EXPECT_THROW(parse("source = laser\n"), ConfigError);
  EXPECT_THROW(parse("format = xml\n"), ConfigError);
  try {
    parse("cutoff = 30\n\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
  EXPECT_THROW(load_config("/nonexistent/cfg.conf"), ConfigError);
}

TEST(Validate, Ranges) {
  EXPECT_THROW(validate(parse("cutoff = 7\n")), ConfigError);
  EXPECT_THROW(validate(parse("eta = 1.5\n")), ConfigError);
  EXPECT_THROW(validate(parse("source = mixed-photon\np = 1\n")), ConfigError);
  EXPECT_THROW(validate(parse("source = squeezed-photon\np = 0.1\n")), ConfigError);
  EXPECT_THROW(validate(parse("r = 3\n")), ConfigError);
  EXPECT_THROW(validate(parse("n_iterations = -1\n")), ConfigError);
}

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(2.0 / 3.0 * 1e-9), "6.66666666667e-10");
  EXPECT_EQ(format_number(-12345.678901234), "-12345.6789012");
}

TEST(WriteCsv, Layout) {
  const Table t{"demo", {{"cutoff", "30"}, {"eta", "1"}}, {"a", "b"}, {{1.0, 0.5}, {2.0, 0.25}}};
  EXPECT_EQ(csv(t), "# demo\n# cutoff=30\n# eta=1\na,b\n1,0.5\n2,0.25\n");
}

TEST(WriteJson, Layout) {
  const Table t{"demo", {{"cutoff", "30"}}, {"a"}, {{1.5}}};
  const auto j = to_json(t);
  EXPECT_EQ(j["title"], "demo");
  EXPECT_EQ(j["meta"]["cutoff"], "30");
  EXPECT_EQ(j["columns"][0], "a");
  EXPECT_EQ(j["rows"][0][0], 1.5);
  std::ostringstream os;
  write_table(t, Format::json, os);
  EXPECT_EQ(nlohmann::json::parse(os.str())["rows"][0][0], 1.5);
}

TEST(MakeGrid, Defaults) {
  const auto g2 = default_fig2_grid();
  ASSERT_EQ(g2.size(), 50u);
  EXPECT_DOUBLE_EQ(g2.front(), 0.05);
  EXPECT_NEAR(g2.back(), 2.5, 1e-12);
  const auto g4 = default_fig4_grid();
  ASSERT_EQ(g4.size(), 21u);
  EXPECT_NEAR(g4.back(), 2.5, 1e-12);
  EXPECT_EQ(make_grid(1.0, 1.0, 0.1).size(), 1u);
  EXPECT_THROW(make_grid(1.0, 0.5, 0.1), ConfigError);
  EXPECT_THROW(make_grid(0.0, 1.0, 0.0), ConfigError);
}

TEST(ParallelMap, KeepsOrder) {
  const auto out = parallel_map(100, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(4, [](std::size_t i) -> int { if (i == 2) throw ConfigError("x"); return 0; }), ConfigError);
}

TEST(Fig2Table, FormulaMatchesSimulation) {
  const RunConfig cfg;
  const auto t = fig2_table({0.05, M_SQRT1_2, 1.3, 2.5}, cfg);
  ASSERT_EQ(t.columns.size(), 8u);
  EXPECT_NEAR(t.rows[1][2], 0.21995, 1e-5);
  EXPECT_EQ(t.rows[1][1], 30.0);
  EXPECT_GT(t.rows[3][1], 60.0);
  for (const auto& row : t.rows)
    for (int c = 2; c <= 4; ++c) {
      EXPECT_NEAR(row[c], row[c + 3], 1e-5) << "alpha=" << row[0] << " col=" << t.columns[c];
      EXPECT_GE(row[c], 0.0);
      EXPECT_LE(row[c], 1.0);
    }
  // Even cats shrink to vacuum, odd cats to photon pairs.
  EXPECT_LT(t.rows[0][3], 1e-5);
  EXPECT_NEAR(t.rows[0][2], 0.25, 1e-3);
  EXPECT_THROW(fig2_table({0.0}, cfg), ConfigError);
  EXPECT_THROW(fig2_table({2.6}, cfg), ConfigError);
}

TEST(Fig2Table, MetadataInHeader) {
  RunConfig cfg;
  cfg.eta = 0.5;
  cfg.cutoff = 20;
  const std::string out = csv(fig2_table({1.0}, cfg));
  EXPECT_NE(out.find("# cutoff=20\n"), std::string::npos);
  EXPECT_NE(out.find("# eta=0.5\n"), std::string::npos);
  EXPECT_NE(out.find("alpha,sim_cutoff,P_odd_odd,P_even_even,P_even_odd,sim_odd_odd,sim_even_even,sim_even_odd\n"), std::string::npos);
}

TEST(Fig3Table, ReferencePoints) {
  const auto t = fig3_table({0.01, 0.5, 1.0}, RunConfig{});
  EXPECT_NEAR(t.rows[0][1], 0.0, 1e-3);
  EXPECT_GT(t.rows[0][2], 0.99999);
  EXPECT_NEAR(t.rows[1][1], 0.083, 0.002);
  EXPECT_NEAR(t.rows[1][2], 0.99999, 1e-5);
  EXPECT_NEAR(t.rows[2][1], 0.313, 0.002);
  EXPECT_NEAR(t.rows[2][2], 0.997, 1e-3);
  for (const auto& row : t.rows) EXPECT_NEAR(row[2], row[3], 1e-9);
}

TEST(Fig4Table, Columns) {
  const auto t = fig4_table({0.5}, 2, RunConfig{});
  ASSERT_EQ(t.columns.size(), 6u);
  EXPECT_EQ(t.columns[5], "F_n2");
  EXPECT_EQ(t.rows[0][2], std::max({t.rows[0][3], t.rows[0][4], t.rows[0][5]}));
}

TEST(PurifyTable, InitialFidelities) {
  const auto t = purify_table({0.05, 0.25}, 0.5, RunConfig{});
  EXPECT_NEAR(t.rows[0][1], 0.950, 1e-3);
  EXPECT_NEAR(t.rows[1][1], 0.750, 1e-3);
  for (const auto& row : t.rows) EXPECT_GT(row[2], row[1]);
  EXPECT_THROW(purify_table({1.0}, 0.5, RunConfig{}), ConfigError);
}

TEST(AmplifyTable, ZeroIterationEcho) {
  AmplifyConfig cfg;
  cfg.alpha_target = 0.5;
  cfg.n_iterations = 0;
  const auto t = amplify_table(cfg);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][4], 1.0);
  EXPECT_NEAR(t.rows[0][3], optimize_squeezing(0.5).value, 1e-10);
}

TEST(AmplifyTable, IdealSourceMatchesFormula) {
  AmplifyConfig cfg;
  cfg.source = SourceModel::ideal();
  cfg.alpha_target = 1.0;
  cfg.n_iterations = 1;
  const auto t = amplify_table(cfg);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_NEAR(t.rows[1][4], success_probability_formula(M_SQRT1_2, M_SQRT1_2, M_PI, M_PI), 1e-5);
  EXPECT_GE(t.rows[1][3], 1.0 - 1e-6);
}

TEST(AmplifyTable, Deterministic) {
  AmplifyConfig cfg = parse("source = mixed-photon\np = 0.1\nalpha_target = 1.0\nn_iterations = 2\n");
  EXPECT_EQ(csv(amplify_table(cfg)), csv(amplify_table(cfg)));
}
