#include "mgdwr/errors.hpp"
#include "mgdwr/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace mgdwr;

namespace {

RunResult synthetic(int levels)
{
    RunResult r;
    r.functional_names = {"J1", "J2"};
    for (int l = 1; l <= levels; ++l) {
        ConvergenceRecord rec;
        rec.level = l;
        rec.dofs = 10L << (2 * l);
        rec.values = {1.0 / l, 2.0};
        rec.rel_errors = {3.0 / static_cast<double>(rec.dofs), ConvergenceRecord::kNaN};
        rec.eta_h = 0.5 / l;
        rec.newton_steps = l;
        r.records.push_back(rec);
    }
    return r;
}

}  // namespace

TEST(Csv, HeaderLayout)
{
    const std::vector<std::string> expected{
        "level",      "dofs",   "J1_value",   "J1_rel_error", "J2_value", "J2_rel_error", "J_E_error",
        "eta_h",      "eta_primal", "eta_adjoint", "I_eff", "I_effp", "I_effa", "newton_steps", "wall_ms"};
    EXPECT_EQ(csv_header({"J1", "J2"}), expected);
}

TEST(Csv, WriteThenParse)
{
    const auto r = synthetic(3);
    std::ostringstream out;
    write_csv(out, r);
    const auto t = parse_csv(out.str());
    EXPECT_EQ(t.header, csv_header(r.functional_names));
    ASSERT_EQ(t.rows.size(), 3u);
    EXPECT_EQ(t.values("dofs"), (std::vector<double>{40, 160, 640}));
    EXPECT_DOUBLE_EQ(t.values("J1_value")[2], 1.0 / 3);
    EXPECT_TRUE(std::isnan(t.values("J2_rel_error")[0]));
    EXPECT_TRUE(std::isnan(t.values("I_eff")[1]));
    EXPECT_EQ(t.column("missing"), -1);
}

TEST(Csv, Malformed)
{
    EXPECT_THROW((void)parse_csv(""), MalformedCsv);
    EXPECT_THROW((void)parse_csv("level,dofs\n1\n"), MalformedCsv);
    EXPECT_THROW((void)parse_csv("level,dofs\n1,abc\n"), MalformedCsv);
    EXPECT_THROW((void)read_csv("/nonexistent/file.csv"), MalformedCsv);
}

TEST(Slope, ExactPowerLaw)
{
    std::vector<double> dofs, err;
    for (int k = 0; k < 6; ++k) {
        dofs.push_back(std::pow(4.0, k) * 9);
        err.push_back(2.5 / dofs.back());
    }
    const auto s = fit_slope(dofs, err);
    ASSERT_TRUE(s.has_value());
    EXPECT_NEAR(*s, -1.0, 1e-12);
}

TEST(Slope, DegenerateInputs)
{
    EXPECT_FALSE(fit_slope({9}, {1e-2}).has_value());
    EXPECT_FALSE(fit_slope({9, 25}, {1e-2, 0.0}).has_value());
    const auto s = fit_slope({1, 10, 100, 1000, 10000}, {99, 1, 0.1, 0.01, 0.001});
    ASSERT_TRUE(s.has_value());
    EXPECT_NEAR(*s, -1.0, 1e-12);  // only the last four points count
}

TEST(Report, SingleLevelHasNoRate)
{
    std::ostringstream csv;
    write_csv(csv, synthetic(1));
    std::ostringstream out;
    write_report(out, {"adaptive"}, {parse_csv(csv.str())});
    EXPECT_NE(out.str().find("N/A"), std::string::npos);
}

TEST(Report, RateOfSyntheticRun)
{
    std::ostringstream csv;
    write_csv(csv, synthetic(5));
    std::ostringstream out;
    write_report(out, {"adaptive"}, {parse_csv(csv.str())});
    EXPECT_NE(out.str().find("-1.00"), std::string::npos) << out.str();
}

TEST(Gnuplot, OneLinePerLevel)
{
    std::ostringstream out;
    write_gnuplot(out, synthetic(4));
    std::istringstream in(out.str());
    std::string line;
    int data = 0, comments = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        (line[0] == '#' ? comments : data)++;
    }
    EXPECT_EQ(comments, 1);
    EXPECT_EQ(data, 4);
}
