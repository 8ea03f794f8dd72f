#include "sqsk/bench.hpp"
#include "sqsk/errors.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace sqsk;

TEST(Bench, SingleSizeSmoke)
{
    BenchConfig cfg;
    cfg.sizes = {40};
    cfg.rank = 5;
    cfg.repetitions = 1;
    const BenchReport rep = run_bench(cfg);
    ASSERT_EQ(rep.records.size(), 1u);
    const BenchRecord& r = rep.records[0];
    EXPECT_EQ(r.n, 40);
    EXPECT_EQ(r.m, 200);
    EXPECT_EQ(r.k, 5);
    EXPECT_GT(r.t_sketch, 0.0);
    EXPECT_GT(r.t_reduce, 0.0);
    EXPECT_GT(r.t_solve_sketched, 0.0);
    EXPECT_GT(r.t_solve_full, 0.0);
    EXPECT_NEAR(r.ratio, (r.t_sketch + r.t_reduce + r.t_solve_sketched) / r.t_solve_full, 1e-12 * r.ratio);
    EXPECT_GT(r.iterations_sketched, 0);
    EXPECT_GT(r.iterations_full, 0);
    EXPECT_EQ(rep.repetitions, 1);
    EXPECT_FALSE(rep.environment.compiler.empty());
    EXPECT_FALSE(rep.environment.eigen_version.empty());
}

TEST(Bench, SkipFullBaseline)
{
    BenchConfig cfg;
    cfg.sizes = {30, 60};
    cfg.rank = 4;
    cfg.repetitions = 2;
    cfg.run_full = false;
    const BenchReport rep = run_bench(cfg);
    ASSERT_EQ(rep.records.size(), 2u);
    for (const BenchRecord& r : rep.records) {
        EXPECT_EQ(r.t_solve_full, 0.0);
        EXPECT_EQ(r.iterations_full, 0);
        EXPECT_GT(r.t_solve_sketched, 0.0);
    }
}

TEST(Bench, RejectsBadConfig)
{
    BenchConfig cfg;
    cfg.sizes = {};
    EXPECT_THROW(run_bench(cfg), InputError);
    cfg.sizes = {50};
    cfg.repetitions = 0;
    EXPECT_THROW(run_bench(cfg), InputError);
}

TEST(Bench, CsvLayout)
{
    BenchReport rep;
    BenchRecord r;
    r.n = 100;
    r.m = 500;
    r.k = 25;
    r.t_sketch = 0.5;
    r.t_reduce = 0.25;
    r.t_solve_sketched = 0.125;
    r.t_solve_full = 2.0;
    r.ratio = 0.4375;
    rep.records = {r, r};
    std::istringstream in(bench_csv(rep));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,m,k,t_sketch,t_reduce,t_solve_sketched,t_solve_full,ratio");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 11), "100,500,25,");
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2);
}

TEST(Stats, LogLogSlopeAndMedian)
{
    EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {8, 4, 2, 1}), -1.0, 1e-12);
    EXPECT_NEAR(loglog_slope({10, 100}, {3, 300}), 2.0, 1e-12);
    EXPECT_EQ(median({3, 1, 2}), 2.0);
    EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
    EXPECT_THROW(median({}), InputError);
}
