#include "pairwise_em/experiments.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pairwise_em;

namespace {

SweepConfig small_init_config() {
    auto c = SweepConfig::defaults_for(SweepKind::InitInterpolation);
    c.d = 10;
    c.n = 200;
    c.reps = 4;
    c.grid = {0.0, 0.5, 1.0};
    c.max_steps = 30;
    c.base_seed = 7;
    return c;
}

SweepConfig small_noise_config() {
    auto c = SweepConfig::defaults_for(SweepKind::NoiseSweep);
    c.d = 10;
    c.n = 200;
    c.reps = 3;
    c.grid = {0.01, 0.5};
    c.base_seed = 3;
    return c;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("pairwise_em_" + name)).string();
}

bool same_row(const SweepRow& a, const SweepRow& b) {
    auto eq = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; };
    return a.grid_value == b.grid_value && a.rep == b.rep && a.seed == b.seed && a.estimator == b.estimator &&
           eq(a.err_init_l2sq, b.err_init_l2sq) && eq(a.err_final_l2sq, b.err_final_l2sq) &&
           eq(a.err_final_linf, b.err_final_linf) && a.steps == b.steps && a.converged == b.converged &&
           a.optimal_rate == b.optimal_rate && a.success == b.success;
}

} // namespace

TEST(LogGrid, EndpointsAndSpacing) {
    const auto g = log_grid(0.002, 2.0, 10);
    ASSERT_EQ(g.size(), 10u);
    EXPECT_DOUBLE_EQ(g.front(), 0.002);
    EXPECT_DOUBLE_EQ(g.back(), 2.0);
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        EXPECT_NEAR(g[k] * g[k], g[k - 1] * g[k + 1], 1e-12 * g[k] * g[k]);
    }
}

TEST(DefaultConfigs, ReferenceSettings) {
    const auto init = SweepConfig::defaults_for(SweepKind::InitInterpolation);
    EXPECT_EQ(init.d, 50);
    EXPECT_EQ(init.n, 1000);
    EXPECT_EQ(init.sigma, 0.1);
    EXPECT_EQ(init.reps, 100);
    EXPECT_EQ(init.max_steps, 100);
    ASSERT_EQ(init.grid.size(), 10u);
    EXPECT_DOUBLE_EQ(init.grid.front(), 0.1);
    EXPECT_DOUBLE_EQ(init.grid.back(), 1.0);

    const auto sample = SweepConfig::defaults_for(SweepKind::SampleSizeSweep);
    ASSERT_EQ(sample.grid.size(), 8u);
    EXPECT_EQ(sample.grid.front(), 500.0);
    EXPECT_EQ(sample.grid.back(), 2000.0);
    EXPECT_EQ(sample.max_steps, 20);
    EXPECT_EQ(sample.estimators.size(), 3u);
}

TEST(MergeConfig, OverlaysOnlyGivenKeys) {
    const auto base = SweepConfig::defaults_for(SweepKind::NoiseSweep);
    const auto merged = merge_config(base, nlohmann::json{{"d", 12}, {"estimators", {"spectral"}}, {"reps", 2}});
    EXPECT_EQ(merged.d, 12);
    EXPECT_EQ(merged.reps, 2);
    ASSERT_EQ(merged.estimators.size(), 1u);
    EXPECT_EQ(merged.estimators[0], SweepEstimator::Spectral);
    EXPECT_EQ(merged.n, base.n);
    EXPECT_EQ(merged.grid, base.grid);

    const auto round = merge_config(SweepConfig{}, to_json(merged));
    EXPECT_EQ(to_json(round), to_json(merged));
    EXPECT_THROW(merge_config(base, nlohmann::json{{"estimators", {"magic"}}}), ParameterError);
}

TEST(Sweep, EtaZeroStartsAtTruth) {
    auto c = small_init_config();
    c.grid = {0.0};
    const auto rows = run_init_sweep(c);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.err_init_l2sq, 0.0);
        EXPECT_LE(r.err_final_l2sq, 10.0 * r.optimal_rate);
        EXPECT_TRUE(r.success);
        EXPECT_EQ(r.estimator, "em-from-random-init");
    }
}

TEST(Sweep, DeterministicAndThreadIndependent) {
    const auto c = small_noise_config();
    const auto a = run_noise_sweep(c, 1);
    const auto b = run_noise_sweep(c, 1);
    const auto threaded = run_noise_sweep(c, 4);
    ASSERT_EQ(a.size(), c.grid.size() * c.reps * c.estimators.size());
    ASSERT_EQ(a.size(), threaded.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_TRUE(same_row(a[k], b[k])) << k;
        EXPECT_TRUE(same_row(a[k], threaded[k])) << k;
    }
    EXPECT_EQ(rows_to_csv(a), rows_to_csv(threaded));
}

TEST(Sweep, RowOrderAndSharedInstance) {
    const auto c = small_noise_config();
    const auto rows = run_noise_sweep(c);
    std::size_t k = 0;
    for (std::size_t g = 0; g < c.grid.size(); ++g) {
        for (int rep = 0; rep < c.reps; ++rep) {
            const auto seed = derive_seed(c.base_seed, g, static_cast<std::uint64_t>(rep), Purpose::Instance);
            for (auto e : c.estimators) {
                const auto& r = rows[k++];
                EXPECT_EQ(r.grid_value, c.grid[g]);
                EXPECT_EQ(r.rep, rep);
                EXPECT_EQ(r.seed, seed);
                EXPECT_EQ(r.estimator, to_string(e));
            }
            // All estimators of one cell see the same instance and start point.
            const auto& spectral = rows[k - 3];
            EXPECT_EQ(rows[k - 2].err_init_l2sq, spectral.err_final_l2sq);
            EXPECT_EQ(rows[k - 1].err_init_l2sq, spectral.err_final_l2sq);
            EXPECT_EQ(spectral.steps, 0);
        }
    }
}

TEST(Sweep, SuccessFlagMatchesRule) {
    const auto rows = run_noise_sweep(small_noise_config());
    for (const auto& r : rows) {
        EXPECT_EQ(r.success, r.err_final_l2sq <= 10.0 * r.optimal_rate);
    }
}

TEST(Sweep, NoiseGridIsVariance) {
    auto c = small_noise_config();
    c.grid = {0.04};
    c.reps = 1;
    const auto rows = run_noise_sweep(c);
    const auto inst = generate(c.d, c.n, 0.2, LinearTruth{c.d}, c.design, rows[0].seed);
    EXPECT_NEAR(rows[0].optimal_rate, optimal_rate(inst), 1e-15);
}

TEST(Sweep, SampleGridSetsN) {
    auto c = SweepConfig::defaults_for(SweepKind::SampleSizeSweep);
    c.d = 8;
    c.grid = {40.0, 400.0};
    c.reps = 2;
    const auto rows = run_sample_sweep(c);
    ASSERT_EQ(rows.size(), 12u);
    const auto inst = generate(8, 400, c.sigma, LinearTruth{8}, c.design, rows.back().seed);
    EXPECT_NEAR(rows.back().optimal_rate, optimal_rate(inst), 1e-15);
    EXPECT_THROW(run_noise_sweep(c), ParameterError);
}

TEST(Sweep, DegenerateSpectralGivesFailedRows) {
    // d = 2 with huge noise: the centred Gram estimate is often not positive.
    auto c = SweepConfig::defaults_for(SweepKind::NoiseSweep);
    c.d = 2;
    c.n = 1;
    c.grid = {100.0};
    c.reps = 40;
    const auto rows = run_noise_sweep(c);
    int failed = 0;
    for (const auto& r : rows) {
        if (std::isnan(r.err_final_l2sq)) {
            ++failed;
            EXPECT_FALSE(r.converged);
            EXPECT_FALSE(r.success);
            EXPECT_EQ(r.steps, 0);
        }
    }
    EXPECT_GT(failed, 0);
    const auto summary = summarize(rows);
    for (const auto& s : summary) {
        EXPECT_EQ(s.count, 40);
        EXPECT_FALSE(std::isnan(s.mean_optimal_rate));
    }
}

TEST(Sweep, RejectsBadConfig) {
    auto c = small_init_config();
    c.grid = {1.5};
    EXPECT_THROW(run_init_sweep(c), ParameterError);
    c = small_init_config();
    c.reps = 0;
    EXPECT_THROW(run_init_sweep(c), ParameterError);
    c = small_init_config();
    EXPECT_THROW(run_noise_sweep(c), ParameterError);
}

TEST(Summarize, MeansMediansAndSuccess) {
    std::vector<SweepRow> rows;
    for (int k = 0; k < 4; ++k) {
        SweepRow r;
        r.grid_value = 1.0;
        r.rep = k;
        r.estimator = "x";
        r.err_init_l2sq = 1.0;
        r.err_final_l2sq = k + 1.0;
        r.optimal_rate = 1.0;
        r.success = k < 1;
        rows.push_back(r);
    }
    rows[3].err_final_l2sq = std::numeric_limits<double>::quiet_NaN();
    const auto s = summarize(rows);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].count, 4);
    EXPECT_DOUBLE_EQ(s[0].mean_err_final, 2.0);
    EXPECT_DOUBLE_EQ(s[0].median_err_final, 2.0);
    EXPECT_DOUBLE_EQ(s[0].success_fraction, 0.25);
}

TEST(RowIo, CsvAndJsonRoundTrip) {
    auto rows = run_noise_sweep(small_noise_config());
    rows[1].err_final_l2sq = rows[1].err_init_l2sq = rows[1].err_final_linf =
        std::numeric_limits<double>::quiet_NaN();
    const std::string csv = rows_to_csv(rows);
    std::istringstream in(csv);
    const auto back = rows_from_csv(in);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_TRUE(same_row(rows[k], back[k])) << k;
    }
    EXPECT_EQ(rows_to_csv(back), csv);

    const auto json = rows_to_json(rows);
    EXPECT_TRUE(json[1]["err_final_l2sq"].is_null());
    const auto jback = rows_from_json(nlohmann::json::parse(json.dump()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        EXPECT_TRUE(same_row(rows[k], jback[k])) << k;
    }
}

TEST(RowIo, EmptyRowsGiveHeaderOnly) {
    EXPECT_EQ(rows_to_csv({}), std::string(csv_header) + "\n");
    std::istringstream in(rows_to_csv({}));
    EXPECT_TRUE(rows_from_csv(in).empty());
}

TEST(RowIo, RejectsMalformedCsv) {
    std::istringstream bad_header("a,b,c\n");
    EXPECT_THROW(rows_from_csv(bad_header), ContractViolation);
    std::istringstream short_row(std::string(csv_header) + "\n1,2,3\n");
    EXPECT_THROW(rows_from_csv(short_row), ContractViolation);
}

TEST(RowIo, FilesAndSidecar) {
    const auto c = small_init_config();
    const auto rows = run_init_sweep(c);
    const std::string path = temp_path("rows.csv");
    write_rows(rows, path, RowFormat::CSV, sweep_metadata(c));
    std::ifstream meta_in(path + ".meta.json");
    const auto meta = nlohmann::json::parse(meta_in);
    EXPECT_EQ(meta["config"]["d"].get<int>(), 10);
    EXPECT_EQ(meta["csv_header"].get<std::string>(), std::string(csv_header));
    EXPECT_EQ(meta["rng"].get<std::string>(), std::string(rng_name));

    const auto back = read_rows(path, RowFormat::CSV);
    ASSERT_EQ(back.size(), rows.size());

    const std::string jpath = temp_path("rows.json");
    write_rows(rows, jpath, RowFormat::JSON);
    EXPECT_EQ(read_rows(jpath, RowFormat::JSON).size(), rows.size());

    EXPECT_THROW(read_rows(temp_path("missing.csv"), RowFormat::CSV), IoError);
    std::filesystem::remove(path);
    std::filesystem::remove(path + ".meta.json");
    std::filesystem::remove(jpath);
}

TEST(RowIo, ByteIdenticalAcrossRuns) {
    const auto c = small_init_config();
    EXPECT_EQ(rows_to_csv(run_init_sweep(c, 1)), rows_to_csv(run_init_sweep(c, 3)));
}

TEST(Identifiability, HeadPairMultiset) {
    const auto demo = identifiability_demo({0.5, -1.0, 2.0});
    ASSERT_FALSE(demo.observations.empty());
    const auto& first = demo.observations.front();
    EXPECT_EQ(first.i, 0);
    EXPECT_EQ(first.j, 1);
    const std::array<double, 3> want{-2.0, -1.0, 0.0};
    EXPECT_EQ(first.a, want);
    EXPECT_EQ(first.b, want);
    EXPECT_TRUE(demo.equal);
    EXPECT_EQ(demo.observations.size(), 10u);
    // The two mixtures are different sets of parameter vectors.
    EXPECT_NE(demo.mixture_a[0], demo.mixture_b[0]);
}

TEST(Identifiability, RandomTailsAndSmallestD) {
    Rng rng(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int d : {2, 3, 5, 20}) {
        for (int t = 0; t < 10; ++t) {
            std::vector<double> tail(static_cast<std::size_t>(d - 2));
            for (auto& x : tail) x = u(rng);
            const auto demo = identifiability_demo(tail);
            EXPECT_TRUE(demo.equal) << "d=" << d;
            EXPECT_EQ(demo.observations.size(), static_cast<std::size_t>(d * (d - 1) / 2));
        }
    }
    const auto j = to_json(identifiability_demo({}));
    EXPECT_TRUE(j["equal"].get<bool>());
    EXPECT_EQ(j["observations"][0]["pair"][0].get<int>(), 1);
}
