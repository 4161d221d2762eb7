#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "tessera/bench.hpp"
#include "tessera/case_study.hpp"
#include "tessera/image.hpp"
#include "tessera/metrics.hpp"
#include "tessera/naive.hpp"

using namespace tessera;
using testutil::random_grid;

namespace {

std::string mask_timing(const std::string& csv_line) {
    std::istringstream is(csv_line);
    std::string field, out;
    int idx = 0;
    while (std::getline(is, field, ',')) {
        if (idx == 7 || idx == 8) field = "*";  // elapsed_s, stencils_per_s
        out += (idx ? "," : "") + field;
        ++idx;
    }
    return out;
}

std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("benchmark table matches the stock configurations") {
    const auto& table = benchmark_table();
    REQUIRE(table.size() == 8);
    const std::vector<std::pair<std::string, size_t>> expected_pts = {
        {"Heat-1D", 3},   {"Star-1D5P", 5}, {"Heat-2D", 5},   {"Star-2D9P", 9},
        {"Box-2D9P", 9},  {"Box-2D25P", 25}, {"Heat-3D", 7},  {"Box-3D27P", 27}};
    for (size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].name == expected_pts[i].first);
        CHECK(table[i].kernel.taps().size() == expected_pts[i].second);
        CHECK(table[i].kernel.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(find_benchmark("Heat-2D").tile == std::vector<Index>{200, 200});
    CHECK(find_benchmark("Heat-2D").tb == 50);
    CHECK(find_benchmark("Heat-1D").tile == std::vector<Index>{2000});
    CHECK(find_benchmark("Heat-1D").tb == 1000);
    CHECK(find_benchmark("Box-2D25P").tile == std::vector<Index>{120, 128});
    CHECK(find_benchmark("Box-2D25P").tb == 60);
    CHECK_THROWS_AS(find_benchmark("Heat-4D"), std::invalid_argument);

    // The Box-2D25P blocking is deeper than its tiles allow; runs clamp it.
    CHECK(clamp_tb(60, 120, 2) == 30);
    CHECK(clamp_tb(50, 200, 1) == 50);
}

TEST_CASE("run_benchmark produces verified rows") {
    BenchOptions opt;
    opt.seed = 7;
    opt.steps_override = 4;
    const ReportRow row = run_benchmark(find_benchmark("Heat-2D"), ExecPath::naive, opt);
    CHECK(row.verify == "pass");  // self-comparison on the reference path
    CHECK(row.extent == std::vector<Index>{500, 500});
    CHECK(row.steps == 4);
    CHECK(row.stencils_per_s > 0.0);

    const ReportRow mm_row = run_benchmark(find_benchmark("Heat-2D"), ExecPath::mm, opt);
    CHECK(mm_row.verify == "pass");
    CHECK(mm_row.extent == std::vector<Index>{512, 512});  // block-aligned
    CHECK(mm_row.mma_calls > 0);

    const ReportRow bad = run_benchmark(find_benchmark("Box-3D27P"), ExecPath::mm, opt);
    CHECK(bad.verify == "unsupported");  // reported, not fatal
}

TEST_CASE("tessellate and naive rows agree at 3-D verification size") {
    BenchOptions opt;
    opt.seed = 3;
    opt.steps_override = 8;
    const ReportRow a = run_benchmark(find_benchmark("Box-3D27P"), ExecPath::tessellate, opt);
    const ReportRow b = run_benchmark(find_benchmark("Box-3D27P"), ExecPath::naive, opt);
    CHECK(a.verify == "pass");
    CHECK(b.verify == "pass");
}

TEST_CASE("CSV schema is stable (golden, timing masked)") {
    CHECK(csv_header() ==
          "name,path,dims,extent,T,tile,Tb,elapsed_s,stencils_per_s,verify,seed,"
          "ghost_recompute_points,mma_calls,messages");
    BenchOptions opt;
    opt.seed = 7;
    opt.steps_override = 4;
    const ReportRow row = run_benchmark(find_benchmark("Heat-2D"), ExecPath::tessellate, opt);
    std::ifstream golden(std::string(TESSERA_TEST_DATA_DIR) + "/bench_row_golden.csv");
    REQUIRE(golden.good());
    std::string expect_header, expect_row;
    std::getline(golden, expect_header);
    std::getline(golden, expect_row);
    CHECK(csv_header() == expect_header);
    CHECK(mask_timing(csv_row(row)) == expect_row);
}

TEST_CASE("precision tables") {
    SUBCASE("fp64 against itself is all zeros") {
        Grid g = random_grid({16, 16}, {1, 1}, 40);
        const ErrorTable t = compare_precision(g, g);
        for (double v : t.abs_exceed_pct) CHECK(v == 0.0);
        for (double v : t.rel_exceed_pct) CHECK(v == 0.0);
    }
    SUBCASE("exceedance is monotone non-increasing across thresholds") {
        Grid a = random_grid({32, 32}, {1, 1}, 41);
        GridF b(2, {32, 32, 1}, {1, 1, 0});
        b.initialize([&](Index i, Index j, Index) {
            const Index ci = std::clamp<Index>(i, 0, 31), cj = std::clamp<Index>(j, 0, 31);
            return static_cast<float>(a.at(ci, cj) + 0.3 * ((ci + cj) % 5));
        });
        const ErrorTable t = compare_precision(a, b, {0.1, 0.5, 1.0}, {0.01, 0.03, 0.05});
        CHECK(t.abs_exceed_pct[0] >= t.abs_exceed_pct[1]);
        CHECK(t.abs_exceed_pct[1] >= t.abs_exceed_pct[2]);
        CHECK(t.rel_exceed_pct[0] >= t.rel_exceed_pct[1]);
        CHECK(t.rel_exceed_pct[1] >= t.rel_exceed_pct[2]);
        CHECK(t.abs_exceed_pct[0] > 0.0);
    }
    SUBCASE("extent mismatch is rejected") {
        Grid a = random_grid({16, 16}, {1, 1}, 42);
        GridF b(2, {16, 8, 1}, {1, 1, 0});
        CHECK_THROWS_AS(compare_precision(a, b), std::invalid_argument);
    }
}

TEST_CASE("heatmap writers") {
    Grid g = random_grid({8, 12}, {1, 1}, 43);
    const auto dir = temp_dir("tessera_img_test");

    const std::string pgm = (dir / "field.pgm").string();
    write_pgm16(pgm, g, 0.0, 1.0);
    std::ifstream is(pgm, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    is >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == 12);
    CHECK(h == 8);
    CHECK(maxval == 65535);
    is.get();
    is.seekg(0, std::ios::end);
    const auto file_end = is.tellg();
    CHECK(file_end > 8 * 12 * 2);  // header + 16-bit payload

    GridF f(2, {8, 12, 1}, {1, 1, 0});
    f.initialize([&](Index i, Index j, Index) {
        const Index ci = std::clamp<Index>(i, 0, 7), cj = std::clamp<Index>(j, 0, 11);
        return static_cast<float>(g.at(ci, cj) + (ci % 2 == 0 ? 0.25 : -0.25));
    });
    const std::string ppm = (dir / "diff.ppm").string();
    write_diff_ppm(ppm, g, f);
    std::ifstream ps(ppm, std::ios::binary);
    ps >> magic >> w >> h >> maxval;
    CHECK(magic == "P6");
    CHECK(w == 12);
    CHECK(maxval == 255);
    ps.get();
    std::vector<unsigned char> px(static_cast<size_t>(8 * 12 * 3));
    ps.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    REQUIRE(ps.good());
    // Even rows were made hotter (red channel), odd rows colder (blue).
    CHECK(px[0] > 0);
    CHECK(px[2] == 0);
    const size_t odd_row = 12 * 3;
    CHECK(px[odd_row] == 0);
    CHECK(px[odd_row + 2] > 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("case study config parsing") {
    const auto dir = temp_dir("tessera_cfg_test");
    const std::string path = (dir / "heat.cfg").string();
    {
        std::ofstream os(path);
        os << "# thermal diffusion, desk scale\n"
           << "extent = 64\n"
           << "steps = 50\n"
           << "mu = 0.23\n"
           << "sample_every = 25\n"
           << "checkpoints = 25, 50\n"
           << "path = naive\n";
    }
    const CaseStudyConfig cfg = parse_case_config(path);
    CHECK(cfg.extent == 64);
    CHECK(cfg.steps == 50);
    CHECK(cfg.mu == 0.23);
    CHECK(cfg.checkpoints == std::vector<Index>{25, 50});
    CHECK(cfg.path == ExecPath::naive);

    {
        std::ofstream os(path);
        os << "mu = 0.30\n";
    }
    CHECK_THROWS(parse_case_config(path));  // unstable CFL rejected at parse

    {
        std::ofstream os(path);
        os << "volume = 3\n";
    }
    CHECK_THROWS(parse_case_config(path));  // unknown key
    std::filesystem::remove_all(dir);
}

TEST_CASE("case study at miniature scale") {
    const auto dir = temp_dir("tessera_case_test");
    CaseStudyConfig cfg;
    cfg.extent = 64;
    cfg.steps = 75;
    cfg.sample_every = 25;
    cfg.checkpoints = {25, 75};
    cfg.path = ExecPath::tessellate;

    const CaseStudyResult res = case_study_heat(cfg, dir.string());
    for (const std::string& artifact : res.artifacts) CHECK(std::filesystem::exists(artifact));

    // Diffusion from the hot center: sampled center series never rises.
    REQUIRE(res.center_series.size() >= 3);
    CHECK(res.center_series.front() == doctest::Approx(100.0).epsilon(1e-3));
    for (size_t i = 1; i < res.center_series.size(); ++i)
        CHECK(res.center_series[i] <= res.center_series[i - 1] + 1e-12);
    CHECK(res.final_center < res.center_series.front());

    REQUIRE(res.checkpoint_errors.size() == 2);
    CHECK(res.checkpoint_errors[0].abs_exceed_pct[0] >= 0.0);

    SUBCASE("T = 0 leaves the final heatmap equal to the initial one") {
        const auto dir0 = temp_dir("tessera_case_t0");
        CaseStudyConfig zero = cfg;
        zero.steps = 0;
        zero.checkpoints = {};
        case_study_heat(zero, dir0.string());
        std::ifstream a(dir0 / "initial.pgm", std::ios::binary);
        std::ifstream b(dir0 / "final.pgm", std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        CHECK(sa.str() == sb.str());
        std::filesystem::remove_all(dir0);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("mm path drives the miniature case study too") {
    const auto dir = temp_dir("tessera_case_mm");
    CaseStudyConfig cfg;
    cfg.extent = 64;
    cfg.steps = 25;
    cfg.sample_every = 25;
    cfg.checkpoints = {25};
    cfg.path = ExecPath::mm;
    const CaseStudyResult res = case_study_heat(cfg, dir.string());
    CHECK(res.final_center < 100.0);
    std::filesystem::remove_all(dir);
}
