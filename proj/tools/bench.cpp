#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "tessera/bench.hpp"
#include "tessera/case_study.hpp"

namespace {

int cmd_run(const std::string& names, const std::string& path_name, const std::string& scale_name,
            int threads, std::uint64_t seed, long long steps, bool no_verify,
            const std::string& out) {
    using namespace tessera;
    BenchOptions opt;
    opt.scale = scale_name == "full" ? Scale::full : Scale::desk;
    opt.threads = threads;
    opt.seed = seed;
    opt.verify = !no_verify;
    opt.steps_override = steps;

    std::vector<const BenchmarkSpec*> specs;
    if (names == "all") {
        for (const BenchmarkSpec& s : benchmark_table()) specs.push_back(&s);
    } else {
        std::istringstream is(names);
        std::string tok;
        while (std::getline(is, tok, ',')) specs.push_back(&find_benchmark(tok));
    }
    const ExecPath path = path_from_string(path_name);

    std::vector<ReportRow> rows;
    std::cout << csv_header() << '\n';
    for (const BenchmarkSpec* spec : specs) {
        rows.push_back(run_benchmark(*spec, path, opt));
        std::cout << csv_row(rows.back()) << std::endl;
    }
    if (!out.empty()) {
        write_csv_file(out, rows);
        std::cerr << "report written to " << out << '\n';
    }
    bool ok = true;
    for (const ReportRow& r : rows) ok &= r.verify != "fail";
    return ok ? 0 : 1;
}

int cmd_case_study(const std::string& config, const std::string& path_name, bool full,
                   int threads, const std::string& out) {
    using namespace tessera;
    CaseStudyConfig cfg;
    if (!config.empty()) cfg = parse_case_config(config);
    if (!path_name.empty()) cfg.path = path_from_string(path_name);
    if (threads > 0) cfg.threads = threads;
    if (full) apply_full_scale(cfg);

    const CaseStudyResult res = case_study_heat(cfg, out);
    std::cout << "final center temperature: " << res.final_center << " C\n";
    for (size_t i = 0; i < res.checkpoint_steps.size(); ++i) {
        const ErrorTable& t = res.checkpoint_errors[i];
        std::cout << "T=" << res.checkpoint_steps[i] << "  abs>0.1C: " << t.abs_exceed_pct[0]
                  << "%  abs>0.5C: " << t.abs_exceed_pct[1]
                  << "%  abs>1.0C: " << t.abs_exceed_pct[2]
                  << "%  rel>1%: " << t.rel_exceed_pct[0] << "%\n";
    }
    std::cout << "artifacts:\n";
    for (const std::string& a : res.artifacts) std::cout << "  " << a << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stencil engine benchmarks and thermal-diffusion case study"};
    app.require_subcommand(1);

    std::string names = "Heat-2D", path = "tessellate", scale = "desk", out;
    int threads = 1;
    std::uint64_t seed = 1;
    long long steps = 0;
    bool no_verify = false;

    CLI::App* run = app.add_subcommand("run", "time benchmarks on an executor path");
    run->add_option("--name", names, "benchmark name, comma list, or 'all'");
    run->add_option("--path", path, "naive|tessellate|vector|mm|hetero");
    run->add_option("--scale", scale, "desk|full")->check(CLI::IsMember({"desk", "full"}));
    run->add_option("--threads", threads, "worker thread cap");
    run->add_option("--seed", seed, "seed for the random initial field");
    run->add_option("--steps", steps, "override the scale's step count");
    run->add_flag("--no-verify", no_verify, "skip the reduced-size oracle check");
    run->add_option("--out", out, "CSV report path");

    std::string cs_config, cs_path, cs_out = "case_study_out";
    bool cs_full = false;
    int cs_threads = 0;
    CLI::App* cs = app.add_subcommand("case-study", "thermal diffusion on a square plate");
    cs->add_option("--config", cs_config, "line-oriented key = value config file");
    cs->add_option("--path", cs_path, "executor path override");
    cs->add_option("--threads", cs_threads, "worker thread cap");
    cs->add_flag("--full", cs_full, "full-scale configuration (9600x9600, 3.8e6 steps)");
    cs->add_option("--out", cs_out, "output directory");

    CLI::App* list = app.add_subcommand("list", "print the benchmark table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(names, path, scale, threads, seed, steps, no_verify, out);
        if (cs->parsed()) return cmd_case_study(cs_config, cs_path, cs_full, cs_threads, cs_out);
        if (list->parsed()) {
            std::printf("%-12s %-5s %-7s %-28s %-12s %s\n", "name", "pts", "radius", "extent", "T",
                        "blocking");
            for (const auto& s : tessera::benchmark_table()) {
                std::string ext, tile;
                for (size_t a = 0; a < s.full_extent.size(); ++a)
                    ext += (a ? "x" : "") + std::to_string(s.full_extent[a]);
                for (size_t a = 0; a < s.tile.size(); ++a)
                    tile += (a ? "x" : "") + std::to_string(s.tile[a]);
                tile += "x" + std::to_string(s.tb);
                std::printf("%-12s %-5zu %-7d %-28s %-12lld %s\n", s.name.c_str(),
                            s.kernel.taps().size(), s.kernel.radius(), ext.c_str(),
                            static_cast<long long>(s.full_steps), tile.c_str());
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
