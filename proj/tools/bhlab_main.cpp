#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bhlab/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for planar Brownian exit-time moments and Hardy numbers"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    bhlab::io::RunOverrides ov;
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    double t_max = 0.0;
    std::string out_dir;
    unsigned threads = 0;

    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the seed");
    auto* samples_opt = run->add_option("--samples", samples, "override the sample count");
    auto* tmax_opt = run->add_option("--tmax", t_max, "override the truncation horizon");
    auto* out_opt = run->add_option("--out", out_dir, "override the output directory");
    auto* threads_opt = run->add_option("--threads", threads, "worker count (0 = hardware, result-invariant)");

    auto* list = app.add_subcommand("list", "list the experiment catalog");

    auto* exp = app.add_subcommand("export", "sample a domain and write the batch as CSV");
    exp->add_option("config", config_path, "export config (JSON: domain, start, sampler, samples, seed)")
        ->required();
    exp->add_option("--out", out_path, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& e : bhlab::io::list_experiments()) std::printf("%-18s %s\n", e.name.c_str(), e.description.c_str());
            return 0;
        }
        if (*run) {
            if (*seed_opt) ov.seed = seed;
            if (*samples_opt) ov.samples = samples;
            if (*tmax_opt) ov.t_max = t_max;
            if (*out_opt) ov.out_dir = out_dir;
            if (*threads_opt) ov.threads = threads;
            const auto result = bhlab::io::run_experiment(config_path, ov);
            for (const auto& c : result.report.checks)
                std::printf("[%s] %s value=%.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value);
            std::printf("report: %s\n", result.report_path.c_str());
            return result.status;
        }
        if (*exp) {
            std::ifstream f(config_path);
            if (!f) throw bhlab::io::IoError("cannot open config file " + config_path);
            const auto config = nlohmann::json::parse(f);
            auto [batch, domain] = bhlab::io::sample_from_export_config(config);
            bhlab::io::export_samples(batch, domain, out_path);
            std::printf("wrote %zu samples to %s\n", batch.size(), out_path.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
