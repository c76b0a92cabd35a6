#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lattice_homog.hpp"

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::int64_t> trials,
            const std::vector<double>& epsilons, std::optional<std::string> output_dir, std::optional<int> workers)
{
    lhomog::ExperimentConfig cfg = lhomog::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    if (!epsilons.empty()) cfg.epsilons = epsilons;
    if (output_dir) cfg.output_dir = *output_dir;
    if (workers) cfg.workers = *workers;
    cfg.validate();

    if (cfg.experiment == lhomog::ExperimentKind::verify_suite) {
        const auto rep = lhomog::verify_suite(cfg.seed, &std::cout);
        return rep.all_pass() ? 0 : 1;
    }
    const auto s = lhomog::run_experiment(cfg, &std::cerr);
    std::cout << "records: " << s.records.size() << " (" << s.skipped << " already present)\n";
    std::cout << "output: " << cfg.output_dir << " [config " << lhomog::config_hash(cfg) << "]\n";
    for (const auto& p : s.plots) std::cout << "plot: " << p << '\n';
    for (const auto& f : s.failures) std::cerr << "failed: " << f << '\n';
    return s.failures.empty() ? 0 : 1;
}

int cmd_plot(const std::string& input)
{
    namespace fs = std::filesystem;
    const fs::path dir(input);
    const auto records = lhomog::read_records(dir / "records.csv");
    if (records.empty()) {
        std::cerr << "no records in " << (dir / "records.csv").string() << '\n';
        return 1;
    }
    std::string hash = "unknown";
    if (std::ifstream in(dir / "config.json"); in) {
        nlohmann::json j;
        in >> j;
        hash = j.value("config_hash", hash);
    }
    for (const auto& p : lhomog::emit_plots(records, dir.string(), hash)) std::cout << "plot: " << p << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random-lattice homogenization experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::vector<double> epsilons;
    std::optional<std::string> output_dir;
    std::optional<int> workers;
    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "override the base seed");
    run->add_option("--trials", trials, "override the number of trials")->check(CLI::PositiveNumber);
    run->add_option("--epsilons", epsilons, "override the epsilon list (comma separated)")->delimiter(',');
    run->add_option("--output-dir", output_dir, "override the output directory");
    run->add_option("--workers", workers, "worker threads (0: all cores)");

    std::uint64_t verify_seed = lhomog::ExperimentConfig{}.seed;
    auto* verify = app.add_subcommand("verify", "run the property-check suite");
    verify->add_option("--seed", verify_seed, "seed for the randomized checks");

    std::string input;
    auto* plot = app.add_subcommand("plot", "render SVG plots from a results directory");
    plot->add_option("--input", input, "directory holding records.csv")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, seed, trials, epsilons, output_dir, workers);
        if (*verify) return lhomog::verify_suite(verify_seed, &std::cout).all_pass() ? 0 : 1;
        if (*plot) return cmd_plot(input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
