#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crlab/app.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"crlab: weighted 3-sphere Sasakian approximation pipeline"};
    cli.require_subcommand(1, 1);
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 0;
    for (const auto& name : crlab::app::subcommands()) {
        auto* sub = cli.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides out_dir)");
        sub->add_option("--seed", seed, "sampling seed (overrides samples.seed)");
        sub->add_option("--jobs", jobs, "concurrent k-jobs (overrides jobs)")->check(CLI::PositiveNumber);
    }
    CLI11_PARSE(cli, argc, argv);
    const std::string name = cli.get_subcommands().front()->get_name();
    const auto* sub = cli.get_subcommands().front();

    crlab::app::RunConfig config;
    try {
        config = crlab::app::load_config(config_path);
        if (sub->count("--out")) config.out_dir = out_dir;
        if (sub->count("--seed")) config.seed = seed;
        if (sub->count("--jobs")) config.jobs = jobs;
        const auto out = crlab::app::run(name, config);
        crlab::app::write_outputs(out, config.out_dir);
        for (const auto& c : out.criteria) {
            std::cout << "criterion " << c.id << " [" << c.name << "]: " << c.status() << '\n';
        }
        std::cout << "wrote " << config.out_dir << "/report.json\n";
        return 0;
    } catch (const std::exception& e) {
        const auto record = crlab::app::error_record(e, name);
        std::cerr << record.dump() << '\n';
        try {
            if (!config.out_dir.empty()) {
                std::filesystem::create_directories(config.out_dir);
                std::ofstream(std::filesystem::path(config.out_dir) / "error.json") << record.dump(2) << '\n';
            }
        } catch (...) {
        }
        return crlab::app::exit_status(e);
    }
}
