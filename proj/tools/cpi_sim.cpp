// cpi-sim: run, validate and print bundled experiment configs.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "cpi/experiment.hpp"
#include "demos.hpp"

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, numerical_error = 3, io_error = 4 };

template <typename F>
int guarded(F&& body) {
    try {
        body();
        return ok;
    } catch (const cpi::ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cpi::ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cpi::InvalidGeometry& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cpi::MissingFeatureScale& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cpi::UnderResolved& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const cpi::EmptyOverlap& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const cpi::DegenerateStatistics& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const cpi::OutOfRange& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const cpi::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlation plenoptic imaging simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(cpi::kToolVersion));

    std::string config_path;
    int threads = 1;
    std::string out_dir;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Run an experiment and write its outputs and manifest");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--threads", threads, "Worker threads (results do not depend on the count)")->check(CLI::PositiveNumber);
    auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides run.output and CPI_SIM_OUT)");
    auto* seed_opt = run->add_option("--seed", seed, "Override run.seed");

    auto* validate = app.add_subcommand("validate", "Check a config and print its canonical form");
    validate->add_option("config", config_path, "Config file")->required();

    std::string demo_name;
    auto* demo = app.add_subcommand("demo", "Print a bundled config");
    std::string names;
    for (const auto& [name, text] : kDemos) names += (names.empty() ? "" : ", ") + name;
    demo->add_option("name", demo_name, "One of: " + names)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    if (*demo) {
        const auto it = kDemos.find(demo_name);
        if (it == kDemos.end()) {
            std::cerr << "unknown demo '" << demo_name << "'; available: " << names << '\n';
            return config_error;
        }
        std::cout << it->second;
        return ok;
    }

    if (*validate) {
        return guarded([&] {
            const auto config = cpi::load_config(config_path);
            std::cout << cpi::serialize(config);
        });
    }

    return guarded([&] {
        auto config = cpi::load_config(config_path);
        if (const char* env = std::getenv("CPI_SIM_OUT"); env && *env) config.run.output = env;
        if (*out_opt) config.run.output = out_dir;
        if (*seed_opt) config.run.seed = seed;
        const auto manifest = cpi::run_experiment(config, threads);
        std::cout << "wrote " << manifest.output_dir << "/manifest.json\n";
        for (const auto& f : manifest.json["files"]) std::cout << "  " << f["path"].get<std::string>() << "  " << f["sha256"].get<std::string>() << '\n';
        std::cout << manifest.json["results"].dump(2) << '\n';
    });
}
