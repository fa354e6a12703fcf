#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>

#include "paramp/config.hpp"
#include "paramp/experiment.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config_error = 2;
constexpr int exit_solver_failure = 3;
constexpr int exit_io_error = 4;

int run_task(const std::string& task, const std::string& config_path,
             const std::string& out_dir, long seed, bool print_only) {
    paramp::ExperimentConfig config;
    try {
        config = paramp::load_config(config_path);
        const std::string expected = paramp::task_name(config.task.kind);
        if (task != expected) {
            std::fprintf(stderr, "paramp: config declares task \"%s\" but \"%s\" was requested\n",
                         expected.c_str(), task.c_str());
            return exit_config_error;
        }
    } catch (const paramp::ConfigError& error) {
        std::fprintf(stderr, "paramp: %s\n", error.what());
        return exit_config_error;
    }

    if (print_only) {
        std::fputs(paramp::print_config(config).c_str(), stdout);
        return exit_ok;
    }
    if (out_dir.empty()) {
        std::fprintf(stderr, "paramp: --out DIR is required to run a task\n");
        return exit_config_error;
    }

    try {
        const paramp::RunResult result = paramp::run_experiment(config, out_dir, seed);
        for (const std::string& file : result.files) {
            std::printf("wrote %s\n", file.c_str());
        }
        return exit_ok;
    } catch (const paramp::ConfigError& error) {
        std::fprintf(stderr, "paramp: %s\n", error.what());
        return exit_config_error;
    } catch (const paramp::OutputError& error) {
        std::fprintf(stderr, "paramp: %s\n", error.what());
        return exit_io_error;
    } catch (const paramp::Error& error) {
        std::fprintf(stderr, "paramp: solver failure: %s\n", error.what());
        return exit_solver_failure;
    } catch (const std::exception& error) {
        std::fprintf(stderr, "paramp: %s\n", error.what());
        return exit_solver_failure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Josephson parametric amplifier numerics"};
    app.set_version_flag("--version", paramp::paramp_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long seed = -1;
    bool print_only = false;
    std::string selected;

    for (const char* name : {"scatter", "gain-sweep", "pout-sweep", "threshold-sweep", "wigner",
                             "mc", "circuit-params"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override numerics.seed");
        sub->add_flag("--print-config", print_only,
                      "print the merged configuration and exit");
        sub->callback([&selected, name] { selected = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return run_task(selected, config_path, out_dir, seed, print_only);
}
