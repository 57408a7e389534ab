#include "eqdisc_cli/commands.hpp"
#include "eqdisc_cli/config.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    using namespace eqdisc::cli;

    CLI::App app{"Equation discovery from sampled data"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<long long> seed;
    std::optional<long long> runs;
    std::optional<long long> threads;
    std::optional<std::string> report_path;
    std::string out = "out";
    std::vector<std::string> overrides;
    bool print_config = false;

    auto add_common = [&](CLI::App* sub, bool discovery) {
        sub->add_option("--config", config_path, "JSON config merged onto the defaults");
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--set", overrides, "dotted override, e.g. evolution.n_epochs=150")->allow_extra_args(false);
        sub->add_flag("--print-config", print_config, "print the merged config and exit");
        if (discovery) {
            sub->add_option("--seed", seed, "base seed");
            sub->add_option("--runs", runs, "independent runs (seeds base .. base + runs - 1)");
            sub->add_option("--threads", threads, "worker threads");
        }
    };
    CLI::App* pde = app.add_subcommand("discover-pde", "discover a PDE from a gridded field");
    CLI::App* floquet = app.add_subcommand("discover-floquet", "discover the Floquet polynomial of a periodic rod");
    CLI::App* validate = app.add_subcommand("validate", "replay a discovered PDE against its reference field");
    CLI::App* sweep = app.add_subcommand("sweep", "lambda table (pde) or npts distribution study (floquet)");
    add_common(pde, true);
    add_common(floquet, true);
    add_common(validate, false);
    add_common(sweep, true);
    validate->add_option("--report", report_path, "report.json written by discover-pde");

    CLI11_PARSE(app, argc, argv);

    try {
        const CLI::App* chosen = app.get_subcommands().front();
        const Command command = parse_command(chosen->get_name());
        json config = default_config(command);
        if (config_path)
            config = merge_config(config, read_json_file(*config_path));
        for (const auto& o : overrides)
            apply_override(config, o);
        if (seed)
            config["seed"] = *seed;
        if (runs)
            config["runs"] = *runs;
        if (threads)
            config["threads"] = *threads;
        if (report_path)
            config["validate"]["report"] = *report_path;
        if (print_config) {
            std::cout << config.dump(2) << '\n';
            return kExitOk;
        }
        const CommandResult result = run_command(command, config, out);
        if (result.report.contains("model"))
            std::cout << result.report["model"]["equation"].get<std::string>() << '\n';
        else if (result.report.contains("errors"))
            std::cout << "relative RMSE " << result.report["errors"]["relative_rmse"].get<double>() << '\n';
        std::cout << "report: " << (std::filesystem::path(out) / "report.json").string() << '\n';
        if (result.exit_code == kExitDegenerate)
            std::cerr << "error: no nonzero term survived (degenerate model)\n";
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
