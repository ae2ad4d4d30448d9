#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mfgsim/outputs.hpp"
#include "mfgsim/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"multi-agent manufacturing control simulator"};
    app.require_subcommand(1);

    mfgsim::RunOptions options;
    std::string exploration = "on";
    std::string policy;
    std::string service_url;
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;

    CLI::App* run = app.add_subcommand("run", "run a scenario and emit metrics");
    run->add_option("--scenario", options.scenario, "scenario file or bundled name")
        ->required();
    run->add_option("--exploration", exploration, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--policy", policy, "builtin|service")
        ->check(CLI::IsMember({"builtin", "service"}));
    run->add_option("--service-url", service_url, "decision service endpoint");
    auto* seed_opt = run->add_option("--seed", seed, "run seed");
    auto* horizon_opt = run->add_option("--horizon", horizon, "override horizon ticks");
    run->add_option("--out", options.out_dir, "output directory");
    run->add_flag("--dump-snapshots", options.dump_snapshots,
                  "write the controller snapshot sent per disruption");

    std::string dir_a, dir_b;
    CLI::App* compare = app.add_subcommand("compare", "compare two run directories");
    compare->add_option("dirA", dir_a)->required();
    compare->add_option("dirB", dir_b)->required();

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "lint a scenario file");
    validate->add_option("scenario", validate_path)->required();

    CLI::App* list = app.add_subcommand("scenarios", "list bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (run->count("--exploration") > 0) options.exploration = exploration == "on";
        if (!policy.empty()) options.policy_type = policy;
        if (!service_url.empty()) options.service_url = service_url;
        if (seed_opt->count() > 0) options.seed = seed;
        if (horizon_opt->count() > 0) options.horizon = horizon;
        return mfgsim::run_command(options);
    }
    if (compare->parsed()) {
        return mfgsim::compare_command(dir_a, dir_b);
    }
    if (validate->parsed()) {
        return mfgsim::validate_command(validate_path);
    }
    if (list->parsed()) {
        for (const std::string& name : mfgsim::bundled_scenarios()) {
            std::cout << name << '\n';
        }
        return 0;
    }
    return 0;
}
