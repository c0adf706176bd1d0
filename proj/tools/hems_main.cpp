// CLI entry point for the degradation-aware ship energy management toolkit.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hems/app.hpp"

namespace {

void add_common(CLI::App* cmd, hems::app::CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "toolkit config JSON");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "generator seed");
    cmd->add_option("--jobs", args.jobs, "parallel workers (0 = all cores)");
}

} // namespace

int main(int argc, char** argv) {
    if (const char* lvl = std::getenv("HEMS_LOG"); lvl && std::string(lvl) == "debug")
        std::cerr << "hems: debug logging enabled\n";

    CLI::App cli{"fuel-cell/battery ship energy management toolkit"};
    cli.require_subcommand(1);
    hems::app::CommonArgs args;

    auto* sim_cmd = cli.add_subcommand("simulate", "run one mission with one strategy");
    add_common(sim_cmd, args);
    sim_cmd->add_option("--mission", args.mission_path,
                        "mission CSV, 'rect', or 'gen:<seed>[:<hours>]'");
    sim_cmd->add_option("--strategy", args.strategy_override,
                        "filter60|filter600|ecms|mpc|mpc-data");
    sim_cmd->add_option("--aging", args.aging_override, "bol|eol");
    sim_cmd->add_option("--horizon-min", args.horizon_min, "MPC horizon in minutes");
    sim_cmd->add_option("--forecaster", args.forecaster_override,
                        "perfect|persistence|external|gbt");
    sim_cmd->add_option("--external", args.external_path, "external forecast CSV");
    sim_cmd->add_option("--model", args.model_path, "trained forecast model JSON");

    auto* sweep_cmd = cli.add_subcommand("sweep", "run the strategy matrix over a corpus");
    add_common(sweep_cmd, args);
    sweep_cmd->add_option("--corpus", args.corpus_dir, "directory of mission CSVs");
    sweep_cmd->add_option("--model", args.model_path,
                          "forecast model JSON enabling the data-driven MPC variant");

    auto* hor_cmd = cli.add_subcommand("horizon", "MPC horizon sweep with perfect preview");
    add_common(hor_cmd, args);
    hor_cmd->add_option("--corpus", args.corpus_dir, "directory of mission CSVs");
    hor_cmd->add_option("--horizon-min", args.horizon_min,
                        "single horizon instead of the 15/30/45/60 grid");

    std::string fc_mode = "eval";
    auto* fc_cmd = cli.add_subcommand("forecast", "train or evaluate load forecasters");
    add_common(fc_cmd, args);
    fc_cmd->add_option("mode", fc_mode, "train|eval")->required();
    fc_cmd->add_option("--frame", args.mission_path, "frame CSV")->required();
    fc_cmd->add_option("--forecaster", args.forecaster_override,
                       "gbt|ar|persistence|external (eval)");
    fc_cmd->add_option("--external", args.external_path, "external forecast CSV");
    fc_cmd->add_option("--model", args.model_path, "model JSON (eval)");

    int gen_count = 1;
    auto* gen_cmd = cli.add_subcommand("gen", "generate synthetic mission CSVs");
    add_common(gen_cmd, args);
    gen_cmd->add_option("--hours", args.hours, "mission duration in hours");
    gen_cmd->add_option("--count", gen_count, "number of missions (seeds seed..seed+n-1)");

    std::string config_mode = "defaults", config_out = "config.json";
    auto* cfg_cmd = cli.add_subcommand("config", "emit defaults or the reference doc");
    cfg_cmd->add_option("mode", config_mode, "defaults|reference");
    cfg_cmd->add_option("--out-file", config_out, "output path");

    CLI11_PARSE(cli, argc, argv);

    if (sim_cmd->parsed()) return hems::app::cmd_simulate(args);
    if (sweep_cmd->parsed()) return hems::app::cmd_sweep(args);
    if (hor_cmd->parsed()) return hems::app::cmd_horizon(args);
    if (fc_cmd->parsed()) return hems::app::cmd_forecast(fc_mode, args);
    if (gen_cmd->parsed()) return hems::app::cmd_gen(args, gen_count);
    if (cfg_cmd->parsed()) return hems::app::cmd_config(config_mode, config_out);
    return 1;
}
