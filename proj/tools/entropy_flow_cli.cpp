// entropy_flow: verify entropy-power inequalities on analytic test densities.
//
//   entropy_flow verify  --density spec.json [--format csv|json] [--out PATH]
//   entropy_flow flow    --density spec.json --t-min 0.2 --t-max 2 --steps 10
//   entropy_flow nash    --density spec.json
//   entropy_flow scaling --density spec.json --a 0.5,2,3

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "entropy_flow/report.hpp"

namespace ef = entropy_flow;

int main(int argc, char** argv) {
    CLI::App app{"Entropy power, Fisher information and the inequalities they satisfy"};
    app.require_subcommand(1);

    ef::RunConfig cfg;
    std::string format = "csv";

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--density", cfg.density_spec_path, "JSON density spec")->required();
        sub->add_option("--half-width", cfg.half_width, "grid half width L (domain [-L, L]^n)");
        sub->add_option("--points", cfg.points, "grid points per axis");
        sub->add_option("--tol", cfg.tol, "relative tolerance override");
        sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", cfg.out_path, "output file (default: stdout)");
    };

    auto* verify = app.add_subcommand("verify", "run every applicable inequality check");
    auto* flow = app.add_subcommand("flow", "functional trace along the heat flow");
    auto* nash = app.add_subcommand("nash", "Nash inequality and the Fisher identity");
    auto* scaling = app.add_subcommand("scaling", "dilation laws for H, I and Upsilon");
    for (auto* sub : {verify, flow, nash, scaling}) {
        add_common(sub);
    }
    flow->add_option("--t-min", cfg.t_min, "first flow time (> 0)");
    flow->add_option("--t-max", cfg.t_max, "last flow time");
    flow->add_option("--steps", cfg.steps, "number of flow times (>= 3)");
    flow->add_option("--dt", cfg.dt, "central-difference step in t (default 1e-3 max(t, 1))");
    scaling->add_option("--a", cfg.scales, "dilation factors in [0.25, 4]")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ef::exit_code::usage_error;
    }

    const std::map<CLI::App*, ef::Command> commands{
        {verify, ef::Command::verify}, {flow, ef::Command::flow},
        {nash, ef::Command::nash}, {scaling, ef::Command::scaling}};
    cfg.command = commands.at(app.get_subcommands().front());
    cfg.format = format == "json" ? ef::OutputFormat::json : ef::OutputFormat::csv;
    return ef::run(cfg, std::cout, std::cerr);
}
