#include <CLI11.hpp>

#include <relegation/pipeline.hpp>

int main(int argc, char **argv)
{
    CLI::App app{"Relegation normal forms, stability estimates and numerical verification"};
    app.require_subcommand(1);
    relegation::CommandOptions opt;
    std::string out_dir;
    app.add_option("--config", opt.config_path, "Configuration file (TOML subset or JSON)")->required();
    app.add_option("--out", out_dir, "Output directory (overrides [output].dir)");
    app.add_option("--threads", opt.threads, "Worker threads for the engine")->check(CLI::PositiveNumber);
    app.add_option("--seed", opt.seed, "Seed for random test points");
    app.add_flag("--a-posteriori", opt.a_posteriori, "Use norms measured on the configured series");
    app.add_flag("--check-order", opt.check_order, "Report integrator convergence order under dt halving");
    app.fallthrough();

    const char *commands[][2] = {
        {"relegate", "Compute the normal form and write X_s, Z_s and a manifest"},
        {"estimate", "Evaluate the a-priori and a-posteriori estimates and write a certificate"},
        {"verify", "Check residual decay and drift bounds numerically against a manifest"},
        {"split", "Split the perturbation into Fourier shells"},
        {"norm", "Report weighted norms and classes of the configured series"},
    };
    for (const auto &c : commands) {
        app.add_subcommand(c[0], c[1]);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (!out_dir.empty()) {
        opt.out_dir = out_dir;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return relegation::run_command(command, opt);
}
