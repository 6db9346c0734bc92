#include <dci/cli.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"verification and construction toolkit for div-curl differential inclusions"};
    app.require_subcommand(1);

    dci::cli::RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", cfg.input, "input JSON path");
        sub->add_option("--output", cfg.output, "report path");
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--tol", cfg.tol, "tolerance for float verdicts");
        sub->add_option("--depth", cfg.depth, "construction depth");
        sub->add_option("--trials", cfg.trials, "sampling trial count");
        sub->add_option("--format", cfg.format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };
    for (const char* name : {"verify-counterexample", "build-integrand", "check-config",
                             "w-lemma", "extend", "build-map", "residuals", "all"}) {
        auto* sub = app.add_subcommand(name);
        add_common(sub);
        sub->callback([&cfg, name] { cfg.command = name; });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        return dci::cli::run(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
