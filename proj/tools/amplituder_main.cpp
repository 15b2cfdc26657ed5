#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "amplituder/commands.hpp"
#include "amplituder/errors.hpp"
#include "amplituder/problem.hpp"

namespace {

int read_thread_cap() {
    const char* env = std::getenv("AMPLITUDER_THREADS");
    if (!env || !*env) return 1;
    try {
        size_t used = 0;
        const int n = std::stoi(env, &used);
        if (used != std::string(env).size() || n < 1) throw std::invalid_argument(env);
        return n;
    } catch (const std::exception&) {
        throw ampl::ValidationError(std::string("AMPLITUDER_THREADS must be a positive "
                                                "integer, got '") +
                                    env + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"amplitude-equation derivation and verification toolkit"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string problem;
        std::string outdir;
        std::vector<std::string> overrides;
    };
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"analyze", "dispersion scan: stability, critical set, degeneracy orders"},
        {"derive", "assemble the reduced amplitude system (Q, R, S, w, l)"},
        {"simulate", "time-step the full or reduced system and dump snapshots"},
        {"verify-error", "full-vs-reconstructed error scaling in epsilon"},
        {"verify-semigroup", "linear semigroup mismatch decay in t (and eta sweep)"},
        {"steady", "Newton solve for a steady envelope with Jacobian spectrum"},
        {"verify-stability", "perturb a steady pattern and track the sup distance"},
    };
    std::vector<SubArgs> args(commands.size());
    for (size_t i = 0; i < commands.size(); ++i) {
        CLI::App* sub = app.add_subcommand(commands[i].first, commands[i].second);
        sub->add_option("--problem", args[i].problem, "problem file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--outdir", args[i].outdir, "report/CSV output directory")->required();
        sub->add_option("--override", args[i].overrides,
                        "key=value tweak (omega, scan.<key>, <experiment>.<key>)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (size_t i = 0; i < commands.size(); ++i) {
            CLI::App* sub = app.get_subcommand(commands[i].first);
            if (!sub->parsed()) continue;
            ampl::ProblemFile problem = ampl::parse_problem(args[i].problem);
            for (const std::string& ov : args[i].overrides) {
                const size_t eq = ov.find('=');
                if (eq == std::string::npos)
                    throw ampl::ValidationError("override '" + ov + "' must look like key=value");
                ampl::apply_override(problem, ov.substr(0, eq), ov.substr(eq + 1));
            }
            ampl::CommandOptions opts;
            opts.outdir = args[i].outdir;
            opts.threads = read_thread_cap();
            return ampl::run_command(commands[i].first, problem, opts);
        }
        std::cerr << "no command selected\n";
        return 1;
    } catch (const ampl::PreconditionFailure& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return 2;
    } catch (const ampl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
