#ifndef AMPLITUDER_COMMANDS_HPP
#define AMPLITUDER_COMMANDS_HPP

#include <optional>
#include <string>

#include "amplituder/harness.hpp"
#include "amplituder/problem.hpp"
#include "amplituder/reduction.hpp"

namespace ampl {

struct CommandOptions {
    std::string outdir;
    int threads = 1;  // worker cap from AMPLITUDER_THREADS; loops run sequentially
};

/// Full pipeline state shared by the commands: symbol, nonlinearity, analysis,
/// and both reductions (the symmetric one only when the pairing is available).
struct DerivedProblem {
    MatrixPolynomial P;
    PolynomialNonlinearity f;
    AnalyzeResult analysis;
    AmplitudeSystem general;
    std::optional<AmplitudeSystem> symmetric;

    DerivedProblem() : P(1, 1), f(1) {}

    /// The system experiments run on: symmetric when available.
    const AmplitudeSystem& experiment_system() const;
};

DerivedProblem derive_problem(const ProblemFile& p);

/// Exit status 0: ran and all pass flags true; 1: ran with failing checks;
/// 2: refused on a failed precondition.  Errors propagate as exceptions.
int cmd_analyze(const ProblemFile& p, const CommandOptions& opts);
int cmd_derive(const ProblemFile& p, const CommandOptions& opts);
int cmd_simulate(const ProblemFile& p, const CommandOptions& opts);
int cmd_verify_error(const ProblemFile& p, const CommandOptions& opts);
int cmd_verify_semigroup(const ProblemFile& p, const CommandOptions& opts);
int cmd_steady(const ProblemFile& p, const CommandOptions& opts);
int cmd_verify_stability(const ProblemFile& p, const CommandOptions& opts);

/// Dispatch by command name (the CLI vocabulary, hyphenated).
int run_command(const std::string& command, const ProblemFile& p, const CommandOptions& opts);

} // namespace ampl

#endif
