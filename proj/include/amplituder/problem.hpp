#ifndef AMPLITUDER_PROBLEM_HPP
#define AMPLITUDER_PROBLEM_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "amplituder/dispersion.hpp"
#include "amplituder/matrix_polynomial.hpp"
#include "amplituder/nonlinearity.hpp"

namespace ampl {

struct SymbolEntry {
    MultiIndex alpha;
    int row = 0;
    int col = 0;
    Complex value;

    bool operator==(const SymbolEntry& o) const {
        return alpha == o.alpha && row == o.row && col == o.col && value == o.value;
    }
};

struct NonlinearityEntry {
    MultiIndex expo;
    int component = 0;
    double value = 0.0;

    bool operator==(const NonlinearityEntry& o) const {
        return expo == o.expo && component == o.component && value == o.value;
    }
};

/// One `[experiment <name>]` section: ordered raw key/value text, typed on
/// access so overrides can splice in new values verbatim.
struct ExperimentBlock {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int_or(const std::string& key, int fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key) const;
    /// Semicolon-separated list (profile texts contain commas and spaces).
    std::vector<std::string> get_list(const std::string& key) const;

    /// Replace the value of `key`, appending the pair if absent.
    void set(const std::string& key, const std::string& value);

    bool operator==(const ExperimentBlock& o) const {
        return name == o.name && entries == o.entries;
    }
};

/// In-memory image of a problem file: operator model, critical guess, scan
/// options, and per-command experiment parameter blocks.
struct ProblemFile {
    std::string name;  // file stem, used in reports; not part of the content
    int dimension = 0;       // spatial variables d
    int components = 0;      // field components m
    int slow_dimension = 1;  // D
    double omega = 0.0;
    Eigen::VectorXd k;
    std::vector<SymbolEntry> symbol;
    std::vector<NonlinearityEntry> nonlinearity;
    std::vector<std::pair<std::string, std::string>> scan;
    std::vector<ExperimentBlock> experiments;

    MatrixPolynomial build_symbol() const;
    PolynomialNonlinearity build_nonlinearity() const;
    AnalysisOptions analysis_options() const;
    const ExperimentBlock* experiment(const std::string& section) const;

    bool operator==(const ProblemFile& o) const {
        return dimension == o.dimension && components == o.components &&
               slow_dimension == o.slow_dimension && omega == o.omega && k == o.k &&
               symbol == o.symbol && nonlinearity == o.nonlinearity && scan == o.scan &&
               experiments == o.experiments;
    }
    bool operator!=(const ProblemFile& o) const { return !(*this == o); }
};

/// Names an `[experiment ...]` section may carry (the command vocabulary).
const std::vector<std::string>& experiment_vocabulary();

ProblemFile parse_problem(const std::string& path);
ProblemFile parse_problem_text(const std::string& text, const std::string& name = "");

/// Canonical text form; parse_problem_text(serialize_problem(p)) == p.
std::string serialize_problem(const ProblemFile& p);

/// `omega` / `wavenumber` / `slow_dimension`, `scan.<key>`, or
/// `<experiment>.<key>` (the block is created when missing).
void apply_override(ProblemFile& p, const std::string& key, const std::string& value);

} // namespace ampl

#endif
