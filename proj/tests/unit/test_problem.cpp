#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "amplituder/commands.hpp"
#include "amplituder/errors.hpp"
#include "amplituder/problem.hpp"

using namespace ampl;
namespace fs = std::filesystem;

namespace {

std::string problems_dir() { return AMPLITUDER_PROBLEMS_DIR; }

MatrixPolynomial pattern_symbol() {
    MatrixPolynomial P(1, 1);
    Eigen::MatrixXcd a(1, 1);
    a(0, 0) = -1.0;
    P.add_term(MultiIndex({0}), a);
    a(0, 0) = -2.0;
    P.add_term(MultiIndex({2}), a);
    a(0, 0) = -1.0;
    P.add_term(MultiIndex({4}), a);
    return P;
}

MatrixPolynomial turing_symbol() {
    MatrixPolynomial P(2, 2);
    Eigen::MatrixXcd lin(2, 2), diff(2, 2);
    lin << 0.75, -1.0, 1.0, -1.0;
    diff << 0.25, 0.0, 0.0, 1.0;
    P.add_term(MultiIndex({0, 0}), lin);
    P.add_term(MultiIndex({2, 0}), diff);
    P.add_term(MultiIndex({0, 2}), diff);
    return P;
}

MatrixPolynomial hopf_symbol() {
    MatrixPolynomial P(1, 2);
    Eigen::MatrixXcd rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    P.add_term(MultiIndex({0}), rot);
    P.add_term(MultiIndex({2}), Eigen::MatrixXcd::Identity(2, 2));
    return P;
}

bool same_nonlinearity(const PolynomialNonlinearity& a, const PolynomialNonlinearity& b) {
    if (a.components() != b.components()) return false;
    if (a.terms().size() != b.terms().size()) return false;
    auto ia = a.terms().begin();
    auto ib = b.terms().begin();
    for (; ia != a.terms().end(); ++ia, ++ib) {
        if (!(ia->first == ib->first)) return false;
        if (!(ia->second == ib->second)) return false;
    }
    return true;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// First report line starting with `prefix `, with the prefix stripped.
std::string report_row(const std::string& text, const std::string& prefix) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind(prefix + " ", 0) == 0) return line.substr(prefix.size() + 1);
    return {};
}

std::vector<double> numbers(const std::string& text) {
    std::istringstream is(text);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

std::string fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("amplituder_" + tag);
    fs::remove_all(dir);
    return dir.string();
}

const char* minimal_header =
    "dimension 1\ncomponents 1\nslow_dimension 1\nomega 0\nwavenumber 1\n";

} // namespace

TEST_CASE("bundled pattern-forming config parses to the expected operator") {
    const ProblemFile p = parse_problem(problems_dir() + "/swift_hohenberg.prob");
    CHECK(p.name == "swift_hohenberg");
    CHECK(p.dimension == 1);
    CHECK(p.components == 1);
    CHECK(p.slow_dimension == 1);
    CHECK(p.omega == 0.0);
    REQUIRE(p.k.size() == 1);
    CHECK(p.k(0) == 1.0);
    CHECK(p.build_symbol() == pattern_symbol());

    PolynomialNonlinearity f(1);
    f.add_term(MultiIndex({1}), 0, 1.0);
    f.add_term(MultiIndex({3}), 0, -1.0);
    CHECK(same_nonlinearity(p.build_nonlinearity(), f));

    for (const char* section :
         {"verify-error", "verify-semigroup", "steady", "verify-stability", "simulate"})
        CHECK(p.experiment(section) != nullptr);
    CHECK(p.experiment("analyze") == nullptr);

    const ExperimentBlock* err = p.experiment("verify-error");
    CHECK(err->get_doubles("epsilons") == std::vector<double>{0.04, 0.01, 0.0025});
    CHECK(err->get_ints("points") == std::vector<int>{1024});
    CHECK(err->get_list("profiles") == std::vector<std::string>{"gaussian(0.5, 1.0)"});
    CHECK(p.analysis_options().j_max == 16);
}

TEST_CASE("bundled two-component configs parse to the expected operators") {
    const ProblemFile cel = parse_problem(problems_dir() + "/chen_ei_lin.prob");
    CHECK(cel.dimension == 2);
    CHECK(cel.components == 2);
    CHECK(cel.slow_dimension == 1);
    CHECK(cel.omega == 0.0);
    REQUIRE(cel.k.size() == 2);
    CHECK(cel.k(0) == 0.0);
    CHECK(cel.k(1) == 1.0);
    CHECK(cel.build_symbol() == turing_symbol());

    const ProblemFile osc = parse_problem(problems_dir() + "/oscillatory.prob");
    CHECK(osc.components == 2);
    CHECK(osc.omega == 1.0);
    CHECK(osc.k(0) == 0.0);
    CHECK(osc.build_symbol() == hopf_symbol());

    PolynomialNonlinearity f(2);
    f.add_term(MultiIndex({1, 0}), 0, 1.0);
    f.add_term(MultiIndex({3, 0}), 0, -1.0);
    CHECK(same_nonlinearity(cel.build_nonlinearity(), f));
    CHECK(same_nonlinearity(osc.build_nonlinearity(), f));
}

TEST_CASE("experiment names come from the command vocabulary") {
    const auto& vocab = experiment_vocabulary();
    for (const char* name : {"analyze", "derive", "simulate", "verify-error",
                             "verify-semigroup", "steady", "verify-stability"})
        CHECK(std::find(vocab.begin(), vocab.end(), name) != vocab.end());
    CHECK(vocab.size() == 7);
}

TEST_CASE("parse failures carry line numbers") {
    CHECK_THROWS_AS(parse_problem_text(""), ParseError);
    CHECK_THROWS_AS(parse_problem_text("# only a comment\n\n"), ParseError);
    CHECK_THROWS_AS(parse_problem(problems_dir() + "/does_not_exist.prob"), ParseError);

    try {
        parse_problem_text("dimension 1\ncomponents 1\nslow_dimension one\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    // missing required header keys
    CHECK_THROWS_AS(parse_problem_text("dimension 1\ncomponents 1\n"), ParseError);

    const std::string head = minimal_header;
    CHECK_THROWS_AS(parse_problem_text(head + "[symbol\n0 0 0 -1 0\n"), ParseError);
    CHECK_THROWS_AS(parse_problem_text(head + "[mystery]\n"), ParseError);
    CHECK_THROWS_AS(parse_problem_text("dimension 1\ndimension 2\n" + head), ParseError);
    CHECK_THROWS_AS(parse_problem_text("banana 3\n" + head), ParseError);

    // wrong field count: needs d + 4 = 5 fields
    try {
        parse_problem_text(head + "[symbol]\n2 0 0 -1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 7);
    }
    CHECK_THROWS_AS(parse_problem_text(head + "[symbol]\n-2 0 0 -1 0\n"), ParseError);
}

TEST_CASE("validation failures name the offending entry") {
    const std::string head = minimal_header;

    // row/col outside the component block
    CHECK_THROWS_WITH_AS(parse_problem_text(head + "[symbol]\n2 0 1 -1 0\n"),
                         doctest::Contains("outside the 1-component block"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_problem_text(head + "[symbol]\n2 1 0 -1 0\n"),
                         doctest::Contains("line 7"), ValidationError);

    // nonlinearity component out of range
    CHECK_THROWS_AS(
        parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n[nonlinearity]\n1 2 1\n"),
        ValidationError);

    // negative epsilon rejected eagerly
    CHECK_THROWS_WITH_AS(
        parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n[experiment verify-error]\n"
                                  "epsilons 0.1 -0.01\n"),
        doctest::Contains("must be positive"), ValidationError);
    CHECK_THROWS_AS(parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n"
                                              "[experiment simulate]\npoints 0\n"),
                    ValidationError);

    // experiment names come from the command vocabulary
    CHECK_THROWS_WITH_AS(
        parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n[experiment wobble]\n"),
        doctest::Contains("unknown experiment 'wobble'"), ValidationError);
    CHECK_THROWS_AS(parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n[experiment steady]\n"
                                              "guess 0.5\n[experiment steady]\nguess 0.3\n"),
                    ParseError);

    // an empty symbol never builds an operator
    CHECK_THROWS_WITH_AS(parse_problem_text(head + "[symbol]\n"),
                         doctest::Contains("empty symbol"), ValidationError);

    // scan keys are a fixed set, declared once
    CHECK_THROWS_AS(parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n[scan]\nbogus 3\n"),
                    ParseError);
    CHECK_THROWS_AS(
        parse_problem_text(head + "[symbol]\n2 0 0 -1 0\n[scan]\nj_max 4\nj_max 8\n"),
        ParseError);
}

TEST_CASE("problems round-trip through their text form") {
    for (const char* name : {"swift_hohenberg", "chen_ei_lin", "oscillatory"}) {
        CAPTURE(name);
        const ProblemFile p = parse_problem(problems_dir() + "/" + name + ".prob");
        const ProblemFile q = parse_problem_text(serialize_problem(p), p.name);
        CHECK(p == q);
        // serialization is a fixed point
        CHECK(serialize_problem(p) == serialize_problem(q));
    }

    // a scan section survives the trip too
    ProblemFile p = parse_problem(problems_dir() + "/swift_hohenberg.prob");
    apply_override(p, "scan.j_max", "8");
    apply_override(p, "scan.xi_max", "2.5");
    const ProblemFile q = parse_problem_text(serialize_problem(p), p.name);
    CHECK(p == q);
    CHECK(q.analysis_options().j_max == 8);
}

TEST_CASE("overrides rewrite header fields, scan keys, and experiment blocks") {
    ProblemFile p = parse_problem(problems_dir() + "/swift_hohenberg.prob");

    apply_override(p, "omega", "0.5");
    CHECK(p.omega == 0.5);
    apply_override(p, "wavenumber", "2");
    CHECK(p.k(0) == 2.0);
    apply_override(p, "scan.j_max", "4");
    CHECK(p.analysis_options().j_max == 4);

    apply_override(p, "verify-error.epsilons", "0.1 0.05");
    CHECK(p.experiment("verify-error")->get_doubles("epsilons") ==
          std::vector<double>{0.1, 0.05});
    // untouched keys keep their values
    CHECK(p.experiment("verify-error")->get_ints("points") == std::vector<int>{1024});

    // overriding a key of an absent block creates the block
    ProblemFile osc = parse_problem(problems_dir() + "/oscillatory.prob");
    CHECK(osc.experiment("verify-error") == nullptr);
    apply_override(osc, "verify-error.t0", "2.0");
    REQUIRE(osc.experiment("verify-error") != nullptr);
    CHECK(osc.experiment("verify-error")->get_double("t0") == 2.0);

    CHECK_THROWS_AS(apply_override(p, "dimension", "3"), ValidationError);
    CHECK_THROWS_AS(apply_override(p, "scan.bogus", "1"), ValidationError);
    CHECK_THROWS_AS(apply_override(p, "wobble.t0", "1"), ValidationError);
    CHECK_THROWS_AS(apply_override(p, "verify-error.epsilons", "-0.1"), ValidationError);
    CHECK_THROWS_AS(apply_override(p, "omega", ""), ValidationError);
    CHECK_THROWS_AS(apply_override(p, "slow_dimension", "3"), ValidationError);
}

TEST_CASE("derive on the bundled pattern former reports the reduced system") {
    const ProblemFile p = parse_problem(problems_dir() + "/swift_hohenberg.prob");
    CommandOptions opts;
    opts.outdir = fresh_dir("derive_sh");
    CHECK(cmd_derive(p, opts) == 0);

    const std::string rep = slurp(opts.outdir + "/derive.report");
    CHECK(report_row(rep, "pass") == "true");
    CHECK(report_row(rep, "degeneracy_order") == "2");
    CHECK(report_row(rep, "symmetric") == "true");

    const std::vector<double> q = numbers(report_row(rep, "Q"));
    REQUIRE(q.size() == 3);  // exponent, re, im
    CHECK(q[0] == 2.0);
    CHECK(q[1] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(q[2] == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<double> s3 = numbers(report_row(rep, "S 3"));
    REQUIRE(s3.size() == 2);
    CHECK(s3[0] == -3.0);
    CHECK(s3[1] == 0.0);
}

TEST_CASE("repeated runs produce byte-identical outputs") {
    const ProblemFile p = parse_problem(problems_dir() + "/swift_hohenberg.prob");

    CommandOptions a, b;
    a.outdir = fresh_dir("det_a");
    b.outdir = fresh_dir("det_b");
    CHECK(cmd_steady(p, a) == 0);
    CHECK(cmd_steady(p, b) == 0);
    const std::string csv_a = slurp(a.outdir + "/steady.csv");
    CHECK(!csv_a.empty());
    CHECK(csv_a == slurp(b.outdir + "/steady.csv"));
    CHECK(slurp(a.outdir + "/steady.report") == slurp(b.outdir + "/steady.report"));

    CHECK(cmd_verify_semigroup(p, a) == 0);
    CHECK(cmd_verify_semigroup(p, b) == 0);
    CHECK(slurp(a.outdir + "/verify-semigroup.csv") == slurp(b.outdir + "/verify-semigroup.csv"));
    CHECK(slurp(a.outdir + "/verify-semigroup-scaled.csv") ==
          slurp(b.outdir + "/verify-semigroup-scaled.csv"));
}

TEST_CASE("spectrally unstable operators refuse the error experiment") {
    // growth at xi = 0: the semigroup bound needed by the comparison is void
    const ProblemFile p = parse_problem_text(std::string(minimal_header) +
                                             "[symbol]\n0 0 0 0.5 0\n2 0 0 1 0\n"
                                             "[nonlinearity]\n1 0 1\n");
    CommandOptions opts;
    opts.outdir = fresh_dir("gate");
    CHECK(cmd_verify_error(p, opts) == 2);
    const std::string rep = slurp(opts.outdir + "/verify-error.report");
    CHECK(report_row(rep, "pass") == "false");
    CHECK(!report_row(rep, "precondition_failed").empty());
}

TEST_CASE("steady command reports the bifurcated branch") {
    const ProblemFile p = parse_problem(problems_dir() + "/swift_hohenberg.prob");
    CommandOptions opts;
    opts.outdir = fresh_dir("steady_sh");
    CHECK(cmd_steady(p, opts) == 0);
    const std::string rep = slurp(opts.outdir + "/steady.report");
    const std::vector<double> phi = numbers(report_row(rep, "phi"));
    REQUIRE(phi.size() == 1);
    CHECK(phi[0] == doctest::Approx(0.57735026918962573).epsilon(1e-10));
    const std::vector<double> eig = numbers(report_row(rep, "eig"));
    REQUIRE(eig.size() == 2);
    CHECK(eig[0] == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(report_row(rep, "stable") == "true");
}
