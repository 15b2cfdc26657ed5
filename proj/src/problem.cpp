#include "amplituder/problem.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "amplituder/errors.hpp"

namespace ampl {

namespace {

std::string trim(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double to_double(const std::string& tok, int line, const std::string& what) {
    try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "bad " + what + " '" + tok + "'");
    }
}

int to_int(const std::string& tok, int line, const std::string& what) {
    try {
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "bad " + what + " '" + tok + "'");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const std::set<std::string>& scan_keys() {
    static const std::set<std::string> keys = {
        "j_max",       "tol_crit", "margin",    "cond_max",       "eig_sep_tol",
        "max_order",   "fd_h",     "xi_max",    "xi_points",      "ellipticity_c1",
    };
    return keys;
}

/// Parse a typed experiment value without a line context.
double block_double(const ExperimentBlock& b, const std::string& key, const std::string& tok) {
    try {
        size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(b.name + "." + key + ": bad number '" + tok + "'");
    }
}

int block_int(const ExperimentBlock& b, const std::string& key, const std::string& tok) {
    try {
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(b.name + "." + key + ": bad integer '" + tok + "'");
    }
}

/// Keys whose values must be positive numbers wherever they appear.
bool positive_numeric_key(const std::string& key) {
    return key == "epsilon" || key == "epsilons" || key == "etas" || key == "dt" ||
           key == "dt_factor" || key == "T0" || key == "T_end" || key == "t0" ||
           key == "box_length" || key == "slow_length" || key == "horizon" ||
           key == "horizon_factor" || key == "band_factor";
}

void validate_block_entry(const ExperimentBlock& b, const std::string& key,
                          const std::string& value, int line) {
    const std::string where =
        (line > 0 ? "line " + std::to_string(line) + ": " : "") + b.name + "." + key;
    if (positive_numeric_key(key)) {
        for (const std::string& tok : split_ws(value)) {
            const double v = block_double(b, key, tok);
            if (!(v > 0.0)) throw ValidationError(where + " must be positive, got " + tok);
        }
    }
    if (key == "points" || key == "periods" || key == "samples" || key == "t_samples" ||
        key == "time_samples" || key == "snapshot_stride") {
        for (const std::string& tok : split_ws(value)) {
            const int v = block_int(b, key, tok);
            if (v < 1) throw ValidationError(where + " must be >= 1, got " + tok);
        }
    }
}

void validate_problem(const ProblemFile& p) {
    if (p.dimension < 1) throw ValidationError("dimension must be >= 1");
    if (p.components < 1) throw ValidationError("components must be >= 1");
    if (p.slow_dimension < 1 || p.slow_dimension > p.dimension)
        throw ValidationError("slow_dimension must satisfy 1 <= D <= dimension");
    if (p.k.size() != p.dimension)
        throw ValidationError("wavenumber needs one entry per spatial dimension");
    if (p.symbol.empty()) throw ValidationError("problem declares an empty symbol");
    p.build_symbol();
    p.build_nonlinearity();
    p.analysis_options();
    const auto& vocab = experiment_vocabulary();
    for (const ExperimentBlock& b : p.experiments)
        if (std::find(vocab.begin(), vocab.end(), b.name) == vocab.end())
            throw ValidationError("unknown experiment '" + b.name + "'");
}

} // namespace

const std::vector<std::string>& experiment_vocabulary() {
    static const std::vector<std::string> vocab = {
        "analyze", "derive",         "simulate",        "verify-error",
        "steady",  "verify-semigroup", "verify-stability"};
    return vocab;
}

bool ExperimentBlock::has(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return true;
    return false;
}

const std::string& ExperimentBlock::get(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw ValidationError("experiment '" + name + "' is missing required key '" + key + "'");
}

std::string ExperimentBlock::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

double ExperimentBlock::get_double(const std::string& key) const {
    return block_double(*this, key, trim(get(key)));
}

double ExperimentBlock::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int ExperimentBlock::get_int(const std::string& key) const {
    return block_int(*this, key, trim(get(key)));
}

int ExperimentBlock::get_int_or(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool ExperimentBlock::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = trim(get(key));
    if (v == "true") return true;
    if (v == "false") return false;
    throw ValidationError(name + "." + key + ": expected true or false, got '" + v + "'");
}

std::vector<double> ExperimentBlock::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& tok : split_ws(get(key))) out.push_back(block_double(*this, key, tok));
    return out;
}

std::vector<int> ExperimentBlock::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& tok : split_ws(get(key))) out.push_back(block_int(*this, key, tok));
    return out;
}

std::vector<std::string> ExperimentBlock::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(get(key));
    std::string piece;
    while (std::getline(ss, piece, ';')) {
        piece = trim(piece);
        if (!piece.empty()) out.push_back(piece);
    }
    if (out.empty())
        throw ValidationError(name + "." + key + ": expected a semicolon-separated list");
    return out;
}

void ExperimentBlock::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries.emplace_back(key, value);
}

MatrixPolynomial ProblemFile::build_symbol() const {
    MatrixPolynomial P(dimension, components);
    for (const SymbolEntry& e : symbol) {
        if (e.alpha.dim() != dimension)
            throw ValidationError("symbol entry " + e.alpha.str() + " has wrong dimension");
        if (e.row < 0 || e.row >= components || e.col < 0 || e.col >= components)
            throw ValidationError("symbol entry row/col (" + std::to_string(e.row) + ", " +
                                  std::to_string(e.col) + ") outside the " +
                                  std::to_string(components) + "-component block");
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(components, components);
        a(e.row, e.col) = e.value;
        P.add_term(e.alpha, a);
    }
    return P;
}

PolynomialNonlinearity ProblemFile::build_nonlinearity() const {
    PolynomialNonlinearity f(components);
    for (const NonlinearityEntry& e : nonlinearity) {
        if (e.expo.dim() != components)
            throw ValidationError("nonlinearity exponent " + e.expo.str() +
                                  " needs one entry per field component");
        if (e.component < 0 || e.component >= components)
            throw ValidationError("nonlinearity component " + std::to_string(e.component) +
                                  " outside the " + std::to_string(components) +
                                  "-component field");
        f.add_term(e.expo, e.component, e.value);
    }
    return f;
}

AnalysisOptions ProblemFile::analysis_options() const {
    AnalysisOptions opts;
    for (const auto& [key, value] : scan) {
        const std::string tok = trim(value);
        auto dbl = [&](const char* what) {
            try {
                size_t used = 0;
                const double v = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument(tok);
                return v;
            } catch (const std::exception&) {
                throw ValidationError(std::string("scan.") + what + ": bad number '" + tok + "'");
            }
        };
        if (key == "j_max") opts.j_max = static_cast<int>(dbl("j_max"));
        else if (key == "tol_crit") opts.tol_crit = dbl("tol_crit");
        else if (key == "margin") opts.margin = dbl("margin");
        else if (key == "cond_max") opts.cond_max = dbl("cond_max");
        else if (key == "eig_sep_tol") opts.eig_sep_tol = dbl("eig_sep_tol");
        else if (key == "max_order") opts.max_order = static_cast<int>(dbl("max_order"));
        else if (key == "fd_h") opts.fd_h = dbl("fd_h");
        else if (key == "xi_max") opts.xi_max = dbl("xi_max");
        else if (key == "xi_points") opts.xi_points = static_cast<int>(dbl("xi_points"));
        else if (key == "ellipticity_c1") opts.ellipticity_c1 = dbl("ellipticity_c1");
        else throw ValidationError("unknown scan key '" + key + "'");
    }
    if (opts.j_max < 1) throw ValidationError("scan.j_max must be >= 1");
    if (!(opts.tol_crit > 0.0)) throw ValidationError("scan.tol_crit must be positive");
    return opts;
}

const ExperimentBlock* ProblemFile::experiment(const std::string& section) const {
    for (const ExperimentBlock& b : experiments)
        if (b.name == section) return &b;
    return nullptr;
}

ProblemFile parse_problem_text(const std::string& text, const std::string& name) {
    ProblemFile p;
    p.name = name;
    p.slow_dimension = 0;  // required key; default applied only if declared

    enum class Section { Header, Symbol, Nonlinearity, Scan, Experiment };
    Section section = Section::Header;
    ExperimentBlock* block = nullptr;

    std::map<std::string, int> seen_header;
    bool any_content = false;
    std::vector<double> kvals;
    bool have_dim = false, have_comps = false, have_slow = false, have_omega = false,
         have_k = false;

    std::istringstream is(text);
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        any_content = true;

        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(line, "unterminated section header");
            const std::string inner = trim(s.substr(1, s.size() - 2));
            const std::vector<std::string> parts = split_ws(inner);
            if (parts.empty()) throw ParseError(line, "empty section header");
            if (parts[0] == "symbol" && parts.size() == 1) {
                section = Section::Symbol;
            } else if (parts[0] == "nonlinearity" && parts.size() == 1) {
                section = Section::Nonlinearity;
            } else if (parts[0] == "scan" && parts.size() == 1) {
                section = Section::Scan;
            } else if (parts[0] == "experiment" && parts.size() == 2) {
                for (const ExperimentBlock& b : p.experiments)
                    if (b.name == parts[1])
                        throw ParseError(line, "duplicate experiment '" + parts[1] + "'");
                const auto& vocab = experiment_vocabulary();
                if (std::find(vocab.begin(), vocab.end(), parts[1]) == vocab.end())
                    throw ValidationError("line " + std::to_string(line) +
                                          ": unknown experiment '" + parts[1] +
                                          "' (commands: analyze, derive, simulate, "
                                          "verify-error, verify-semigroup, steady, "
                                          "verify-stability)");
                p.experiments.push_back({parts[1], {}});
                block = &p.experiments.back();
                section = Section::Experiment;
            } else {
                throw ParseError(line, "unknown section '" + inner + "'");
            }
            continue;
        }

        if (section == Section::Header) {
            const size_t sp = s.find_first_of(" \t");
            const std::string key = sp == std::string::npos ? s : s.substr(0, sp);
            const std::string value = sp == std::string::npos ? "" : trim(s.substr(sp));
            if (value.empty()) throw ParseError(line, "key '" + key + "' has no value");
            if (++seen_header[key] > 1) throw ParseError(line, "duplicate key '" + key + "'");
            if (key == "dimension") {
                p.dimension = to_int(value, line, "dimension");
                have_dim = true;
            } else if (key == "components") {
                p.components = to_int(value, line, "components");
                have_comps = true;
            } else if (key == "slow_dimension") {
                p.slow_dimension = to_int(value, line, "slow_dimension");
                have_slow = true;
            } else if (key == "omega") {
                p.omega = to_double(value, line, "omega");
                have_omega = true;
            } else if (key == "wavenumber") {
                for (const std::string& tok : split_ws(value))
                    kvals.push_back(to_double(tok, line, "wavenumber"));
                have_k = true;
            } else {
                throw ParseError(line, "unknown key '" + key + "' before the first section");
            }
            continue;
        }

        if (section == Section::Symbol) {
            if (!have_dim || !have_comps)
                throw ParseError(line, "[symbol] needs dimension and components declared first");
            const std::vector<std::string> toks = split_ws(s);
            const size_t want = static_cast<size_t>(p.dimension) + 4;
            if (toks.size() != want)
                throw ParseError(line, "symbol entry needs " + std::to_string(want) +
                                           " fields (alpha, row, col, re, im), got " +
                                           std::to_string(toks.size()));
            std::vector<int> alpha(p.dimension);
            for (int i = 0; i < p.dimension; ++i) {
                alpha[i] = to_int(toks[i], line, "multi-index entry");
                if (alpha[i] < 0) throw ParseError(line, "multi-index entries must be >= 0");
            }
            SymbolEntry e;
            e.alpha = MultiIndex(alpha);
            e.row = to_int(toks[p.dimension], line, "row");
            e.col = to_int(toks[p.dimension + 1], line, "col");
            if (e.row < 0 || e.row >= p.components || e.col < 0 || e.col >= p.components)
                throw ValidationError("line " + std::to_string(line) + ": row/col (" +
                                      toks[p.dimension] + ", " + toks[p.dimension + 1] +
                                      ") outside the " + std::to_string(p.components) +
                                      "-component block");
            e.value = Complex(to_double(toks[p.dimension + 2], line, "coefficient"),
                              to_double(toks[p.dimension + 3], line, "coefficient"));
            p.symbol.push_back(e);
            continue;
        }

        if (section == Section::Nonlinearity) {
            if (!have_comps)
                throw ParseError(line, "[nonlinearity] needs components declared first");
            const std::vector<std::string> toks = split_ws(s);
            const size_t want = static_cast<size_t>(p.components) + 2;
            if (toks.size() != want)
                throw ParseError(line, "nonlinearity entry needs " + std::to_string(want) +
                                           " fields (exponents, component, coefficient), got " +
                                           std::to_string(toks.size()));
            std::vector<int> expo(p.components);
            for (int i = 0; i < p.components; ++i) {
                expo[i] = to_int(toks[i], line, "exponent");
                if (expo[i] < 0) throw ParseError(line, "exponents must be >= 0");
            }
            NonlinearityEntry e;
            e.expo = MultiIndex(expo);
            e.component = to_int(toks[p.components], line, "component");
            if (e.component < 0 || e.component >= p.components)
                throw ValidationError("line " + std::to_string(line) + ": component " +
                                      toks[p.components] + " outside the " +
                                      std::to_string(p.components) + "-component field");
            e.value = to_double(toks[p.components + 1], line, "coefficient");
            p.nonlinearity.push_back(e);
            continue;
        }

        const size_t sp = s.find_first_of(" \t");
        const std::string key = sp == std::string::npos ? s : s.substr(0, sp);
        const std::string value = sp == std::string::npos ? "" : trim(s.substr(sp));
        if (value.empty()) throw ParseError(line, "key '" + key + "' has no value");

        if (section == Section::Scan) {
            if (scan_keys().count(key) == 0)
                throw ParseError(line, "unknown scan key '" + key + "'");
            for (const auto& [k, v] : p.scan)
                if (k == key) throw ParseError(line, "duplicate scan key '" + key + "'");
            p.scan.emplace_back(key, value);
            continue;
        }

        // experiment block
        if (block->has(key)) throw ParseError(line, "duplicate key '" + key + "'");
        validate_block_entry(*block, key, value, line);
        block->entries.emplace_back(key, value);
    }

    if (!any_content) throw ParseError("problem file is empty");
    if (!have_dim) throw ParseError("missing required key 'dimension'");
    if (!have_comps) throw ParseError("missing required key 'components'");
    if (!have_slow) throw ParseError("missing required key 'slow_dimension'");
    if (!have_omega) throw ParseError("missing required key 'omega'");
    if (!have_k) throw ParseError("missing required key 'wavenumber'");
    p.k = Eigen::Map<Eigen::VectorXd>(kvals.data(), static_cast<Eigen::Index>(kvals.size()));

    validate_problem(p);
    return p;
}

ProblemFile parse_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open problem file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string stem = path;
    const size_t slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const size_t dot = stem.find_last_of('.');
    if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    return parse_problem_text(buf.str(), stem);
}

std::string serialize_problem(const ProblemFile& p) {
    std::ostringstream os;
    os << "dimension " << p.dimension << "\n";
    os << "components " << p.components << "\n";
    os << "slow_dimension " << p.slow_dimension << "\n";
    os << "omega " << fmt17(p.omega) << "\n";
    os << "wavenumber";
    for (int i = 0; i < p.k.size(); ++i) os << " " << fmt17(p.k(i));
    os << "\n";

    os << "\n[symbol]\n";
    for (const SymbolEntry& e : p.symbol) {
        for (int i = 0; i < e.alpha.dim(); ++i) os << e.alpha[i] << " ";
        os << e.row << " " << e.col << " " << fmt17(e.value.real()) << " "
           << fmt17(e.value.imag()) << "\n";
    }

    os << "\n[nonlinearity]\n";
    for (const NonlinearityEntry& e : p.nonlinearity) {
        for (int i = 0; i < e.expo.dim(); ++i) os << e.expo[i] << " ";
        os << e.component << " " << fmt17(e.value) << "\n";
    }

    if (!p.scan.empty()) {
        os << "\n[scan]\n";
        for (const auto& [k, v] : p.scan) os << k << " " << v << "\n";
    }

    for (const ExperimentBlock& b : p.experiments) {
        os << "\n[experiment " << b.name << "]\n";
        for (const auto& [k, v] : b.entries) os << k << " " << v << "\n";
    }
    return os.str();
}

void apply_override(ProblemFile& p, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    const std::string v = trim(value);
    if (k.empty()) throw ValidationError("override has an empty key");
    if (v.empty()) throw ValidationError("override '" + k + "' has an empty value");

    const size_t dot = k.find('.');
    if (dot == std::string::npos) {
        if (k == "omega") {
            p.omega = block_double({"override", {}}, k, v);
        } else if (k == "slow_dimension") {
            p.slow_dimension = block_int({"override", {}}, k, v);
        } else if (k == "wavenumber") {
            const std::vector<std::string> toks = split_ws(v);
            Eigen::VectorXd kv(static_cast<Eigen::Index>(toks.size()));
            for (size_t i = 0; i < toks.size(); ++i)
                kv(static_cast<Eigen::Index>(i)) = block_double({"override", {}}, k, toks[i]);
            p.k = kv;
        } else {
            throw ValidationError("cannot override '" + k +
                                  "' (allowed: omega, wavenumber, slow_dimension, scan.*, "
                                  "<experiment>.*)");
        }
        validate_problem(p);
        return;
    }

    const std::string section = k.substr(0, dot);
    const std::string param = k.substr(dot + 1);
    if (section.empty() || param.empty())
        throw ValidationError("override key '" + k + "' must look like section.param");

    if (section == "scan") {
        if (scan_keys().count(param) == 0)
            throw ValidationError("unknown scan key '" + param + "'");
        for (auto& [sk, sv] : p.scan) {
            if (sk == param) {
                sv = v;
                validate_problem(p);
                return;
            }
        }
        p.scan.emplace_back(param, v);
        validate_problem(p);
        return;
    }

    const auto& vocab = experiment_vocabulary();
    if (std::find(vocab.begin(), vocab.end(), section) == vocab.end())
        throw ValidationError("unknown experiment '" + section + "' in override '" + k + "'");
    ExperimentBlock* block = nullptr;
    for (ExperimentBlock& b : p.experiments)
        if (b.name == section) block = &b;
    if (!block) {
        p.experiments.push_back({section, {}});
        block = &p.experiments.back();
    }
    validate_block_entry(*block, param, v, 0);
    block->set(param, v);
    validate_problem(p);
}

} // namespace ampl
