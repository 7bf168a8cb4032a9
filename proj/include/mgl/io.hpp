#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mgl/defaults.hpp"
#include "mgl/eval.hpp"
#include "mgl/matrix.hpp"
#include "mgl/mixture.hpp"
#include "mgl/synth.hpp"

namespace mgl {

// Filesystem-level failure (missing file, unwritable path).
struct IoError : Error {
    using Error::Error;
};

inline constexpr std::string_view kModelFormatVersion = "mgl-model/1";
inline constexpr std::string_view kReportFormatVersion = "mgl-report/1";

// 17 significant digits: round-trips every finite double exactly and is
// locale independent.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i)
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    return out;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

inline std::optional<double> try_parse_double(std::string_view tok) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || tok.empty()) return std::nullopt;
    return v;
}

inline double parse_double(std::string_view tok, std::size_t line, std::size_t column) {
    auto v = try_parse_double(tok);
    if (!v) throw ParseError(line, column, "expected a number, got '" + std::string(tok) + "'");
    return *v;
}

inline std::size_t parse_size(std::string_view tok, std::size_t line, std::size_t column) {
    std::size_t v = 0;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || tok.empty())
        throw ParseError(line, column, "expected a non-negative integer, got '" +
                                           std::string(tok) + "'");
    return v;
}

inline std::ofstream open_for_writing(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

}  // namespace detail

// Strict numeric token parsing helpers shared with the CLI.
inline std::optional<double> try_parse_number(std::string_view token) {
    return detail::try_parse_double(token);
}

inline std::size_t parse_count(std::string_view token) {
    std::size_t v = 0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || token.empty())
        throw InvalidInput("expected a non-negative integer, got '" + std::string(token) + "'");
    return v;
}

// Reads a rectangular numeric CSV into an N x D matrix. A single leading
// header row is skipped when any of its fields is non-numeric. Blank lines
// are ignored. Row widths must match the first data row.
inline Matrix read_csv_matrix(const std::filesystem::path& path) {
    const std::vector<std::string> lines = detail::read_lines(path);

    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    bool first_content = true;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        if (detail::trim(lines[li]).empty()) continue;
        const std::vector<std::string> fields = detail::split(lines[li], ',');
        if (first_content) {
            first_content = false;
            bool numeric = true;
            for (const auto& f : fields)
                if (!detail::try_parse_double(f)) numeric = false;
            if (!numeric) continue;  // header row
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row.push_back(detail::parse_double(fields[c], li + 1, c + 1));
        if (width == 0)
            width = row.size();
        else if (row.size() != width)
            throw RaggedRows(li + 1);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(1, 1, "no numeric rows in file");

    Matrix m(rows.size(), width);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
    return m;
}

// Comma separated, LF line endings, '.' decimal separator.
inline void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out = detail::open_for_writing(path);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
}

inline void write_sym_csv(const std::filesystem::path& path, const SymMatrix& m) {
    Matrix full(m.dim(), m.dim());
    for (std::size_t a = 0; a < m.dim(); ++a)
        for (std::size_t b = 0; b < m.dim(); ++b) full(a, b) = m(a, b);
    write_csv_matrix(path, full);
}

inline SymMatrix read_sym_csv(const std::filesystem::path& path) {
    return SymMatrix::from_matrix(read_csv_matrix(path));
}

inline void write_labels(const std::filesystem::path& path,
                         const std::vector<std::size_t>& labels) {
    std::ofstream out = detail::open_for_writing(path);
    for (std::size_t l : labels) out << l << '\n';
}

inline std::vector<std::size_t> read_labels(const std::filesystem::path& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    std::vector<std::size_t> labels;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view t = detail::trim(lines[li]);
        if (t.empty()) continue;
        labels.push_back(detail::parse_size(t, li + 1, 1));
    }
    if (labels.empty()) throw ParseError(1, 1, "no labels in file");
    return labels;
}

// Optional fit metadata stored alongside a model.
struct ModelMeta {
    std::size_t em_iterations = 0;
    bool converged = false;
    double final_objective = std::numeric_limits<double>::quiet_NaN();
};

struct ModelFile {
    MixtureModel model;
    ModelMeta meta;
};

// Versioned structured-text model file; decimal serialization with 17
// significant digits gives exact round trips.
inline void write_model(const std::filesystem::path& path, const MixtureModel& model,
                        const ModelMeta& meta = {}) {
    validate_model(model);
    std::ofstream out = detail::open_for_writing(path);
    out << kModelFormatVersion << '\n';
    out << "K " << model.components() << '\n';
    out << "D " << model.dim() << '\n';
    out << "phi";
    for (double p : model.phi) out << ' ' << format_double(p);
    out << '\n';
    out << "em_iterations " << meta.em_iterations << '\n';
    out << "converged " << (meta.converged ? 1 : 0) << '\n';
    out << "final_objective " << format_double(meta.final_objective) << '\n';
    for (std::size_t k = 0; k < model.components(); ++k) {
        out << "theta " << k << '\n';
        for (std::size_t a = 0; a < model.dim(); ++a) {
            for (std::size_t b = 0; b < model.dim(); ++b) {
                if (b) out << ' ';
                out << format_double(model.thetas[k](a, b));
            }
            out << '\n';
        }
    }
}

namespace detail {

// Sequential reader over pre-split lines with 1-based positions.
class LineCursor {
public:
    explicit LineCursor(std::vector<std::string> lines) : lines_(std::move(lines)) {}

    std::size_t position() const { return next_ + 1; }

    bool done() const { return next_ >= lines_.size(); }

    std::vector<std::string> next_tokens() {
        if (done()) throw ParseError(lines_.size() + 1, 1, "unexpected end of file");
        return split(lines_[next_++], ' ');
    }

private:
    std::vector<std::string> lines_;
    std::size_t next_ = 0;
};

inline std::vector<std::string> expect_keyword(LineCursor& cur, std::string_view keyword) {
    const std::size_t line = cur.position();
    std::vector<std::string> toks = cur.next_tokens();
    // Collapse empty tokens produced by repeated separators.
    std::erase_if(toks, [](const std::string& t) { return t.empty(); });
    if (toks.empty() || toks[0] != keyword)
        throw ParseError(line, 1, "expected '" + std::string(keyword) + "'");
    return toks;
}

}  // namespace detail

inline ModelFile read_model(const std::filesystem::path& path) {
    std::vector<std::string> lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(1, 1, "empty file");
    if (detail::trim(lines[0]) != kModelFormatVersion)
        throw FormatVersionMismatch("expected version '" + std::string(kModelFormatVersion) +
                                    "', got '" + lines[0] + "'");
    detail::LineCursor cur(std::move(lines));
    cur.next_tokens();  // version, already checked

    ModelFile file;
    std::size_t line = cur.position();
    auto toks = detail::expect_keyword(cur, "K");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value for K");
    const std::size_t k = detail::parse_size(toks[1], line, 2);
    if (k == 0) throw ParseError(line, 2, "K must be at least 1");

    line = cur.position();
    toks = detail::expect_keyword(cur, "D");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value for D");
    const std::size_t d = detail::parse_size(toks[1], line, 2);
    if (d == 0) throw ParseError(line, 2, "D must be at least 1");

    line = cur.position();
    toks = detail::expect_keyword(cur, "phi");
    if (toks.size() != k + 1) throw ParseError(line, 2, "expected K mixture weights");
    for (std::size_t c = 0; c < k; ++c)
        file.model.phi.push_back(detail::parse_double(toks[c + 1], line, c + 2));

    line = cur.position();
    toks = detail::expect_keyword(cur, "em_iterations");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value");
    file.meta.em_iterations = detail::parse_size(toks[1], line, 2);

    line = cur.position();
    toks = detail::expect_keyword(cur, "converged");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value");
    file.meta.converged = detail::parse_size(toks[1], line, 2) != 0;

    line = cur.position();
    toks = detail::expect_keyword(cur, "final_objective");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value");
    file.meta.final_objective = detail::parse_double(toks[1], line, 2);

    for (std::size_t c = 0; c < k; ++c) {
        line = cur.position();
        toks = detail::expect_keyword(cur, "theta");
        if (toks.size() != 2 || detail::parse_size(toks[1], line, 2) != c)
            throw ParseError(line, 2, "expected 'theta " + std::to_string(c) + "'");
        Matrix full(d, d);
        for (std::size_t a = 0; a < d; ++a) {
            line = cur.position();
            std::vector<std::string> row = cur.next_tokens();
            std::erase_if(row, [](const std::string& t) { return t.empty(); });
            if (row.size() != d) throw ParseError(line, 1, "expected D values per row");
            for (std::size_t b = 0; b < d; ++b)
                full(a, b) = detail::parse_double(row[b], line, b + 1);
        }
        file.model.thetas.push_back(SymMatrix::from_matrix(full));
    }
    validate_model(file.model);
    return file;
}

inline void write_ground_truth(const std::filesystem::path& dir, const GroundTruth& truth) {
    std::filesystem::create_directories(dir);
    write_csv_matrix(dir / "X.csv", truth.samples);
    write_labels(dir / "labels.csv", truth.labels);
    for (std::size_t k = 0; k < truth.thetas_true.size(); ++k)
        write_sym_csv(dir / ("theta_true_" + std::to_string(k) + ".csv"),
                      truth.thetas_true[k]);
}

inline GroundTruth read_ground_truth(const std::filesystem::path& dir) {
    GroundTruth truth;
    truth.samples = read_csv_matrix(dir / "X.csv");
    truth.labels = read_labels(dir / "labels.csv");
    if (truth.labels.size() != truth.samples.rows())
        throw InvalidInput("label count does not match sample count");
    for (std::size_t k = 0;; ++k) {
        const std::filesystem::path p = dir / ("theta_true_" + std::to_string(k) + ".csv");
        if (!std::filesystem::exists(p)) break;
        truth.thetas_true.push_back(read_sym_csv(p));
    }
    if (truth.thetas_true.empty())
        throw IoError("no theta_true_*.csv files in '" + dir.string() + "'");
    return truth;
}

struct ReportFile {
    EvalReport report;
    double eps = kDefaultEdgeEps;
};

inline void write_report(const std::filesystem::path& path, const EvalReport& report,
                         double eps) {
    std::ofstream out = detail::open_for_writing(path);
    out << kReportFormatVersion << '\n';
    out << "K " << report.per_component_f1.size() << '\n';
    out << "eps " << format_double(eps) << '\n';
    out << "mean_f1 " << format_double(report.mean_f1) << '\n';
    out << "per_component_f1";
    for (double v : report.per_component_f1) out << ' ' << format_double(v);
    out << '\n';
    out << "permutation";
    for (std::size_t p : report.permutation) out << ' ' << p;
    out << '\n';
    out << "overlap " << report.overlap_count << '\n';
}

inline ReportFile read_report(const std::filesystem::path& path) {
    std::vector<std::string> lines = detail::read_lines(path);
    if (lines.empty()) throw ParseError(1, 1, "empty file");
    if (detail::trim(lines[0]) != kReportFormatVersion)
        throw FormatVersionMismatch("expected version '" + std::string(kReportFormatVersion) +
                                    "', got '" + lines[0] + "'");
    detail::LineCursor cur(std::move(lines));
    cur.next_tokens();

    ReportFile file;
    std::size_t line = cur.position();
    auto toks = detail::expect_keyword(cur, "K");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value for K");
    const std::size_t k = detail::parse_size(toks[1], line, 2);

    line = cur.position();
    toks = detail::expect_keyword(cur, "eps");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value");
    file.eps = detail::parse_double(toks[1], line, 2);

    line = cur.position();
    toks = detail::expect_keyword(cur, "mean_f1");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value");
    file.report.mean_f1 = detail::parse_double(toks[1], line, 2);

    line = cur.position();
    toks = detail::expect_keyword(cur, "per_component_f1");
    if (toks.size() != k + 1) throw ParseError(line, 2, "expected K values");
    for (std::size_t c = 0; c < k; ++c)
        file.report.per_component_f1.push_back(detail::parse_double(toks[c + 1], line, c + 2));

    line = cur.position();
    toks = detail::expect_keyword(cur, "permutation");
    if (toks.size() != k + 1) throw ParseError(line, 2, "expected K values");
    for (std::size_t c = 0; c < k; ++c)
        file.report.permutation.push_back(detail::parse_size(toks[c + 1], line, c + 2));

    line = cur.position();
    toks = detail::expect_keyword(cur, "overlap");
    if (toks.size() != 2) throw ParseError(line, 2, "expected one value");
    file.report.overlap_count = detail::parse_size(toks[1], line, 2);
    return file;
}

// Run configuration for the fit command. Parsed from flat 'key = value'
// text with '#' comments; unknown keys are errors so benchmark configs mean
// exactly what they say.
struct RunConfig {
    std::string method;  // mgl | jgl | kmeans-glasso | glasso-spectral | glasso
    std::size_t components = 2;
    double lambda1 = kBenchLambda1;
    double lambda2 = kBenchLambda2;
    std::uint64_t seed = 0;
    double em_tol = 1e-5;
    std::size_t max_em_iter = 200;
    double solver_tol = 1e-6;
    std::size_t solver_max_iter = 500;
    std::string input;
    std::string output_dir;
};

inline const std::set<std::string>& run_config_methods() {
    static const std::set<std::string> methods{"mgl", "jgl", "kmeans-glasso",
                                               "glasso-spectral", "glasso"};
    return methods;
}

inline RunConfig read_run_config(const std::filesystem::path& path) {
    const std::vector<std::string> lines = detail::read_lines(path);
    RunConfig cfg;
    std::set<std::string> seen;

    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view s = lines[li];
        if (const std::size_t hash = s.find('#'); hash != std::string_view::npos)
            s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(li + 1, 1, "expected 'key = value'");
        const std::string key{detail::trim(s.substr(0, eq))};
        const std::string value{detail::trim(s.substr(eq + 1))};
        if (!seen.insert(key).second)
            throw ParseError(li + 1, 1, "duplicate key '" + key + "'");

        const std::size_t line = li + 1;
        if (key == "method")
            cfg.method = value;
        else if (key == "K")
            cfg.components = detail::parse_size(value, line, 2);
        else if (key == "lambda1")
            cfg.lambda1 = detail::parse_double(value, line, 2);
        else if (key == "lambda2")
            cfg.lambda2 = detail::parse_double(value, line, 2);
        else if (key == "seed")
            cfg.seed = detail::parse_size(value, line, 2);
        else if (key == "em_tol")
            cfg.em_tol = detail::parse_double(value, line, 2);
        else if (key == "max_em_iter")
            cfg.max_em_iter = detail::parse_size(value, line, 2);
        else if (key == "solver_tol")
            cfg.solver_tol = detail::parse_double(value, line, 2);
        else if (key == "solver_max_iter")
            cfg.solver_max_iter = detail::parse_size(value, line, 2);
        else if (key == "input")
            cfg.input = value;
        else if (key == "output")
            cfg.output_dir = value;
        else
            throw UnknownKey(key);
    }

    if (!seen.count("method")) throw MissingKey("method");
    if (!seen.count("K")) throw MissingKey("K");
    if (!run_config_methods().count(cfg.method))
        throw InvalidInput("unknown method '" + cfg.method + "'");
    if (cfg.components < 1) throw InvalidInput("K must be at least 1");
    if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0)
        throw InvalidInput("lambda values must be non-negative");
    if (!(cfg.em_tol > 0.0) || !(cfg.solver_tol > 0.0))
        throw InvalidInput("tolerances must be positive");
    if (cfg.max_em_iter < 1 || cfg.solver_max_iter < 1)
        throw InvalidInput("iteration limits must be at least 1");
    return cfg;
}

}  // namespace mgl
