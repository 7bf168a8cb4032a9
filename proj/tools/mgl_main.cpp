// Command line front end: synthetic data generation, model fitting,
// edge-detection evaluation, benchmark sweeps and figure rendering.
//
// Exit codes: 0 success, 1 I/O or malformed data file, 2 usage or
// validation error, 3 numeric failure (degenerate component).

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mgl/mgl.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kResultsHeader = "scenario,sweep,method,repeat,seed,mean_f1,status,wall_ms";

struct SynthArgs {
    int scenario_id = 0;
    double sweep = 0.0;
    std::size_t p = 0;
    std::size_t k = 2;
    std::string n_list;
    double sigma = 0.0;
    std::size_t blocks = 4;
    double density = 0.8;
    double value_lo = 0.3;
    double value_hi = 0.6;
    bool unit_variance = false;
    double active_variance = 1.0;
    std::uint64_t seed = 0;
    std::string out_dir;
};

std::vector<std::size_t> parse_count_list(const std::string& text) {
    std::vector<std::size_t> counts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string tok = text.substr(start, comma == std::string::npos
                                                       ? std::string::npos
                                                       : comma - start);
        if (tok.empty()) throw mgl::InvalidInput("empty entry in sample count list");
        counts.push_back(mgl::parse_count(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return counts;
}

mgl::SynthSpec build_spec(const SynthArgs& args) {
    mgl::SynthSpec spec;
    if (args.scenario_id != 0) {
        spec = mgl::scenario(args.scenario_id, args.sweep);
        const mgl::SweepRange range = mgl::scenario_sweep_range(args.scenario_id);
        if (args.sweep < range.lo || args.sweep > range.hi)
            std::cerr << "warning: sweep value " << args.sweep << " outside scenario "
                      << args.scenario_id << " published range [" << range.lo << ", "
                      << range.hi << "]\n";
    } else {
        if (args.p == 0) throw mgl::InvalidInput("either --scenario or --p is required");
        spec.dim = args.p;
        spec.components = args.k;
        spec.blocks = args.blocks;
        spec.density = args.density;
        spec.value_lo = args.value_lo;
        spec.value_hi = args.value_hi;
        spec.noise_sigma = args.sigma;
        spec.unit_variance = args.unit_variance;
        spec.active_variance = args.active_variance;
        if (args.n_list.empty()) throw mgl::InvalidInput("--n is required with --p");
        spec.n_per_component = parse_count_list(args.n_list);
        spec.block_assignment = mgl::round_robin_pairs(spec.blocks, spec.components);
    }
    spec.seed = args.seed;
    mgl::validate_spec(spec);
    return spec;
}

int cmd_synth(const SynthArgs& args) {
    const mgl::SynthSpec spec = build_spec(args);
    const mgl::GroundTruth truth = mgl::sample(spec);
    mgl::write_ground_truth(args.out_dir, truth);
    std::cout << "synth: p=" << spec.dim << " K=" << spec.components
              << " N=" << spec.total_samples() << " sigma=" << spec.noise_sigma
              << " seed=" << spec.seed << " -> " << args.out_dir << "\n";
    return 0;
}

void write_trace_csv(const fs::path& path, const mgl::FitTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mgl::IoError("cannot open '" + path.string() + "' for writing");
    out << "iter,objective,nll,mer,max_change\n";
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const auto& e = trace.entries[i];
        out << (i + 1) << ',' << mgl::format_double(e.objective) << ','
            << mgl::format_double(e.nll) << ',' << mgl::format_double(e.mer) << ','
            << mgl::format_double(e.max_change) << '\n';
    }
}

mgl::FitConfig fit_config_from(const mgl::RunConfig& cfg) {
    mgl::FitConfig fc;
    fc.components = cfg.components;
    fc.lambda1 = cfg.lambda1;
    fc.lambda2 = cfg.lambda2;
    fc.max_em_iter = cfg.max_em_iter;
    fc.em_tol = cfg.em_tol;
    fc.solver.tol = cfg.solver_tol;
    fc.solver.max_iter = cfg.solver_max_iter;
    fc.seed = cfg.seed;
    return fc;
}

// Plain single-component glasso on the pooled scatter, matching the K = 1
// mixture reduction.
mgl::PrecisionMatrix pooled_glasso(const mgl::Matrix& x, double lambda1,
                                   const mgl::GlassoOptions& opt) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<double> s(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = x.row(i);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) s[a * d + b] += xi[a] * xi[b];
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            s[a * d + b] /= static_cast<double>(n);
            s[b * d + a] = s[a * d + b];
        }
    const mgl::SymMatrix scatter = mgl::SymMatrix::adopt_unchecked(d, std::move(s));
    const mgl::PenaltyMatrix weights =
        mgl::PenaltyMatrix::uniform_offdiag(d, 2.0 * lambda1 / static_cast<double>(n));
    return mgl::solve_weighted_glasso(scatter, weights, nullptr, opt).theta;
}

int cmd_fit(const std::string& config_path) {
    const mgl::RunConfig cfg = mgl::read_run_config(config_path);
    if (cfg.input.empty()) throw mgl::MissingKey("input");
    if (cfg.output_dir.empty()) throw mgl::MissingKey("output");

    const mgl::Matrix x = mgl::read_csv_matrix(cfg.input);
    fs::create_directories(cfg.output_dir);

    mgl::MixtureModel model;
    mgl::ModelMeta meta;
    mgl::FitTrace trace;

    if (cfg.method == "mgl" || cfg.method == "jgl") {
        mgl::FitConfig fc = fit_config_from(cfg);
        if (cfg.method == "jgl") fc.lambda2 = 0.0;
        mgl::FitResult result = mgl::fit(x, fc);
        model = std::move(result.model);
        trace = std::move(result.trace);
        meta.em_iterations = trace.em_iterations;
        meta.converged = trace.converged;
        meta.final_objective = trace.entries.back().objective;
    } else if (cfg.method == "glasso") {
        model.phi = {1.0};
        model.thetas = {pooled_glasso(x, cfg.lambda1,
                                      {cfg.solver_tol, cfg.solver_max_iter})};
        meta.converged = true;
    } else if (cfg.method == "kmeans-glasso") {
        model.thetas = mgl::kmeans_glasso(x, cfg.components, cfg.lambda1, cfg.seed,
                                          {cfg.solver_tol, cfg.solver_max_iter});
        const mgl::KMeansResult clusters = mgl::kmeans(x, cfg.components, cfg.seed);
        model.phi.assign(cfg.components, 0.0);
        for (std::size_t l : clusters.labels) model.phi[l] += 1.0;
        for (double& p : model.phi) p /= static_cast<double>(x.rows());
        meta.converged = true;
    } else {  // glasso-spectral
        model.thetas = mgl::glasso_spectral(x, cfg.components, cfg.lambda1,
                                            {cfg.solver_tol, cfg.solver_max_iter});
        model.phi.assign(cfg.components, 1.0 / static_cast<double>(cfg.components));
        meta.converged = true;
    }

    mgl::write_model(fs::path(cfg.output_dir) / "model.txt", model, meta);
    write_trace_csv(fs::path(cfg.output_dir) / "trace.csv", trace);
    std::cout << "fit: method=" << cfg.method << " K=" << model.components()
              << " D=" << model.dim() << " em_iterations=" << meta.em_iterations
              << " -> " << cfg.output_dir << "\n";
    return 0;
}

std::vector<mgl::PrecisionMatrix> read_truth_thetas(const fs::path& dir) {
    std::vector<mgl::PrecisionMatrix> thetas;
    for (std::size_t k = 0;; ++k) {
        const fs::path p = dir / ("theta_true_" + std::to_string(k) + ".csv");
        if (!fs::exists(p)) break;
        thetas.push_back(mgl::read_sym_csv(p));
    }
    if (thetas.empty())
        throw mgl::IoError("no theta_true_*.csv files in '" + dir.string() + "'");
    return thetas;
}

int cmd_eval(const std::string& model_path, const std::string& truth_dir, double eps,
             const std::string& out_path) {
    const mgl::ModelFile model = mgl::read_model(model_path);
    const std::vector<mgl::PrecisionMatrix> truth = read_truth_thetas(truth_dir);
    if (model.model.components() != truth.size())
        throw mgl::InvalidInput("model has " + std::to_string(model.model.components()) +
                                " components, truth has " + std::to_string(truth.size()));
    const mgl::EvalReport report = mgl::align_and_score(model.model.thetas, truth, eps);
    mgl::write_report(out_path, report, eps);
    std::cout << "eval: mean_f1=" << mgl::format_double(report.mean_f1) << " -> "
              << out_path << "\n";
    return 0;
}

struct BenchArgs {
    int scenario_id = 1;
    std::string sweep = "100:520:60";
    std::string methods = "mgl,jgl,kmeans-glasso,glasso-spectral";
    std::size_t repeats = 10;
    std::uint64_t seed_base = 0;
    double lambda1 = mgl::kBenchLambda1;
    double lambda2 = mgl::kBenchLambda2;
    double em_tol = mgl::kBenchEmTol;
    std::size_t max_em_iter = 200;
    double solver_tol = 1e-6;
    std::size_t solver_max_iter = 500;
    double eps = mgl::kDefaultEdgeEps;
    std::size_t jobs = 0;
    bool timing = false;
    std::string out_dir;
};

std::vector<double> parse_sweep_grid(const std::string& text) {
    const std::size_t c1 = text.find(':');
    if (c1 == std::string::npos) {
        double v = 0.0;
        if (auto p = mgl::try_parse_number(text)) v = *p;
        else throw mgl::InvalidInput("bad sweep grid '" + text + "'");
        return {v};
    }
    const std::size_t c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
        throw mgl::InvalidInput("sweep grid must be 'lo:hi:step' or a single value");
    const auto lo = mgl::try_parse_number(text.substr(0, c1));
    const auto hi = mgl::try_parse_number(text.substr(c1 + 1, c2 - c1 - 1));
    const auto step = mgl::try_parse_number(text.substr(c2 + 1));
    if (!lo || !hi || !step || !(*step > 0.0) || *hi < *lo)
        throw mgl::InvalidInput("bad sweep grid '" + text + "'");
    std::vector<double> values;
    const auto count = static_cast<std::size_t>((*hi - *lo) / *step + 1e-9);
    for (std::size_t i = 0; i <= count; ++i) values.push_back(*lo + *step * static_cast<double>(i));
    return values;
}

std::vector<std::string> parse_method_list(const std::string& text) {
    static const std::set<std::string> known{"mgl", "jgl", "kmeans-glasso", "glasso-spectral"};
    std::vector<std::string> methods;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string tok = text.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!known.count(tok)) throw mgl::InvalidInput("unknown bench method '" + tok + "'");
        methods.push_back(tok);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return methods;
}

struct BenchRow {
    int scenario_id;
    double sweep;
    std::string method;
    std::size_t repeat;
    std::uint64_t seed;
    double mean_f1;
    bool ok;
    long long wall_ms;
};

int cmd_bench(const BenchArgs& args) {
    const std::vector<double> sweep_values = parse_sweep_grid(args.sweep);
    const std::vector<std::string> methods = parse_method_list(args.methods);
    if (args.repeats < 1) throw mgl::InvalidInput("--repeats must be at least 1");
    const mgl::SweepRange range = mgl::scenario_sweep_range(args.scenario_id);
    for (double v : sweep_values)
        if (v < range.lo || v > range.hi)
            std::cerr << "warning: sweep value " << v << " outside scenario "
                      << args.scenario_id << " published range [" << range.lo << ", "
                      << range.hi << "]\n";

    struct Cell {
        double sweep;
        std::size_t repeat;
    };
    std::vector<Cell> cells;
    for (double v : sweep_values)
        for (std::size_t r = 0; r < args.repeats; ++r) cells.push_back({v, r});

    std::vector<std::vector<BenchRow>> cell_rows(cells.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) return;
            const Cell cell = cells[c];
            const std::uint64_t seed = args.seed_base + cell.repeat;

            mgl::SynthSpec spec = mgl::scenario(args.scenario_id, cell.sweep);
            spec.seed = seed;
            const mgl::GroundTruth truth = mgl::sample(spec);

            for (const std::string& method : methods) {
                BenchRow row{args.scenario_id, cell.sweep, method, cell.repeat,
                             seed,             0.0,        false,  0};
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    std::vector<mgl::PrecisionMatrix> thetas;
                    if (method == "mgl" || method == "jgl") {
                        mgl::FitConfig fc;
                        fc.components = spec.components;
                        fc.lambda1 = args.lambda1;
                        fc.lambda2 = method == "mgl" ? args.lambda2 : 0.0;
                        fc.em_tol = args.em_tol;
                        fc.max_em_iter = args.max_em_iter;
                        fc.solver.tol = args.solver_tol;
                        fc.solver.max_iter = args.solver_max_iter;
                        fc.seed = seed;
                        thetas = mgl::fit(truth.samples, fc).model.thetas;
                    } else if (method == "kmeans-glasso") {
                        thetas = mgl::kmeans_glasso(truth.samples, spec.components,
                                                    args.lambda1, seed,
                                                    {args.solver_tol, args.solver_max_iter});
                    } else {
                        thetas = mgl::glasso_spectral(truth.samples, spec.components,
                                                      args.lambda1,
                                                      {args.solver_tol, args.solver_max_iter});
                    }
                    row.mean_f1 =
                        mgl::align_and_score(thetas, truth.thetas_true, args.eps).mean_f1;
                    row.ok = true;
                } catch (const mgl::Error&) {
                    row.ok = false;
                    row.mean_f1 = std::numeric_limits<double>::quiet_NaN();
                }
                if (args.timing) {
                    const auto t1 = std::chrono::steady_clock::now();
                    row.wall_ms =
                        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
                }
                cell_rows[c].push_back(std::move(row));
            }
        }
    };

    std::size_t jobs = args.jobs ? args.jobs : std::thread::hardware_concurrency();
    jobs = std::max<std::size_t>(1, std::min(jobs, cells.size()));
    {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<BenchRow> rows;
    for (auto& cr : cell_rows) rows.insert(rows.end(), cr.begin(), cr.end());
    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
        return std::tie(a.scenario_id, a.sweep, a.method, a.repeat) <
               std::tie(b.scenario_id, b.sweep, b.method, b.repeat);
    });

    fs::create_directories(args.out_dir);
    const fs::path csv_path = fs::path(args.out_dir) / "results.csv";
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw mgl::IoError("cannot open '" + csv_path.string() + "' for writing");
        out << kResultsHeader << '\n';
        for (const BenchRow& r : rows)
            out << r.scenario_id << ',' << mgl::format_double(r.sweep) << ',' << r.method
                << ',' << r.repeat << ',' << r.seed << ',' << mgl::format_double(r.mean_f1)
                << ',' << (r.ok ? "ok" : "failed") << ',' << r.wall_ms << '\n';
    }

    std::size_t ok_count = 0;
    for (const BenchRow& r : rows) ok_count += r.ok;
    if (ok_count > 0) {
        mgl::CurveSpec curve;
        curve.x = sweep_values;
        curve.x_label = (args.scenario_id == 2 || args.scenario_id == 4) ? "sigma" : "N";
        std::vector<std::string> sorted_methods = methods;
        std::sort(sorted_methods.begin(), sorted_methods.end());
        for (const std::string& method : sorted_methods) {
            mgl::CurveSeries series;
            series.name = method;
            for (double v : sweep_values) {
                double sum = 0.0;
                std::size_t n = 0;
                for (const BenchRow& r : rows)
                    if (r.ok && r.method == method && r.sweep == v) {
                        sum += r.mean_f1;
                        ++n;
                    }
                series.y.push_back(n ? sum / static_cast<double>(n) : 0.0);
            }
            curve.series.push_back(std::move(series));
        }
        std::ofstream fig(fs::path(args.out_dir) / "curves.svg", std::ios::binary);
        fig << mgl::render_curves(curve);
    }

    std::cout << "bench: " << rows.size() << " rows (" << ok_count << " ok) -> "
              << args.out_dir << "\n";
    if (ok_count == 0) {
        std::cerr << "error: DegenerateComponent: all bench runs failed\n";
        return 3;
    }
    return 0;
}

struct ResultsData {
    int scenario_id = 0;
    std::vector<BenchRow> rows;
};

ResultsData read_results_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mgl::IoError("cannot open '" + path.string() + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line != kResultsHeader)
        throw mgl::InvalidInput("results CSV must start with '" + std::string(kResultsHeader) + "'");
    ResultsData data;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        if (fields.size() != 8) throw mgl::RaggedRows(lineno);
        BenchRow row;
        row.scenario_id = static_cast<int>(mgl::parse_count(fields[0]));
        if (auto v = mgl::try_parse_number(fields[1])) row.sweep = *v;
        else throw mgl::ParseError(lineno, 2, "bad sweep value");
        row.method = fields[2];
        row.repeat = mgl::parse_count(fields[3]);
        row.seed = mgl::parse_count(fields[4]);
        row.mean_f1 = mgl::try_parse_number(fields[5]).value_or(
            std::numeric_limits<double>::quiet_NaN());
        row.ok = fields[6] == "ok";
        data.rows.push_back(std::move(row));
    }
    if (data.rows.empty()) throw mgl::InvalidInput("results CSV has no data rows");
    data.scenario_id = data.rows.front().scenario_id;
    return data;
}

int cmd_render(const std::string& model_path, const std::string& results_path,
               const std::string& kind, std::size_t cell_px, double clamp,
               const std::string& out_dir) {
    fs::create_directories(out_dir);
    if (kind == "heatmap") {
        if (model_path.empty())
            throw mgl::InvalidInput("--kind heatmap requires --model");
        const mgl::ModelFile model = mgl::read_model(model_path);
        for (std::size_t k = 0; k < model.model.components(); ++k) {
            mgl::HeatmapSpec spec;
            const mgl::SymMatrix& theta = model.model.thetas[k];
            spec.matrix = mgl::Matrix(theta.dim(), theta.dim());
            for (std::size_t a = 0; a < theta.dim(); ++a)
                for (std::size_t b = 0; b < theta.dim(); ++b) spec.matrix(a, b) = theta(a, b);
            spec.cell_px = cell_px;
            if (clamp > 0.0) spec.clamp = clamp;
            std::ofstream out(fs::path(out_dir) / ("heatmap_" + std::to_string(k) + ".svg"),
                              std::ios::binary);
            out << mgl::render_heatmap(spec);
        }
        std::cout << "render: " << model.model.components() << " heatmaps -> " << out_dir
                  << "\n";
        return 0;
    }
    if (kind == "curves") {
        if (results_path.empty())
            throw mgl::InvalidInput("--kind curves requires --results");
        const ResultsData data = read_results_csv(results_path);
        std::set<double> sweep_set;
        std::set<std::string> method_set;
        for (const BenchRow& r : data.rows) {
            sweep_set.insert(r.sweep);
            method_set.insert(r.method);
        }
        mgl::CurveSpec curve;
        curve.x.assign(sweep_set.begin(), sweep_set.end());
        curve.x_label = (data.scenario_id == 2 || data.scenario_id == 4) ? "sigma" : "N";
        for (const std::string& method : method_set) {
            mgl::CurveSeries series;
            series.name = method;
            for (double v : curve.x) {
                double sum = 0.0;
                std::size_t n = 0;
                for (const BenchRow& r : data.rows)
                    if (r.ok && r.method == method && r.sweep == v) {
                        sum += r.mean_f1;
                        ++n;
                    }
                series.y.push_back(n ? sum / static_cast<double>(n) : 0.0);
            }
            curve.series.push_back(std::move(series));
        }
        std::ofstream out(fs::path(out_dir) / "curves.svg", std::ios::binary);
        out << mgl::render_curves(curve);
        std::cout << "render: curves -> " << out_dir << "\n";
        return 0;
    }
    throw mgl::InvalidInput("--kind must be 'heatmap' or 'curves'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixture graphical lasso estimation and benchmarks"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic ground truth");
    synth->add_option("--scenario", synth_args.scenario_id, "Benchmark scenario id (1-4)");
    synth->add_option("--sweep", synth_args.sweep, "Scenario sweep value (N or sigma)");
    synth->add_option("--p", synth_args.p, "Dimension (explicit spec)");
    synth->add_option("--k", synth_args.k, "Component count");
    synth->add_option("--n", synth_args.n_list, "Per-component sample counts, e.g. 250,250");
    synth->add_option("--sigma", synth_args.sigma, "Observation noise sigma");
    synth->add_option("--blocks", synth_args.blocks, "Block count");
    synth->add_option("--density", synth_args.density, "Within-block edge density");
    synth->add_option("--value-lo", synth_args.value_lo, "Entry magnitude lower bound");
    synth->add_option("--value-hi", synth_args.value_hi, "Entry magnitude upper bound");
    synth->add_flag("--unit-variance", synth_args.unit_variance,
                    "Normalize each component to unit model variances");
    synth->add_option("--active-variance", synth_args.active_variance,
                      "Variance of block-active nodes relative to idle ones");
    synth->add_option("--seed", synth_args.seed, "Random seed");
    synth->add_option("-o,--out", synth_args.out_dir, "Output directory")->required();

    std::string fit_config;
    CLI::App* fit = app.add_subcommand("fit", "Fit a model described by a config file");
    fit->add_option("config", fit_config, "Run config file (key = value lines)")->required();

    std::string eval_model, eval_truth, eval_out;
    double eval_eps = mgl::kDefaultEdgeEps;
    CLI::App* eval = app.add_subcommand("eval", "Score a fitted model against ground truth");
    eval->add_option("--model", eval_model, "Model file")->required();
    eval->add_option("--truth", eval_truth, "Directory with theta_true_*.csv")->required();
    eval->add_option("--eps", eval_eps, "Edge detection threshold");
    eval->add_option("-o,--out", eval_out, "Report output path");

    BenchArgs bench_args;
    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark sweep");
    bench->add_option("--scenario", bench_args.scenario_id, "Scenario id (1-4)")->required();
    bench->add_option("--sweep", bench_args.sweep, "Sweep grid lo:hi:step or single value")
        ->required();
    bench->add_option("--methods", bench_args.methods, "Comma list of methods");
    bench->add_option("--repeats", bench_args.repeats, "Repeats per sweep value");
    bench->add_option("--seed", bench_args.seed_base, "Base seed (repeat r uses seed+r)");
    bench->add_option("--lambda1", bench_args.lambda1, "Sparsity strength");
    bench->add_option("--lambda2", bench_args.lambda2, "Mutual exclusivity strength (mgl)");
    bench->add_option("--em-tol", bench_args.em_tol, "EM relative objective tolerance");
    bench->add_option("--max-em-iter", bench_args.max_em_iter, "EM iteration cap");
    bench->add_option("--solver-tol", bench_args.solver_tol, "Inner solver tolerance");
    bench->add_option("--solver-max-iter", bench_args.solver_max_iter, "Inner solver cap");
    bench->add_option("--eps", bench_args.eps, "Edge detection threshold");
    bench->add_option("--jobs", bench_args.jobs, "Worker threads (0 = hardware)");
    bench->add_flag("--timing", bench_args.timing,
                    "Record real wall times in results.csv (breaks byte determinism)");
    bench->add_option("-o,--out", bench_args.out_dir, "Output directory")->required();

    std::string render_model, render_results, render_kind, render_out;
    std::size_t render_cell_px = 24;
    double render_clamp = 0.0;
    CLI::App* render = app.add_subcommand("render", "Render figures from models or results");
    render->add_option("--model", render_model, "Model file (for --kind heatmap)");
    render->add_option("--results", render_results, "Results CSV (for --kind curves)");
    render->add_option("--kind", render_kind, "heatmap | curves")->required();
    render->add_option("--cell-px", render_cell_px, "Heatmap cell size in pixels");
    render->add_option("--clamp", render_clamp, "Color scale clamp (0 = 99th percentile)");
    render->add_option("-o,--out", render_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(synth_args);
        if (fit->parsed()) return cmd_fit(fit_config);
        if (eval->parsed()) {
            if (eval_out.empty())
                eval_out = (fs::path(eval_model).parent_path() / "report.txt").string();
            return cmd_eval(eval_model, eval_truth, eval_eps, eval_out);
        }
        if (bench->parsed()) return cmd_bench(bench_args);
        if (render->parsed())
            return cmd_render(render_model, render_results, render_kind, render_cell_px,
                              render_clamp, render_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const mgl::DegenerateComponent& e) {
        std::cerr << "error: DegenerateComponent: " << e.what() << "\n";
        return 3;
    } catch (const mgl::NotPositiveDefinite& e) {
        std::cerr << "error: NotPositiveDefinite: " << e.what() << "\n";
        return 3;
    } catch (const mgl::ParseError& e) {
        std::cerr << "error: ParseError: " << e.what() << "\n";
        return 1;
    } catch (const mgl::RaggedRows& e) {
        std::cerr << "error: RaggedRows: " << e.what() << "\n";
        return 1;
    } catch (const mgl::FormatVersionMismatch& e) {
        std::cerr << "error: FormatVersionMismatch: " << e.what() << "\n";
        return 1;
    } catch (const mgl::IoError& e) {
        std::cerr << "error: IoError: " << e.what() << "\n";
        return 1;
    } catch (const mgl::UnknownKey& e) {
        std::cerr << "error: UnknownKey: " << e.what() << "\n";
        return 2;
    } catch (const mgl::MissingKey& e) {
        std::cerr << "error: MissingKey: " << e.what() << "\n";
        return 2;
    } catch (const mgl::InvalidInput& e) {
        std::cerr << "error: InvalidInput: " << e.what() << "\n";
        return 2;
    } catch (const mgl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
