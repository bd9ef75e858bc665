#include "cqc/cli.hpp"

#include "cqc/baselines.hpp"
#include "cqc/cqc.hpp"
#include "cqc/error.hpp"
#include "cqc/io.hpp"
#include "cqc/simlab.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace cqc::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    // data source: exactly one of these
    std::string dgp;
    std::string input;

    std::string kernel = "gaussian";
    double bandwidth_nuisance = 0.03;
    double bandwidth_outer = 0.8;
    double xi = 0.05;
    std::string pseudo = "dr";
    bool cross_fit = true;
    bool strict_mass = false;
    std::string grid = "treated";
    std::uint64_t seed = 0;
    std::string out_dir;

    // simulation
    double gamma = 6.0;
    std::uint64_t dgp_seed = 0;
    std::size_t n_total = 1000;
    std::size_t replications = 100;
    bool full = false;
    std::size_t holdout = 200;
    std::string estimators = "dr,ipw,separate,oracle";
    unsigned threads = 1;
    std::string dump_data;
    std::string sweep;

    // surfaces and CQTE
    std::string y_grid;
    std::string x_grid;
    bool monotone_y0 = false;
    std::string alpha;
    std::string queries;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',')
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + text + "' is not a number");
    }
}

GridPolicy parse_grid(const std::string& text)
{
    if (text == "treated") return GridPolicy::treated();
    if (text.rfind("uniform:", 0) == 0) {
        const double n = parse_double(text.substr(8), "--grid");
        if (n < 2 || n != static_cast<double>(static_cast<std::size_t>(n))) {
            throw UsageError("--grid uniform:N needs an integer N >= 2");
        }
        return GridPolicy::uniform(static_cast<std::size_t>(n));
    }
    throw UsageError("--grid must be 'treated' or 'uniform:N', got '" + text + "'");
}

ContrastOptions contrast_options(const RunConfig& c)
{
    ContrastOptions o;
    const auto family = parse_kernel_family(c.kernel);
    o.nuisance_kernel = {family, c.bandwidth_nuisance};
    o.outer_kernel = {family, c.bandwidth_outer};
    o.xi = c.xi;
    o.kind = parse_pseudo_kind(c.pseudo);
    o.policy = c.strict_mass ? MassPolicy::strict : MassPolicy::widen;
    o.validate();
    return o;
}

fs::path output_dir(const RunConfig& c)
{
    fs::path dir = c.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kOutputDirEnv);
        dir = env && *env ? fs::path(env) : fs::path(".");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void require_source(const RunConfig& c, bool wants_dgp)
{
    if (!c.dgp.empty() && !c.input.empty()) throw UsageError("set exactly one of --dgp and --input, not both");
    if (wants_dgp && c.dgp.empty()) throw UsageError("this command needs --dgp");
    if (!wants_dgp && c.input.empty()) throw UsageError("this command needs --input");
}

// "lo:hi:count"
std::vector<double> parse_range(const std::string& text, const char* what)
{
    const auto parts = split_list(text, ':');
    if (parts.size() != 3) throw UsageError(std::string(what) + " must look like lo:hi:count");
    const double lo = parse_double(parts[0], what);
    const double hi = parse_double(parts[1], what);
    const double count = parse_double(parts[2], what);
    if (count < 1 || count != static_cast<double>(static_cast<std::size_t>(count)) || hi < lo) {
        throw UsageError(std::string(what) + " needs lo <= hi and a positive integer count");
    }
    const auto n = static_cast<std::size_t>(count);
    std::vector<double> out(n, lo);
    for (std::size_t i = 1; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

double empirical_quantile(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1))];
}

std::vector<double> default_range(std::vector<double> v)
{
    const double lo = empirical_quantile(v, 0.05);
    const double hi = empirical_quantile(std::move(v), 0.95);
    std::vector<double> out(20);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / 19.0;
    if (lo == hi) out.assign(1, lo);
    return out;
}

// x-grid rows: x1 varies, other covariates fixed at their medians.
Points x_grid_points(const Dataset& data, const std::string& spec)
{
    std::vector<std::vector<double>> columns(data.dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t k = 0; k < data.dim(); ++k) columns[k].push_back(data.x(i)[k]);
    }
    const auto first = spec.empty() ? default_range(columns[0]) : parse_range(spec, "--x-grid");
    std::vector<double> x(data.dim());
    for (std::size_t k = 1; k < data.dim(); ++k) x[k] = empirical_quantile(columns[k], 0.5);
    Points out(data.dim());
    for (double v : first) {
        x[0] = v;
        out.push_back(x);
    }
    return out;
}

CqcFit fit_dr(const RunConfig& c, const Dataset& data)
{
    const auto options = contrast_options(c);
    if (options.kind == PseudoKind::oracle_dr) {
        throw UsageError("--pseudo oracle needs exact nuisances and is only available in simulate/benchmark");
    }
    data.require_both_arms("fit");
    auto contrast = c.cross_fit ? ContrastFit::cross_fit(data, c.seed, options)
                                : ContrastFit::fit(data, make_split(data, c.seed), options);
    return CqcFit(std::move(contrast), build_grid(data, parse_grid(c.grid)));
}

ExperimentConfig experiment_config(const RunConfig& c)
{
    ExperimentConfig e;
    e.dgp = DgpSpec::make(parse_dgp_family(c.dgp), c.gamma, c.dgp_seed);
    e.n_total = c.n_total;
    e.replications = c.full ? 500 : c.replications;
    e.holdout = c.holdout;
    e.seed = c.seed;
    e.threads = c.threads;
    auto options = contrast_options(c);
    for (const auto& name : split_list(c.estimators)) {
        EstimatorConfig est;
        est.kind = parse_estimator_kind(name);
        est.contrast = options;
        est.cross_fit = c.cross_fit;
        est.grid = parse_grid(c.grid);
        e.estimators.push_back(est);
    }
    e.validate();
    return e;
}

void cmd_simulate(const RunConfig& c, std::ostream& out)
{
    require_source(c, true);
    const auto config = experiment_config(c);
    const auto dir = output_dir(c);
    if (!c.dump_data.empty()) {
        io::write_file_atomic(c.dump_data, io::dataset_csv(sample_dgp(config.dgp, config.n_total, c.seed)));
    }
    const auto report = run_experiment(config);
    io::write_file_atomic(dir / "errors.csv", io::error_report_csv(report));
    io::write_file_atomic(dir / "errors.json", io::error_report_json(report));
    out << io::error_report_csv(report);
}

void cmd_benchmark(const RunConfig& c, std::ostream& out)
{
    require_source(c, true);
    const auto eq = c.sweep.find('=');
    if (eq == std::string::npos) throw UsageError("--sweep must look like gamma=0,2,4 or n=200,1000");
    const auto param = c.sweep.substr(0, eq);
    const auto values = split_list(c.sweep.substr(eq + 1));
    if (param != "gamma" && param != "n") throw UsageError("--sweep parameter must be gamma or n");
    if (values.empty()) throw UsageError("--sweep needs at least one value");

    std::string csv = "parameter,value,estimator,mean_abs_error,ci_low,ci_high,replications\n";
    for (const auto& v : values) {
        auto point = c;
        const double value = parse_double(v, "--sweep");
        if (param == "gamma") {
            point.gamma = value;
        } else {
            if (value < 4 || value != static_cast<double>(static_cast<std::size_t>(value))) {
                throw UsageError("--sweep n values must be integers >= 4");
            }
            point.n_total = static_cast<std::size_t>(value);
        }
        const auto report = run_experiment(experiment_config(point));
        for (const auto& e : report.estimators) {
            csv += param + ',' + io::format_double(value) + ',' + e.estimator + ',' + io::format_double(e.mean_abs_error)
                + ',' + io::format_double(e.ci_low()) + ',' + io::format_double(e.ci_high()) + ','
                + std::to_string(e.replications) + '\n';
        }
    }
    io::write_file_atomic(output_dir(c) / "benchmark.csv", csv);
    out << csv;
}

void cmd_fit(const RunConfig& c, std::ostream& out)
{
    require_source(c, false);
    const auto data = io::read_dataset_csv(c.input);
    const auto fit = fit_dr(c, data);

    // Queries default to the untreated rows of the input.
    Dataset queries = c.queries.empty() ? data.subset(data.arm_indices(0)) : io::read_dataset_csv(c.queries);
    if (queries.dim() != data.dim()) throw DataError("query file covariate dimension does not match the input");
    const auto estimates = fit.estimate_many(queries.outcomes(), queries.covariates());

    std::string csv = "y0";
    for (std::size_t k = 1; k <= data.dim(); ++k) csv += ",x" + std::to_string(k);
    csv += ",g_hat,delta,residual\n";
    for (std::size_t q = 0; q < queries.size(); ++q) {
        csv += io::format_double(queries.y(q));
        for (double v : queries.x(q)) csv += ',' + io::format_double(v);
        const auto& e = estimates[q];
        csv += ',' + io::format_double(e.g_hat) + ',' + io::format_double(quantile_diff(e, queries.y(q))) + ','
            + io::format_double(e.residual) + '\n';
    }
    io::write_file_atomic(output_dir(c) / "fit.csv", csv);
    out << "wrote " << queries.size() << " estimates\n";
}

void cmd_surface(const RunConfig& c, std::ostream& out)
{
    require_source(c, false);
    const auto data = io::read_dataset_csv(c.input);
    const auto fit = fit_dr(c, data);
    const auto ys = c.y_grid.empty() ? default_range({data.outcomes().begin(), data.outcomes().end()})
                                     : parse_range(c.y_grid, "--y-grid");
    const auto surface = surface_eval(fit, ys, x_grid_points(data, c.x_grid), c.monotone_y0);
    io::write_file_atomic(output_dir(c) / "surface.csv", io::surface_csv(surface));
    out << "wrote " << ys.size() << "x" << surface.xs.size() << " surface\n";
}

void cmd_cqte(const RunConfig& c, std::ostream& out)
{
    require_source(c, false);
    const auto levels = split_list(c.alpha);
    if (levels.empty()) throw UsageError("cqte needs --alpha with at least one level");
    std::vector<double> alphas;
    for (const auto& s : levels) {
        const double a = parse_double(s, "--alpha");
        if (!(a > 0.0 && a < 1.0)) throw UsageError("--alpha levels must lie in (0, 1), got " + s);
        alphas.push_back(a);
    }
    const auto data = io::read_dataset_csv(c.input);
    const auto fit = fit_dr(c, data);
    const auto options = contrast_options(c);
    const NuisanceModel arm0(data, options.nuisance_options());
    const auto xs = x_grid_points(data, c.x_grid);

    std::string csv = "alpha,x1,tau_hat\n";
    for (double a : alphas) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            csv += io::format_double(a) + ',' + io::format_double(xs.row(j)[0]) + ','
                + io::format_double(cqc_to_cqte(fit, arm0, a, xs.row(j))) + '\n';
        }
    }
    io::write_file_atomic(output_dir(c) / "cqte.csv", csv);
    out << "wrote " << alphas.size() * xs.size() << " CQTE values\n";
}

// Flat "key = value" file turned into "--key=value" arguments.
std::vector<std::string> config_file_args(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<std::string> args;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line.erase(0, line.find_first_not_of(" \t\r"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ": line " + std::to_string(line_no) + ": expected key = value");
        }
        auto key = line.substr(0, eq);
        auto value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        std::replace(key.begin(), key.end(), '_', '-');
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

void add_common(CLI::App& cmd, RunConfig& c)
{
    cmd.add_option("--dgp", c.dgp, "simulation family: illustrative, tendim, linear_cqc, uniform_h");
    cmd.add_option("--input", c.input, "input CSV with columns y, a, x1..xd");
    cmd.add_option("--kernel", c.kernel, "kernel family: gaussian or box");
    cmd.add_option("--bandwidth-nuisance", c.bandwidth_nuisance, "bandwidth of the propensity and CCDF smoothers");
    cmd.add_option("--bandwidth-outer", c.bandwidth_outer, "bandwidth of the pseudo-outcome regression");
    cmd.add_option("--xi", c.xi, "propensity clip level in (0, 0.5]");
    cmd.add_option("--pseudo", c.pseudo, "pseudo-outcome: dr, ipw or oracle");
    cmd.add_flag("--cross-fit,!--no-cross-fit", c.cross_fit, "average over both split orientations (default on)");
    cmd.add_flag("--strict-mass", c.strict_mass, "fail instead of widening the bandwidth on empty kernel balls");
    cmd.add_option("--grid", c.grid, "evaluation grid: treated or uniform:N");
    cmd.add_option("--seed", c.seed, "random seed");
    cmd.add_option("--out", c.out_dir, "output directory (default $CQC_OUTPUT_DIR or .)");
}

void add_simulation(CLI::App& cmd, RunConfig& c)
{
    cmd.add_option("--gamma", c.gamma, "frequency of the sine term");
    cmd.add_option("--dgp-seed", c.dgp_seed, "seed for the tendim coefficient vector");
    cmd.add_option("--n", c.n_total, "training sample size 2n");
    cmd.add_option("--replications", c.replications, "Monte-Carlo replications");
    cmd.add_flag("--full", c.full, "use 500 replications");
    cmd.add_option("--holdout", c.holdout, "holdout size per replication");
    cmd.add_option("--estimators", c.estimators, "comma list of dr, ipw, separate, oracle");
    cmd.add_option("--threads", c.threads, "worker threads");
}

void add_grids(CLI::App& cmd, RunConfig& c)
{
    cmd.add_option("--x-grid", c.x_grid, "x1 grid lo:hi:count (default 5%-95% quantiles, 20 points)");
}

} // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    RunConfig c;
    CLI::App app{"Conditional quantile comparator estimation"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo error report on a simulated DGP");
    auto* benchmark = app.add_subcommand("benchmark", "error reports over a sweep of gamma or n");
    auto* fit = app.add_subcommand("fit", "fit the DR estimator and estimate g at query rows");
    auto* surface = app.add_subcommand("surface", "quantile-difference surface over (y, x1) grids");
    auto* cqte = app.add_subcommand("cqte", "conditional quantile treatment effects from the fitted comparator");
    for (auto* cmd : {simulate, benchmark, fit, surface, cqte}) {
        cmd->add_option("--config", config_path, "flat key = value config file; flags override it");
        add_common(*cmd, c);
    }
    for (auto* cmd : {simulate, benchmark}) add_simulation(*cmd, c);
    simulate->add_option("--dump-data", c.dump_data, "also write one simulated training sample to this CSV");
    benchmark->add_option("--sweep", c.sweep, "gamma=v1,v2,... or n=v1,v2,...")->required();
    fit->add_option("--queries", c.queries, "CSV of query rows in the input layout (a is ignored); default: untreated input rows");
    surface->add_option("--y-grid", c.y_grid, "y grid lo:hi:count (default 5%-95% quantiles, 20 points)");
    surface->add_flag("--monotone-y0", c.monotone_y0, "isotonic pass over y for every x slice");
    add_grids(*surface, c);
    add_grids(*cqte, c);
    cqte->add_option("--alpha", c.alpha, "comma list of levels in (0, 1)");

    try {
        // Config values go right after the subcommand so command-line flags win.
        std::vector<std::string> args = raw_args;
        for (std::size_t i = 0; i < args.size(); ++i) {
            std::string path;
            if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
            if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
            if (path.empty()) continue;
            const auto extra = config_file_args(path);
            args.insert(args.begin() + 1, extra.begin(), extra.end());
            break;
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);

        if (simulate->parsed()) cmd_simulate(c, out);
        else if (benchmark->parsed()) cmd_benchmark(c, out);
        else if (fit->parsed()) cmd_fit(c, out);
        else if (surface->parsed()) cmd_surface(c, out);
        else if (cqte->parsed()) cmd_cqte(c, out);
        return ok;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    }
}

} // namespace cqc::cli
