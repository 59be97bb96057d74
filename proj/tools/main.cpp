// primwalk command-line front end: binds measure/walk configs to the
// library and writes reproducible CSV/JSON outputs plus a run manifest.
//
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime
// failure (overflow, non-convergence, search cap).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "primwalk/config.hpp"
#include "primwalk/oracle.hpp"
#include "primwalk/report.hpp"
#include "primwalk/torus.hpp"
#include "primwalk/walk.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace primwalk;

namespace {

struct Params {
    std::string config_path;
    std::string measure = "nu";
    std::string mode = "full";
    std::uint64_t k = 2;
    int d = 2;
    std::string z0 = "";
    std::string target = "";
    std::uint64_t steps = 0;
    std::uint64_t trials = 1000;
    std::uint64_t n = 1;
    std::uint64_t cap = 100000;
    std::uint64_t seed = 1;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    std::string norm = "l2";
    double bin_width = 1.0;
    std::string out = "out.csv";
    std::string estimator = "pooled";
    double epsilon = 0.1;
    double m_prime = 0.0;
    std::string n_grid = "";
    Coord radius = 10;
    std::string policy = "reflecting";
    double tol = 1e-10;
    std::uint64_t max_iters = 1000000;
    std::uint64_t max_len = 4096;
    std::uint64_t prime_limit = 1000000;
    std::uint64_t occupation_cap = 1000000;
    std::vector<std::string> z_list;
    std::vector<std::string> cone_points;
};

// Every key a config file may carry; anything else is rejected.
const std::vector<std::string> kConfigKeys = {
    "measure", "mode",      "k",        "d",       "z0",       "target",   "steps",
    "trials",  "n",         "cap",      "seed",    "threads",  "norm",     "bin_width",
    "out",     "estimator", "epsilon",  "m_prime", "n_grid",   "radius",   "policy",
    "tol",     "max_iters", "max_len",  "prime_limit", "occupation_cap", "z_list",
    "cone_points"};

void merge_config_file(Params& p, const CLI::App* cmd) {
    if (p.config_path.empty()) return;
    std::ifstream in(p.config_path);
    if (!in) throw std::invalid_argument("cannot open config file " + p.config_path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config parse error: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
    // Flags override file values: only keys whose flag was not passed are
    // taken from the file. Config keys use underscores, flags use dashes.
    auto unset = [&](std::string flag) {
        for (char& c : flag)
            if (c == '_') c = '-';
        const CLI::Option* opt = cmd->get_option_no_throw("--" + flag);
        return opt == nullptr || opt->count() == 0;
    };
    auto load_str = [&](const char* key, std::string& into) {
        if (doc.contains(key) && unset(key)) into = doc.at(key).get<std::string>();
    };
    auto load_u64 = [&](const char* key, std::uint64_t& into) {
        if (doc.contains(key) && unset(key)) into = doc.at(key).get<std::uint64_t>();
    };
    auto load_dbl = [&](const char* key, double& into) {
        if (doc.contains(key) && unset(key)) into = doc.at(key).get<double>();
    };
    if (doc.contains("measure") && unset("measure")) {
        // Inline measures are carried through as compact JSON.
        p.measure = doc.at("measure").is_string() ? doc.at("measure").get<std::string>()
                                                  : doc.at("measure").dump();
    }
    load_str("mode", p.mode);
    load_u64("k", p.k);
    if (doc.contains("d") && unset("d")) p.d = doc.at("d").get<int>();
    load_str("z0", p.z0);
    load_str("target", p.target);
    load_u64("steps", p.steps);
    load_u64("trials", p.trials);
    load_u64("n", p.n);
    load_u64("cap", p.cap);
    load_u64("seed", p.seed);
    if (doc.contains("threads") && unset("threads")) p.threads = doc.at("threads").get<int>();
    load_str("norm", p.norm);
    load_dbl("bin_width", p.bin_width);
    load_str("out", p.out);
    load_str("estimator", p.estimator);
    load_dbl("epsilon", p.epsilon);
    load_dbl("m_prime", p.m_prime);
    load_str("n_grid", p.n_grid);
    if (doc.contains("radius") && unset("radius")) p.radius = doc.at("radius").get<Coord>();
    load_str("policy", p.policy);
    load_dbl("tol", p.tol);
    load_u64("max_iters", p.max_iters);
    load_u64("max_len", p.max_len);
    load_u64("prime_limit", p.prime_limit);
    load_u64("occupation_cap", p.occupation_cap);
    if (doc.contains("z_list") && unset("z"))
        p.z_list = doc.at("z_list").get<std::vector<std::string>>();
    if (doc.contains("cone_points") && unset("cone-point"))
        p.cone_points = doc.at("cone_points").get<std::vector<std::string>>();
}

StepDistribution resolve_measure(const Params& p) {
    if (!p.measure.empty() && p.measure.front() == '{')
        return measure_from_json(json::parse(p.measure), p.d);
    return named_measure(p.measure, p.d);
}

WalkMode resolve_mode(const Params& p) {
    if (p.mode == "full") return WalkMode::full_gcd();
    if (p.mode == "k") return WalkMode::coprime_to(p.k);
    throw std::invalid_argument("mode must be 'full' or 'k'");
}

LatticePoint resolve_z0(const Params& p, int d) {
    if (p.z0.empty()) {
        LatticePoint e(static_cast<std::size_t>(d), 0);
        e[0] = 1; // default start: e_1
        return e;
    }
    return parse_point(p.z0);
}

std::vector<std::uint64_t> parse_grid(const std::string& text) {
    std::vector<std::uint64_t> grid;
    for (Coord c : parse_point(text)) {
        if (c <= 0) throw std::invalid_argument("grid entries must be positive");
        grid.push_back(static_cast<std::uint64_t>(c));
    }
    return grid;
}

fs::path resolve_out(const std::string& out) {
    fs::path path(out);
    if (path.is_relative()) {
        if (const char* dir = std::getenv("PRIMWALK_OUT_DIR")) path = fs::path(dir) / path;
    }
    return path;
}

int effective_threads(const Params& p) { return std::max(1, p.threads); }

// Per-command default for an option the user did not pass; applied before
// the config file is merged, so precedence is flag > file > default.
void default_u64(const CLI::App* cmd, const char* flag, std::uint64_t& var, std::uint64_t value) {
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt == nullptr || opt->count() == 0) var = value;
}

// Shared write-out: primary file, optional extras, then the manifest.
void emit(const Params& p, const std::string& command, const json& config_echo,
          const std::vector<std::pair<fs::path, std::string>>& files) {
    FileHeader header;
    header.command = command;
    header.config_json = config_echo.dump();
    header.seed = p.seed;
    const fs::path primary = resolve_out(p.out);
    header.manifest = primary.filename().string() + ".manifest.json";

    std::vector<fs::path> written;
    for (const auto& [path, content] : files) {
        write_file(path, content);
        written.push_back(path);
    }
    const fs::path manifest_path = primary.parent_path() / header.manifest;
    write_file(manifest_path, run_manifest_json(header, written));
}

FileHeader make_header(const Params& p, const std::string& command, const json& config_echo) {
    FileHeader header;
    header.command = command;
    header.config_json = config_echo.dump();
    header.seed = p.seed;
    header.manifest = resolve_out(p.out).filename().string() + ".manifest.json";
    return header;
}

// The echoed config carries everything that determines the output bytes.
// Worker count deliberately stays out: any --threads value must reproduce
// the same files.
json base_echo(const Params& p, const StepDistribution* mu) {
    json echo;
    if (mu) echo["measure"] = measure_to_json(*mu);
    echo["seed"] = p.seed;
    return echo;
}

int run_figure(Params& p, const CLI::App* cmd) {
    default_u64(cmd, "--steps", p.steps, 1'000'000);
    merge_config_file(p, cmd);
    if (p.measure != "eta1" && p.measure != "eta2" && p.measure != "eta3")
        throw std::invalid_argument("figure panels use eta1, eta2 or eta3");
    const bool full = p.mode == "full";
    if ((p.measure == "eta1" || p.measure == "eta2") && !full)
        throw std::invalid_argument(p.measure + " panels use the full-gcd walk");
    if (p.measure == "eta3") {
        if (full) throw std::invalid_argument("eta3 panels use the k-walk (k = 2 or 5)");
        if (p.k != 2 && p.k != 5) throw std::invalid_argument("eta3 panels use k = 2 or k = 5");
    }
    const StepDistribution mu = resolve_measure(p);
    WalkConfig config;
    config.mode = resolve_mode(p);
    config.z0 = resolve_z0(p, mu.dim());
    config.steps = p.steps;
    config.seed = p.seed;
    config.norm = norm_from_name(p.norm);
    config.validate_or_throw(mu);

    json echo = base_echo(p, &mu);
    echo["mode"] = config.mode.label();
    echo["z0"] = config.z0;
    echo["steps"] = p.steps;
    echo["norm"] = p.norm;
    echo["bin_width"] = p.bin_width;

    const TrajectoryStats stats = run_walk(mu, config, p.bin_width);
    const FileHeader header = make_header(p, "figure", echo);
    emit(p, "figure", echo, {{resolve_out(p.out), norm_histogram_csv(header, stats)}});
    return 0;
}

int run_walk_cmd(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    WalkConfig config;
    config.mode = resolve_mode(p);
    config.z0 = resolve_z0(p, mu.dim());
    config.steps = p.steps;
    config.seed = p.seed;
    config.norm = norm_from_name(p.norm);
    config.validate_or_throw(mu);

    json echo = base_echo(p, &mu);
    echo["mode"] = config.mode.label();
    echo["z0"] = config.z0;
    echo["steps"] = p.steps;
    echo["norm"] = p.norm;
    echo["bin_width"] = p.bin_width;
    echo["occupation_cap"] = p.occupation_cap;

    const TrajectoryStats stats = run_walk(mu, config, p.bin_width, p.occupation_cap);
    const FileHeader header = make_header(p, "walk", echo);

    std::cout << "steps " << stats.steps << " division_events " << stats.division_events
              << " max_norm " << format_double(stats.max_norm) << " occupation_capped "
              << (stats.occupation_capped ? "yes" : "no") << "\n";
    emit(p, "walk", echo, {{resolve_out(p.out), norm_histogram_csv(header, stats)}});
    return 0;
}

int run_endpoint(Params& p, const CLI::App* cmd, bool cesaro) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    WalkConfig config;
    config.mode = resolve_mode(p);
    config.z0 = resolve_z0(p, mu.dim());
    config.trials = p.trials;
    config.seed = p.seed;
    config.norm = norm_from_name(p.norm);
    config.validate_or_throw(mu);

    json echo = base_echo(p, &mu);
    echo["mode"] = config.mode.label();
    echo["z0"] = config.z0;
    echo["n"] = p.n;
    echo["trials"] = p.trials;
    if (cesaro) echo["estimator"] = p.estimator;

    EmpiricalDistribution dist;
    const char* command = cesaro ? "cesaro" : "endpoint";
    if (cesaro) {
        CesaroEstimator estimator;
        if (p.estimator == "pooled")
            estimator = CesaroEstimator::PooledEndpoints;
        else if (p.estimator == "occupation")
            estimator = CesaroEstimator::Occupation;
        else
            throw std::invalid_argument("estimator must be 'pooled' or 'occupation'");
        dist = cesaro_distribution(mu, config, p.n, estimator, effective_threads(p));
    } else {
        dist = endpoint_distribution(mu, config, p.n, effective_threads(p));
    }
    const FileHeader header = make_header(p, command, echo);
    emit(p, command, echo, {{resolve_out(p.out), distribution_csv(header, dist, mu.dim())}});
    return 0;
}

int run_returns(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    WalkConfig config;
    config.mode = resolve_mode(p);
    config.z0 = resolve_z0(p, mu.dim());
    config.trials = p.trials;
    config.seed = p.seed;
    config.norm = norm_from_name(p.norm);
    config.validate_or_throw(mu);

    json echo = base_echo(p, &mu);
    echo["mode"] = config.mode.label();
    echo["z0"] = config.z0;
    echo["trials"] = p.trials;
    echo["cap"] = p.cap;

    const ReturnStats stats = estimate_return_time(mu, config, p.cap, effective_threads(p));
    if (stats.censored_warning)
        std::cerr << "warning: censored fraction "
                  << format_double(stats.censored_fraction()) << " exceeds 1%\n";
    const FileHeader header = make_header(p, "returns", echo);
    emit(p, "returns", echo, {{resolve_out(p.out), return_times_csv(header, stats)}});
    return 0;
}

int run_kac(Params& p, const CLI::App* cmd) {
    default_u64(cmd, "--steps", p.steps, 100'000);
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    WalkConfig config;
    config.mode = resolve_mode(p);
    config.z0 = resolve_z0(p, mu.dim());
    config.steps = p.steps;
    config.trials = p.trials;
    config.seed = p.seed;
    config.norm = norm_from_name(p.norm);
    config.validate_or_throw(mu);

    json echo = base_echo(p, &mu);
    echo["mode"] = config.mode.label();
    echo["z0"] = config.z0;
    echo["steps"] = config.steps;
    echo["trials"] = p.trials;
    echo["cap"] = p.cap;

    const KacCheckResult result = kac_check(mu, config, p.cap, effective_threads(p));
    std::cout << "ratio " << format_double(result.ratio) << " in ["
              << format_double(result.ci_lo) << ", " << format_double(result.ci_hi) << "]\n";
    const FileHeader header = make_header(p, "kac", echo);
    emit(p, "kac", echo, {{resolve_out(p.out), kac_json(header, result)}});
    return 0;
}

int run_drift(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const WalkMode mode = resolve_mode(p);
    if (p.z_list.empty())
        throw std::invalid_argument("drift needs at least one --z starting point");
    std::vector<LatticePoint> z_samples;
    for (const auto& text : p.z_list) z_samples.push_back(parse_point(text));
    const std::vector<std::uint64_t> grid =
        parse_grid(p.n_grid.empty() ? "1,2,4,8,16,32,64" : p.n_grid);

    json echo = base_echo(p, &mu);
    echo["mode"] = mode.label();
    echo["z_list"] = p.z_list;
    echo["n_grid"] = grid;
    echo["trials"] = p.trials;
    echo["norm"] = p.norm;

    const DriftReport report = drift_estimate(mu, mode, z_samples, grid, p.trials, p.seed,
                                              norm_from_name(p.norm), effective_threads(p));
    if (!report.contraction_found) std::cerr << "warning: NoContractionFound in the grid\n";
    const FileHeader header = make_header(p, "drift", echo);
    emit(p, "drift", echo, {{resolve_out(p.out), drift_report_json(header, report)}});
    return 0;
}

int run_recurrence(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    WalkConfig config;
    config.mode = resolve_mode(p);
    config.z0 = resolve_z0(p, mu.dim());
    config.trials = p.trials;
    config.seed = p.seed;
    config.norm = norm_from_name(p.norm);
    config.validate_or_throw(mu);
    if (p.m_prime <= 0)
        throw std::invalid_argument("recurrence needs --m-prime > 0 (from a drift report)");
    const std::vector<std::uint64_t> grid =
        parse_grid(p.n_grid.empty() ? "1,2,4,8,16,32,64,128" : p.n_grid);

    json echo = base_echo(p, &mu);
    echo["mode"] = config.mode.label();
    echo["z0"] = config.z0;
    echo["epsilon"] = p.epsilon;
    echo["m_prime"] = p.m_prime;
    echo["n_grid"] = grid;
    echo["trials"] = p.trials;

    const RecurrenceReport report =
        recurrence_mass(mu, config, p.epsilon, p.m_prime, grid, effective_threads(p));
    const FileHeader header = make_header(p, "recurrence", echo);
    emit(p, "recurrence", echo, {{resolve_out(p.out), recurrence_report_json(header, report)}});
    return 0;
}

int run_torus_eu(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);

    json echo = base_echo(p, &mu);
    echo["k"] = p.k;
    echo["trials"] = p.trials;
    echo["max_len"] = p.max_len;

    TorusCalibration cal = find_covering_word(mu, p.k, p.max_len);
    const std::uint64_t n = p.n <= 1 ? cal.n0 : p.n;
    echo["n"] = n;
    const EUEstimate est = estimate_EU(mu, p.k, n, p.trials, p.seed, effective_threads(p));
    cal.alpha_hat = est.mean;
    cal.alpha_ci_lo = est.ci_lo;
    cal.alpha_ci_hi = est.ci_hi;
    cal.alpha_trials = est.trials;

    std::cout << "n0 " << cal.n0 << " cylinder_bound " << format_double(cal.cylinder_bound)
              << " alpha_hat " << format_double(est.mean) << "\n";
    const FileHeader header = make_header(p, "torus-eu", echo);
    emit(p, "torus-eu", echo, {{resolve_out(p.out), torus_calibration_json(header, cal)}});
    return 0;
}

int run_chernoff(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const LatticePoint z = resolve_z0(p, mu.dim());
    const std::vector<std::uint64_t> grid_u =
        parse_grid(p.n_grid.empty() ? "1,2,4,8,16,32,64,128,256" : p.n_grid);
    std::vector<std::size_t> grid(grid_u.begin(), grid_u.end());

    json echo = base_echo(p, &mu);
    echo["k"] = p.k;
    echo["z0"] = z;
    echo["epsilon"] = p.epsilon;
    echo["n_grid"] = grid_u;
    echo["trials"] = p.trials;
    echo["max_len"] = p.max_len;

    const TorusCalibration cal = find_covering_word(mu, p.k, p.max_len);
    const auto rows = chernoff_experiment(mu, p.k, z, grid, p.epsilon, p.trials, p.seed, cal,
                                          effective_threads(p));
    const FileHeader header = make_header(p, "chernoff", echo);
    emit(p, "chernoff", echo, {{resolve_out(p.out), chernoff_csv(header, rows)}});
    return 0;
}

BoundaryPolicy resolve_policy(const Params& p) {
    if (p.policy == "reflecting") return BoundaryPolicy::Reflecting;
    if (p.policy == "substochastic") return BoundaryPolicy::Substochastic;
    throw std::invalid_argument("policy must be 'reflecting' or 'substochastic'");
}

int run_oracle_stationary(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const WalkMode mode = resolve_mode(p);
    const LatticePoint z0 = resolve_z0(p, mu.dim());

    json echo = base_echo(p, &mu);
    echo["mode"] = mode.label();
    echo["z0"] = z0;
    echo["radius"] = p.radius;
    echo["policy"] = p.policy;
    echo["tol"] = p.tol;
    echo["max_iters"] = p.max_iters;

    const TruncatedChain chain = build_truncated_chain(mu, mode, p.radius, resolve_policy(p));
    const StationaryResult stationary =
        stationary_cesaro(chain, z0, p.max_iters, static_cast<long double>(p.tol));
    std::cout << "states " << chain.states.size() << " residual "
              << format_double(static_cast<double>(stationary.residual)) << " iterations "
              << stationary.iterations << "\n";
    const FileHeader header = make_header(p, "oracle-stationary", echo);
    emit(p, "oracle-stationary", echo,
         {{resolve_out(p.out), stationary_csv(header, chain, stationary)}});
    return 0;
}

int run_oracle_returns(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const WalkMode mode = resolve_mode(p);
    const LatticePoint z0 = resolve_z0(p, mu.dim());

    json echo = base_echo(p, &mu);
    echo["mode"] = mode.label();
    echo["z0"] = z0;
    echo["radius"] = p.radius;
    echo["tol"] = p.tol;

    const TruncatedChain chain =
        build_truncated_chain(mu, mode, p.radius, BoundaryPolicy::Reflecting);
    const ReturnTimeResult ret =
        expected_return_time(chain, z0, p.max_iters, static_cast<long double>(p.tol));
    const StationaryResult stationary =
        stationary_cesaro(chain, z0, p.max_iters, static_cast<long double>(p.tol));
    const auto z0_index = chain.index_of(z0);
    const double pi0 = static_cast<double>(stationary.pi[*z0_index]);
    const double kac_product = pi0 * static_cast<double>(ret.value);

    json doc{{"expected_return", static_cast<double>(ret.value)},
             {"solver_residual", static_cast<double>(ret.residual)},
             {"sweeps", ret.sweeps},
             {"pi_z0", pi0},
             {"kac_product", kac_product}};
    std::cout << "expected_return " << format_double(static_cast<double>(ret.value))
              << " kac_product " << format_double(kac_product) << "\n";
    const FileHeader header = make_header(p, "oracle-returns", echo);
    json out = json{{"command", "oracle-returns"},
                    {"config", json::parse(header.config_json)},
                    {"seed", p.seed},
                    {"version", kVersion},
                    {"report", doc}};
    emit(p, "oracle-returns", echo, {{resolve_out(p.out), out.dump(2) + "\n"}});
    return 0;
}

int run_oracle_scc(Params& p, const CLI::App* cmd, const std::string& export_chain) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const WalkMode mode = resolve_mode(p);

    json echo = base_echo(p, &mu);
    echo["mode"] = mode.label();
    echo["radius"] = p.radius;
    echo["policy"] = p.policy;
    if (!export_chain.empty()) echo["export_chain"] = export_chain;

    const TruncatedChain chain = build_truncated_chain(mu, mode, p.radius, resolve_policy(p));
    const SccResult scc = irreducibility_scc(chain);
    std::cout << "states " << chain.states.size() << " components " << scc.count
              << " recurrent_classes " << scc.closed_count << " "
              << (scc.irreducible ? "irreducible-within-truncation" : "reducible") << "\n";
    json doc{{"states", chain.states.size()},
             {"components", scc.count},
             {"recurrent_classes", scc.closed_count},
             {"single_scc", scc.single_scc},
             {"irreducible_within_truncation", scc.irreducible}};
    const FileHeader header = make_header(p, "oracle-scc", echo);
    json out = json{{"command", "oracle-scc"},
                    {"config", json::parse(header.config_json)},
                    {"seed", p.seed},
                    {"version", kVersion},
                    {"report", doc}};
    std::vector<std::pair<fs::path, std::string>> files{
        {resolve_out(p.out), out.dump(2) + "\n"}};
    if (!export_chain.empty())
        files.emplace_back(resolve_out(export_chain), chain_csv(header, chain));
    emit(p, "oracle-scc", echo, files);
    return 0;
}

int run_cone_check(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const LatticePoint z = resolve_z0(p, mu.dim());
    if (p.cone_points.empty())
        throw std::invalid_argument("cone-check needs at least one --cone-point");
    std::vector<LatticePoint> base;
    for (const auto& text : p.cone_points) base.push_back(parse_point(text));

    json echo = base_echo(p, &mu);
    echo["z0"] = z;
    echo["n"] = p.n;
    echo["k"] = p.k;
    echo["cone_points"] = p.cone_points;

    const ConeCheckResult result = cone_monotonicity_check(z, mu, p.n, base, p.k);
    json doc{{"mass_full", result.mass_full.str()},
             {"mass_full_value", result.mass_full.to_double()},
             {"mass_k", result.mass_k.str()},
             {"mass_k_value", result.mass_k.to_double()},
             {"violated", result.violated}};
    std::cout << "mass_full " << result.mass_full.str() << " mass_k " << result.mass_k.str()
              << (result.violated ? " VIOLATED" : " ok") << "\n";
    const FileHeader header = make_header(p, "cone-check", echo);
    json out = json{{"command", "cone-check"},
                    {"config", json::parse(header.config_json)},
                    {"seed", p.seed},
                    {"version", kVersion},
                    {"report", doc}};
    emit(p, "cone-check", echo, {{resolve_out(p.out), out.dump(2) + "\n"}});
    return 0;
}

int run_check_measure(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    const StepDistribution mu = resolve_measure(p);
    const auto errors = mu.validate();
    json echo = base_echo(p, &mu);

    json doc;
    doc["valid"] = errors.empty();
    doc["errors"] = errors;
    if (errors.empty()) {
        const GenerationResult gen = generation_check(mu);
        doc["first_moment_l2"] = first_moment(mu, NormKind::L2);
        doc["first_moment_l1"] = first_moment_exact(mu, NormKind::L1).str();
        doc["generation"] = verdict_name(gen.verdict);
        doc["generation_detail"] = gen.detail;
        doc["k"] = p.k;
        doc["torus_coverage_k"] = torus_coverage_check(mu, p.k);
        std::cout << "ok first_moment_l2 " << format_double(first_moment(mu, NormKind::L2))
                  << " generation " << verdict_name(gen.verdict) << "\n";
    } else {
        for (const auto& e : errors) std::cerr << "error: " << e << "\n";
    }
    const FileHeader header = make_header(p, "check-measure", echo);
    json out = json{{"command", "check-measure"},
                    {"config", json::parse(header.config_json)},
                    {"seed", p.seed},
                    {"version", kVersion},
                    {"report", doc}};
    emit(p, "check-measure", echo, {{resolve_out(p.out), out.dump(2) + "\n"}});
    return errors.empty() ? 0 : 1;
}

int run_connect(Params& p, const CLI::App* cmd) {
    merge_config_file(p, cmd);
    if (p.target.empty()) throw std::invalid_argument("connect needs --target");
    const LatticePoint x = parse_point(p.target);
    json echo;
    echo["seed"] = p.seed;
    echo["target"] = x;
    echo["prime_limit"] = p.prime_limit;

    const StepSequence steps = connect_to_zero(x, p.prime_limit);
    std::cout << "path length " << steps.size() << "\n";
    const FileHeader header = make_header(p, "connect", echo);
    emit(p, "connect", echo, {{resolve_out(p.out), path_csv(header, steps)}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"random walks on primitive lattice points: simulation and exact analysis"};
    app.require_subcommand(1);

    Params p;
    auto add_common = [&](CLI::App* cmd, bool with_measure = true) {
        cmd->add_option("--config", p.config_path, "JSON config file (flags override)");
        cmd->add_option("--seed", p.seed, "master seed");
        cmd->add_option("--threads", p.threads, "worker cap (1 reproduces any N exactly)");
        cmd->add_option("--out", p.out, "output path (PRIMWALK_OUT_DIR prefixes relative paths)");
        if (with_measure) {
            cmd->add_option("--measure", p.measure, "eta1|eta2|eta3|nu or inline JSON");
            cmd->add_option("--d", p.d, "dimension for nu");
        }
        return cmd;
    };
    auto add_mode = [&](CLI::App* cmd) {
        cmd->add_option("--mode", p.mode, "full|k");
        cmd->add_option("--k", p.k, "modulus for the k-walk");
    };

    CLI::App* figure = add_common(app.add_subcommand("figure", "norm histogram of a long walk"));
    add_mode(figure);
    figure->add_option("--steps", p.steps, "walk length");
    figure->add_option("--z0", p.z0, "start point (default e_1)");
    figure->add_option("--norm", p.norm, "l1|l2|linf");
    figure->add_option("--bin-width", p.bin_width, "histogram bin width");

    CLI::App* walk = add_common(app.add_subcommand("walk", "single-trajectory statistics"));
    add_mode(walk);
    walk->add_option("--steps", p.steps, "walk length");
    walk->add_option("--z0", p.z0, "start point");
    walk->add_option("--norm", p.norm, "l1|l2|linf");
    walk->add_option("--bin-width", p.bin_width, "histogram bin width");
    walk->add_option("--occupation-cap", p.occupation_cap,
                     "distinct points tracked before norms-only mode");

    CLI::App* endpoint = add_common(app.add_subcommand("endpoint", "empirical n-step endpoints"));
    add_mode(endpoint);
    endpoint->add_option("--n", p.n, "number of steps");
    endpoint->add_option("--trials", p.trials, "independent walks");
    endpoint->add_option("--z0", p.z0, "start point");

    CLI::App* cesaro = add_common(app.add_subcommand("cesaro", "empirical Cesaro average"));
    add_mode(cesaro);
    cesaro->add_option("--n", p.n, "horizon");
    cesaro->add_option("--trials", p.trials, "independent walks (pooled estimator)");
    cesaro->add_option("--z0", p.z0, "start point");
    cesaro->add_option("--estimator", p.estimator, "pooled|occupation");

    CLI::App* returns = add_common(app.add_subcommand("returns", "return-time excursions"));
    add_mode(returns);
    returns->add_option("--trials", p.trials, "excursions");
    returns->add_option("--cap", p.cap, "max steps per excursion");
    returns->add_option("--z0", p.z0, "start point");

    CLI::App* kac = add_common(app.add_subcommand("kac", "occupation x return-time identity"));
    add_mode(kac);
    kac->add_option("--steps", p.steps, "occupation path length");
    kac->add_option("--trials", p.trials, "excursions");
    kac->add_option("--cap", p.cap, "max steps per excursion");
    kac->add_option("--z0", p.z0, "start point");

    CLI::App* drift = add_common(app.add_subcommand("drift", "norm contraction estimate"));
    add_mode(drift);
    drift->add_option("--z", p.z_list, "starting point (repeatable)");
    drift->add_option("--n-grid", p.n_grid, "comma-separated n grid");
    drift->add_option("--trials", p.trials, "trials per (z, n) cell");
    drift->add_option("--norm", p.norm, "l1|l2|linf");

    CLI::App* recurrence = add_common(app.add_subcommand("recurrence", "mass of the drift ball"));
    add_mode(recurrence);
    recurrence->add_option("--z0", p.z0, "start point");
    recurrence->add_option("--epsilon", p.epsilon, "epsilon in (0,1)");
    recurrence->add_option("--m-prime", p.m_prime, "M' from a drift report");
    recurrence->add_option("--n-grid", p.n_grid, "comma-separated n grid");
    recurrence->add_option("--trials", p.trials, "trials per n");

    CLI::App* torus_eu = add_common(app.add_subcommand("torus-eu", "covering word and E[U]"));
    torus_eu->add_option("--k", p.k, "torus modulus");
    torus_eu->add_option("--n", p.n, "prefix length (default: covering word length)");
    torus_eu->add_option("--trials", p.trials, "Monte Carlo prefixes");
    torus_eu->add_option("--max-len", p.max_len, "covering word search cap");

    CLI::App* chernoff = add_common(app.add_subcommand("chernoff", "tail-domination table"));
    chernoff->add_option("--k", p.k, "torus modulus");
    chernoff->add_option("--z0", p.z0, "plain-walk start");
    chernoff->add_option("--epsilon", p.epsilon, "epsilon in (0,1)");
    chernoff->add_option("--n-grid", p.n_grid, "comma-separated n grid");
    chernoff->add_option("--trials", p.trials, "walks per n");
    chernoff->add_option("--max-len", p.max_len, "covering word search cap");

    CLI::App* oracle_stationary =
        add_common(app.add_subcommand("oracle-stationary", "stationary measure of the truncation"));
    add_mode(oracle_stationary);
    oracle_stationary->add_option("--z0", p.z0, "start point");
    oracle_stationary->add_option("--radius", p.radius, "truncation box radius");
    oracle_stationary->add_option("--policy", p.policy, "reflecting|substochastic");
    oracle_stationary->add_option("--tol", p.tol, "residual tolerance");
    oracle_stationary->add_option("--max-iters", p.max_iters, "iteration cap");

    CLI::App* oracle_returns =
        add_common(app.add_subcommand("oracle-returns", "exact expected return time"));
    add_mode(oracle_returns);
    oracle_returns->add_option("--z0", p.z0, "return target");
    oracle_returns->add_option("--radius", p.radius, "truncation box radius");
    oracle_returns->add_option("--tol", p.tol, "solver tolerance");
    oracle_returns->add_option("--max-iters", p.max_iters, "iteration cap");

    CLI::App* oracle_scc = add_common(app.add_subcommand("oracle-scc", "strongly connected components"));
    add_mode(oracle_scc);
    oracle_scc->add_option("--radius", p.radius, "truncation box radius");
    oracle_scc->add_option("--policy", p.policy, "reflecting|substochastic");
    std::string export_chain;
    oracle_scc->add_option("--export-chain", export_chain,
                           "also write the chain adjacency CSV to this path");

    CLI::App* cone = add_common(app.add_subcommand("cone-check", "cone masses of the two walks"));
    cone->add_option("--z0", p.z0, "common start (primitive, coprime to k)");
    cone->add_option("--n", p.n, "steps");
    cone->add_option("--k", p.k, "modulus of the k-walk");
    cone->add_option("--cone-point", p.cone_points, "primitive cone base point (repeatable)");

    CLI::App* check = add_common(app.add_subcommand("check-measure", "validate and profile a measure"));
    check->add_option("--k", p.k, "also check torus coverage for this k");

    CLI::App* connect = add_common(app.add_subcommand("connect", "unit-step path from the origin"), false);
    connect->add_option("--target", p.target, "primitive target point, e.g. \"2,3\"");
    connect->add_option("--prime-limit", p.prime_limit, "prime search cap (d = 2)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (figure->parsed()) return run_figure(p, figure);
        if (walk->parsed()) return run_walk_cmd(p, walk);
        if (endpoint->parsed()) return run_endpoint(p, endpoint, false);
        if (cesaro->parsed()) return run_endpoint(p, cesaro, true);
        if (returns->parsed()) return run_returns(p, returns);
        if (kac->parsed()) return run_kac(p, kac);
        if (drift->parsed()) return run_drift(p, drift);
        if (recurrence->parsed()) return run_recurrence(p, recurrence);
        if (torus_eu->parsed()) return run_torus_eu(p, torus_eu);
        if (chernoff->parsed()) return run_chernoff(p, chernoff);
        if (oracle_stationary->parsed()) return run_oracle_stationary(p, oracle_stationary);
        if (oracle_returns->parsed()) return run_oracle_returns(p, oracle_returns);
        if (oracle_scc->parsed()) return run_oracle_scc(p, oracle_scc, export_chain);
        if (cone->parsed()) return run_cone_check(p, cone);
        if (check->parsed()) return run_check_measure(p, check);
        if (connect->parsed()) return run_connect(p, connect);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
