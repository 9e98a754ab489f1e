// Command-line surface: simulate datasets, fit models, evaluate
// distributions, and run the two replication studies.  All file writing goes
// through the atomic writers in io.cpp; stdout output is deterministic for a
// fixed invocation, so reruns with the same seed are byte-identical.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "zani/distributions.hpp"
#include "zani/diagnostics.hpp"
#include "zani/inference.hpp"
#include "zani/io.hpp"
#include "zani/rng.hpp"
#include "zani/study.hpp"
#include "zani/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("ZANI_OUT_DIR");
    return (env && *env) ? std::string(env) : std::string(".");
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            if (used != field.size()) throw std::invalid_argument(field);
            out.push_back(v);
        } catch (const std::exception&) {
            throw zani::CliError(2, flag + ": '" + field + "' is not a number");
        }
    }
    if (out.empty()) throw zani::CliError(2, flag + ": expected a comma-separated list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(field, &used);
            if (used != field.size() || v < 0) throw std::invalid_argument(field);
            out.push_back(static_cast<int>(v));
        } catch (const std::exception&) {
            throw zani::CliError(2, flag + ": '" + field + "' is not a nonnegative integer");
        }
    }
    if (out.empty()) throw zani::CliError(2, flag + ": expected a comma-separated list");
    return out;
}

zani::PriorPair parse_prior_pair(const std::string& text, const std::string& flag) {
    const auto v = parse_double_list(text, flag);
    if (v.size() != 2) throw zani::CliError(2, flag + ": expected two numbers 'a,b'");
    return {v[0], v[1]};
}

// Shape/zeta parameters for one model family, loaded from a JSON params file
// ({"theta": [...]} or {"alpha": [...]}, optional {"zeta": [...]}).
struct LoadedParams {
    std::vector<double> shape;
    std::vector<double> zeta;
};

LoadedParams load_params_file(const std::string& path, zani::Model model) {
    std::ifstream in(path);
    if (!in) throw zani::CliError(2, "cannot open params file '" + path + "'");
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw zani::CliError(2, "params file '" + path + "': " + e.what());
    }
    if (!doc.is_object())
        throw zani::CliError(2, "params file '" + path + "': expected a JSON object");
    const std::string shape_key = zani::model_is_dirichlet(model) ? "alpha" : "theta";
    const std::string other_key = zani::model_is_dirichlet(model) ? "theta" : "alpha";
    LoadedParams out;
    bool have_shape = false;
    for (const auto& [key, value] : doc.items()) {
        const bool is_shape = key == shape_key;
        if (!is_shape && key != "zeta") {
            if (key == other_key)
                throw zani::CliError(2, "params file '" + path + "': key '" + key +
                                            "' does not belong to model '" +
                                            zani::model_name(model) + "' (expected '" +
                                            shape_key + "')");
            throw zani::CliError(2, "params file '" + path + "': unknown key '" + key + "'");
        }
        if (!value.is_array() || value.empty())
            throw zani::CliError(2, "params file '" + path + "': '" + key +
                                        "' must be a nonempty array of numbers");
        std::vector<double> parsed;
        for (const auto& entry : value) {
            if (!entry.is_number())
                throw zani::CliError(2, "params file '" + path + "': '" + key +
                                            "' must contain only numbers");
            parsed.push_back(entry.get<double>());
        }
        if (is_shape) {
            out.shape = std::move(parsed);
            have_shape = true;
        } else {
            out.zeta = std::move(parsed);
        }
    }
    if (!have_shape)
        throw zani::CliError(2, "params file '" + path + "': missing key '" + shape_key + "'");
    if (zani::model_fixes_zeta(model)) {
        for (double z : out.zeta)
            if (z != 0.0)
                throw zani::CliError(2, "params file '" + path + "': model '" +
                                            zani::model_name(model) +
                                            "' fixes zeta at zero; drop the 'zeta' key "
                                            "or set it to zeros");
    }
    if (out.zeta.empty()) out.zeta.assign(out.shape.size(), 0.0);
    if (out.zeta.size() != out.shape.size())
        throw zani::CliError(2, "params file '" + path + "': 'zeta' has " +
                                    std::to_string(out.zeta.size()) + " entries but '" +
                                    shape_key + "' has " + std::to_string(out.shape.size()));
    return out;
}

zani::ZanimParams to_zanim(const LoadedParams& p, const std::string& path) {
    zani::ZanimParams out;
    out.theta = p.shape;
    out.zeta = p.zeta;
    try {
        out.validate();
    } catch (const std::exception& e) {
        throw zani::CliError(2, "params file '" + path + "': " + e.what());
    }
    return out;
}

zani::ZanidmParams to_zanidm(const LoadedParams& p, const std::string& path) {
    zani::ZanidmParams out;
    out.alpha = p.shape;
    out.zeta = p.zeta;
    try {
        out.validate();
    } catch (const std::exception& e) {
        throw zani::CliError(2, "params file '" + path + "': " + e.what());
    }
    return out;
}

std::string vector_csv(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += zani::format_double(v[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string model_str;
    std::string params_path;
    int n = 0;
    int trials = 0;
    std::uint64_t seed = 1;
    std::string out_dir;
};

int run_simulate(const SimulateArgs& args) {
    const zani::Model model = zani::parse_model(args.model_str);
    if (args.n < 1) throw zani::CliError(2, "--n must be at least 1");
    if (args.trials < 0) throw zani::CliError(2, "--trials must be nonnegative");
    const LoadedParams loaded = load_params_file(args.params_path, model);
    const std::string out_dir = args.out_dir.empty() ? default_out_dir() : args.out_dir;

    zani::CountDataset data;
    zani::Rng rng(args.seed, 0);
    std::string shape_key;
    if (zani::model_is_dirichlet(model)) {
        const auto params = to_zanidm(loaded, args.params_path);
        shape_key = "alpha";
        for (int i = 0; i < args.n; ++i)
            data.rows.push_back(zani::zanidm_sample(args.trials, params, rng));
    } else {
        const auto params = to_zanim(loaded, args.params_path);
        shape_key = "theta";
        for (int i = 0; i < args.n; ++i)
            data.rows.push_back(zani::zanim_sample(args.trials, params, rng));
    }

    std::ostringstream desc;
    desc << "simulate\nmodel=" << zani::model_name(model) << "\nn=" << args.n
         << "\ntrials=" << args.trials << "\nseed=" << args.seed << "\n"
         << shape_key << "=" << vector_csv(loaded.shape) << "\nzeta="
         << vector_csv(loaded.zeta) << '\n';
    zani::FileMetadata meta;
    meta.seed = args.seed;
    meta.config = zani::hash_hex(zani::fnv1a64(desc.str()));
    meta.extra = {{"model", zani::model_name(model)},
                  {"trials", std::to_string(args.trials)},
                  {"rows", std::to_string(args.n)}};

    const std::string csv_path = join_path(out_dir, "counts.csv");
    zani::write_count_csv(csv_path, data, meta);

    ordered_json sidecar;
    sidecar["tool"] = std::string(zani::kToolName) + " " + zani::kToolVersion;
    sidecar["seed"] = args.seed;
    sidecar["rng"] = zani::kRngId;
    sidecar["config"] = meta.config;
    sidecar["model"] = zani::model_name(model);
    sidecar["rows"] = args.n;
    sidecar["trials"] = args.trials;
    sidecar["params"][shape_key] = loaded.shape;
    sidecar["params"]["zeta"] = loaded.zeta;
    const std::string meta_path = join_path(out_dir, "counts.meta.json");
    zani::write_text_atomic(meta_path, sidecar.dump(2) + "\n");

    std::cout << "wrote " << csv_path << "\nwrote " << meta_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string config_path;
    std::optional<std::string> model_str;
    std::optional<std::string> data_path;
    std::optional<std::string> out_dir;
    std::optional<long long> iterations, burn_in, thin;
    std::optional<std::uint64_t> seed, stream;
    std::optional<std::string> alpha_sampler;
    std::optional<double> mh_step, slice_width;
    std::optional<int> slice_max_steps;
    std::optional<bool> mh_adapt, compute_loglik;
    std::optional<std::string> zeta_beta, lambda_gamma, alpha_gamma, alpha_log_normal;
};

int run_fit(const FitArgs& args) {
    zani::RunConfig cfg;
    if (!args.config_path.empty()) cfg = zani::load_run_config(args.config_path);

    if (args.model_str) cfg.model = zani::parse_model(*args.model_str);
    if (args.data_path) cfg.data_path = *args.data_path;
    if (args.out_dir) cfg.output_dir = *args.out_dir;
    else if (cfg.output_dir == ".") cfg.output_dir = default_out_dir();
    if (args.iterations) cfg.mcmc.iterations = *args.iterations;
    if (args.burn_in) cfg.mcmc.burn_in = *args.burn_in;
    if (args.thin) cfg.mcmc.thin = *args.thin;
    if (args.seed) cfg.mcmc.seed = *args.seed;
    if (args.stream) cfg.mcmc.stream = *args.stream;
    if (args.alpha_sampler) cfg.mcmc.alpha_sampler = zani::parse_alpha_sampler(*args.alpha_sampler);
    if (args.mh_step) cfg.mcmc.mh_step = *args.mh_step;
    if (args.mh_adapt) cfg.mcmc.mh_adapt = *args.mh_adapt;
    if (args.slice_width) cfg.mcmc.slice_width = *args.slice_width;
    if (args.slice_max_steps) cfg.mcmc.slice_max_steps = *args.slice_max_steps;
    if (args.compute_loglik) cfg.mcmc.compute_loglik = *args.compute_loglik;
    if (args.zeta_beta) cfg.zeta_beta = parse_prior_pair(*args.zeta_beta, "--zeta-beta");
    if (args.lambda_gamma)
        cfg.lambda_gamma = parse_prior_pair(*args.lambda_gamma, "--lambda-gamma");
    if (args.alpha_gamma) {
        if (*args.alpha_gamma == "matched")
            cfg.alpha_gamma.reset();
        else
            cfg.alpha_gamma = parse_prior_pair(*args.alpha_gamma, "--alpha-gamma");
    }
    if (args.alpha_log_normal)
        cfg.alpha_log_normal = parse_prior_pair(*args.alpha_log_normal, "--alpha-log-normal");

    if (cfg.data_path.empty())
        throw zani::CliError(2, "no dataset given (use --data or a config file)");
    zani::finalize_run_config(cfg);

    const zani::CountDataset data = zani::read_count_csv(cfg.data_path);
    const zani::PriorSpec priors = zani::build_priors(cfg, data.d());

    zani::ChainDraws fit;
    try {
        fit = zani::model_is_dirichlet(cfg.model)
                  ? zani::fit_zanidm(data, priors, cfg.mcmc)
                  : zani::fit_zanim(data, priors, cfg.mcmc);
    } catch (const std::invalid_argument& e) {
        throw zani::CliError(2, e.what());
    } catch (const std::exception& e) {
        throw zani::CliError(3, std::string("sampler failure: ") + e.what());
    }

    zani::FileMetadata meta;
    meta.seed = cfg.mcmc.seed;
    meta.config = zani::config_hash(cfg);
    meta.extra = {{"model", zani::model_name(cfg.model)},
                  {"rows", std::to_string(data.n())},
                  {"columns", std::to_string(data.d())}};

    const std::string draws_path = join_path(cfg.output_dir, "draws.csv");
    zani::write_draws_csv(draws_path, fit, meta);
    std::cout << "wrote " << draws_path << "\n";

    const std::string summary_path = join_path(cfg.output_dir, "summary.json");
    zani::write_summary_json(summary_path, zani::posterior_summary(fit), meta);
    std::cout << "wrote " << summary_path << "\n";

    if (cfg.mcmc.compute_loglik) {
        const std::string loglik_path = join_path(cfg.output_dir, "loglik.csv");
        zani::write_loglik_csv(loglik_path, fit.loglik, meta);
        std::cout << "wrote " << loglik_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string model_str;
    std::string params_path;
    int trials = 0;
    std::string y_str;        // pmf
    int category = 0;         // marginal (1-based)
    std::string t_str;        // mgf
};

int run_eval_pmf(const EvalArgs& args) {
    const zani::Model model = zani::parse_model(args.model_str);
    if (args.trials < 0) throw zani::CliError(2, "--trials must be nonnegative");
    const LoadedParams loaded = load_params_file(args.params_path, model);
    const std::vector<int> y = parse_int_list(args.y_str, "--y");
    if (y.size() != loaded.shape.size())
        throw zani::CliError(2, "--y has " + std::to_string(y.size()) +
                                    " entries but the params file has " +
                                    std::to_string(loaded.shape.size()) + " categories");
    double log_pmf = 0.0;
    try {
        log_pmf = zani::model_is_dirichlet(model)
                      ? zani::zanidm_log_pmf(y, to_zanidm(loaded, args.params_path), args.trials)
                      : zani::zanim_log_pmf(y, to_zanim(loaded, args.params_path), args.trials);
    } catch (const std::invalid_argument& e) {
        throw zani::CliError(2, e.what());
    }
    std::cout << "log_pmf,pmf\n"
              << zani::format_double(log_pmf) << ',' << zani::format_double(std::exp(log_pmf))
              << "\n";
    return 0;
}

int run_eval_marginal(const EvalArgs& args) {
    const zani::Model model = zani::parse_model(args.model_str);
    if (args.trials < 0) throw zani::CliError(2, "--trials must be nonnegative");
    const LoadedParams loaded = load_params_file(args.params_path, model);
    const int d = static_cast<int>(loaded.shape.size());
    if (args.category < 1 || args.category > d)
        throw zani::CliError(2, "--category must be between 1 and " + std::to_string(d));
    const int j = args.category - 1;
    std::cout << "k,probability\n";
    if (zani::model_is_dirichlet(model)) {
        const auto params = to_zanidm(loaded, args.params_path);
        for (int k = 0; k <= args.trials; ++k)
            std::cout << k << ','
                      << zani::format_double(
                             std::exp(zani::zanidm_marginal_log_pmf(j, k, params, args.trials)))
                      << "\n";
    } else {
        const auto params = to_zanim(loaded, args.params_path);
        for (int k = 0; k <= args.trials; ++k)
            std::cout << k << ','
                      << zani::format_double(
                             std::exp(zani::zanim_marginal_log_pmf(j, k, params, args.trials)))
                      << "\n";
    }
    return 0;
}

int run_eval_moments(const EvalArgs& args) {
    const zani::Model model = zani::parse_model(args.model_str);
    if (args.trials < 0) throw zani::CliError(2, "--trials must be nonnegative");
    const LoadedParams loaded = load_params_file(args.params_path, model);
    const zani::MomentsReport report =
        zani::model_is_dirichlet(model)
            ? zani::zanidm_moments(to_zanidm(loaded, args.params_path), args.trials)
            : zani::zanim_moments(to_zanim(loaded, args.params_path), args.trials);
    const int d = static_cast<int>(report.mean.size());
    const auto opt_str = [](const std::optional<double>& v) {
        return v ? zani::format_double(*v) : std::string();
    };
    std::cout << "statistic,category,category2,value\n";
    for (int j = 0; j < d; ++j)
        std::cout << "mean," << j + 1 << ",," << zani::format_double(report.mean[j]) << "\n";
    for (int j = 0; j < d; ++j)
        std::cout << "dispersion_index," << j + 1 << ",,"
                  << opt_str(report.dispersion_index[j]) << "\n";
    for (int j = 0; j < d; ++j)
        std::cout << "zero_inflation_index," << j + 1 << ",,"
                  << opt_str(report.zero_inflation_index[j]) << "\n";
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            std::cout << "covariance," << i + 1 << ',' << j + 1 << ','
                      << zani::format_double(report.covariance(i, j)) << "\n";
    return 0;
}

int run_eval_mgf(const EvalArgs& args) {
    const zani::Model model = zani::parse_model(args.model_str);
    if (zani::model_is_dirichlet(model))
        throw zani::CliError(2, "the moment generating function is available for the "
                                "multinomial-family models only (zanim, multinomial)");
    if (args.trials < 0) throw zani::CliError(2, "--trials must be nonnegative");
    const LoadedParams loaded = load_params_file(args.params_path, model);
    const std::vector<double> t = parse_double_list(args.t_str, "--t");
    if (t.size() != loaded.shape.size())
        throw zani::CliError(2, "--t has " + std::to_string(t.size()) +
                                    " entries but the params file has " +
                                    std::to_string(loaded.shape.size()) + " categories");
    const auto params = to_zanim(loaded, args.params_path);
    const double log_mgf = zani::zanim_log_mgf(t, params, args.trials);
    std::cout << "log_mgf,mgf\n"
              << zani::format_double(log_mgf) << ',' << zani::format_double(std::exp(log_mgf))
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// study
// ---------------------------------------------------------------------------

struct StudyArgs {
    std::string name;
    std::string scale = "desk";
    bool confirm_paper = false;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out_dir;
};

int run_study(const StudyArgs& args) {
    if (args.scale != "desk" && args.scale != "paper")
        throw zani::CliError(2, "--scale must be 'desk' or 'paper'");
    if (args.jobs < 1) throw zani::CliError(2, "--jobs must be at least 1");

    zani::StudyOptions opt;
    opt.output_dir = args.out_dir.empty() ? default_out_dir() : args.out_dir;
    opt.seed = args.seed;
    opt.jobs = args.jobs;

    zani::StudyResult result;
    if (args.name == "sampler-comparison") {
        if (args.scale == "paper")
            throw zani::CliError(2,
                                 "sampler-comparison has no paper scale (50 replicates x "
                                 "51000 iterations x 20 categories is beyond this tool's "
                                 "scope); run the desk scale");
        result = zani::run_sampler_comparison(opt);
    } else if (args.name == "dgp-recovery") {
        if (args.scale == "paper") {
            if (!args.confirm_paper)
                throw zani::CliError(2,
                                     "paper scale runs 110000-iteration chains per cell and "
                                     "takes far longer than the desk scale; pass "
                                     "--confirm-paper-scale to proceed");
            opt.paper_scale = true;
        }
        result = zani::run_dgp_recovery(opt);
    } else {
        throw zani::CliError(2, "unknown study '" + args.name +
                                    "' (expected sampler-comparison or dgp-recovery)");
    }

    for (const auto& path : result.files) std::cout << "wrote " << path << "\n";
    std::cout << "cells: " << result.attempted() << " attempted, " << result.failed()
              << " failed\n";
    for (const auto& cell : result.cells)
        if (!cell.ok) std::cout << "failed cell: " << cell.label << ": " << cell.detail << "\n";
    if (result.failed() * 5 > result.attempted())
        throw zani::CliError(3, "more than 20% of study cells failed (" +
                                    std::to_string(result.failed()) + " of " +
                                    std::to_string(result.attempted()) + ")");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-&-N-inflated multinomial and Dirichlet-multinomial toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(zani::kToolName) + " " + zani::kToolVersion);

    // ---- simulate ----
    SimulateArgs sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "Draw a dataset and write it as CSV");
    c_sim->add_option("--model", sim.model_str, "zanim, zanidm, multinomial, or dm")->required();
    c_sim->add_option("--params", sim.params_path,
                      "JSON file with theta (or alpha) and optional zeta")->required();
    c_sim->add_option("--n", sim.n, "number of rows to draw")->required();
    c_sim->add_option("--trials", sim.trials, "trials per row")->required();
    c_sim->add_option("--seed", sim.seed, "root RNG seed (default 1)");
    c_sim->add_option("--out", sim.out_dir,
                      "output directory (default: ZANI_OUT_DIR, else current directory)");

    // ---- fit ----
    FitArgs fit;
    CLI::App* c_fit = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
    c_fit->add_option("--config", fit.config_path, "JSON run configuration; flags override it");
    c_fit->add_option("--model", fit.model_str, "zanim, zanidm, multinomial, or dm");
    c_fit->add_option("--data", fit.data_path, "dataset CSV (header y1,...,yd)");
    c_fit->add_option("--out", fit.out_dir,
                      "output directory (default: config 'out', else ZANI_OUT_DIR, else "
                      "current directory)");
    c_fit->add_option("--iterations", fit.iterations, "total MCMC iterations");
    c_fit->add_option("--burn-in", fit.burn_in, "iterations discarded from the front");
    c_fit->add_option("--thin", fit.thin, "keep every thin-th iteration");
    c_fit->add_option("--seed", fit.seed, "root RNG seed");
    c_fit->add_option("--stream", fit.stream, "RNG stream index");
    c_fit->add_option("--alpha-sampler", fit.alpha_sampler, "da_ptn, mh_rw, or slice");
    c_fit->add_option("--mh-step", fit.mh_step, "random-walk proposal step on log alpha");
    c_fit->add_flag("--mh-adapt,!--no-mh-adapt", fit.mh_adapt,
                    "adapt the random-walk step during burn-in");
    c_fit->add_option("--slice-width", fit.slice_width, "initial slice bracket width");
    c_fit->add_option("--slice-max-steps", fit.slice_max_steps,
                      "stepping-out limit for the slice sampler");
    c_fit->add_flag("--loglik,!--no-loglik", fit.compute_loglik,
                    "write the per-draw log-likelihood matrix (on by default)");
    c_fit->add_option("--zeta-beta", fit.zeta_beta, "Beta prior 'a,b' for every zeta");
    c_fit->add_option("--lambda-gamma", fit.lambda_gamma,
                      "Gamma prior 'shape,rate' for every lambda");
    c_fit->add_option("--alpha-gamma", fit.alpha_gamma,
                      "Gamma prior 'shape,rate' for every alpha, or 'matched'");
    c_fit->add_option("--alpha-log-normal", fit.alpha_log_normal,
                      "log-normal prior 'mean,variance' for every alpha");

    // ---- eval ----
    EvalArgs ev;
    CLI::App* c_eval = app.add_subcommand("eval", "Evaluate distribution quantities as CSV");
    c_eval->require_subcommand(1);
    const auto add_eval_common = [&](CLI::App* sub) {
        sub->add_option("--model", ev.model_str, "zanim, zanidm, multinomial, or dm")->required();
        sub->add_option("--params", ev.params_path,
                        "JSON file with theta (or alpha) and optional zeta")->required();
        sub->add_option("--trials", ev.trials, "trials per row")->required();
    };
    CLI::App* c_pmf = c_eval->add_subcommand("pmf", "Joint log and linear probability at --y");
    add_eval_common(c_pmf);
    c_pmf->add_option("--y", ev.y_str, "comma-separated counts")->required();
    CLI::App* c_marg =
        c_eval->add_subcommand("marginal", "Per-category PMF grid k=0..trials");
    add_eval_common(c_marg);
    c_marg->add_option("--category", ev.category, "1-based category index")->required();
    CLI::App* c_mom = c_eval->add_subcommand(
        "moments", "Means, dispersion/zero-inflation indices, and covariances");
    add_eval_common(c_mom);
    CLI::App* c_mgf = c_eval->add_subcommand("mgf", "Moment generating function at --t");
    add_eval_common(c_mgf);
    c_mgf->add_option("--t", ev.t_str, "comma-separated argument vector")->required();

    // ---- study ----
    StudyArgs st;
    CLI::App* c_study = app.add_subcommand("study", "Run a replication study");
    c_study->add_option("name", st.name, "sampler-comparison or dgp-recovery")->required();
    c_study->add_option("--scale", st.scale, "desk (default) or paper");
    c_study->add_flag("--confirm-paper-scale", st.confirm_paper,
                      "acknowledge the long paper-scale runtime");
    c_study->add_option("--seed", st.seed, "root RNG seed (default 1)");
    c_study->add_option("--jobs", st.jobs, "parallel fit cells (default 1)");
    c_study->add_option("--out", st.out_dir,
                        "output directory (default: ZANI_OUT_DIR, else current directory)");

    try {
        app.parse(argc, argv);
        if (*c_sim) return run_simulate(sim);
        if (*c_fit) return run_fit(fit);
        if (*c_eval) {
            if (*c_pmf) return run_eval_pmf(ev);
            if (*c_marg) return run_eval_marginal(ev);
            if (*c_mom) return run_eval_moments(ev);
            if (*c_mgf) return run_eval_mgf(ev);
        }
        if (*c_study) return run_study(st);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const zani::CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
