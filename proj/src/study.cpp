#include "zani/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "zani/distributions.hpp"
#include "zani/inference.hpp"
#include "zani/rng.hpp"

namespace zani {

namespace {

namespace fs = std::filesystem;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Runs `work(0..count-1)` on up to `jobs` threads.  Every cell writes only
// its own output slot, so the schedule cannot change any result.
void run_cells(int count, int jobs, const std::function<void(int)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    const int workers = std::min(jobs, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
        });
    for (auto& t : pool) t.join();
}

// Keeps error details on one CSV line in one field.
std::string sanitize(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

} // namespace

// ---------------------------------------------------------------------------
// Sampler comparison
// ---------------------------------------------------------------------------

StudyResult run_sampler_comparison(const StudyOptions& opt) {
    constexpr int d = 5, trials_per_row = 200, n_rep = 10, n_methods = 3;
    constexpr long long iterations = 6000, burn_in = 1000, thin = 5;
    const std::vector<int> sizes{50, 200};
    const std::vector<AlphaSamplerKind> methods{
        AlphaSamplerKind::da_ptn, AlphaSamplerKind::mh_rw, AlphaSamplerKind::slice};

    // Truths are drawn once per sample size; replicates share them and
    // redraw the data.  zeta ~ Uniform[0, 0.5]; log alpha ~ Uniform[-2.3, 2.3].
    struct Scenario {
        int n = 0;
        ZanidmParams truth;
        std::vector<CountDataset> data;
    };
    std::vector<Scenario> scenarios;
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        Scenario sc;
        sc.n = sizes[s];
        Rng truth_rng(opt.seed, 900 + s);
        sc.truth.zeta.resize(d);
        sc.truth.alpha.resize(d);
        for (auto& z : sc.truth.zeta) z = 0.5 * truth_rng.uniform();
        for (auto& a : sc.truth.alpha) a = std::exp(-2.3 + 4.6 * truth_rng.uniform());
        for (int r = 0; r < n_rep; ++r) {
            Rng data_rng(opt.seed, 1000 + s * n_rep + static_cast<std::size_t>(r));
            CountDataset ds;
            for (int i = 0; i < sc.n; ++i)
                ds.rows.push_back(zanidm_sample(trials_per_row, sc.truth, data_rng));
            sc.data.push_back(std::move(ds));
        }
        scenarios.push_back(std::move(sc));
    }

    const int n_cells = static_cast<int>(sizes.size()) * n_methods * n_rep;
    struct CellOut {
        std::vector<SummaryRow> summary;
    };
    std::vector<CellOut> outs(static_cast<std::size_t>(n_cells));
    StudyResult result;
    result.cells.resize(static_cast<std::size_t>(n_cells));

    run_cells(n_cells, opt.jobs, [&](int c) {
        const int s = c / (n_methods * n_rep);
        const int k = (c / n_rep) % n_methods;
        const int r = c % n_rep;
        auto& cell = result.cells[static_cast<std::size_t>(c)];
        std::ostringstream label;
        label << "n=" << scenarios[static_cast<std::size_t>(s)].n
              << " method=" << alpha_sampler_name(methods[static_cast<std::size_t>(k)])
              << " replicate=" << r + 1;
        cell.label = label.str();
        try {
            McmcConfig cfg;
            cfg.iterations = iterations;
            cfg.burn_in = burn_in;
            cfg.thin = thin;
            cfg.seed = opt.seed;
            cfg.stream = 2000 + static_cast<std::uint64_t>(c);
            cfg.alpha_sampler = methods[static_cast<std::size_t>(k)];
            cfg.mh_adapt = methods[static_cast<std::size_t>(k)] == AlphaSamplerKind::mh_rw;
            cfg.compute_loglik = false;
            const auto fit =
                fit_zanidm(scenarios[static_cast<std::size_t>(s)].data[static_cast<std::size_t>(r)],
                           PriorSpec::defaults(d), cfg);
            outs[static_cast<std::size_t>(c)].summary = posterior_summary(fit);
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.detail = e.what();
        }
    });

    // Per (size, method) aggregation over the replicates that finished.
    for (std::size_t s = 0; s < sizes.size(); ++s) {
        for (int k = 0; k < n_methods; ++k) {
            std::vector<std::vector<SummaryRow>> alpha_reps, zeta_reps;
            for (int r = 0; r < n_rep; ++r) {
                const int c = static_cast<int>(s) * n_methods * n_rep + k * n_rep + r;
                if (!result.cells[static_cast<std::size_t>(c)].ok) continue;
                const auto& rows = outs[static_cast<std::size_t>(c)].summary;
                alpha_reps.emplace_back(rows.begin(), rows.begin() + d);
                zeta_reps.emplace_back(rows.begin() + d, rows.end());
            }
            SamplerMetrics m;
            m.n = sizes[s];
            m.method = methods[static_cast<std::size_t>(k)];
            m.replicates_used = static_cast<int>(alpha_reps.size());
            if (m.replicates_used > 0) {
                m.alpha = recovery_metrics(alpha_reps, scenarios[s].truth.alpha);
                m.zeta = recovery_metrics(zeta_reps, scenarios[s].truth.zeta);
            }
            result.sampler.push_back(std::move(m));
        }
    }

    std::ostringstream desc;
    desc << "study=sampler-comparison\nseed=" << opt.seed
         << "\nd=5\ntrials=200\nreplicates=10\nsizes=50,200\niterations=6000\n"
            "burn_in=1000\nthin=5\nmethods=da_ptn,mh_rw,slice\n";
    FileMetadata meta;
    meta.seed = opt.seed;
    meta.config = hash_hex(fnv1a64(desc.str()));
    meta.extra = {{"study", "sampler-comparison"}, {"scale", "desk"}};

    std::ostringstream metrics_csv;
    metrics_csv << metadata_header(meta);
    metrics_csv << "n,method,block,parameter,relative_bias,coverage_95,ess_ratio\n";
    for (const auto& m : result.sampler) {
        if (m.replicates_used == 0) continue;
        const auto block = [&](const char* name, const RecoveryReport& rep) {
            for (std::size_t j = 0; j < rep.relative_bias.size(); ++j)
                metrics_csv << m.n << ',' << alpha_sampler_name(m.method) << ',' << name << ','
                            << name << j + 1 << ',' << format_double(rep.relative_bias[j])
                            << ',' << format_double(rep.coverage_95[j]) << ','
                            << format_double(rep.ess_ratio[j]) << '\n';
            metrics_csv << m.n << ',' << alpha_sampler_name(m.method) << ',' << name
                        << ",overall," << format_double(rep.overall_bias) << ','
                        << format_double(rep.overall_coverage) << ','
                        << format_double(rep.overall_ess_ratio) << '\n';
        };
        block("alpha", m.alpha);
        block("zeta", m.zeta);
    }
    const std::string metrics_path = join_path(opt.output_dir, "sampler_metrics.csv");
    write_text_atomic(metrics_path, metrics_csv.str());
    result.files.push_back(metrics_path);

    std::ostringstream reps_csv;
    reps_csv << metadata_header(meta);
    reps_csv << "n,method,replicate,status,detail\n";
    for (int c = 0; c < n_cells; ++c) {
        const int s = c / (n_methods * n_rep);
        const int k = (c / n_rep) % n_methods;
        const int r = c % n_rep;
        const auto& cell = result.cells[static_cast<std::size_t>(c)];
        reps_csv << sizes[static_cast<std::size_t>(s)] << ','
                 << alpha_sampler_name(methods[static_cast<std::size_t>(k)]) << ',' << r + 1
                 << ',' << (cell.ok ? "ok" : "failed") << ',' << sanitize(cell.detail) << '\n';
    }
    const std::string reps_path = join_path(opt.output_dir, "sampler_replicates.csv");
    write_text_atomic(reps_path, reps_csv.str());
    result.files.push_back(reps_path);

    return result;
}

// ---------------------------------------------------------------------------
// DGP recovery
// ---------------------------------------------------------------------------

StudyResult run_dgp_recovery(const StudyOptions& opt) {
    constexpr int n_rows = 500, trials_per_row = 30, d = 3;
    struct Dgp {
        std::string name;
        bool dirichlet;
        std::vector<double> shape;
        std::vector<double> zeta;
    };
    const std::vector<Dgp> dgps{
        {"zanim", false, {0.05, 0.70, 0.25}, {0.05, 0.15, 0.10}},
        {"zanidm", true, {2.0, 28.0, 10.0}, {0.05, 0.15, 0.10}},
    };
    const std::vector<Model> models{Model::zanim, Model::zanidm, Model::multinomial,
                                    Model::dm};

    const long long iterations = opt.paper_scale ? 110000 : 11000;
    const long long burn_in = opt.paper_scale ? 10000 : 1000;
    const long long thin = opt.paper_scale ? 100 : 10;

    std::ostringstream desc;
    desc << "study=dgp-recovery\nseed=" << opt.seed << "\nrows=500\ntrials=30\n"
         << "iterations=" << iterations << "\nburn_in=" << burn_in << "\nthin=" << thin
         << "\nmodels=zanim,zanidm,multinomial,dm\n";
    FileMetadata meta;
    meta.seed = opt.seed;
    meta.config = hash_hex(fnv1a64(desc.str()));
    meta.extra = {{"study", "dgp-recovery"},
                  {"scale", opt.paper_scale ? "paper" : "desk"}};

    StudyResult result;

    std::vector<CountDataset> data(dgps.size());
    for (std::size_t g = 0; g < dgps.size(); ++g) {
        Rng rng(opt.seed, 10 + g);
        if (dgps[g].dirichlet) {
            ZanidmParams p;
            p.alpha = dgps[g].shape;
            p.zeta = dgps[g].zeta;
            for (int i = 0; i < n_rows; ++i)
                data[g].rows.push_back(zanidm_sample(trials_per_row, p, rng));
        } else {
            ZanimParams p;
            p.theta = dgps[g].shape;
            p.zeta = dgps[g].zeta;
            for (int i = 0; i < n_rows; ++i)
                data[g].rows.push_back(zanim_sample(trials_per_row, p, rng));
        }
        FileMetadata dmeta = meta;
        dmeta.extra.push_back({"dgp", dgps[g].name});
        const std::string path =
            join_path(opt.output_dir, "recovery_data_" + dgps[g].name + ".csv");
        write_count_csv(path, data[g], dmeta);
        result.files.push_back(path);
    }

    const int n_cells = static_cast<int>(dgps.size() * models.size());
    std::vector<ChainDraws> fit_draws(static_cast<std::size_t>(n_cells));
    result.cells.resize(static_cast<std::size_t>(n_cells));
    result.fits.resize(static_cast<std::size_t>(n_cells));

    run_cells(n_cells, opt.jobs, [&](int c) {
        const std::size_t g = static_cast<std::size_t>(c) / models.size();
        const std::size_t k = static_cast<std::size_t>(c) % models.size();
        const Model model = models[k];
        auto& cell = result.cells[static_cast<std::size_t>(c)];
        auto& rec = result.fits[static_cast<std::size_t>(c)];
        cell.label = "dgp=" + dgps[g].name + " model=" + model_name(model);
        rec.dgp = dgps[g].name;
        rec.model = model;
        try {
            McmcConfig cfg;
            cfg.iterations = iterations;
            cfg.burn_in = burn_in;
            cfg.thin = thin;
            cfg.seed = opt.seed;
            cfg.stream = 20 + static_cast<std::uint64_t>(c);
            cfg.fix_zeta_zero = model_fixes_zeta(model);
            cfg.compute_loglik = true;
            ChainDraws fit = model_is_dirichlet(model)
                                 ? fit_zanidm(data[g], PriorSpec::defaults(d), cfg)
                                 : fit_zanim(data[g], PriorSpec::defaults(d), cfg);
            rec.summary = posterior_summary(fit);
            try {
                const auto score = elpd_is(fit.loglik);
                rec.elpd = score.elpd;
                rec.elpd_se = score.se;
                rec.elpd_excluded = score.total_excluded;
                rec.elpd_defined = true;
            } catch (const std::invalid_argument& e) {
                // Some observation has zero mass under every retained draw
                // (all-zero rows under a fixed-zeta baseline): score it as
                // negative infinity rather than failing the cell.
                rec.elpd = kNegInf;
                rec.elpd_defined = false;
                rec.detail = e.what();
            }
            fit_draws[static_cast<std::size_t>(c)] = std::move(fit);
            rec.ok = true;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.detail = e.what();
        }
    });

    // Predictive bands from the fit whose model matches the DGP.
    for (std::size_t g = 0; g < dgps.size(); ++g) {
        const std::size_t k = dgps[g].dirichlet ? 1u : 0u; // zanidm : zanim
        const std::size_t c = g * models.size() + k;
        if (!result.fits[c].ok) continue;
        std::vector<int> grid(static_cast<std::size_t>(trials_per_row) + 1);
        for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<int>(i);
        BandRecord br;
        br.dgp = dgps[g].name;
        br.bands = posterior_predictive_bands(fit_draws[c], dgps[g].dirichlet,
                                              data[g].trials(), grid,
                                              opt.seed + 5000 + g);
        br.observed.reserve(br.bands.size());
        const double unit = 1.0 / static_cast<double>(data[g].n());
        for (const auto& row : br.bands) {
            double freq = 0.0;
            for (const auto& y : data[g].rows)
                if (y[static_cast<std::size_t>(row.category)] == row.count) freq += unit;
            br.observed.push_back(freq);
        }

        std::ostringstream csv;
        FileMetadata bmeta = meta;
        bmeta.extra.push_back({"dgp", dgps[g].name});
        csv << metadata_header(bmeta);
        csv << "category,count,observed,mean,lower,upper\n";
        for (std::size_t i = 0; i < br.bands.size(); ++i) {
            const auto& row = br.bands[i];
            csv << row.category + 1 << ',' << row.count << ','
                << format_double(br.observed[i]) << ',' << format_double(row.mean_freq)
                << ',' << format_double(row.lower) << ',' << format_double(row.upper)
                << '\n';
        }
        const std::string path =
            join_path(opt.output_dir, "recovery_bands_" + dgps[g].name + ".csv");
        write_text_atomic(path, csv.str());
        result.files.push_back(path);
        result.bands.push_back(std::move(br));
    }

    std::ostringstream summary_csv;
    summary_csv << metadata_header(meta);
    summary_csv << "dgp,model,parameter,mean,lower,upper,ess_ratio\n";
    for (const auto& rec : result.fits) {
        if (!rec.ok) continue;
        for (const auto& row : rec.summary)
            summary_csv << rec.dgp << ',' << model_name(rec.model) << ',' << row.parameter
                        << ',' << format_double(row.mean) << ','
                        << format_double(row.lower_95) << ','
                        << format_double(row.upper_95) << ','
                        << format_double(row.ess_ratio) << '\n';
    }
    const std::string summary_path = join_path(opt.output_dir, "recovery_summary.csv");
    write_text_atomic(summary_path, summary_csv.str());
    result.files.push_back(summary_path);

    std::ostringstream elpd_csv;
    elpd_csv << metadata_header(meta);
    elpd_csv << "dgp,model,status,elpd,se,excluded_draws\n";
    for (const auto& rec : result.fits) {
        const char* status = !rec.ok ? "failed" : (rec.elpd_defined ? "ok" : "undefined");
        elpd_csv << rec.dgp << ',' << model_name(rec.model) << ',' << status << ','
                 << (rec.ok ? format_double(rec.elpd) : std::string("-")) << ','
                 << (rec.ok && rec.elpd_defined ? format_double(rec.elpd_se)
                                                : std::string("-"))
                 << ',' << rec.elpd_excluded << '\n';
    }
    const std::string elpd_path = join_path(opt.output_dir, "recovery_elpd.csv");
    write_text_atomic(elpd_path, elpd_csv.str());
    result.files.push_back(elpd_path);

    std::ostringstream cells_csv;
    cells_csv << metadata_header(meta);
    cells_csv << "dgp,model,status,detail\n";
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        const auto& rec = result.fits[c];
        cells_csv << rec.dgp << ',' << model_name(rec.model) << ','
                  << (result.cells[c].ok ? "ok" : "failed") << ','
                  << sanitize(result.cells[c].detail) << '\n';
    }
    const std::string cells_path = join_path(opt.output_dir, "recovery_cells.csv");
    write_text_atomic(cells_path, cells_csv.str());
    result.files.push_back(cells_path);

    return result;
}

} // namespace zani
