#include "zani/io.hpp"

#include <atomic>
#include <cctype>
#include <cerrno>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "json.hpp"

#include "zani/version.hpp"

namespace zani {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) { throw CliError(2, message); }

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

} // namespace

std::string metadata_header(const FileMetadata& meta) {
    std::ostringstream os;
    os << "# " << kToolName << ' ' << kToolVersion << '\n';
    os << "# seed: " << meta.seed << '\n';
    os << "# rng: " << kRngId << '\n';
    os << "# config: " << meta.config << '\n';
    for (const auto& [key, value] : meta.extra) os << "# " << key << ": " << value << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

const char* model_name(Model m) {
    switch (m) {
        case Model::zanim: return "zanim";
        case Model::zanidm: return "zanidm";
        case Model::multinomial: return "multinomial";
        case Model::dm: return "dm";
    }
    return "?";
}

Model parse_model(const std::string& name) {
    if (name == "zanim") return Model::zanim;
    if (name == "zanidm") return Model::zanidm;
    if (name == "multinomial") return Model::multinomial;
    if (name == "dm") return Model::dm;
    fail("unknown model '" + name + "' (expected zanim, zanidm, multinomial, or dm)");
}

bool model_is_dirichlet(Model m) { return m == Model::zanidm || m == Model::dm; }

bool model_fixes_zeta(Model m) { return m == Model::multinomial || m == Model::dm; }

AlphaSamplerKind parse_alpha_sampler(const std::string& name) {
    if (name == "da_ptn") return AlphaSamplerKind::da_ptn;
    if (name == "mh_rw") return AlphaSamplerKind::mh_rw;
    if (name == "slice") return AlphaSamplerKind::slice;
    fail("unknown alpha sampler '" + name + "' (expected da_ptn, mh_rw, or slice)");
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

double number_field(const ojson& j, const std::string& ctx) {
    if (!j.is_number()) fail("config field '" + ctx + "' must be a number");
    return j.get<double>();
}

long long integer_field(const ojson& j, const std::string& ctx) {
    if (!j.is_number_integer()) fail("config field '" + ctx + "' must be an integer");
    return j.get<long long>();
}

std::uint64_t seed_field(const ojson& j, const std::string& ctx) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                   j.get<long long>() < 0))
        fail("config field '" + ctx + "' must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

bool bool_field(const ojson& j, const std::string& ctx) {
    if (!j.is_boolean()) fail("config field '" + ctx + "' must be true or false");
    return j.get<bool>();
}

std::string string_field(const ojson& j, const std::string& ctx) {
    if (!j.is_string()) fail("config field '" + ctx + "' must be a string");
    return j.get<std::string>();
}

PriorPair pair_field(const ojson& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail("config field '" + ctx + "' must be an array of two numbers");
    return {j[0].get<double>(), j[1].get<double>()};
}

void parse_mcmc_block(const ojson& block, RunConfig& cfg) {
    if (!block.is_object()) fail("config field 'mcmc' must be an object");
    for (const auto& [key, value] : block.items()) {
        const std::string ctx = "mcmc." + key;
        if (key == "iterations") cfg.mcmc.iterations = integer_field(value, ctx);
        else if (key == "burn_in") cfg.mcmc.burn_in = integer_field(value, ctx);
        else if (key == "thin") cfg.mcmc.thin = integer_field(value, ctx);
        else if (key == "seed") cfg.mcmc.seed = seed_field(value, ctx);
        else if (key == "stream") cfg.mcmc.stream = seed_field(value, ctx);
        else if (key == "alpha_sampler")
            cfg.mcmc.alpha_sampler = parse_alpha_sampler(string_field(value, ctx));
        else if (key == "mh_step") cfg.mcmc.mh_step = number_field(value, ctx);
        else if (key == "mh_adapt") cfg.mcmc.mh_adapt = bool_field(value, ctx);
        else if (key == "slice_width") cfg.mcmc.slice_width = number_field(value, ctx);
        else if (key == "slice_max_steps")
            cfg.mcmc.slice_max_steps = static_cast<int>(integer_field(value, ctx));
        else if (key == "compute_loglik") cfg.mcmc.compute_loglik = bool_field(value, ctx);
        else if (key == "fix_zeta_zero")
            fail("config field 'mcmc.fix_zeta_zero' is set by the model choice; "
                 "use model 'multinomial' or 'dm' instead");
        else fail("unknown config field 'mcmc." + key + "'");
    }
}

void parse_priors_block(const ojson& block, RunConfig& cfg) {
    if (!block.is_object()) fail("config field 'priors' must be an object");
    for (const auto& [key, value] : block.items()) {
        const std::string ctx = "priors." + key;
        if (key == "zeta_beta") cfg.zeta_beta = pair_field(value, ctx);
        else if (key == "lambda_gamma") cfg.lambda_gamma = pair_field(value, ctx);
        else if (key == "alpha_gamma") {
            if (value.is_string()) {
                if (value.get<std::string>() != "matched")
                    fail("config field 'priors.alpha_gamma' accepts the string "
                         "\"matched\" or an array of two numbers");
                cfg.alpha_gamma.reset();
            } else {
                cfg.alpha_gamma = pair_field(value, ctx);
            }
        } else if (key == "alpha_log_normal") cfg.alpha_log_normal = pair_field(value, ctx);
        else fail("unknown config field 'priors." + key + "'");
    }
}

} // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open config file '" + path + "'");
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const std::exception& e) {
        fail("config file '" + path + "': " + e.what());
    }
    if (!j.is_object()) fail("config file '" + path + "' must contain a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "model") cfg.model = parse_model(string_field(value, "model"));
        else if (key == "data") cfg.data_path = string_field(value, "data");
        else if (key == "out") cfg.output_dir = string_field(value, "out");
        else if (key == "mcmc") parse_mcmc_block(value, cfg);
        else if (key == "priors") parse_priors_block(value, cfg);
        else fail("unknown config field '" + key + "'");
    }
    cfg.mcmc.fix_zeta_zero = model_fixes_zeta(cfg.model);
    return cfg;
}

void finalize_run_config(RunConfig& cfg) {
    cfg.mcmc.fix_zeta_zero = model_fixes_zeta(cfg.model);
    try {
        cfg.mcmc.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
}

PriorSpec build_priors(const RunConfig& cfg, int d) {
    if (d < 1) fail("dataset must have at least one category");
    PriorSpec p = PriorSpec::defaults(d);
    if (cfg.zeta_beta) {
        if (!(cfg.zeta_beta->first > 0.0) || !(cfg.zeta_beta->second > 0.0))
            fail("prior 'zeta_beta' requires two positive parameters");
        for (auto& b : p.zeta_beta) b = BetaPrior{cfg.zeta_beta->first, cfg.zeta_beta->second};
    }
    if (cfg.lambda_gamma) {
        if (!(cfg.lambda_gamma->first > 0.0) || !(cfg.lambda_gamma->second > 0.0))
            fail("prior 'lambda_gamma' requires two positive parameters");
        for (auto& g : p.lambda_gamma)
            g = GammaPrior{cfg.lambda_gamma->first, cfg.lambda_gamma->second};
    }
    if (cfg.alpha_gamma) {
        if (!(cfg.alpha_gamma->first > 0.0) || !(cfg.alpha_gamma->second > 0.0))
            fail("prior 'alpha_gamma' requires two positive parameters");
        for (auto& g : p.alpha_gamma)
            g = GammaPrior{cfg.alpha_gamma->first, cfg.alpha_gamma->second};
    }
    if (cfg.alpha_log_normal) {
        if (!(cfg.alpha_log_normal->second > 0.0))
            fail("prior 'alpha_log_normal' requires a positive variance");
        for (auto& n : p.alpha_log_normal)
            n = LogNormalPrior{cfg.alpha_log_normal->first, cfg.alpha_log_normal->second};
    }
    return p;
}

std::string canonical_config_string(const RunConfig& cfg) {
    auto pair_text = [](const std::optional<PriorPair>& p) {
        if (!p) return std::string("default");
        return format_double(p->first) + "," + format_double(p->second);
    };
    std::ostringstream os;
    os << "model=" << model_name(cfg.model) << '\n'
       << "data=" << cfg.data_path << '\n'
       << "out=" << cfg.output_dir << '\n'
       << "iterations=" << cfg.mcmc.iterations << '\n'
       << "burn_in=" << cfg.mcmc.burn_in << '\n'
       << "thin=" << cfg.mcmc.thin << '\n'
       << "seed=" << cfg.mcmc.seed << '\n'
       << "stream=" << cfg.mcmc.stream << '\n'
       << "alpha_sampler=" << alpha_sampler_name(cfg.mcmc.alpha_sampler) << '\n'
       << "mh_step=" << format_double(cfg.mcmc.mh_step) << '\n'
       << "mh_adapt=" << (cfg.mcmc.mh_adapt ? 1 : 0) << '\n'
       << "slice_width=" << format_double(cfg.mcmc.slice_width) << '\n'
       << "slice_max_steps=" << cfg.mcmc.slice_max_steps << '\n'
       << "fix_zeta_zero=" << (cfg.mcmc.fix_zeta_zero ? 1 : 0) << '\n'
       << "compute_loglik=" << (cfg.mcmc.compute_loglik ? 1 : 0) << '\n'
       << "zeta_beta=" << pair_text(cfg.zeta_beta) << '\n'
       << "lambda_gamma=" << pair_text(cfg.lambda_gamma) << '\n'
       << "alpha_gamma=" << pair_text(cfg.alpha_gamma) << '\n'
       << "alpha_log_normal=" << pair_text(cfg.alpha_log_normal) << '\n';
    return os.str();
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string config_hash(const RunConfig& cfg) {
    return hash_hex(fnv1a64(canonical_config_string(cfg)));
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void write_text_atomic(const std::string& path, const std::string& content) {
    static std::atomic<unsigned long long> counter{0};
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(static_cast<unsigned long long>(::getpid())) + "-" +
           std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            fail("failed while writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        std::error_code ec2;
        fs::remove(tmp, ec2);
        fail("cannot move output into place at '" + path + "': " + ec.message());
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// Strict base-10 nonnegative integer, no signs, spaces, or decimals.
bool parse_count(const std::string& text, int& out) {
    if (text.empty() || text.size() > 10) return false;
    for (char c : text)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (errno != 0 || end != text.c_str() + text.size() || v > INT_MAX) return false;
    out = static_cast<int>(v);
    return true;
}

} // namespace

CountDataset read_count_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open dataset '" + path + "'");

    CountDataset data;
    std::string line;
    long long line_no = 0;
    bool header_seen = false;
    std::size_t d = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_fields(line);
        const std::string where = path + " line " + std::to_string(line_no);
        if (!header_seen) {
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const std::string expected = "y" + std::to_string(i + 1);
                if (fields[i] != expected)
                    fail(where + ": header must be y1,...,yd (field " + std::to_string(i + 1) +
                         " is '" + fields[i] + "')");
            }
            d = fields.size();
            header_seen = true;
            continue;
        }
        if (fields.size() != d)
            fail(where + ": expected " + std::to_string(d) + " fields, found " +
                 std::to_string(fields.size()));
        CountVector row(d);
        for (std::size_t j = 0; j < d; ++j) {
            if (!parse_count(fields[j], row[j]))
                fail(where + ", column " + std::to_string(j + 1) + ": '" + fields[j] +
                     "' is not a nonnegative integer count");
        }
        data.rows.push_back(std::move(row));
    }
    if (!header_seen) fail(path + ": missing header row y1,...,yd");
    if (data.rows.empty()) fail(path + ": no data rows");
    return data;
}

void write_count_csv(const std::string& path, const CountDataset& data,
                     const FileMetadata& meta) {
    if (data.n() == 0 || data.d() == 0) fail("refusing to write an empty dataset");
    data.validate();
    std::ostringstream os;
    os << metadata_header(meta);
    for (int j = 0; j < data.d(); ++j) os << (j ? "," : "") << 'y' << j + 1;
    os << '\n';
    for (const auto& row : data.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << row[j];
        os << '\n';
    }
    write_text_atomic(path, os.str());
}

void write_draws_csv(const std::string& path, const ChainDraws& draws,
                     const FileMetadata& meta) {
    if (draws.draws.nrow == 0 || draws.names.size() != draws.draws.ncol)
        fail("refusing to write a malformed draws table");
    std::ostringstream os;
    os << metadata_header(meta);
    for (std::size_t p = 0; p < draws.names.size(); ++p)
        os << (p ? "," : "") << draws.names[p];
    os << '\n';
    for (std::size_t m = 0; m < draws.draws.nrow; ++m) {
        for (std::size_t p = 0; p < draws.draws.ncol; ++p)
            os << (p ? "," : "") << format_double(draws.draws(m, p));
        os << '\n';
    }
    write_text_atomic(path, os.str());
}

void write_loglik_csv(const std::string& path, const Matrix& loglik,
                      const FileMetadata& meta) {
    if (loglik.nrow == 0 || loglik.ncol == 0) fail("refusing to write an empty matrix");
    std::ostringstream os;
    os << metadata_header(meta);
    for (std::size_t i = 0; i < loglik.ncol; ++i) os << (i ? "," : "") << "obs" << i + 1;
    os << '\n';
    for (std::size_t m = 0; m < loglik.nrow; ++m) {
        for (std::size_t i = 0; i < loglik.ncol; ++i)
            os << (i ? "," : "") << format_double(loglik(m, i));
        os << '\n';
    }
    write_text_atomic(path, os.str());
}

void write_bands_csv(const std::string& path, const std::vector<BandRow>& bands,
                     const FileMetadata& meta) {
    if (bands.empty()) fail("refusing to write an empty bands table");
    std::ostringstream os;
    os << metadata_header(meta);
    os << "category,count,mean,lower,upper\n";
    for (const auto& row : bands) {
        os << row.category + 1 << ',' << row.count << ',' << format_double(row.mean_freq)
           << ',' << format_double(row.lower) << ',' << format_double(row.upper) << '\n';
    }
    write_text_atomic(path, os.str());
}

void write_summary_json(const std::string& path, const std::vector<SummaryRow>& table,
                        const FileMetadata& meta) {
    if (table.empty()) fail("refusing to write an empty summary");
    ojson j;
    j["metadata"] = {
        {"tool", std::string(kToolName) + " " + kToolVersion},
        {"seed", meta.seed},
        {"rng", kRngId},
        {"config", meta.config},
        {"percentiles", "type-7 linear interpolation"},
    };
    for (const auto& [key, value] : meta.extra) j["metadata"][key] = value;
    j["summary"] = ojson::array();
    for (const auto& row : table) {
        j["summary"].push_back({
            {"Parameter", row.parameter},
            {"Mean", row.mean},
            {"95% LCI", row.lower_95},
            {"95% UCI", row.upper_95},
            {"ESS ratio", row.ess_ratio},
        });
    }
    write_text_atomic(path, j.dump(2) + "\n");
}

} // namespace zani
