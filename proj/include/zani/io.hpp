#pragma once

// File formats and run configuration for the command-line tool: CSV count
// datasets, draw/summary/band writers with metadata headers, the JSON run
// config with its model aliases, and the config hash stamped into outputs.
// Outputs carry no timestamps so reruns with the same seed are byte-identical.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zani/core.hpp"
#include "zani/diagnostics.hpp"
#include "zani/inference.hpp"

namespace zani {

// Error carrying the process exit code: 2 user/input error, 3 internal
// numerical failure.
class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& message)
        : std::runtime_error(message), code_(code) {}
    int exit_code() const { return code_; }

private:
    int code_;
};

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------
// multinomial and dm are the zeta-pinned-to-zero baselines of zanim/zanidm;
// the aliases exist so baseline fits are a model choice, not a flag.

enum class Model { zanim, zanidm, multinomial, dm };

const char* model_name(Model m);
Model parse_model(const std::string& name);  // CliError(2) on unknown names
bool model_is_dirichlet(Model m);            // concentration-parameter family
bool model_fixes_zeta(Model m);              // baseline: zeta fixed at zero

AlphaSamplerKind parse_alpha_sampler(const std::string& name);  // CliError(2)

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

// Two-number prior override, broadcast across categories.
struct PriorPair {
    double first = 0.0;
    double second = 0.0;
};

struct RunConfig {
    Model model = Model::zanim;
    std::string data_path;
    std::string output_dir = ".";
    McmcConfig mcmc;  // fix_zeta_zero is forced from the model, never set directly

    std::optional<PriorPair> zeta_beta;         // Beta[a, b]
    std::optional<PriorPair> lambda_gamma;      // Gamma[shape, rate]
    std::optional<PriorPair> alpha_gamma;       // Gamma[shape, rate]; absent = matched
    std::optional<PriorPair> alpha_log_normal;  // Normal[mean, variance] on log alpha
};

// Parses a JSON config file.  Unknown keys, type errors, and a literal
// fix_zeta_zero key raise CliError(2) naming the field.  Numeric ranges are
// not checked here — flags may still override — so callers finish with
// finalize_run_config after applying overrides.
RunConfig load_run_config(const std::string& path);

// Re-asserts the model / fix_zeta_zero coupling and validates the MCMC
// settings of the effective (config + flag override) configuration.
void finalize_run_config(RunConfig& cfg);

// Per-category priors for a d-column dataset: library defaults overlaid with
// the config's broadcast overrides.  CliError(2) on non-positive parameters.
PriorSpec build_priors(const RunConfig& cfg, int d);

// Canonical key=value serialization (fixed field order) and its hash, stamped
// into every output's metadata as `config`.
std::string canonical_config_string(const RunConfig& cfg);
std::uint64_t fnv1a64(std::string_view text);
std::string hash_hex(std::uint64_t value);      // 16 lowercase hex digits
std::string config_hash(const RunConfig& cfg);  // hash_hex of the canonical string

// ---------------------------------------------------------------------------
// Output metadata
// ---------------------------------------------------------------------------

inline constexpr const char* kRngId = "xoshiro256++";

// Header block stamped on every output file: tool version, root seed, RNG
// algorithm id, config hash, plus caller-specific (key, value) extras.
struct FileMetadata {
    std::uint64_t seed = 0;
    std::string config = "-";
    std::vector<std::pair<std::string, std::string>> extra;
};

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------
// Writers are atomic (temp file in the target directory, then rename), use
// LF line endings, and format doubles with enough digits to round-trip.

void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);

// The '#'-prefixed block every CSV writer starts with.
std::string metadata_header(const FileMetadata& meta);

// Dataset CSV: '#' metadata lines, a y1,...,yd header, then base-10 integer
// counts.  The reader skips '#' and blank lines, so any written dataset is
// accepted back unchanged.  Errors carry 1-based line (and column) numbers.
CountDataset read_count_csv(const std::string& path);
void write_count_csv(const std::string& path, const CountDataset& data,
                     const FileMetadata& meta);

void write_draws_csv(const std::string& path, const ChainDraws& draws,
                     const FileMetadata& meta);
void write_loglik_csv(const std::string& path, const Matrix& loglik,
                      const FileMetadata& meta);
void write_bands_csv(const std::string& path, const std::vector<BandRow>& bands,
                     const FileMetadata& meta);

// Summary report: JSON whose rows use exactly the report column names
// ("Parameter", "Mean", "95% LCI", "95% UCI", "ESS ratio").
void write_summary_json(const std::string& path, const std::vector<SummaryRow>& table,
                        const FileMetadata& meta);

} // namespace zani
