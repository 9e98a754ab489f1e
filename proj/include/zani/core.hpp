#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace zani {

// ---------------------------------------------------------------------------
// Special functions (log domain) and stable summation
// ---------------------------------------------------------------------------

double log_gamma_fn(double x); // log Gamma(x), x > 0
double digamma(double x);      // d/dx log Gamma(x), x > 0
double trigamma(double x);     // d^2/dx^2 log Gamma(x), x > 0
double log_beta(double a, double b);

// Solves trigamma(c) = v by bisection (absolute tolerance 1e-10 on c).
double trigamma_inverse(double v);

// log of the multinomial coefficient N! / prod(counts!); counts must be
// non-negative and sum to N.
double log_multinomial_coeff(int n, std::span<const int> counts);

// Streaming-safe log(sum(exp(v))): max-shifted, -inf entries drop out, an
// empty span is log(0) = -inf.
double log_sum_exp(std::span<const double> v);
double log_add_exp(double a, double b);

// ---------------------------------------------------------------------------
// Count data
// ---------------------------------------------------------------------------

using CountVector = std::vector<int>;

struct CountDataset {
    std::vector<CountVector> rows; // n observations, each of length d

    int n() const { return static_cast<int>(rows.size()); }
    int d() const { return rows.empty() ? 0 : static_cast<int>(rows.front().size()); }
    // Per-observation trial totals N_i.
    std::vector<int> trials() const;
    // Throws std::invalid_argument on ragged rows or negative counts.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Subset enumeration
// ---------------------------------------------------------------------------
//
// Subsets S of {0..d-1} \ exclude with 1 <= |S| <= max_size, visited in
// lexicographic order of the sorted member lists ({0} < {0,1} < {0,2} < {1}).
// Iteration is lazy: the only state is the current subset, so walking all
// 2^q subsets never materializes them at once.

class SubsetRange {
public:
    SubsetRange(int d, std::span<const int> exclude, int max_size);
    // Convenience: ground set given directly (sorted ascending).
    SubsetRange(std::vector<int> ground, int max_size);

    class iterator {
    public:
        using value_type = std::vector<int>;

        iterator() = default; // past-the-end
        const std::vector<int>& operator*() const { return subset_; }
        iterator& operator++();
        bool operator!=(const iterator& other) const { return !done_ || !other.done_; }
        bool at_end() const { return done_; }

    private:
        friend class SubsetRange;
        iterator(const std::vector<int>* ground, int max_size);

        const std::vector<int>* ground_ = nullptr;
        std::vector<int> pos_;    // indices into *ground_
        std::vector<int> subset_; // current member values
        int max_size_ = 0;
        bool done_ = true;
    };

    iterator begin() const;
    iterator end() const;

private:
    std::vector<int> ground_;
    int max_size_;
};

// All subsets K of {0..d-1} \ exclude with 1 <= |K| <= d - 2, materialized in
// the order above.  This is the index family the reduced mixture components
// range over; exclude = {j} (resp. {j, h}) gives the families behind the
// marginal (resp. covariance) expansions.
std::vector<std::vector<int>> enumerate_subsets(int d, std::span<const int> exclude);

// ---------------------------------------------------------------------------
// Mixture components
// ---------------------------------------------------------------------------

enum class ComponentKind { Full, Reduced, NInflated, AllZero };

struct ComponentDescriptor {
    ComponentKind kind = ComponentKind::Full;
    // Reduced: the zeroed category set K (sorted); NInflated: {j}; else empty.
    std::vector<int> subset;
};

// Lazily yields the mixture components with positive mass at y, in
// deterministic order: Full (absent when y is all zero), Reduced(K) for
// non-empty K inside the zero set of y with |K| <= d - 2 in subset order,
// then NInflated(j) when exactly one category is positive, or AllZero when
// none is.  The count is always 2^q for q = #zeros < d, and 1 when q = d.
class ComponentRange {
public:
    explicit ComponentRange(const CountVector& y);

    class iterator {
    public:
        iterator() = default; // past-the-end
        const ComponentDescriptor& operator*() const { return cur_; }
        iterator& operator++();
        bool operator!=(const iterator& other) const { return !done_ || !other.done_; }

    private:
        friend class ComponentRange;
        enum class Stage { Full, Reduced, Tail, Done };

        void enter_reduced_or_tail();
        void enter_tail_or_finish();

        Stage stage_ = Stage::Done;
        SubsetRange::iterator sub_;
        const ComponentRange* parent_ = nullptr;
        ComponentDescriptor cur_;
        bool done_ = true;
    };

    iterator begin() const;
    iterator end() const;

    int dim() const { return d_; }
    const std::vector<int>& zero_set() const { return zeros_; }

private:
    int d_ = 0;
    std::vector<int> zeros_;    // sorted zero categories
    int positive_ = -1;         // the single positive category when q = d-1
    SubsetRange reduced_;
};

ComponentRange consistent_components(const CountVector& y);

// ---------------------------------------------------------------------------
// Mixture weights
// ---------------------------------------------------------------------------

struct MixtureWeights {
    double eta_full = 0.0;                       // all categories active
    double eta_zero = 0.0;                       // all categories inflated
    std::vector<double> eta_n;                   // N-inflation weight per category
    std::map<std::vector<int>, double> eta_k;    // reduced weights, |K| in [1, d-2]

    double total() const;
};

// Materializes every weight; the eta_k map has 2^d - d - 2 entries, so this is
// for small d only (throws std::invalid_argument beyond d = 20).  Weights are
// built from prefix/suffix products without any division, so zeta_j equal to
// exactly 0 or 1 yields exact 0/1 weights.
MixtureWeights mixture_weights(std::span<const double> zeta);

// Log-domain weight of single components, computed on the fly so PMF and
// marginal evaluations never materialize the weight map.  Exact-zero factors
// are tracked by count, never by log-space subtraction, so zeta values of
// exactly 0 or 1 give exact -inf / finite results (no NaN from inf - inf).
class LogWeightTable {
public:
    explicit LogWeightTable(std::span<const double> zeta);

    double log_eta_full() const;
    double log_eta_zero() const;
    double log_eta_n(int j) const;
    // K must be sorted; O(|K|).
    double log_eta_reduced(std::span<const int> subset) const;
    double log_component_weight(const ComponentDescriptor& c) const;

    int dim() const { return static_cast<int>(log_z_.size()); }

private:
    std::vector<double> log_z_;   // log zeta_j        (-inf when zeta_j = 0)
    std::vector<double> log_1m_;  // log(1 - zeta_j)   (-inf when zeta_j = 1)
    std::vector<double> fin_1m_;  // log_1m_ with -inf replaced by 0 (for sums)
    std::vector<int> ones_;       // 1 when zeta_j = 1
    double sum_fin_1m_ = 0.0;     // sum of finite log(1-zeta_j)
    double sum_log_z_ = 0.0;      // sum of log zeta_j (-inf if any zeta_j = 0)
    int n_ones_ = 0;              // #{j : zeta_j = 1}
};

void validate_zeta(std::span<const double> zeta);

// ---------------------------------------------------------------------------
// Dense row-major matrix (draws, loglik)
// ---------------------------------------------------------------------------

struct Matrix {
    std::size_t nrow = 0, ncol = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : nrow(r), ncol(c), v(r * c, fill) {}
    double& operator()(std::size_t i, std::size_t j) { return v[i * ncol + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v[i * ncol + j]; }
    std::span<const double> row(std::size_t i) const { return {v.data() + i * ncol, ncol}; }
};

} // namespace zani
