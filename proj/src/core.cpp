#include "zani/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zani {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double log_gamma_fn(double x) {
    if (!(x > 0.0))
        throw std::invalid_argument("log_gamma_fn: argument must be positive");
    return std::lgamma(x);
}

double digamma(double x) {
    if (!(x > 0.0))
        throw std::invalid_argument("digamma: argument must be positive");
    double result = 0.0;
    while (x < 8.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic series with Bernoulli coefficients through x^-12.
    const double inv = 1.0 / x, inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv
        - inv2 * (1.0 / 12.0
        - inv2 * (1.0 / 120.0
        - inv2 * (1.0 / 252.0
        - inv2 * (1.0 / 240.0
        - inv2 * (1.0 / 132.0
        - inv2 * (691.0 / 32760.0))))));
    return result;
}

double trigamma(double x) {
    if (!(x > 0.0))
        throw std::invalid_argument("trigamma: argument must be positive");
    double result = 0.0;
    while (x < 8.0) {
        result += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x, inv2 = inv * inv;
    result += inv * (1.0
        + inv * (0.5
        + inv * (1.0 / 6.0
        + inv2 * (-1.0 / 30.0
        + inv2 * (1.0 / 42.0
        + inv2 * (-1.0 / 30.0
        + inv2 * (5.0 / 66.0)))))));
    return result;
}

double trigamma_inverse(double v) {
    if (!(v > 0.0))
        throw std::invalid_argument("trigamma_inverse: value must be positive");
    double lo = 1e-12, hi = 1e12;
    // trigamma is strictly decreasing: bisect until the bracket closes.
    while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (trigamma(mid) > v)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("log_beta: arguments must be positive");
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_multinomial_coeff(int n, std::span<const int> counts) {
    long long total = 0;
    double denom = 0.0;
    for (int c : counts) {
        if (c < 0)
            throw std::invalid_argument("log_multinomial_coeff: negative count");
        total += c;
        denom += std::lgamma(static_cast<double>(c) + 1.0);
    }
    if (total != n)
        throw std::invalid_argument("log_multinomial_coeff: counts do not sum to n");
    return std::lgamma(static_cast<double>(n) + 1.0) - denom;
}

double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double x : v)
        if (x > m) m = x;
    if (m == kNegInf || std::isnan(m)) return m;
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - m);
    return m + std::log(s);
}

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// ---------------------------------------------------------------------------
// Count data
// ---------------------------------------------------------------------------

std::vector<int> CountDataset::trials() const {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        int s = 0;
        for (int y : r) s += y;
        out.push_back(s);
    }
    return out;
}

void CountDataset::validate() const {
    const std::size_t dim = rows.empty() ? 0 : rows.front().size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim)
            throw std::invalid_argument("dataset: ragged row " + std::to_string(i + 1));
        for (int y : rows[i])
            if (y < 0)
                throw std::invalid_argument("dataset: negative count in row " + std::to_string(i + 1));
    }
}

// ---------------------------------------------------------------------------
// Subset enumeration
// ---------------------------------------------------------------------------

SubsetRange::SubsetRange(int d, std::span<const int> exclude, int max_size)
    : max_size_(max_size) {
    ground_.reserve(d);
    for (int j = 0; j < d; ++j)
        if (std::find(exclude.begin(), exclude.end(), j) == exclude.end())
            ground_.push_back(j);
}

SubsetRange::SubsetRange(std::vector<int> ground, int max_size)
    : ground_(std::move(ground)), max_size_(max_size) {}

SubsetRange::iterator::iterator(const std::vector<int>* ground, int max_size)
    : ground_(ground), max_size_(max_size) {
    if (max_size_ >= 1 && !ground_->empty()) {
        pos_.push_back(0);
        subset_.push_back((*ground_)[0]);
        done_ = false;
    }
}

SubsetRange::iterator& SubsetRange::iterator::operator++() {
    const int g = static_cast<int>(ground_->size());
    // Depth-first, lexicographic: extend with the next larger element if the
    // size cap allows, otherwise back up and advance the last element.
    if (static_cast<int>(pos_.size()) < max_size_ && pos_.back() + 1 < g) {
        pos_.push_back(pos_.back() + 1);
        subset_.push_back((*ground_)[pos_.back()]);
        return *this;
    }
    while (!pos_.empty()) {
        int p = pos_.back();
        pos_.pop_back();
        subset_.pop_back();
        if (p + 1 < g) {
            pos_.push_back(p + 1);
            subset_.push_back((*ground_)[p + 1]);
            return *this;
        }
    }
    done_ = true;
    return *this;
}

SubsetRange::iterator SubsetRange::begin() const { return iterator(&ground_, max_size_); }
SubsetRange::iterator SubsetRange::end() const { return iterator(); }

std::vector<std::vector<int>> enumerate_subsets(int d, std::span<const int> exclude) {
    if (d < 0) throw std::invalid_argument("enumerate_subsets: d must be >= 0");
    std::vector<std::vector<int>> out;
    for (const auto& s : SubsetRange(d, exclude, d - 2))
        out.push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// Mixture components
// ---------------------------------------------------------------------------

ComponentRange::ComponentRange(const CountVector& y)
    : d_(static_cast<int>(y.size())), reduced_({}, 0) {
    for (int j = 0; j < d_; ++j) {
        if (y[j] < 0)
            throw std::invalid_argument("consistent_components: negative count");
        if (y[j] == 0)
            zeros_.push_back(j);
        else
            positive_ = j;
    }
    reduced_ = SubsetRange(zeros_, d_ - 2);
}

void ComponentRange::iterator::enter_tail_or_finish() {
    const int d = parent_->d_;
    const int q = static_cast<int>(parent_->zeros_.size());
    if (q == d) {
        stage_ = Stage::Tail;
        cur_ = {ComponentKind::AllZero, {}};
    } else if (q == d - 1) {
        stage_ = Stage::Tail;
        cur_ = {ComponentKind::NInflated, {parent_->positive_}};
    } else {
        stage_ = Stage::Done;
        done_ = true;
    }
}

void ComponentRange::iterator::enter_reduced_or_tail() {
    sub_ = parent_->reduced_.begin();
    if (!sub_.at_end()) {
        stage_ = Stage::Reduced;
        cur_ = {ComponentKind::Reduced, *sub_};
    } else {
        enter_tail_or_finish();
    }
}

ComponentRange::iterator& ComponentRange::iterator::operator++() {
    switch (stage_) {
    case Stage::Full:
        enter_reduced_or_tail();
        break;
    case Stage::Reduced:
        ++sub_;
        if (!sub_.at_end())
            cur_ = {ComponentKind::Reduced, *sub_};
        else
            enter_tail_or_finish();
        break;
    case Stage::Tail:
    case Stage::Done:
        stage_ = Stage::Done;
        done_ = true;
        break;
    }
    return *this;
}

ComponentRange::iterator ComponentRange::begin() const {
    iterator it;
    it.parent_ = this;
    it.done_ = false;
    if (static_cast<int>(zeros_.size()) == d_) {
        // All-zero observation: the point mass is the only consistent component.
        it.stage_ = iterator::Stage::Tail;
        it.cur_ = {ComponentKind::AllZero, {}};
    } else {
        it.stage_ = iterator::Stage::Full;
        it.cur_ = {ComponentKind::Full, {}};
    }
    return it;
}

ComponentRange::iterator ComponentRange::end() const { return iterator(); }

ComponentRange consistent_components(const CountVector& y) { return ComponentRange(y); }

// ---------------------------------------------------------------------------
// Mixture weights
// ---------------------------------------------------------------------------

void validate_zeta(std::span<const double> zeta) {
    for (double z : zeta)
        if (!(z >= 0.0) || !(z <= 1.0))
            throw std::invalid_argument("zeta entries must lie in [0, 1]");
}

double MixtureWeights::total() const {
    double s = eta_full + eta_zero;
    for (double w : eta_n) s += w;
    for (const auto& [k, w] : eta_k) s += w;
    return s;
}

namespace {

void collect_reduced_weights(std::span<const double> zeta, int idx, int d,
                             std::vector<int>& subset, double prod,
                             std::map<std::vector<int>, double>& out) {
    if (static_cast<int>(subset.size()) > d - 2) return;
    if (idx == d) {
        int k = static_cast<int>(subset.size());
        if (k >= 1 && k <= d - 2) out.emplace(subset, prod);
        return;
    }
    subset.push_back(idx);
    collect_reduced_weights(zeta, idx + 1, d, subset, prod * zeta[idx], out);
    subset.pop_back();
    collect_reduced_weights(zeta, idx + 1, d, subset, prod * (1.0 - zeta[idx]), out);
}

} // namespace

MixtureWeights mixture_weights(std::span<const double> zeta) {
    validate_zeta(zeta);
    const int d = static_cast<int>(zeta.size());
    if (d < 2)
        throw std::invalid_argument("mixture_weights: need at least 2 categories");
    if (d > 20)
        throw std::invalid_argument(
            "mixture_weights: materializing 2^d weights is impractical beyond d = 20; "
            "use LogWeightTable for on-the-fly weights");

    // Prefix/suffix products share work across the d inflation weights and,
    // because no weight is ever formed by dividing a full product, zeta values
    // of exactly 0 or 1 propagate to exact 0/1 weights.
    std::vector<double> pref_z(d + 1, 1.0), suf_z(d + 1, 1.0), pref_m(d + 1, 1.0);
    for (int j = 0; j < d; ++j) {
        pref_z[j + 1] = pref_z[j] * zeta[j];
        pref_m[j + 1] = pref_m[j] * (1.0 - zeta[j]);
    }
    for (int j = d - 1; j >= 0; --j) suf_z[j] = suf_z[j + 1] * zeta[j];

    MixtureWeights w;
    w.eta_full = pref_m[d];
    w.eta_zero = suf_z[0];
    w.eta_n.resize(d);
    for (int j = 0; j < d; ++j)
        w.eta_n[j] = pref_z[j] * (1.0 - zeta[j]) * suf_z[j + 1];

    std::vector<int> subset;
    collect_reduced_weights(zeta, 0, d, subset, 1.0, w.eta_k);
    return w;
}

LogWeightTable::LogWeightTable(std::span<const double> zeta) {
    validate_zeta(zeta);
    const int d = static_cast<int>(zeta.size());
    log_z_.resize(d);
    log_1m_.resize(d);
    fin_1m_.resize(d);
    ones_.resize(d);
    sum_log_z_ = 0.0;
    for (int j = 0; j < d; ++j) {
        log_z_[j] = std::log(zeta[j]);          // -inf when zeta_j = 0
        log_1m_[j] = std::log1p(-zeta[j]);      // -inf when zeta_j = 1
        ones_[j] = (zeta[j] == 1.0) ? 1 : 0;
        fin_1m_[j] = ones_[j] ? 0.0 : log_1m_[j];
        n_ones_ += ones_[j];
        sum_fin_1m_ += fin_1m_[j];
        sum_log_z_ += log_z_[j];
    }
}

double LogWeightTable::log_eta_full() const {
    return n_ones_ > 0 ? kNegInf : sum_fin_1m_;
}

double LogWeightTable::log_eta_zero() const {
    return sum_log_z_; // already -inf when any zeta_j = 0
}

double LogWeightTable::log_eta_n(int j) const {
    if (ones_[j]) return kNegInf;            // factor (1 - zeta_j) = 0
    // Any other category with zeta_k = 0 kills prod_{k != j} zeta_k.
    double sum_others = 0.0;
    if (log_z_[j] == kNegInf) {
        // zeta_j = 0: sum the remaining entries directly so the -inf of entry
        // j is never subtracted out (inf - inf would be NaN).
        for (int k = 0; k < dim(); ++k) {
            if (k == j) continue;
            if (log_z_[k] == kNegInf) return kNegInf;
            sum_others += log_z_[k];
        }
    } else {
        if (sum_log_z_ == kNegInf) return kNegInf; // some other zeta_k = 0
        sum_others = sum_log_z_ - log_z_[j];
    }
    return log_1m_[j] + sum_others;
}

double LogWeightTable::log_eta_reduced(std::span<const int> subset) const {
    double acc_z = 0.0, acc_1m_in = 0.0;
    int ones_in = 0;
    for (int k : subset) {
        if (log_z_[k] == kNegInf) return kNegInf; // zeta_k = 0 inside K
        acc_z += log_z_[k];
        ones_in += ones_[k];
        acc_1m_in += fin_1m_[k];
    }
    if (n_ones_ - ones_in > 0) return kNegInf;    // zeta_j = 1 outside K
    return acc_z + (sum_fin_1m_ - acc_1m_in);
}

double LogWeightTable::log_component_weight(const ComponentDescriptor& c) const {
    switch (c.kind) {
    case ComponentKind::Full: return log_eta_full();
    case ComponentKind::AllZero: return log_eta_zero();
    case ComponentKind::NInflated: return log_eta_n(c.subset.front());
    case ComponentKind::Reduced: return log_eta_reduced(c.subset);
    }
    return kNegInf;
}

} // namespace zani
