#include "zani/loglik.hpp"

#include <span>
#include <stdexcept>
#include <vector>

#include "zani/distributions.hpp"

namespace zani {

namespace {

int draws_dim(const CountDataset& data, const Matrix& draws, bool has_zeta) {
    const std::size_t d = data.d();
    const std::size_t want = has_zeta ? 2 * d : d;
    if (draws.ncol != want) {
        throw std::invalid_argument("loglik matrix: draws have " + std::to_string(draws.ncol) +
                                    " columns but the dataset implies " + std::to_string(want));
    }
    return static_cast<int>(d);
}

// Shared driver: entry (m, i) = log_pmf(row i, draw m).  Every entry is an
// independent pure computation, so the threaded and serial paths produce
// identical bits.
template <typename LogPmf>
Matrix loglik_matrix_impl(const CountDataset& data, const Matrix& draws, bool has_zeta,
                          bool threaded, LogPmf&& log_pmf) {
    const int d = draws_dim(data, draws, has_zeta);
    const long long m_draws = static_cast<long long>(draws.nrow);
    const int n = data.n();
    Matrix out(draws.nrow, static_cast<std::size_t>(n));

    auto fill_row = [&](long long m) {
        std::vector<double> shape(draws.row(static_cast<std::size_t>(m)).begin(),
                                  draws.row(static_cast<std::size_t>(m)).begin() + d);
        std::vector<double> zeta(d, 0.0);
        if (has_zeta) {
            auto row = draws.row(static_cast<std::size_t>(m));
            zeta.assign(row.begin() + d, row.begin() + 2 * d);
        }
        for (int i = 0; i < n; ++i) {
            out(static_cast<std::size_t>(m), static_cast<std::size_t>(i)) =
                log_pmf(data.rows[static_cast<std::size_t>(i)], shape, zeta);
        }
    };

    if (threaded) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long m = 0; m < m_draws; ++m) fill_row(m);
    } else {
        for (long long m = 0; m < m_draws; ++m) fill_row(m);
    }
    return out;
}

double zanim_entry(const CountVector& y, const std::vector<double>& theta,
                   const std::vector<double>& zeta) {
    ZanimParams p{theta, zeta};
    return zanim_log_pmf(y, p);
}

double zanidm_entry(const CountVector& y, const std::vector<double>& alpha,
                    const std::vector<double>& zeta) {
    ZanidmParams p{alpha, zeta};
    return zanidm_log_pmf(y, p);
}

} // namespace

Matrix zanim_loglik_matrix(const CountDataset& data, const Matrix& draws, bool has_zeta) {
    return loglik_matrix_impl(data, draws, has_zeta, true, zanim_entry);
}

Matrix zanim_loglik_matrix_serial(const CountDataset& data, const Matrix& draws, bool has_zeta) {
    return loglik_matrix_impl(data, draws, has_zeta, false, zanim_entry);
}

Matrix zanidm_loglik_matrix(const CountDataset& data, const Matrix& draws, bool has_zeta) {
    return loglik_matrix_impl(data, draws, has_zeta, true, zanidm_entry);
}

Matrix zanidm_loglik_matrix_serial(const CountDataset& data, const Matrix& draws, bool has_zeta) {
    return loglik_matrix_impl(data, draws, has_zeta, false, zanidm_entry);
}

} // namespace zani
