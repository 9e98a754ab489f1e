#pragma once

// Per-draw, per-observation log-PMF matrices evaluated over retained MCMC
// draws.  Entry (m, i) is the marginal model log-PMF of observation i at the
// parameters of draw m — the augmented variables play no role here.
//
// Each function has a `_serial` reference twin.  The default entry points
// parallelize over draws with OpenMP when available and are required to
// produce bitwise-identical output to the serial versions (every entry is an
// independent pure computation).  `zani_bench` compares their throughput.

#include "zani/core.hpp"

namespace zani {

// `draws` columns: theta1..thetaD (or alpha1..alphaD), then zeta1..zetaD when
// has_zeta; with has_zeta == false the inactivity probabilities are taken to
// be exactly zero (the multinomial / Dirichlet-multinomial baselines).

Matrix zanim_loglik_matrix(const CountDataset& data, const Matrix& draws, bool has_zeta);
Matrix zanim_loglik_matrix_serial(const CountDataset& data, const Matrix& draws, bool has_zeta);

Matrix zanidm_loglik_matrix(const CountDataset& data, const Matrix& draws, bool has_zeta);
Matrix zanidm_loglik_matrix_serial(const CountDataset& data, const Matrix& draws, bool has_zeta);

} // namespace zani
