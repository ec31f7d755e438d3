#ifndef NETCLASS_CLASSIFIERS_HPP
#define NETCLASS_CLASSIFIERS_HPP

#include "netclass/dataset.hpp"
#include "netclass/features.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace netclass {

/// Nearest-mean classifier: unweighted class means over the feature columns.
struct TrainedNMC {
    std::vector<double> mean_good;
    std::vector<double> mean_poor;
    /// Set when both class means coincide; such a model scores every sample 0.
    bool degenerate = false;
};

/**
 * Fits class means on the first `n_columns` columns of `X` (all when 0).
 * Raises SingleClass if either class is empty.
 */
TrainedNMC nmc_train(const FeatureMatrix& X, std::span<const Label> labels, std::size_t n_columns = 0);

/**
 * Projects each sample onto the line through the class means and returns its
 * signed position, scaled so that mean_good scores -|d|, mean_poor scores +|d|
 * and the midpoint scores 0 (d = mean_poor - mean_good). Between the means this
 * is d(proj, mean_good) - d(proj, mean_poor); beyond them it keeps growing.
 * Positive scores lean towards poor outcome.
 */
std::vector<double> nmc_score(const TrainedNMC& model, const FeatureMatrix& X);

struct LogRegParams {
    /// Convergence threshold on the max-norm of the log-likelihood gradient.
    double tolerance = 1e-8;
    std::size_t max_iterations = 100;
    /// Fits whose weights exceed this max-norm are declared divergent.
    double divergence_bound = 1e6;
};

enum class ConvergenceFailure { None, Separation, Divergence, MaxIterations };

std::string_view to_string(ConvergenceFailure reason);

struct TrainedLogReg {
    std::vector<double> weights;
    double intercept = 0;
    bool converged = false;
    ConvergenceFailure failure = ConvergenceFailure::None;
    std::size_t iterations = 0;
    double gradient_norm = 0;
};

/**
 * Unregularized maximum-likelihood logistic regression by iteratively
 * reweighted least squares. Newton steps use a minimum-norm solve, so
 * rank-deficient designs (e.g. all-zero columns) keep those weights at 0.
 * Perfect separation, detected when an iterate classifies every training
 * sample strictly correctly, yields `converged = false` with `Separation`.
 */
TrainedLogReg logreg_train(const FeatureMatrix& X, std::span<const Label> labels, const LogRegParams& params = {},
                           std::size_t n_columns = 0);

/// Probabilities of poor outcome. Raises NonConvergentModel for unconverged fits.
std::vector<double> logreg_score(const TrainedLogReg& model, const FeatureMatrix& X);

nlohmann::json to_json(const TrainedNMC& model);
nlohmann::json to_json(const TrainedLogReg& model);

}

#endif
