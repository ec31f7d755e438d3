#include "netclass/classifiers.hpp"
#include "netclass/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace netclass {

namespace {

std::size_t resolve_columns(const FeatureMatrix& X, std::size_t n_columns) {
    if (n_columns == 0) {
        return X.n_columns();
    }
    if (n_columns > X.n_columns()) {
        throw Error(ErrorCode::DimensionMismatch, "requested more columns than the feature matrix holds");
    }
    return n_columns;
}

void check_labels(const FeatureMatrix& X, std::span<const Label> labels) {
    if (labels.size() != X.n_samples) {
        throw Error(ErrorCode::DimensionMismatch, "label count does not match feature matrix");
    }
    const auto poor = std::count(labels.begin(), labels.end(), Label{1});
    if (poor == 0 || static_cast<std::size_t>(poor) == labels.size()) {
        throw Error(ErrorCode::SingleClass, "training requires both classes");
    }
}

}

TrainedNMC nmc_train(const FeatureMatrix& X, std::span<const Label> labels, std::size_t n_columns) {
    check_labels(X, labels);
    const auto p = resolve_columns(X, n_columns);
    TrainedNMC model;
    model.mean_good.assign(p, 0.0);
    model.mean_poor.assign(p, 0.0);
    double count[2] = {0, 0};
    for (auto l : labels) {
        count[l] += 1;
    }
    for (std::size_t c = 0; c < p; ++c) {
        auto col = X.column(c);
        double sum[2] = {0, 0};
        for (std::size_t i = 0; i < col.size(); ++i) {
            sum[labels[i]] += col[i];
        }
        model.mean_good[c] = sum[0] / count[0];
        model.mean_poor[c] = sum[1] / count[1];
    }
    model.degenerate = model.mean_good == model.mean_poor;
    return model;
}

std::vector<double> nmc_score(const TrainedNMC& model, const FeatureMatrix& X) {
    const auto p = model.mean_good.size();
    if (p > X.n_columns()) {
        throw Error(ErrorCode::DimensionMismatch, "model has more features than the matrix");
    }
    std::vector<double> scores(X.n_samples, 0.0);
    if (model.degenerate) {
        return scores;
    }

    std::vector<double> w(p);
    double ww = 0;
    for (std::size_t c = 0; c < p; ++c) {
        w[c] = model.mean_poor[c] - model.mean_good[c];
        ww += w[c] * w[c];
    }
    const double length = std::sqrt(ww);

    // Position along the line: 0 at the good-class mean, 1 at the poor-class mean.
    std::vector<double> t(X.n_samples, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        auto col = X.column(c);
        for (std::size_t i = 0; i < X.n_samples; ++i) {
            t[i] += (col[i] - model.mean_good[c]) * w[c];
        }
    }
    for (std::size_t i = 0; i < X.n_samples; ++i) {
        scores[i] = (2.0 * t[i] / ww - 1.0) * length;
    }
    return scores;
}

std::string_view to_string(ConvergenceFailure reason) {
    switch (reason) {
        case ConvergenceFailure::None: return "none";
        case ConvergenceFailure::Separation: return "separation";
        case ConvergenceFailure::Divergence: return "divergence";
        case ConvergenceFailure::MaxIterations: return "max_iterations";
    }
    return "unknown";
}

TrainedLogReg logreg_train(const FeatureMatrix& X, std::span<const Label> labels, const LogRegParams& params, std::size_t n_columns) {
    check_labels(X, labels);
    const auto p = resolve_columns(X, n_columns);
    const auto n = X.n_samples;

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    for (std::size_t c = 0; c < p; ++c) {
        auto col = X.column(c);
        for (std::size_t i = 0; i < n; ++i) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c + 1)) = col[i];
        }
    }
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[i];
    }

    TrainedLogReg model;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
    for (std::size_t iter = 0;; ++iter) {
        const Eigen::VectorXd eta = design * beta;
        const Eigen::VectorXd prob = eta.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        const Eigen::VectorXd gradient = design.transpose() * (y - prob);
        model.iterations = iter;
        model.gradient_norm = gradient.lpNorm<Eigen::Infinity>();

        if (model.gradient_norm <= params.tolerance) {
            model.converged = true;
            break;
        }
        // A strictly separating iterate means the likelihood has no finite maximizer.
        if (iter > 0) {
            bool separates = true;
            for (Eigen::Index i = 0; i < eta.size() && separates; ++i) {
                separates = (y(i) > 0.5) ? eta(i) > 0 : eta(i) < 0;
            }
            if (separates) {
                model.failure = ConvergenceFailure::Separation;
                break;
            }
        }
        if (iter >= params.max_iterations) {
            model.failure = ConvergenceFailure::MaxIterations;
            break;
        }

        const Eigen::VectorXd w = prob.unaryExpr([](double v) { return v * (1.0 - v); });
        const Eigen::MatrixXd hessian = design.transpose() * w.asDiagonal() * design;
        const Eigen::VectorXd step = hessian.completeOrthogonalDecomposition().solve(gradient);
        beta += step;
        if (!beta.allFinite() || beta.lpNorm<Eigen::Infinity>() > params.divergence_bound) {
            model.failure = ConvergenceFailure::Divergence;
            break;
        }
    }

    model.intercept = beta(0);
    model.weights.assign(beta.data() + 1, beta.data() + beta.size());
    return model;
}

std::vector<double> logreg_score(const TrainedLogReg& model, const FeatureMatrix& X) {
    if (!model.converged) {
        throw Error(ErrorCode::NonConvergentModel, std::string("cannot score with a non-convergent model (") +
                    std::string(to_string(model.failure)) + ")");
    }
    const auto p = model.weights.size();
    if (p > X.n_columns()) {
        throw Error(ErrorCode::DimensionMismatch, "model has more features than the matrix");
    }
    std::vector<double> eta(X.n_samples, model.intercept);
    for (std::size_t c = 0; c < p; ++c) {
        auto col = X.column(c);
        for (std::size_t i = 0; i < X.n_samples; ++i) {
            eta[i] += model.weights[c] * col[i];
        }
    }
    for (auto& v : eta) {
        v = 1.0 / (1.0 + std::exp(-v));
    }
    return eta;
}

nlohmann::json to_json(const TrainedNMC& model) {
    return {{"type", "nmc"}, {"mean_good", model.mean_good}, {"mean_poor", model.mean_poor}, {"degenerate", model.degenerate}};
}

nlohmann::json to_json(const TrainedLogReg& model) {
    return {{"type", "logreg"},
            {"weights", model.weights},
            {"intercept", model.intercept},
            {"converged", model.converged},
            {"failure", to_string(model.failure)},
            {"iterations", model.iterations},
            {"gradient_norm", model.gradient_norm}};
}

}
