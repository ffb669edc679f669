#ifndef PURSUIT_MODELS_HPP
#define PURSUIT_MODELS_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "pursuit/customer.hpp"
#include "pursuit/record.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::models {

/// Fixed-width rows, no missing values; multi-target supported.
struct Dataset {
    std::vector<std::vector<double>> x;
    std::vector<std::vector<double>> y;

    void add(std::vector<double> xi, std::vector<double> yi);
    std::size_t rows() const { return x.size(); }
    std::size_t x_dim() const { return x.empty() ? 0 : x[0].size(); }
    std::size_t y_dim() const { return y.empty() ? 0 : y[0].size(); }
};

/// One-hot categoricals plus raw numerics.
struct FeatureEncoder {
    static std::vector<double> encode(const CustomerFeatures& c);
    static std::size_t dim();
};

// ---------------------------------------------------------------------------
// Random forest (bagged multi-output regression trees, axis-aligned splits)

struct ForestParams {
    int n_trees = 50;
    int max_depth = 10;
    int min_leaf = 5;
    int mtry = 0; // 0 = max(1, d/3)
};

class RandomForest {
public:
    void fit(const Dataset& data, const ForestParams& params, Rng& rng);
    std::vector<double> predict(const std::vector<double>& x) const;
    bool fitted() const { return !trees_.empty(); }

    struct Node {
        int feature = -1; // -1 = leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        std::vector<double> value; // leaf mean
    };
    struct Tree {
        std::vector<Node> nodes;
    };

    const std::vector<Tree>& trees() const { return trees_; }
    void set_state(std::vector<Tree> trees, std::vector<double> lo, std::vector<double> hi,
                   std::size_t y_dim);
    const std::vector<double>& input_lo() const { return lo_; }
    const std::vector<double>& input_hi() const { return hi_; }
    std::size_t y_dim() const { return y_dim_; }

private:
    std::vector<Tree> trees_;
    std::vector<double> lo_, hi_; // training input range; queries are clamped
    std::size_t y_dim_ = 0;
};

// ---------------------------------------------------------------------------
// Small feed-forward network, tanh hidden layers

struct MlpParams {
    int hidden1 = 16;
    int hidden2 = 16;
    double learning_rate = 0.05;
    int epochs = 300;
    int batch = 32;
    bool logistic_output = true; // false = linear output, MSE loss
};

class Mlp {
public:
    void init(std::size_t input_dim, const MlpParams& params, Rng& rng);
    void fit(const Dataset& data, Rng& rng);
    double predict(const std::vector<double>& x) const;

    /// Mean loss over the dataset (log-loss or MSE per output mode) and its
    /// gradient with respect to the flattened parameter vector.
    double loss_and_grad(const Dataset& data, std::vector<double>& grad) const;
    std::vector<double>& parameters() { return theta_; }
    const std::vector<double>& parameters() const { return theta_; }

    const MlpParams& params() const { return params_; }
    std::size_t input_dim() const { return input_dim_; }
    void set_state(std::size_t input_dim, MlpParams params, std::vector<double> theta,
                   std::vector<double> mean, std::vector<double> sd,
                   std::vector<double> lo, std::vector<double> hi);
    const std::vector<double>& standardise_mean() const { return mean_; }
    const std::vector<double>& standardise_sd() const { return sd_; }
    const std::vector<double>& input_lo() const { return lo_; }
    const std::vector<double>& input_hi() const { return hi_; }

private:
    double forward(const double* x) const;
    std::size_t param_count() const;

    std::size_t input_dim_ = 0;
    MlpParams params_;
    std::vector<double> theta_;
    std::vector<double> mean_, sd_; // input standardisation
    std::vector<double> lo_, hi_;   // raw-input clamp range
};

// ---------------------------------------------------------------------------
// Gaussian process regression, Matern-5/2 kernel, fixed hyperparameters

struct GpParams {
    double lengthscale = 0.3; // on standardised inputs
    double noise = 1e-4;
};

class GpRegressor {
public:
    void fit(const Dataset& data, const GpParams& params, Rng& rng);
    double predict(const std::vector<double>& x) const;
    bool fitted() const { return n_ > 0; }

    const GpParams& params() const { return params_; }
    void set_state(GpParams params, std::size_t n, std::size_t d,
                   std::vector<double> basis, std::vector<double> alpha,
                   std::vector<double> mean, std::vector<double> sd,
                   std::vector<double> lo, std::vector<double> hi,
                   double y_mean, double y_sd);
    std::size_t basis_size() const { return n_; }
    std::size_t input_size() const { return d_; }
    const std::vector<double>& basis() const { return basis_; }
    const std::vector<double>& alpha() const { return alpha_; }
    const std::vector<double>& standardise_mean() const { return mean_; }
    const std::vector<double>& standardise_sd() const { return sd_; }
    const std::vector<double>& input_lo() const { return lo_; }
    const std::vector<double>& input_hi() const { return hi_; }
    double y_mean() const { return y_mean_; }
    double y_sd() const { return y_sd_; }

private:
    GpParams params_;
    std::size_t n_ = 0, d_ = 0;
    std::vector<double> basis_; // column-major standardised inputs, d x n
    std::vector<double> alpha_;
    std::vector<double> mean_, sd_;
    std::vector<double> lo_, hi_;
    double y_mean_ = 0.0, y_sd_ = 1.0;
};

// ---------------------------------------------------------------------------
// Pipeline-facing models

/// Customer features -> market variables, outputs sorted so m1 <= m3 <= m5.
class MarketModel {
public:
    market::MarketVariables predict(const CustomerFeatures& c) const;
    RandomForest forest;
};

/// (m, a) -> acceptance probability in [0, 1], monotone non-increasing in the
/// action via isotonic correction on a fixed action grid.
class ConversionModel {
public:
    double predict(const market::MarketVariables& m, double action) const;
    /// Corrected probabilities over action_grid(); cache these when the same
    /// market variables are queried repeatedly.
    std::vector<double> grid_values(const market::MarketVariables& m) const;
    static const std::vector<double>& action_grid();
    static double interpolate_grid(const std::vector<double>& grid_vals, double action);

    Mlp net;
};

/// Market variables (plus a k-value for the k-aware variant) -> action in [1,2].
class ActionModel {
public:
    double predict(const market::MarketVariables& m, double k = 1.0) const;
    bool k_aware() const { return k_aware_; }

    GpRegressor gp;
    bool k_aware_ = false;
};

// ---------------------------------------------------------------------------
// Operations

MarketModel fit_market_model(const Dataset& data, Rng& rng);
ConversionModel fit_conversion_model(const Dataset& data, Rng& rng);

/// argmax over a in [1,2] of accept_prob(a) * (a - k); 64-point grid scan
/// refined by golden-section search around the best grid point.
double optimize_action(const std::function<double(double)>& accept_prob, double k);
double optimize_action(const ConversionModel& p, const market::MarketVariables& m, double k);

ActionModel fit_action_model_plain(const ConversionModel& p,
                                   const std::vector<market::MarketVariables>& market_samples,
                                   Rng& rng);
ActionModel fit_action_model_k(const ConversionModel& p,
                               const std::vector<market::MarketVariables>& market_samples,
                               Rng& rng);

/// Decreasing isotonic fit (pool adjacent violators), exposed for tests.
std::vector<double> isotonic_decreasing(const std::vector<double>& values);

} // namespace pursuit::models

#endif
