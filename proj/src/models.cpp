#include "pursuit/models.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pursuit/kernels.hpp"

namespace pursuit::models {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void clamp_to_range(std::vector<double>& x, const std::vector<double>& lo,
                    const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

void input_range(const std::vector<std::vector<double>>& rows, std::vector<double>& lo,
                 std::vector<double>& hi) {
    const std::size_t d = rows[0].size();
    lo.assign(d, std::numeric_limits<double>::infinity());
    hi.assign(d, -std::numeric_limits<double>::infinity());
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < d; ++i) {
            lo[i] = std::min(lo[i], r[i]);
            hi[i] = std::max(hi[i], r[i]);
        }
    }
}

} // namespace

void Dataset::add(std::vector<double> xi, std::vector<double> yi) {
    if (!x.empty() && (xi.size() != x_dim() || yi.size() != y_dim()))
        throw std::invalid_argument("Dataset: inconsistent row dimensions");
    for (double v : xi)
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature");
    for (double v : yi)
        if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite target");
    x.push_back(std::move(xi));
    y.push_back(std::move(yi));
}

std::vector<double> FeatureEncoder::encode(const CustomerFeatures& c) {
    std::vector<double> out;
    out.reserve(dim());
    out.push_back(c.age);
    out.push_back(c.vehicle_value);
    out.push_back(c.years_licensed);
    out.push_back(c.income);
    out.push_back(c.risk_score);
    for (int r = 0; r < kRegionCount; ++r) out.push_back(c.region == r ? 1.0 : 0.0);
    for (int o = 0; o < kOccupationCount; ++o) out.push_back(c.occupation == o ? 1.0 : 0.0);
    return out;
}

std::size_t FeatureEncoder::dim() { return 5 + kRegionCount + kOccupationCount; }

// ---------------------------------------------------------------------------
// Random forest

namespace {

struct TreeBuilder {
    const Dataset& data;
    const ForestParams& params;
    Rng& rng;
    std::vector<RandomForest::Node>& nodes;
    std::size_t n_outputs;
    int mtry;

    std::vector<double> mean_of(const std::vector<int>& idx) const {
        std::vector<double> m(n_outputs, 0.0);
        for (int i : idx)
            for (std::size_t o = 0; o < n_outputs; ++o) m[o] += data.y[i][o];
        for (auto& v : m) v /= static_cast<double>(idx.size());
        return m;
    }

    int build(std::vector<int>& idx, int depth) {
        const int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node_id].value = mean_of(idx);

        const int n = static_cast<int>(idx.size());
        if (depth >= params.max_depth || n < 2 * params.min_leaf) return node_id;

        // Candidate features for this node.
        const int d = static_cast<int>(data.x_dim());
        std::vector<int> feats(d);
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const auto j = i + static_cast<int>(rng.uniform_int(feats.size() - i));
            std::swap(feats[i], feats[j]);
        }

        double best_gain = 1e-12;
        int best_feat = -1;
        double best_thr = 0.0;

        // Node impurity = sum over outputs of (sum y^2 - (sum y)^2 / n).
        std::vector<double> tot_sum(n_outputs, 0.0), tot_sq(n_outputs, 0.0);
        for (int i : idx) {
            for (std::size_t o = 0; o < n_outputs; ++o) {
                tot_sum[o] += data.y[i][o];
                tot_sq[o] += data.y[i][o] * data.y[i][o];
            }
        }
        double node_imp = 0.0;
        for (std::size_t o = 0; o < n_outputs; ++o)
            node_imp += tot_sq[o] - tot_sum[o] * tot_sum[o] / n;

        std::vector<int> order(idx);
        std::vector<double> left_sum(n_outputs);
        for (int fi = 0; fi < mtry; ++fi) {
            const int f = feats[fi];
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (data.x[a][f] != data.x[b][f]) return data.x[a][f] < data.x[b][f];
                return a < b;
            });
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::vector<double> left_sq(n_outputs, 0.0);
            for (int p = 1; p < n; ++p) {
                const int i = order[p - 1];
                for (std::size_t o = 0; o < n_outputs; ++o) {
                    left_sum[o] += data.y[i][o];
                    left_sq[o] += data.y[i][o] * data.y[i][o];
                }
                if (data.x[order[p - 1]][f] == data.x[order[p]][f]) continue;
                if (p < params.min_leaf || n - p < params.min_leaf) continue;
                double imp = 0.0;
                for (std::size_t o = 0; o < n_outputs; ++o) {
                    const double rs = tot_sum[o] - left_sum[o];
                    const double rq = tot_sq[o] - left_sq[o];
                    imp += left_sq[o] - left_sum[o] * left_sum[o] / p;
                    imp += rq - rs * rs / (n - p);
                }
                const double gain = node_imp - imp;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feat = f;
                    best_thr = 0.5 * (data.x[order[p - 1]][f] + data.x[order[p]][f]);
                }
            }
        }

        if (best_feat < 0) return node_id;

        std::vector<int> left, right;
        for (int i : idx) {
            (data.x[i][best_feat] < best_thr ? left : right).push_back(i);
        }
        if (left.empty() || right.empty()) return node_id;

        nodes[node_id].feature = best_feat;
        nodes[node_id].threshold = best_thr;
        nodes[node_id].left = build(left, depth + 1);
        nodes[node_id].right = build(right, depth + 1);
        return node_id;
    }
};

} // namespace

void RandomForest::fit(const Dataset& data, const ForestParams& params, Rng& rng) {
    if (data.rows() == 0) throw std::invalid_argument("RandomForest: empty dataset");
    const int n = static_cast<int>(data.rows());
    const int d = static_cast<int>(data.x_dim());
    const int mtry = params.mtry > 0 ? params.mtry : std::max(1, d / 3);

    trees_.clear();
    trees_.reserve(params.n_trees);
    y_dim_ = data.y_dim();
    input_range(data.x, lo_, hi_);

    for (int t = 0; t < params.n_trees; ++t) {
        std::vector<int> boot(n);
        for (int i = 0; i < n; ++i) boot[i] = static_cast<int>(rng.uniform_int(n));
        std::sort(boot.begin(), boot.end());
        Tree tree;
        TreeBuilder builder{data, params, rng, tree.nodes, y_dim_, mtry};
        builder.build(boot, 0);
        trees_.push_back(std::move(tree));
    }
}

std::vector<double> RandomForest::predict(const std::vector<double>& x) const {
    if (trees_.empty()) throw std::logic_error("RandomForest: predict before fit");
    std::vector<double> q(x);
    clamp_to_range(q, lo_, hi_);
    std::vector<double> acc(y_dim_, 0.0);
    for (const auto& tree : trees_) {
        int node = 0;
        while (tree.nodes[node].feature >= 0) {
            const auto& nd = tree.nodes[node];
            node = (q[nd.feature] < nd.threshold) ? nd.left : nd.right;
        }
        const auto& leaf = tree.nodes[node].value;
        for (std::size_t o = 0; o < y_dim_; ++o) acc[o] += leaf[o];
    }
    for (auto& v : acc) v /= static_cast<double>(trees_.size());
    return acc;
}

void RandomForest::set_state(std::vector<Tree> trees, std::vector<double> lo,
                             std::vector<double> hi, std::size_t y_dim) {
    trees_ = std::move(trees);
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    y_dim_ = y_dim;
}

// ---------------------------------------------------------------------------
// MLP

std::size_t Mlp::param_count() const {
    const std::size_t d = input_dim_, h1 = params_.hidden1, h2 = params_.hidden2;
    return h1 * d + h1 + h2 * h1 + h2 + h2 + 1;
}

void Mlp::init(std::size_t input_dim, const MlpParams& params, Rng& rng) {
    input_dim_ = input_dim;
    params_ = params;
    theta_.assign(param_count(), 0.0);
    mean_.assign(input_dim, 0.0);
    sd_.assign(input_dim, 1.0);
    lo_.assign(input_dim, -std::numeric_limits<double>::infinity());
    hi_.assign(input_dim, std::numeric_limits<double>::infinity());

    const std::size_t d = input_dim, h1 = params_.hidden1, h2 = params_.hidden2;
    std::size_t off = 0;
    const auto xavier = [&](std::size_t fan_in, std::size_t fan_out, std::size_t count) {
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < count; ++i) theta_[off++] = rng.uniform(-s, s);
    };
    xavier(d, h1, h1 * d);
    off += h1; // biases stay zero
    xavier(h1, h2, h2 * h1);
    off += h2;
    xavier(h2, 1, h2);
    off += 1;
}

double Mlp::forward(const double* x) const {
    const std::size_t d = input_dim_, h1 = params_.hidden1, h2 = params_.hidden2;
    const double* w1 = theta_.data();
    const double* b1 = w1 + h1 * d;
    const double* w2 = b1 + h1;
    const double* b2 = w2 + h2 * h1;
    const double* w3 = b2 + h2;
    const double b3 = w3[h2];

    std::vector<double> a1(h1), a2(h2);
    for (std::size_t j = 0; j < h1; ++j)
        a1[j] = std::tanh(kernels::dot(w1 + j * d, x, d) + b1[j]);
    for (std::size_t j = 0; j < h2; ++j)
        a2[j] = std::tanh(kernels::dot(w2 + j * h1, a1.data(), h1) + b2[j]);
    const double z = kernels::dot(w3, a2.data(), h2) + b3;
    return params_.logistic_output ? logistic(z) : z;
}

double Mlp::predict(const std::vector<double>& x) const {
    if (x.size() != input_dim_) throw std::invalid_argument("Mlp: wrong input size");
    std::vector<double> q(x);
    clamp_to_range(q, lo_, hi_);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = (q[i] - mean_[i]) / sd_[i];
    return forward(q.data());
}

double Mlp::loss_and_grad(const Dataset& data, std::vector<double>& grad) const {
    const std::size_t d = input_dim_, h1 = params_.hidden1, h2 = params_.hidden2;
    grad.assign(theta_.size(), 0.0);
    const double* w1 = theta_.data();
    const double* b1 = w1 + h1 * d;
    const double* w2 = b1 + h1;
    const double* b2 = w2 + h2 * h1;
    const double* w3 = b2 + h2;
    const double b3 = w3[h2];
    double* g1 = grad.data();
    double* gb1 = g1 + h1 * d;
    double* g2 = gb1 + h1;
    double* gb2 = g2 + h2 * h1;
    double* g3 = gb2 + h2;

    std::vector<double> q(d), a1(h1), a2(h2), d2(h2), d1(h1);
    double total = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        q = data.x[r];
        clamp_to_range(q, lo_, hi_);
        for (std::size_t i = 0; i < d; ++i) q[i] = (q[i] - mean_[i]) / sd_[i];

        for (std::size_t j = 0; j < h1; ++j)
            a1[j] = std::tanh(kernels::dot(w1 + j * d, q.data(), d) + b1[j]);
        for (std::size_t j = 0; j < h2; ++j)
            a2[j] = std::tanh(kernels::dot(w2 + j * h1, a1.data(), h1) + b2[j]);
        const double z = kernels::dot(w3, a2.data(), h2) + b3;

        const double target = data.y[r][0];
        double dz;
        if (params_.logistic_output) {
            const double p = std::clamp(logistic(z), 1e-12, 1.0 - 1e-12);
            total += -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
            dz = p - target;
        } else {
            const double diff = z - target;
            total += diff * diff;
            dz = 2.0 * diff;
        }

        kernels::axpy(dz, a2.data(), g3, h2);
        g3[h2] += dz;
        for (std::size_t j = 0; j < h2; ++j) d2[j] = dz * w3[j] * (1.0 - a2[j] * a2[j]);
        for (std::size_t j = 0; j < h2; ++j) {
            kernels::axpy(d2[j], a1.data(), g2 + j * h1, h1);
            gb2[j] += d2[j];
        }
        std::fill(d1.begin(), d1.end(), 0.0);
        for (std::size_t j = 0; j < h2; ++j) kernels::axpy(d2[j], w2 + j * h1, d1.data(), h1);
        for (std::size_t j = 0; j < h1; ++j) {
            const double dpre = d1[j] * (1.0 - a1[j] * a1[j]);
            kernels::axpy(dpre, q.data(), g1 + j * d, d);
            gb1[j] += dpre;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(data.rows());
    for (auto& g : grad) g *= inv_n;
    return total * inv_n;
}

void Mlp::fit(const Dataset& data, Rng& rng) {
    if (data.rows() == 0) throw std::invalid_argument("Mlp: empty dataset");
    if (theta_.empty()) throw std::logic_error("Mlp: init before fit");
    const std::size_t n = data.rows(), d = input_dim_;

    input_range(data.x, lo_, hi_);
    mean_.assign(d, 0.0);
    sd_.assign(d, 0.0);
    for (const auto& row : data.x)
        for (std::size_t i = 0; i < d; ++i) mean_[i] += row[i];
    for (auto& m : mean_) m /= static_cast<double>(n);
    for (const auto& row : data.x)
        for (std::size_t i = 0; i < d; ++i) {
            const double c = row[i] - mean_[i];
            sd_[i] += c * c;
        }
    for (auto& s : sd_) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-9);

    Dataset scaled;
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> q(data.x[r]);
        for (std::size_t i = 0; i < d; ++i) q[i] = (q[i] - mean_[i]) / sd_[i];
        scaled.add(std::move(q), data.y[r]);
    }

    // Plain minibatch SGD; the loss gradient path is shared with
    // loss_and_grad so the finite-difference check covers training too.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Dataset batch;
    std::vector<double> grad;
    Mlp scratch = *this;
    scratch.mean_.assign(d, 0.0);
    scratch.sd_.assign(d, 1.0);
    scratch.lo_.assign(d, -std::numeric_limits<double>::infinity());
    scratch.hi_.assign(d, std::numeric_limits<double>::infinity());

    for (int epoch = 0; epoch < params_.epochs; ++epoch) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto j = i + rng.uniform_int(n - i);
            std::swap(order[i], order[j]);
        }
        for (std::size_t start = 0; start < n; start += params_.batch) {
            const std::size_t stop = std::min(n, start + params_.batch);
            batch.x.clear();
            batch.y.clear();
            for (std::size_t i = start; i < stop; ++i) {
                batch.x.push_back(scaled.x[order[i]]);
                batch.y.push_back(scaled.y[order[i]]);
            }
            scratch.theta_ = theta_;
            scratch.loss_and_grad(batch, grad);
            kernels::axpy(-params_.learning_rate, grad.data(), theta_.data(), theta_.size());
        }
    }
}

void Mlp::set_state(std::size_t input_dim, MlpParams params, std::vector<double> theta,
                    std::vector<double> mean, std::vector<double> sd, std::vector<double> lo,
                    std::vector<double> hi) {
    input_dim_ = input_dim;
    params_ = params;
    theta_ = std::move(theta);
    mean_ = std::move(mean);
    sd_ = std::move(sd);
    lo_ = std::move(lo);
    hi_ = std::move(hi);
}

// ---------------------------------------------------------------------------
// Gaussian process

void GpRegressor::fit(const Dataset& data, const GpParams& params, Rng& /*rng*/) {
    if (data.rows() == 0) throw std::invalid_argument("GpRegressor: empty dataset");
    if (data.y_dim() != 1) throw std::invalid_argument("GpRegressor: single target only");
    params_ = params;
    n_ = data.rows();
    d_ = data.x_dim();

    input_range(data.x, lo_, hi_);
    mean_.assign(d_, 0.0);
    sd_.assign(d_, 0.0);
    for (const auto& row : data.x)
        for (std::size_t i = 0; i < d_; ++i) mean_[i] += row[i];
    for (auto& m : mean_) m /= static_cast<double>(n_);
    for (const auto& row : data.x)
        for (std::size_t i = 0; i < d_; ++i) {
            const double c = row[i] - mean_[i];
            sd_[i] += c * c;
        }
    for (auto& s : sd_) s = std::max(std::sqrt(s / static_cast<double>(n_)), 1e-9);

    y_mean_ = 0.0;
    for (const auto& row : data.y) y_mean_ += row[0];
    y_mean_ /= static_cast<double>(n_);
    double var = 0.0;
    for (const auto& row : data.y) {
        const double c = row[0] - y_mean_;
        var += c * c;
    }
    y_sd_ = std::max(std::sqrt(var / static_cast<double>(n_)), 1e-9);

    // Standardised inputs, row-major scratch + column-major basis for the
    // SIMD predict kernel.
    std::vector<double> rows(n_ * d_);
    basis_.assign(d_ * n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
        for (std::size_t k = 0; k < d_; ++k) {
            const double v = (data.x[j][k] - mean_[k]) / sd_[k];
            rows[j * d_ + k] = v;
            basis_[k * n_ + j] = v;
        }
    }

    const double inv_l = 1.0 / params_.lengthscale;
    const double s5 = std::sqrt(5.0);
    Eigen::MatrixXd K(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
        K(i, i) = 1.0 + params_.noise;
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double r =
                std::sqrt(kernels::squared_distance(rows.data() + i * d_, rows.data() + j * d_, d_));
            const double t = s5 * r * inv_l;
            const double kv = (1.0 + t + t * t / 3.0) * std::exp(-t);
            K(i, j) = kv;
            K(j, i) = kv;
        }
    }

    Eigen::VectorXd z(n_);
    for (std::size_t j = 0; j < n_; ++j) z(j) = (data.y[j][0] - y_mean_) / y_sd_;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("GpRegressor: kernel matrix not positive definite");
    Eigen::VectorXd a = llt.solve(z);
    alpha_.assign(a.data(), a.data() + n_);
}

double GpRegressor::predict(const std::vector<double>& x) const {
    if (!fitted()) throw std::logic_error("GpRegressor: predict before fit");
    if (x.size() != d_) throw std::invalid_argument("GpRegressor: wrong input size");
    std::vector<double> q(x);
    clamp_to_range(q, lo_, hi_);
    for (std::size_t i = 0; i < d_; ++i) q[i] = (q[i] - mean_[i]) / sd_[i];
    const double z = kernels::matern52_weighted_sum(q.data(), basis_.data(), alpha_.data(), n_,
                                                    d_, 1.0 / params_.lengthscale);
    return y_mean_ + y_sd_ * z;
}

void GpRegressor::set_state(GpParams params, std::size_t n, std::size_t d,
                            std::vector<double> basis, std::vector<double> alpha,
                            std::vector<double> mean, std::vector<double> sd,
                            std::vector<double> lo, std::vector<double> hi, double y_mean,
                            double y_sd) {
    params_ = params;
    n_ = n;
    d_ = d;
    basis_ = std::move(basis);
    alpha_ = std::move(alpha);
    mean_ = std::move(mean);
    sd_ = std::move(sd);
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    y_mean_ = y_mean;
    y_sd_ = y_sd;
}

// ---------------------------------------------------------------------------
// Pipeline-facing models

market::MarketVariables MarketModel::predict(const CustomerFeatures& c) const {
    std::vector<double> out = forest.predict(FeatureEncoder::encode(c));
    std::sort(out.begin(), out.end());
    return {out[0], out[1], out[2]};
}

const std::vector<double>& ConversionModel::action_grid() {
    static const std::vector<double> grid = [] {
        std::vector<double> g;
        for (int i = 0; i <= 26; ++i) g.push_back(0.9 + 0.05 * i);
        return g;
    }();
    return grid;
}

std::vector<double> isotonic_decreasing(const std::vector<double>& values) {
    // Pool adjacent violators for a non-increasing fit.
    struct Block {
        double sum;
        int count;
    };
    std::vector<Block> blocks;
    blocks.reserve(values.size());
    for (double v : values) {
        blocks.push_back({v, 1});
        while (blocks.size() >= 2) {
            auto& prev = blocks[blocks.size() - 2];
            auto& last = blocks.back();
            if (prev.sum / prev.count >= last.sum / last.count) break;
            prev.sum += last.sum;
            prev.count += last.count;
            blocks.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : blocks) {
        const double v = b.sum / b.count;
        for (int i = 0; i < b.count; ++i) out.push_back(v);
    }
    return out;
}

std::vector<double> ConversionModel::grid_values(const market::MarketVariables& m) const {
    const auto& grid = action_grid();
    std::vector<double> vals;
    vals.reserve(grid.size());
    for (double a : grid) vals.push_back(net.predict({m.m1, m.m3, m.m5, a}));
    return isotonic_decreasing(vals);
}

double ConversionModel::interpolate_grid(const std::vector<double>& grid_vals, double action) {
    const auto& grid = action_grid();
    if (action <= grid.front()) return grid_vals.front();
    if (action >= grid.back()) return grid_vals.back();
    const double step = grid[1] - grid[0];
    const auto i = std::min(grid.size() - 2,
                            static_cast<std::size_t>((action - grid.front()) / step));
    const double w = (action - grid[i]) / step;
    return grid_vals[i] * (1.0 - w) + grid_vals[i + 1] * w;
}

double ConversionModel::predict(const market::MarketVariables& m, double action) const {
    return interpolate_grid(grid_values(m), action);
}

double ActionModel::predict(const market::MarketVariables& m, double k) const {
    std::vector<double> x{m.m1, m.m3, m.m5};
    if (k_aware_) x.push_back(k);
    return std::clamp(gp.predict(x), 1.0, 2.0);
}

// ---------------------------------------------------------------------------
// Fits

MarketModel fit_market_model(const Dataset& data, Rng& rng) {
    if (data.rows() < 50)
        throw std::invalid_argument("fit_market_model: need at least 50 rows");
    if (data.y_dim() != 3)
        throw std::invalid_argument("fit_market_model: expected 3 targets (m1,m3,m5)");
    MarketModel model;
    model.forest.fit(data, ForestParams{}, rng);
    return model;
}

ConversionModel fit_conversion_model(const Dataset& data, Rng& rng) {
    if (data.rows() < 50)
        throw std::invalid_argument("fit_conversion_model: need at least 50 rows");
    for (const auto& row : data.y) {
        if (row[0] != 0.0 && row[0] != 1.0)
            throw std::invalid_argument("fit_conversion_model: targets must be binary");
    }
    ConversionModel model;
    MlpParams params;
    model.net.init(data.x_dim(), params, rng);
    model.net.fit(data, rng);
    return model;
}

double optimize_action(const std::function<double(double)>& accept_prob, double k) {
    if (!std::isfinite(k)) throw std::invalid_argument("optimize_action: k must be finite");
    const auto objective = [&](double a) { return accept_prob(a) * (a - k); };

    constexpr int kGrid = 64;
    double best_a = 1.0, best_v = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < kGrid; ++i) {
        const double a = 1.0 + static_cast<double>(i) / (kGrid - 1);
        const double v = objective(a);
        if (v > best_v) {
            best_v = v;
            best_a = a;
            best_i = i;
        }
    }

    // Golden-section refinement on the bracket around the best grid point.
    const double cell = 1.0 / (kGrid - 1);
    double lo = std::max(1.0, best_a - cell);
    double hi = std::min(2.0, best_a + cell);
    (void)best_i;
    const double inv_phi = 0.6180339887498949;
    double c = hi - (hi - lo) * inv_phi;
    double d = lo + (hi - lo) * inv_phi;
    double fc = objective(c), fd = objective(d);
    for (int it = 0; it < 80 && (hi - lo) > 1e-10; ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - (hi - lo) * inv_phi;
            fc = objective(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + (hi - lo) * inv_phi;
            fd = objective(d);
        }
    }
    const double refined = 0.5 * (lo + hi);
    return (objective(refined) >= best_v) ? refined : best_a;
}

double optimize_action(const ConversionModel& p, const market::MarketVariables& m, double k) {
    const std::vector<double> grid = p.grid_values(m);
    return optimize_action(
        [&](double a) { return ConversionModel::interpolate_grid(grid, a); }, k);
}

namespace {

constexpr int kActionFitSamples = 500;

ActionModel fit_action_model(const ConversionModel& p,
                             const std::vector<market::MarketVariables>& market_samples,
                             bool k_aware, Rng& rng) {
    if (market_samples.empty())
        throw std::invalid_argument("fit_action_model: need at least 1 market sample");
    Dataset data;
    for (int i = 0; i < kActionFitSamples; ++i) {
        const auto& m = market_samples[rng.uniform_int(market_samples.size())];
        const double k = k_aware ? rng.laplace(1.0, 0.1) : 1.0;
        const double a_star = optimize_action(p, m, k);
        std::vector<double> x{m.m1, m.m3, m.m5};
        if (k_aware) x.push_back(k);
        data.add(std::move(x), {a_star});
    }
    ActionModel model;
    model.k_aware_ = k_aware;
    model.gp.fit(data, GpParams{}, rng);
    return model;
}

} // namespace

ActionModel fit_action_model_plain(const ConversionModel& p,
                                   const std::vector<market::MarketVariables>& market_samples,
                                   Rng& rng) {
    return fit_action_model(p, market_samples, false, rng);
}

ActionModel fit_action_model_k(const ConversionModel& p,
                               const std::vector<market::MarketVariables>& market_samples,
                               Rng& rng) {
    return fit_action_model(p, market_samples, true, rng);
}

} // namespace pursuit::models
