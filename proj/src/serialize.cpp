#include "pursuit/serialize.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pursuit::serialize {

namespace {

void put(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

void put_vector(std::ostream& out, const char* tag, const std::vector<double>& v) {
    out << tag << ' ' << v.size();
    for (double x : v) {
        out << ' ';
        put(out, x);
    }
    out << '\n';
}

std::vector<double> get_vector(std::istream& in, const std::string& tag) {
    std::string got;
    std::size_t n = 0;
    if (!(in >> got >> n) || got != tag)
        throw std::runtime_error("blob: expected '" + tag + "' section");
    std::vector<double> v(n);
    for (auto& x : v)
        if (!(in >> x)) throw std::runtime_error("blob: truncated '" + tag + "' section");
    return v;
}

void expect(std::istream& in, const std::string& tag) {
    std::string got;
    if (!(in >> got) || got != tag)
        throw std::runtime_error("blob: expected '" + tag + "'");
}

void save_forest(std::ostream& out, const models::RandomForest& forest) {
    out << "forest " << forest.trees().size() << ' ' << forest.y_dim() << '\n';
    put_vector(out, "lo", forest.input_lo());
    put_vector(out, "hi", forest.input_hi());
    for (const auto& tree : forest.trees()) {
        out << "tree " << tree.nodes.size() << '\n';
        for (const auto& node : tree.nodes) {
            out << node.feature << ' ';
            put(out, node.threshold);
            out << ' ' << node.left << ' ' << node.right;
            for (double v : node.value) {
                out << ' ';
                put(out, v);
            }
            out << '\n';
        }
    }
}

models::RandomForest load_forest(std::istream& in) {
    expect(in, "forest");
    std::size_t n_trees = 0, y_dim = 0;
    if (!(in >> n_trees >> y_dim)) throw std::runtime_error("blob: bad forest header");
    auto lo = get_vector(in, "lo");
    auto hi = get_vector(in, "hi");
    std::vector<models::RandomForest::Tree> trees(n_trees);
    for (auto& tree : trees) {
        expect(in, "tree");
        std::size_t n_nodes = 0;
        if (!(in >> n_nodes)) throw std::runtime_error("blob: bad tree header");
        tree.nodes.resize(n_nodes);
        for (auto& node : tree.nodes) {
            node.value.resize(y_dim);
            if (!(in >> node.feature >> node.threshold >> node.left >> node.right))
                throw std::runtime_error("blob: bad node");
            for (auto& v : node.value)
                if (!(in >> v)) throw std::runtime_error("blob: bad node value");
        }
    }
    models::RandomForest forest;
    forest.set_state(std::move(trees), std::move(lo), std::move(hi), y_dim);
    return forest;
}

void save_mlp(std::ostream& out, const models::Mlp& net) {
    const auto& p = net.params();
    out << "mlp " << net.input_dim() << ' ' << p.hidden1 << ' ' << p.hidden2 << ' '
        << (p.logistic_output ? 1 : 0) << ' ';
    put(out, p.learning_rate);
    out << ' ' << p.epochs << ' ' << p.batch << '\n';
    put_vector(out, "theta", net.parameters());
    put_vector(out, "mean", net.standardise_mean());
    put_vector(out, "sd", net.standardise_sd());
    put_vector(out, "lo", net.input_lo());
    put_vector(out, "hi", net.input_hi());
}

models::Mlp load_mlp(std::istream& in) {
    expect(in, "mlp");
    std::size_t input_dim = 0;
    models::MlpParams p;
    int logistic = 1;
    if (!(in >> input_dim >> p.hidden1 >> p.hidden2 >> logistic >> p.learning_rate >>
          p.epochs >> p.batch))
        throw std::runtime_error("blob: bad mlp header");
    p.logistic_output = logistic != 0;
    auto theta = get_vector(in, "theta");
    auto mean = get_vector(in, "mean");
    auto sd = get_vector(in, "sd");
    auto lo = get_vector(in, "lo");
    auto hi = get_vector(in, "hi");
    models::Mlp net;
    net.set_state(input_dim, p, std::move(theta), std::move(mean), std::move(sd),
                  std::move(lo), std::move(hi));
    return net;
}

void save_gp(std::ostream& out, const models::GpRegressor& gp) {
    out << "gp " << gp.basis_size() << ' ' << gp.input_size() << ' ';
    put(out, gp.params().lengthscale);
    out << ' ';
    put(out, gp.params().noise);
    out << ' ';
    put(out, gp.y_mean());
    out << ' ';
    put(out, gp.y_sd());
    out << '\n';
    put_vector(out, "basis", gp.basis());
    put_vector(out, "alpha", gp.alpha());
    put_vector(out, "mean", gp.standardise_mean());
    put_vector(out, "sd", gp.standardise_sd());
    put_vector(out, "lo", gp.input_lo());
    put_vector(out, "hi", gp.input_hi());
}

models::GpRegressor load_gp(std::istream& in) {
    expect(in, "gp");
    std::size_t n = 0, d = 0;
    models::GpParams p;
    double y_mean = 0.0, y_sd = 1.0;
    if (!(in >> n >> d >> p.lengthscale >> p.noise >> y_mean >> y_sd))
        throw std::runtime_error("blob: bad gp header");
    auto basis = get_vector(in, "basis");
    auto alpha = get_vector(in, "alpha");
    auto mean = get_vector(in, "mean");
    auto sd = get_vector(in, "sd");
    auto lo = get_vector(in, "lo");
    auto hi = get_vector(in, "hi");
    models::GpRegressor gp;
    gp.set_state(p, n, d, std::move(basis), std::move(alpha), std::move(mean), std::move(sd),
                 std::move(lo), std::move(hi), y_mean, y_sd);
    return gp;
}

} // namespace

void save_pipeline(std::ostream& out, const pipeline::PipelineModels& models) {
    out << "PZOO1 pipeline\n";
    save_forest(out, models.market.forest);
    save_mlp(out, models.conversion.net);
    out << "action " << (models.action.k_aware() ? 1 : 0) << '\n';
    save_gp(out, models.action.gp);
}

pipeline::PipelineModels load_pipeline(std::istream& in) {
    expect(in, "PZOO1");
    expect(in, "pipeline");
    pipeline::PipelineModels out;
    out.market.forest = load_forest(in);
    out.conversion.net = load_mlp(in);
    expect(in, "action");
    int k_aware = 0;
    if (!(in >> k_aware)) throw std::runtime_error("blob: bad action header");
    out.action.k_aware_ = k_aware != 0;
    out.action.gp = load_gp(in);
    return out;
}

void save_value_fn(std::ostream& out, const rl::ValueFn& v) {
    out << "PZOO1 valuefn " << v.horizon << ' ' << v.indicators << '\n';
    save_mlp(out, v.net);
}

rl::ValueFn load_value_fn(std::istream& in) {
    expect(in, "PZOO1");
    expect(in, "valuefn");
    rl::ValueFn v;
    if (!(in >> v.horizon >> v.indicators))
        throw std::runtime_error("blob: bad valuefn header");
    v.net = load_mlp(in);
    return v;
}

} // namespace pursuit::serialize
