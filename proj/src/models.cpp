#include "odd/models.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "odd/error.hpp"
#include "odd/parallel.hpp"
#include "odd/rng.hpp"

namespace odd::models {

namespace {

Matrix random_layer(std::size_t out, std::size_t in, Rng& rng) {
    Matrix W(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& x : W.a) x = scale * rng.normal();
    return W;
}

}  // namespace

// ---------------------------------------------------------------------------
// MlpModel
// ---------------------------------------------------------------------------

MlpModel MlpModel::random(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw InvalidParams("MlpModel::random: need at least input and output dims");
    Rng rng(seed);
    MlpModel m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        MlpLayer layer;
        layer.W = random_layer(dims[l + 1], dims[l], rng);
        layer.b = Vector(dims[l + 1]);
        m.layers.push_back(std::move(layer));
    }
    return m;
}

Vector MlpModel::forward(const Vector& x) const {
    if (x.dim() != input_dim()) throw DimMismatch("MlpModel::forward: input dimension");
    Vector a = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Vector z = layers[l].W.matvec(a);
        z += layers[l].b;
        if (l + 1 < layers.size()) {
            for (double& v : z.v) v = v > 0.0 ? v : 0.0;
        }
        a = std::move(z);
    }
    return a;
}

std::size_t MlpModel::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.W.a.size() + l.b.dim();
    return n;
}

Vector MlpModel::flatten() const {
    Vector flat(param_count());
    std::size_t pos = 0;
    for (const auto& l : layers) {
        for (double v : l.W.a) flat[pos++] = v;
        for (double v : l.b.v) flat[pos++] = v;
    }
    return flat;
}

void MlpModel::unflatten(const Vector& flat) {
    if (flat.dim() != param_count()) throw DimMismatch("MlpModel::unflatten: size mismatch");
    std::size_t pos = 0;
    for (auto& l : layers) {
        for (double& v : l.W.a) v = flat[pos++];
        for (double& v : l.b.v) v = flat[pos++];
    }
}

// ---------------------------------------------------------------------------
// HomogeneousNet
// ---------------------------------------------------------------------------

HomogeneousNet HomogeneousNet::random(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw InvalidParams("HomogeneousNet::random: need at least 2 dims");
    Rng rng(seed);
    HomogeneousNet net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        net.weights.push_back(random_layer(dims[l + 1], dims[l], rng));
    return net;
}

Vector HomogeneousNet::forward(const Vector& x) const {
    if (x.dim() != input_dim()) throw DimMismatch("HomogeneousNet::forward: input dimension");
    Vector a = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Vector z = weights[l].matvec(a);
        if (l + 1 < weights.size()) {
            for (double& v : z.v) v = v > 0.0 ? std::pow(v, activation_exponent) : 0.0;
        }
        a = std::move(z);
    }
    return a;
}

std::size_t HomogeneousNet::param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w.a.size();
    return n;
}

Vector HomogeneousNet::flatten() const {
    Vector flat(param_count());
    std::size_t pos = 0;
    for (const auto& w : weights)
        for (double v : w.a) flat[pos++] = v;
    return flat;
}

void HomogeneousNet::unflatten(const Vector& flat) {
    if (flat.dim() != param_count()) throw DimMismatch("HomogeneousNet::unflatten: size mismatch");
    std::size_t pos = 0;
    for (auto& w : weights)
        for (double& v : w.a) v = flat[pos++];
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

double logsumexp(const Vector& z) {
    if (z.dim() == 0) throw InvalidParams("logsumexp: empty vector");
    double m = z[0];
    for (double v : z.v) m = std::max(m, v);
    double s = 0.0;
    for (double v : z.v) s += std::exp(v - m);
    return m + std::log(s);
}

Vector softmax(const Vector& z) {
    const double lse = logsumexp(z);
    Vector p(z.dim());
    for (std::size_t i = 0; i < z.dim(); ++i) p[i] = std::exp(z[i] - lse);
    return p;
}

double logistic_loss(double margin) {
    // ln(1+exp(-m)) = max(-m, 0) + log1p(exp(-|m|))
    const double z = -margin;
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double logistic_loss_grad(const LinearModel& m, const Vector& x, int y, Vector* grad) {
    if (y != 1 && y != -1) throw InvalidParams("logistic_loss_grad: y must be +/-1");
    if (x.dim() != m.w.dim()) throw DimMismatch("logistic_loss_grad: dimension");
    const double margin = y * m.w.dot(x);
    const double loss = logistic_loss(margin);
    if (grad != nullptr) {
        // sigma(-margin) without overflow
        const double s = margin >= 0.0 ? std::exp(-margin) / (1.0 + std::exp(-margin))
                                       : 1.0 / (1.0 + std::exp(margin));
        *grad = Vector(x.dim());
        const double c = -static_cast<double>(y) * s;
        for (std::size_t i = 0; i < x.dim(); ++i) (*grad)[i] = c * x[i];
    }
    return loss;
}

double cross_entropy_from_logits(const Vector& logits, int y) {
    if (y < 0 || static_cast<std::size_t>(y) >= logits.dim())
        throw DimMismatch("cross_entropy_from_logits: label out of range");
    return logsumexp(logits) - logits[static_cast<std::size_t>(y)];
}

Vector cross_entropy_logit_grad(const Vector& logits, int y) {
    Vector g = softmax(logits);
    g[static_cast<std::size_t>(y)] -= 1.0;
    return g;
}

// ---------------------------------------------------------------------------
// MLP backprop
// ---------------------------------------------------------------------------

void MlpGrads::zero() {
    for (auto& l : layers) {
        std::fill(l.W.a.begin(), l.W.a.end(), 0.0);
        std::fill(l.b.v.begin(), l.b.v.end(), 0.0);
    }
}

void MlpGrads::accumulate(const MlpGrads& other, double scale) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (std::size_t i = 0; i < layers[l].W.a.size(); ++i)
            layers[l].W.a[i] += scale * other.layers[l].W.a[i];
        for (std::size_t i = 0; i < layers[l].b.dim(); ++i)
            layers[l].b[i] += scale * other.layers[l].b[i];
    }
}

MlpGrads make_grads_like(const MlpModel& m) {
    MlpGrads g;
    for (const auto& l : m.layers) {
        MlpLayer gl;
        gl.W = Matrix(l.W.rows, l.W.cols);
        gl.b = Vector(l.b.dim());
        g.layers.push_back(std::move(gl));
    }
    return g;
}

double mlp_loss_grad(const MlpModel& m, const Vector& x, int y, MlpGrads* grads) {
    if (y < 0 || static_cast<std::size_t>(y) >= m.num_classes())
        throw DimMismatch("mlp_loss_grad: label out of range");

    const std::size_t L = m.layers.size();
    std::vector<Vector> pre(L);    // pre-activations z_l
    std::vector<Vector> act(L + 1);  // act[0] = x, act[l] = relu(z_l) (logits for last)
    act[0] = x;
    for (std::size_t l = 0; l < L; ++l) {
        Vector z = m.layers[l].W.matvec(act[l]);
        z += m.layers[l].b;
        pre[l] = z;
        if (l + 1 < L) {
            for (double& v : z.v) v = v > 0.0 ? v : 0.0;
        }
        act[l + 1] = std::move(z);
    }
    const Vector& logits = act[L];
    const double loss = cross_entropy_from_logits(logits, y);
    if (grads == nullptr) return loss;

    Vector delta = cross_entropy_logit_grad(logits, y);
    for (std::size_t li = L; li > 0; --li) {
        const std::size_t l = li - 1;
        auto& gl = grads->layers[l];
        const Vector& input = act[l];
        for (std::size_t i = 0; i < gl.W.rows; ++i) {
            const double di = delta[i];
            gl.b[i] += di;
            double* grow = gl.W.a.data() + i * gl.W.cols;
            for (std::size_t j = 0; j < gl.W.cols; ++j) grow[j] += di * input[j];
        }
        if (l > 0) {
            Vector next = m.layers[l].W.matvec_transposed(delta);
            for (std::size_t j = 0; j < next.dim(); ++j)
                if (pre[l - 1][j] <= 0.0) next[j] = 0.0;
            delta = std::move(next);
        }
    }
    return loss;
}

Vector mlp_batch_losses(const MlpModel& m, const data::LabeledDataset& ds) {
    Vector losses(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) {
        Vector x(ds.dim());
        for (std::size_t j = 0; j < ds.dim(); ++j) x[j] = ds.features.at(i, j);
        losses[i] = cross_entropy_from_logits(m.forward(x), ds.labels[i]);
    });
    return losses;
}

Vector linear_batch_losses(const LinearModel& m, const data::LabeledDataset& ds) {
    Vector losses(ds.size());
    parallel_for(ds.size(), [&](std::size_t i) {
        double margin = 0.0;
        for (std::size_t j = 0; j < ds.dim(); ++j) margin += m.w[j] * ds.features.at(i, j);
        margin *= ds.label_pm1(i);
        losses[i] = logistic_loss(margin);
    });
    return losses;
}

// ---------------------------------------------------------------------------
// Homogeneous-net backprop
// ---------------------------------------------------------------------------

namespace {

struct HomoTape {
    std::vector<Vector> pre;  // z_l
    std::vector<Vector> act;  // act[0] = x, act[l] = activation(z_l)
};

Vector homo_forward_tape(const HomogeneousNet& net, const Vector& x, HomoTape& tape) {
    const std::size_t L = net.weights.size();
    tape.pre.resize(L);
    tape.act.resize(L + 1);
    tape.act[0] = x;
    for (std::size_t l = 0; l < L; ++l) {
        Vector z = net.weights[l].matvec(tape.act[l]);
        tape.pre[l] = z;
        if (l + 1 < L) {
            for (double& v : z.v) v = v > 0.0 ? std::pow(v, net.activation_exponent) : 0.0;
        }
        tape.act[l + 1] = std::move(z);
    }
    return tape.act[L];
}

/// Backprop an output-side gradient `delta_out` through the taped forward
/// pass, writing flattened weight gradients.
Vector homo_backward(const HomogeneousNet& net, const HomoTape& tape, Vector delta) {
    const std::size_t L = net.weights.size();
    Vector flat(net.param_count());
    std::size_t layer_offset = flat.dim();
    for (std::size_t li = L; li > 0; --li) {
        const std::size_t l = li - 1;
        const Matrix& W = net.weights[l];
        layer_offset -= W.a.size();
        const Vector& input = tape.act[l];
        for (std::size_t i = 0; i < W.rows; ++i) {
            const double di = delta[i];
            double* grow = flat.v.data() + layer_offset + i * W.cols;
            for (std::size_t j = 0; j < W.cols; ++j) grow[j] = di * input[j];
        }
        if (l > 0) {
            Vector next = W.matvec_transposed(delta);
            // activation derivative: 1.01 * z^{0.01} for z > 0, 0 otherwise
            const double e = net.activation_exponent;
            for (std::size_t j = 0; j < next.dim(); ++j) {
                const double z = tape.pre[l - 1][j];
                next[j] *= z > 0.0 ? e * std::pow(z, e - 1.0) : 0.0;
            }
            delta = std::move(next);
        }
    }
    return flat;
}

}  // namespace

Vector homogeneous_logit_grad(const HomogeneousNet& net, const Vector& x, std::size_t j) {
    if (j >= net.num_classes()) throw DimMismatch("homogeneous_logit_grad: class out of range");
    HomoTape tape;
    homo_forward_tape(net, x, tape);
    Vector delta(net.num_classes());
    delta[j] = 1.0;
    return homo_backward(net, tape, std::move(delta));
}

std::vector<PerExampleGradient> per_example_class_gradients(const HomogeneousNet& net,
                                                            const data::LabeledDataset& ds) {
    const std::size_t n = ds.size();
    const std::size_t k = net.num_classes();
    if (net.param_count() <= n * k)
        throw InvalidParams("per_example_class_gradients: needs param_count > N*K");

    std::vector<PerExampleGradient> out(n * k);
    parallel_for(n * k, [&](std::size_t idx) {
        const std::size_t i = idx / k;
        const std::size_t j = idx % k;
        Vector x(ds.dim());
        for (std::size_t c = 0; c < ds.dim(); ++c) x[c] = ds.features.at(i, c);
        out[idx] = {i, j, homogeneous_logit_grad(net, x, j)};
    });
    return out;
}

double homogeneous_loss_grad(const HomogeneousNet& net, const Vector& x, int y, Vector* grad) {
    if (y < 0 || static_cast<std::size_t>(y) >= net.num_classes())
        throw DimMismatch("homogeneous_loss_grad: label out of range");
    HomoTape tape;
    const Vector logits = homo_forward_tape(net, x, tape);
    const double loss = cross_entropy_from_logits(logits, y);
    if (grad != nullptr) *grad = homo_backward(net, tape, cross_entropy_logit_grad(logits, y));
    return loss;
}

// ---------------------------------------------------------------------------
// Homogeneity measurement
// ---------------------------------------------------------------------------

HomogeneityReport check_homogeneity(const HomogeneousNet& net, const Vector& x,
                                    const std::vector<double>& scales) {
    const Vector base = net.forward(x);
    double base_max = 0.0;
    for (double v : base.v) base_max = std::max(base_max, std::abs(v));
    if (base_max < 1e-12) throw DegenerateOutput("check_homogeneity: forward(x) ~ 0");

    std::vector<double> estimates;
    for (double c : scales) {
        if (!(c > 0.0)) throw InvalidParams("check_homogeneity: scales must be positive");
        if (c == 1.0) continue;
        HomogeneousNet scaled = net;
        for (auto& W : scaled.weights)
            for (double& v : W.a) v *= c;
        const Vector out = scaled.forward(x);
        for (std::size_t k = 0; k < base.dim(); ++k) {
            if (std::abs(base[k]) < 1e-9 * base_max) continue;
            const double ratio = out[k] / base[k];
            if (!(ratio > 0.0)) throw DegenerateOutput("check_homogeneity: sign flip under scaling");
            estimates.push_back(std::log(ratio) / std::log(c));
        }
    }
    if (estimates.empty()) throw InvalidParams("check_homogeneity: no usable scales");

    HomogeneityReport report;
    double sum = 0.0;
    for (double a : estimates) sum += a;
    report.degree = sum / static_cast<double>(estimates.size());
    for (double a : estimates)
        report.max_deviation = std::max(report.max_deviation, std::abs(a - report.degree));
    return report;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

void save_mlp(const MlpModel& m, const std::string& path) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["kind"] = "mlp";
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : m.layers) {
        nlohmann::json lj;
        lj["rows"] = l.W.rows;
        lj["cols"] = l.W.cols;
        lj["W"] = l.W.a;
        lj["b"] = l.b.v;
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    std::ofstream f(path);
    if (!f) throw IoError("save_mlp: cannot open " + path);
    f << j.dump(2) << '\n';
}

MlpModel load_mlp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_mlp: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("load_mlp: " + std::string(e.what()));
    }
    if (!j.contains("schema_version") || j["schema_version"] != 1)
        throw SchemaError("load_mlp: unsupported schema_version in " + path);
    if (j.value("kind", "") != "mlp") throw SchemaError("load_mlp: kind is not mlp");

    MlpModel m;
    for (const auto& lj : j.at("layers")) {
        MlpLayer layer;
        const std::size_t rows = lj.at("rows").get<std::size_t>();
        const std::size_t cols = lj.at("cols").get<std::size_t>();
        layer.W = Matrix::from_data(rows, cols, lj.at("W").get<std::vector<double>>());
        layer.b = Vector::from_data(lj.at("b").get<std::vector<double>>());
        if (layer.b.dim() != rows) throw SchemaError("load_mlp: bias/weight shape mismatch");
        m.layers.push_back(std::move(layer));
    }
    if (m.layers.empty()) throw SchemaError("load_mlp: no layers");
    return m;
}

}  // namespace odd::models
