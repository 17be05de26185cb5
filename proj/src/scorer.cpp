#include "fusionrec/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fusionrec/binio.hpp"
#include "fusionrec/rng.hpp"

namespace fusionrec {

namespace {

void check_config(const MlpConfig& c) {
    if (c.n_layers < 1 || c.n_layers > 5)
        throw ContractError("n_layers must be within 1..5");
    if (c.input_size < 1 || c.hidden_size < 1 || c.out_depth < 1 || c.out_width < 1)
        throw ContractError("network sizes must be positive");
    if (c.batch_size < 1 || c.epochs < 0) throw ContractError("bad training settings");
}

void check_target(const Sketch& target, const MlpConfig& c) {
    if (target.depth != c.out_depth || target.width != c.out_width)
        throw ContractError("target sketch layout does not match network output");
    if (target.kind != SketchKind::probabilities)
        throw ContractError("target sketch must hold probabilities");
    for (std::uint32_t p = 0; p < target.depth; ++p) {
        double sum = 0.0;
        for (std::uint32_t w = 0; w < target.width; ++w) sum += target.at(p, w);
        if (std::abs(sum - 1.0) > 1e-6)
            throw ContractError("target row " + std::to_string(p) + " does not sum to 1");
    }
}

struct ForwardCache {
    // activations[0] is the input; activations[l+1] the post-activation of
    // layer l (post-softmax for the last layer). pre[l] is layer l's affine
    // output before the nonlinearity.
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> pre;
};

void affine(const MlpParams& p, int l, const std::vector<double>& in, std::vector<double>& out) {
    const int n_in = p.layer_input(l);
    const int n_out = p.layer_output(l);
    const double* w = p.weights[l].data();
    out.assign(n_out, 0.0);
    for (int i = 0; i < n_out; ++i) {
        double acc = p.biases[l][i];
        const double* wrow = w + std::size_t(i) * n_in;
        for (int j = 0; j < n_in; ++j) acc += wrow[j] * in[j];
        out[i] = acc;
    }
}

void softmax_rows(std::vector<double>& v, std::uint32_t depth, std::uint32_t width) {
    for (std::uint32_t p = 0; p < depth; ++p) {
        double* row = v.data() + std::size_t(p) * width;
        double mx = row[0];
        for (std::uint32_t w = 1; w < width; ++w) mx = std::max(mx, row[w]);
        double sum = 0.0;
        for (std::uint32_t w = 0; w < width; ++w) {
            row[w] = std::exp(row[w] - mx);
            sum += row[w];
        }
        for (std::uint32_t w = 0; w < width; ++w) row[w] /= sum;
    }
}

void run_forward(const MlpParams& params, std::span<const double> input, ForwardCache& cache) {
    const MlpConfig& c = params.config;
    if (input.size() != static_cast<std::size_t>(c.input_size))
        throw ContractError("input length does not match network input size");

    cache.activations.assign(c.n_layers + 1, {});
    cache.pre.assign(c.n_layers, {});
    cache.activations[0].assign(input.begin(), input.end());

    for (int l = 0; l < c.n_layers; ++l) {
        affine(params, l, cache.activations[l], cache.pre[l]);
        for (double v : cache.pre[l])
            if (!std::isfinite(v))
                throw Error("non-finite activation in layer " + std::to_string(l));
        cache.activations[l + 1] = cache.pre[l];
        if (l + 1 < c.n_layers) {
            for (double& v : cache.activations[l + 1]) v = std::max(v, 0.0);
        } else {
            softmax_rows(cache.activations[l + 1], c.out_depth, c.out_width);
        }
    }
}

}  // namespace

int MlpParams::layer_input(int l) const {
    if (l == 0) return config.input_size;
    return config.hidden_size;
}

int MlpParams::layer_output(int l) const {
    if (l == config.n_layers - 1)
        return static_cast<int>(config.out_depth * config.out_width);
    return config.hidden_size;
}

MlpParams init_params(const MlpConfig& config) {
    check_config(config);
    MlpParams p;
    p.config = config;
    p.weights.resize(config.n_layers);
    p.biases.resize(config.n_layers);
    CounterRng rng(config.seed);
    for (int l = 0; l < config.n_layers; ++l) {
        const int n_in = p.layer_input(l);
        const int n_out = p.layer_output(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_in));
        p.weights[l].resize(std::size_t(n_out) * n_in);
        for (auto& w : p.weights[l]) w = (2.0 * rng.next_unit() - 1.0) * scale;
        p.biases[l].assign(n_out, 0.0);
    }
    return p;
}

Sketch forward(const MlpParams& params, std::span<const double> input) {
    ForwardCache cache;
    run_forward(params, input, cache);
    Sketch s;
    s.depth = params.config.out_depth;
    s.width = params.config.out_width;
    s.kind = SketchKind::probabilities;
    s.cells = std::move(cache.activations.back());
    return s;
}

double cross_entropy(const Sketch& output, const Sketch& target) {
    if (output.depth != target.depth || output.width != target.width)
        throw ContractError("sketch layouts do not match");
    double loss = 0.0;
    for (std::size_t i = 0; i < output.cells.size(); ++i)
        loss -= target.cells[i] * std::log(output.cells[i] + kLogEpsilon);
    return loss / output.depth;
}

namespace {

Gradients zero_gradients(const MlpParams& params) {
    Gradients g;
    g.weights.resize(params.weights.size());
    g.biases.resize(params.biases.size());
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        g.weights[l].assign(params.weights[l].size(), 0.0);
        g.biases[l].assign(params.biases[l].size(), 0.0);
    }
    return g;
}

void add_scaled(Gradients& acc, const Gradients& g, double scale) {
    for (std::size_t l = 0; l < acc.weights.size(); ++l) {
        for (std::size_t i = 0; i < acc.weights[l].size(); ++i)
            acc.weights[l][i] += scale * g.weights[l][i];
        for (std::size_t i = 0; i < acc.biases[l].size(); ++i)
            acc.biases[l][i] += scale * g.biases[l][i];
    }
}

// Backward pass given a completed forward cache; returns the loss.
double backward(const MlpParams& params, const TrainingExample& example,
                const ForwardCache& cache, Gradients& g) {
    const MlpConfig& c = params.config;
    const std::vector<double>& out = cache.activations.back();

    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        loss -= example.target.cells[i] * std::log(out[i] + kLogEpsilon);
    loss /= c.out_depth;

    // d loss / d final-pre-activation, exact with the epsilon floor:
    // per row, with s_w = t_w * o_w / (o_w + eps):  dz_j = (-s_j + o_j * sum(s)) / D.
    std::vector<double> delta(out.size());
    for (std::uint32_t p = 0; p < c.out_depth; ++p) {
        const std::size_t base = std::size_t(p) * c.out_width;
        double s_sum = 0.0;
        for (std::uint32_t w = 0; w < c.out_width; ++w) {
            const double o = out[base + w];
            const double s = example.target.cells[base + w] * o / (o + kLogEpsilon);
            delta[base + w] = -s;
            s_sum += s;
        }
        for (std::uint32_t w = 0; w < c.out_width; ++w) {
            delta[base + w] = (delta[base + w] + out[base + w] * s_sum) / c.out_depth;
        }
    }

    for (int l = c.n_layers - 1; l >= 0; --l) {
        const int n_in = params.layer_input(l);
        const int n_out = params.layer_output(l);
        const std::vector<double>& in = cache.activations[l];
        for (int i = 0; i < n_out; ++i) {
            g.biases[l][i] += delta[i];
            double* grow = g.weights[l].data() + std::size_t(i) * n_in;
            const double di = delta[i];
            for (int j = 0; j < n_in; ++j) grow[j] += di * in[j];
        }
        if (l == 0) break;
        std::vector<double> prev(n_in, 0.0);
        const double* w = params.weights[l].data();
        for (int i = 0; i < n_out; ++i) {
            const double di = delta[i];
            const double* wrow = w + std::size_t(i) * n_in;
            for (int j = 0; j < n_in; ++j) prev[j] += wrow[j] * di;
        }
        for (int j = 0; j < n_in; ++j)
            if (cache.pre[l - 1][j] <= 0.0) prev[j] = 0.0;
        delta = std::move(prev);
    }
    return loss;
}

}  // namespace

Gradients gradients(const MlpParams& params, const TrainingExample& example) {
    check_target(example.target, params.config);
    ForwardCache cache;
    run_forward(params, example.input, cache);
    Gradients g = zero_gradients(params);
    backward(params, example, cache, g);
    return g;
}

TrainResult train(const std::vector<TrainingExample>& dataset, const MlpConfig& config,
                  int workers) {
    check_config(config);
    if (dataset.empty()) throw EmptyInputError("training dataset is empty");
    for (const auto& ex : dataset) check_target(ex.target, config);

    MlpParams params = init_params(config);

    auto mean_loss = [&](const MlpParams& p) {
        double total = 0.0;
        for (const auto& ex : dataset) total += cross_entropy(forward(p, ex.input), ex.target);
        return total / dataset.size();
    };

    TrainResult result;
    result.initial_loss = mean_loss(params);

    Gradients m = zero_gradients(params);
    Gradients v = zero_gradients(params);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uint64_t step = 0;

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    CounterRng shuffle_rng(counter_mix(config.seed, 0x5u));
    const std::size_t kChunk = 8;  // fixed so reductions do not depend on workers

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.next_u64() % i;
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const std::size_t batch_n = end - start;
            const std::size_t n_chunks = (batch_n + kChunk - 1) / kChunk;

            std::vector<Gradients> partial(n_chunks);
            std::vector<double> partial_loss(n_chunks, 0.0);
            parallel_chunks(n_chunks, workers, [&](std::size_t c0, std::size_t c1) {
                for (std::size_t c = c0; c < c1; ++c) {
                    partial[c] = zero_gradients(params);
                    ForwardCache cache;
                    const std::size_t lo = start + c * kChunk;
                    const std::size_t hi = std::min(end, lo + kChunk);
                    for (std::size_t i = lo; i < hi; ++i) {
                        const TrainingExample& ex = dataset[order[i]];
                        run_forward(params, ex.input, cache);
                        partial_loss[c] += backward(params, ex, cache, partial[c]);
                    }
                }
            });

            Gradients grad = zero_gradients(params);
            double batch_loss = 0.0;
            for (std::size_t c = 0; c < n_chunks; ++c) {
                add_scaled(grad, partial[c], 1.0 / batch_n);
                batch_loss += partial_loss[c];
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss))
                throw Error("training diverged (non-finite loss) at epoch " +
                            std::to_string(epoch) + " batch " +
                            std::to_string(start / config.batch_size));

            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < params.weights.size(); ++l) {
                auto update = [&](std::vector<double>& theta, std::vector<double>& ml,
                                  std::vector<double>& vl, const std::vector<double>& gl) {
                    for (std::size_t i = 0; i < theta.size(); ++i) {
                        ml[i] = beta1 * ml[i] + (1.0 - beta1) * gl[i];
                        vl[i] = beta2 * vl[i] + (1.0 - beta2) * gl[i] * gl[i];
                        theta[i] -= config.learning_rate * (ml[i] / bc1) /
                                    (std::sqrt(vl[i] / bc2) + adam_eps);
                    }
                };
                update(params.weights[l], m.weights[l], v.weights[l], grad.weights[l]);
                update(params.biases[l], m.biases[l], v.biases[l], grad.biases[l]);
            }
        }
    }

    result.final_loss = mean_loss(params);
    result.params = std::move(params);
    return result;
}

std::vector<std::pair<std::uint32_t, double>> score_candidates(
    const MlpParams& params, std::span<const double> user_input,
    const std::vector<std::pair<std::uint32_t, CodeSet>>& candidates, std::size_t top_k) {
    std::vector<std::pair<std::uint32_t, double>> ranked;
    if (candidates.empty()) return ranked;
    const Sketch predicted = forward(params, user_input);

    // Hoist the logarithms: geomean readout sums ln(cell + eps) over depth
    // rows, so the per-cell logs can be taken once for all candidates.
    std::vector<double> log_cells(predicted.cells.size());
    for (std::size_t i = 0; i < log_cells.size(); ++i)
        log_cells[i] = std::log(predicted.cells[i] + kLogEpsilon);

    ranked.reserve(candidates.size());
    for (const auto& [item, codes] : candidates) {
        if (codes.size() != predicted.depth)
            throw ContractError("code set depth does not match model output");
        double log_sum = 0.0;
        for (std::uint32_t p = 0; p < predicted.depth; ++p) {
            if (codes[p] >= predicted.width) throw ContractError("bucket index out of range");
            log_sum += log_cells[std::size_t(p) * predicted.width + codes[p]];
        }
        ranked.emplace_back(item, std::exp(log_sum / predicted.depth));
    }

    const auto by_score_then_id = [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    };
    if (top_k > 0 && top_k < ranked.size()) {
        std::partial_sort(ranked.begin(), ranked.begin() + top_k, ranked.end(),
                          by_score_then_id);
        ranked.resize(top_k);
    } else {
        std::sort(ranked.begin(), ranked.end(), by_score_then_id);
    }
    return ranked;
}

void save_model(const MlpParams& params, std::ostream& out) {
    binio::write_magic(out, "FRM1");
    const MlpConfig& c = params.config;
    binio::write_u32(out, static_cast<std::uint32_t>(c.n_layers));
    binio::write_u32(out, static_cast<std::uint32_t>(c.hidden_size));
    binio::write_u32(out, static_cast<std::uint32_t>(c.input_size));
    binio::write_u32(out, c.out_depth);
    binio::write_u32(out, c.out_width);
    binio::write_f64(out, c.learning_rate);
    binio::write_u32(out, static_cast<std::uint32_t>(c.batch_size));
    binio::write_u32(out, static_cast<std::uint32_t>(c.epochs));
    binio::write_u64(out, c.seed);
    for (int l = 0; l < c.n_layers; ++l) {
        for (double w : params.weights[l]) binio::write_f64(out, w);
        for (double b : params.biases[l]) binio::write_f64(out, b);
    }
    out.flush();
    if (!out) throw IoError("failed writing model");
}

MlpParams load_model(std::istream& in) {
    binio::expect_magic(in, "FRM1");
    MlpConfig c;
    c.n_layers = static_cast<int>(binio::read_u32(in));
    c.hidden_size = static_cast<int>(binio::read_u32(in));
    c.input_size = static_cast<int>(binio::read_u32(in));
    c.out_depth = binio::read_u32(in);
    c.out_width = binio::read_u32(in);
    c.learning_rate = binio::read_f64(in);
    c.batch_size = static_cast<int>(binio::read_u32(in));
    c.epochs = static_cast<int>(binio::read_u32(in));
    c.seed = binio::read_u64(in);
    check_config(c);
    MlpParams p;
    p.config = c;
    p.weights.resize(c.n_layers);
    p.biases.resize(c.n_layers);
    for (int l = 0; l < c.n_layers; ++l) {
        p.weights[l].resize(std::size_t(p.layer_output(l)) * p.layer_input(l));
        for (auto& w : p.weights[l]) w = binio::read_f64(in);
        p.biases[l].resize(p.layer_output(l));
        for (auto& b : p.biases[l]) b = binio::read_f64(in);
    }
    return p;
}

void save_examples(const std::vector<TrainingExample>& examples, std::ostream& out) {
    if (examples.empty()) throw EmptyInputError("no training examples to save");
    binio::write_magic(out, "FRX1");
    binio::write_u64(out, examples.size());
    binio::write_u32(out, static_cast<std::uint32_t>(examples[0].input.size()));
    binio::write_u32(out, examples[0].target.depth);
    binio::write_u32(out, examples[0].target.width);
    for (const auto& ex : examples) {
        for (double v : ex.input) binio::write_f64(out, v);
        for (double v : ex.target.cells) binio::write_f64(out, v);
    }
    out.flush();
    if (!out) throw IoError("failed writing examples");
}

std::vector<TrainingExample> load_examples(std::istream& in) {
    binio::expect_magic(in, "FRX1");
    const std::uint64_t n = binio::read_u64(in);
    const std::uint32_t input_size = binio::read_u32(in);
    const std::uint32_t depth = binio::read_u32(in);
    const std::uint32_t width = binio::read_u32(in);
    std::vector<TrainingExample> examples(n);
    for (auto& ex : examples) {
        ex.input.resize(input_size);
        for (auto& v : ex.input) v = binio::read_f64(in);
        ex.target.depth = depth;
        ex.target.width = width;
        ex.target.kind = SketchKind::probabilities;
        ex.target.cells.resize(std::size_t(depth) * width);
        for (auto& v : ex.target.cells) v = binio::read_f64(in);
    }
    return examples;
}

}  // namespace fusionrec
