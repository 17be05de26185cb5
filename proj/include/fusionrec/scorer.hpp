#pragma once

// Shallow feed-forward scorer: flattened history sketch in, probability sketch
// out (softmax across the width of every depth row), trained with
// width-normalized cross-entropy and adaptive-moment gradient descent.
// Candidates are ranked by geometric-mean readout at their codes.

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "fusionrec/sketch.hpp"

namespace fusionrec {

struct MlpConfig {
    int n_layers = 2;  // affine layers, 1..5
    int hidden_size = 128;
    int input_size = 0;
    std::uint32_t out_depth = 8;
    std::uint32_t out_width = 128;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 50;
    std::uint64_t seed = 0;
};

struct MlpParams {
    MlpConfig config;
    std::vector<std::vector<double>> weights;  // layer l: out x in, row-major
    std::vector<std::vector<double>> biases;   // layer l: out

    int layer_input(int l) const;
    int layer_output(int l) const;
};

struct TrainingExample {
    std::vector<double> input;
    Sketch target;  // probabilities, every depth row sums to 1
};

// Seeded init: weights uniform(-1, 1) scaled by 1/sqrt(fan_in), biases zero.
MlpParams init_params(const MlpConfig& config);

// Affine layers with rectifier activations between them; the final layer is
// reshaped to out_depth x out_width and soft-maxed across each row's width.
// Non-finite activations fault with the offending layer index.
Sketch forward(const MlpParams& params, std::span<const double> input);

// (1/D) sum_p sum_w -target * ln(output + 1e-9); both sketches must share the
// layout and be probabilities.
double cross_entropy(const Sketch& output, const Sketch& target);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Exact analytic gradients of cross_entropy(forward(input), target).
Gradients gradients(const MlpParams& params, const TrainingExample& example);

struct TrainResult {
    MlpParams params;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

// Mini-batch descent with adaptive moments (beta1 0.9, beta2 0.999, eps 1e-8),
// deterministic for a fixed seed: the per-epoch shuffle is seeded, and batch
// gradients accumulate in fixed example order even when workers > 1 (partials
// are reduced chunk-by-chunk in index order). Non-finite loss aborts with the
// epoch and batch in the message.
TrainResult train(const std::vector<TrainingExample>& dataset, const MlpConfig& config,
                  int workers = 1);

// One forward pass, geometric-mean readout per candidate at its codes, sorted
// by descending score with ties broken by ascending item id. top_k > 0
// returns just the leading top_k entries (same order as the full sort).
std::vector<std::pair<std::uint32_t, double>> score_candidates(
    const MlpParams& params, std::span<const double> user_input,
    const std::vector<std::pair<std::uint32_t, CodeSet>>& candidates, std::size_t top_k = 0);

// Model file: magic "FRM1", config header, layer tensors as 64-bit reals.
void save_model(const MlpParams& params, std::ostream& out);
MlpParams load_model(std::istream& in);

// Training-set file: magic "FRX1", shapes, then input + target cells per row.
void save_examples(const std::vector<TrainingExample>& examples, std::ostream& out);
std::vector<TrainingExample> load_examples(std::istream& in);

}  // namespace fusionrec
