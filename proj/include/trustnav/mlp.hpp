#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace trustnav::net {

struct Shape {
  int input = 14;
  int hidden1 = 64;
  int hidden2 = 64;
  int actions = 50;

  bool operator==(const Shape&) const = default;
  int param_count() const {
    return hidden1 * input + hidden1 + hidden2 * hidden1 + hidden2 +
           actions * hidden2 + actions + hidden2 + 1;
  }
};

// Shared tanh trunk with a policy head (action logits) and a value head.
// Parameters live in one flat array, row-major per layer, in order:
//   w1 [h1 x in], b1 [h1], w2 [h2 x h1], b2 [h2],
//   wp [actions x h2], bp [actions], wv [h2], bv [1]
struct MlpParams {
  Shape shape;
  std::vector<double> flat;

  // Xavier-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
  static MlpParams init(const Shape& shape, std::uint64_t seed);

  std::span<double> w1();
  std::span<double> b1();
  std::span<double> w2();
  std::span<double> b2();
  std::span<double> wp();
  std::span<double> bp();
  std::span<double> wv();
  std::span<double> bv();
  std::span<const double> w1() const;
  std::span<const double> b1() const;
  std::span<const double> w2() const;
  std::span<const double> b2() const;
  std::span<const double> wp() const;
  std::span<const double> bp() const;
  std::span<const double> wv() const;
  std::span<const double> bv() const;
};

struct PolicyOutput {
  std::vector<double> logits;
  std::vector<double> probs;  // softmax(logits), strictly positive
  double value = 0;
};

PolicyOutput forward(const MlpParams& params, std::span<const double> obs);

// One rollout step as seen by the PPO loss.
struct Sample {
  std::vector<double> obs;
  int action = 0;
  double logp_old = 0;
  double advantage = 0;
  double ret = 0;
};

struct LossSpec {
  double clip_eps = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

struct LossStats {
  double total = 0;
  double policy = 0;
  double value = 0;
  double entropy = 0;
  double clip_fraction = 0;
};

// Clipped-surrogate PPO loss over a minibatch (means over samples).
LossStats ppo_loss(const MlpParams& params, std::span<const Sample> batch,
                   const LossSpec& spec);

// Same loss, plus the analytic gradient of `total` w.r.t. every parameter.
// `grad` is resized and overwritten.
LossStats backward(const MlpParams& params, std::span<const Sample> batch,
                   const LossSpec& spec, std::vector<double>& grad);

// Categorical draw over probs; returns (action id, log probability).
std::pair<int, double> sample_action(const PolicyOutput& out,
                                     std::mt19937_64& rng);
int greedy_action(const PolicyOutput& out);

// Versioned binary format: magic, format version, layer sizes, then the
// flat parameters as little-endian 64-bit floats in layout order.
void save_params(std::ostream& out, const MlpParams& params);
MlpParams load_params(std::istream& in);
void save_params_file(const std::filesystem::path& path,
                      const MlpParams& params);
MlpParams load_params_file(const std::filesystem::path& path);

}  // namespace trustnav::net
