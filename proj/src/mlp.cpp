#include "trustnav/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "trustnav/rng.hpp"

namespace trustnav::net {

namespace {

struct Offsets {
  int w1, b1, w2, b2, wp, bp, wv, bv, end;
};

Offsets offsets(const Shape& s) {
  Offsets o;
  o.w1 = 0;
  o.b1 = o.w1 + s.hidden1 * s.input;
  o.w2 = o.b1 + s.hidden1;
  o.b2 = o.w2 + s.hidden2 * s.hidden1;
  o.wp = o.b2 + s.hidden2;
  o.bp = o.wp + s.actions * s.hidden2;
  o.wv = o.bp + s.actions;
  o.bv = o.wv + s.hidden2;
  o.end = o.bv + 1;
  return o;
}

struct ForwardCache {
  std::vector<double> h1, h2;  // post-tanh activations
  std::vector<double> logits, probs, logp;
  double value = 0;
  double entropy = 0;
};

void forward_cached(const MlpParams& p, std::span<const double> obs,
                    ForwardCache& c) {
  const Shape& s = p.shape;
  if (static_cast<int>(obs.size()) != s.input)
    throw std::invalid_argument("observation size does not match network");
  for (double x : obs)
    if (!std::isfinite(x))
      throw std::invalid_argument("non-finite observation component");

  c.h1.assign(s.hidden1, 0.0);
  auto w1 = p.w1(); auto b1 = p.b1();
  for (int i = 0; i < s.hidden1; ++i) {
    double acc = b1[i];
    const double* row = &w1[i * s.input];
    for (int j = 0; j < s.input; ++j) acc += row[j] * obs[j];
    c.h1[i] = std::tanh(acc);
  }

  c.h2.assign(s.hidden2, 0.0);
  auto w2 = p.w2(); auto b2 = p.b2();
  for (int i = 0; i < s.hidden2; ++i) {
    double acc = b2[i];
    const double* row = &w2[i * s.hidden1];
    for (int j = 0; j < s.hidden1; ++j) acc += row[j] * c.h1[j];
    c.h2[i] = std::tanh(acc);
  }

  c.logits.assign(s.actions, 0.0);
  auto wp = p.wp(); auto bp = p.bp();
  for (int i = 0; i < s.actions; ++i) {
    double acc = bp[i];
    const double* row = &wp[i * s.hidden2];
    for (int j = 0; j < s.hidden2; ++j) acc += row[j] * c.h2[j];
    c.logits[i] = acc;
  }

  auto wv = p.wv();
  double v = p.bv()[0];
  for (int j = 0; j < s.hidden2; ++j) v += wv[j] * c.h2[j];
  c.value = v;

  // stable softmax / log-softmax
  double mx = *std::max_element(c.logits.begin(), c.logits.end());
  double z = 0.0;
  for (double l : c.logits) z += std::exp(l - mx);
  double logz = std::log(z) + mx;
  c.probs.assign(s.actions, 0.0);
  c.logp.assign(s.actions, 0.0);
  c.entropy = 0.0;
  for (int i = 0; i < s.actions; ++i) {
    c.logp[i] = c.logits[i] - logz;
    c.probs[i] = std::exp(c.logp[i]);
    c.entropy -= c.probs[i] * c.logp[i];
  }
}

// Shared loss/gradient walk; grad == nullptr computes the loss only.
LossStats run_batch(const MlpParams& p, std::span<const Sample> batch,
                    const LossSpec& spec, std::vector<double>* grad) {
  if (batch.empty()) throw std::invalid_argument("empty minibatch");
  const Shape& s = p.shape;
  const double n = static_cast<double>(batch.size());
  const Offsets o = offsets(s);
  if (grad) grad->assign(o.end, 0.0);

  LossStats stats;
  ForwardCache c;
  std::vector<double> g_logits(s.actions);
  std::vector<double> d_h2(s.hidden2), d_pre2(s.hidden2);
  std::vector<double> d_h1(s.hidden1), d_pre1(s.hidden1);

  for (const Sample& smp : batch) {
    forward_cached(p, smp.obs, c);
    if (smp.action < 0 || smp.action >= s.actions)
      throw std::invalid_argument("action id outside the policy head");

    const double logp_new = c.logp[smp.action];
    const double ratio = std::exp(logp_new - smp.logp_old);
    const double clipped =
        std::clamp(ratio, 1.0 - spec.clip_eps, 1.0 + spec.clip_eps);
    const double pg1 = -smp.advantage * ratio;
    const double pg2 = -smp.advantage * clipped;
    const double policy_term = std::max(pg1, pg2);
    const double vdiff = c.value - smp.ret;

    stats.policy += policy_term / n;
    stats.value += vdiff * vdiff / n;
    stats.entropy += c.entropy / n;
    if (std::abs(ratio - 1.0) > spec.clip_eps) stats.clip_fraction += 1.0 / n;

    if (!grad) continue;

    // d(policy_term)/d(logp_new): zero when the clipped branch is active
    // and saturated; ties flow through the unclipped branch.
    const double g_logp = pg1 >= pg2 ? -smp.advantage * ratio : 0.0;
    const double g_value = spec.value_coef * 2.0 * vdiff / n;

    for (int i = 0; i < s.actions; ++i) {
      double d_logp = (i == smp.action ? 1.0 : 0.0) - c.probs[i];
      double d_entropy = -c.probs[i] * (c.logp[i] + c.entropy);
      g_logits[i] =
          (g_logp * d_logp - spec.entropy_coef * d_entropy) / n;
    }

    double* gwp = grad->data() + o.wp;
    double* gbp = grad->data() + o.bp;
    double* gwv = grad->data() + o.wv;
    double* gbv = grad->data() + o.bv;
    auto wp = p.wp();
    auto wv = p.wv();

    std::fill(d_h2.begin(), d_h2.end(), 0.0);
    for (int i = 0; i < s.actions; ++i) {
      const double gi = g_logits[i];
      if (gi == 0.0) continue;
      const double* row = &wp[i * s.hidden2];
      double* grow = gwp + i * s.hidden2;
      for (int j = 0; j < s.hidden2; ++j) {
        grow[j] += gi * c.h2[j];
        d_h2[j] += gi * row[j];
      }
      gbp[i] += gi;
    }
    for (int j = 0; j < s.hidden2; ++j) {
      gwv[j] += g_value * c.h2[j];
      d_h2[j] += g_value * wv[j];
    }
    gbv[0] += g_value;

    for (int j = 0; j < s.hidden2; ++j)
      d_pre2[j] = d_h2[j] * (1.0 - c.h2[j] * c.h2[j]);

    double* gw2 = grad->data() + o.w2;
    double* gb2 = grad->data() + o.b2;
    auto w2 = p.w2();
    std::fill(d_h1.begin(), d_h1.end(), 0.0);
    for (int i = 0; i < s.hidden2; ++i) {
      const double di = d_pre2[i];
      if (di == 0.0) continue;
      const double* row = &w2[i * s.hidden1];
      double* grow = gw2 + i * s.hidden1;
      for (int j = 0; j < s.hidden1; ++j) {
        grow[j] += di * c.h1[j];
        d_h1[j] += di * row[j];
      }
      gb2[i] += di;
    }

    for (int j = 0; j < s.hidden1; ++j)
      d_pre1[j] = d_h1[j] * (1.0 - c.h1[j] * c.h1[j]);

    double* gw1 = grad->data() + o.w1;
    double* gb1 = grad->data() + o.b1;
    for (int i = 0; i < s.hidden1; ++i) {
      const double di = d_pre1[i];
      if (di == 0.0) continue;
      double* grow = gw1 + i * s.input;
      for (int j = 0; j < s.input; ++j) grow[j] += di * smp.obs[j];
      gb1[i] += di;
    }
  }

  stats.total = stats.policy + spec.value_coef * stats.value -
                spec.entropy_coef * stats.entropy;
  return stats;
}

}  // namespace

MlpParams MlpParams::init(const Shape& shape, std::uint64_t seed) {
  MlpParams p;
  p.shape = shape;
  p.flat.assign(offsets(shape).end, 0.0);
  std::mt19937_64 rng(mix_seed(seed, 0x3117));

  auto fill = [&rng](std::span<double> w, int fan_in, int fan_out) {
    double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& x : w) x = dist(rng);
  };
  fill(p.w1(), shape.input, shape.hidden1);
  fill(p.w2(), shape.hidden1, shape.hidden2);
  fill(p.wp(), shape.hidden2, shape.actions);
  fill(p.wv(), shape.hidden2, 1);
  return p;
}

#define PARAM_SPAN(name, off, len)                                       \
  std::span<double> MlpParams::name() {                                  \
    Offsets o = offsets(shape);                                          \
    return {flat.data() + o.off, static_cast<std::size_t>(len)};         \
  }                                                                      \
  std::span<const double> MlpParams::name() const {                      \
    Offsets o = offsets(shape);                                          \
    return {flat.data() + o.off, static_cast<std::size_t>(len)};         \
  }

PARAM_SPAN(w1, w1, shape.hidden1* shape.input)
PARAM_SPAN(b1, b1, shape.hidden1)
PARAM_SPAN(w2, w2, shape.hidden2* shape.hidden1)
PARAM_SPAN(b2, b2, shape.hidden2)
PARAM_SPAN(wp, wp, shape.actions* shape.hidden2)
PARAM_SPAN(bp, bp, shape.actions)
PARAM_SPAN(wv, wv, shape.hidden2)
PARAM_SPAN(bv, bv, 1)

#undef PARAM_SPAN

PolicyOutput forward(const MlpParams& params, std::span<const double> obs) {
  ForwardCache c;
  forward_cached(params, obs, c);
  return {std::move(c.logits), std::move(c.probs), c.value};
}

LossStats ppo_loss(const MlpParams& params, std::span<const Sample> batch,
                   const LossSpec& spec) {
  return run_batch(params, batch, spec, nullptr);
}

LossStats backward(const MlpParams& params, std::span<const Sample> batch,
                   const LossSpec& spec, std::vector<double>& grad) {
  return run_batch(params, batch, spec, &grad);
}

std::pair<int, double> sample_action(const PolicyOutput& out,
                                     std::mt19937_64& rng) {
  double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int chosen = static_cast<int>(out.probs.size()) - 1;
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    acc += out.probs[i];
    if (draw < acc) {
      chosen = static_cast<int>(i);
      break;
    }
  }
  return {chosen, std::log(out.probs[chosen])};
}

int greedy_action(const PolicyOutput& out) {
  return static_cast<int>(
      std::max_element(out.logits.begin(), out.logits.end()) -
      out.logits.begin());
}

namespace {
constexpr char kMagic[8] = {'T', 'N', 'A', 'V', 'M', 'L', 'P', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (bits >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
}  // namespace

void save_params(std::ostream& out, const MlpParams& params) {
  out.write(kMagic, 8);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(params.shape.input));
  write_u32(out, static_cast<std::uint32_t>(params.shape.hidden1));
  write_u32(out, static_cast<std::uint32_t>(params.shape.hidden2));
  write_u32(out, static_cast<std::uint32_t>(params.shape.actions));
  for (double v : params.flat) write_f64(out, v);
}

MlpParams load_params(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a network parameter file");
  std::uint32_t version = read_u32(in);
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported parameter format version " +
                             std::to_string(version));
  MlpParams p;
  p.shape.input = static_cast<int>(read_u32(in));
  p.shape.hidden1 = static_cast<int>(read_u32(in));
  p.shape.hidden2 = static_cast<int>(read_u32(in));
  p.shape.actions = static_cast<int>(read_u32(in));
  p.flat.resize(offsets(p.shape).end);
  for (double& v : p.flat) v = read_f64(in);
  if (!in) throw std::runtime_error("truncated parameter file");
  return p;
}

void save_params_file(const std::filesystem::path& path,
                      const MlpParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save_params(out, params);
}

MlpParams load_params_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_params(in);
}

}  // namespace trustnav::net
