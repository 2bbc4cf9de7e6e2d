#ifndef WAVGUARD_WAVENET_HPP
#define WAVGUARD_WAVENET_HPP

// Inference-only WaveNet-style vocoder: one-hot input projection, a stack of
// gated residual blocks with kernel-2 dilated causal convolutions and 1x1 aux
// conditioning, skip accumulation, two ReLU + 1x1 post layers, and a 256-way
// softmax over mu-law levels.
//
// Weight file (all integers u32 little-endian, tensors f32 little-endian):
//   "WGWN" version n_blocks residual_channels skip_channels aux_dim kernel levels
//   dilations[n_blocks]
//   tensor_count, then per tensor: ndim dims[ndim] data[prod(dims)]
// Tensors follow the order of WnModel::for_each_tensor.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavguard/lpcdc.hpp"
#include "wavguard/sampler.hpp"
#include "wavguard/signal.hpp"

namespace wavguard {

struct WnConfig {
  std::size_t n_blocks = 30;
  std::size_t residual_channels = 512;
  std::size_t skip_channels = 256;
  std::size_t aux_dim = 38;
  std::vector<std::size_t> dilations = cycled_dilations(10, 3);

  // 2^0 .. 2^(per_cycle - 1), repeated.
  static std::vector<std::size_t> cycled_dilations(std::size_t per_cycle, std::size_t cycles) {
    std::vector<std::size_t> d;
    for (std::size_t c = 0; c < cycles; ++c)
      for (std::size_t i = 0; i < per_cycle; ++i) d.push_back(std::size_t{1} << i);
    return d;
  }

  std::size_t receptive_field() const {
    std::size_t r = 1;
    for (auto d : dilations) r += d;
    return r;
  }

  void validate() const {
    if (dilations.size() != n_blocks) throw std::invalid_argument("WnConfig: dilations length != n_blocks");
    if (residual_channels == 0 || skip_channels == 0) throw std::invalid_argument("WnConfig: zero channels");
    for (auto d : dilations)
      if (d == 0) throw std::invalid_argument("WnConfig: zero dilation");
  }

  friend bool operator==(const WnConfig&, const WnConfig&) = default;
};

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::uint32_t> d) : dims(std::move(d)) {
    std::size_t n = 1;
    for (auto v : dims) n *= v;
    data.assign(n, 0.0f);
  }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct WnBlock {
  Tensor filter_w;  // [2][R][R]; tap 0 multiplies x[p - d], tap 1 multiplies x[p]
  Tensor filter_b;  // [R]
  Tensor gate_w;    // [2][R][R]
  Tensor gate_b;    // [R]
  Tensor aux_filter_w;  // [A][R]
  Tensor aux_gate_w;    // [A][R]
  Tensor res_w;  // [R][R]
  Tensor res_b;  // [R]
  Tensor skip_w;  // [R][S]
  Tensor skip_b;  // [S]
  friend bool operator==(const WnBlock&, const WnBlock&) = default;
};

namespace detail {
// y[o] += sum_i x[i] * w[i][o]
inline void matvec_acc(std::span<const float> x, const float* w, std::size_t out_dim, float* y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float xi = x[i];
    if (xi == 0.0f) continue;
    const float* row = w + i * out_dim;
    for (std::size_t o = 0; o < out_dim; ++o) y[o] += xi * row[o];
  }
}
}  // namespace detail

class WnModel : public Sampler {
public:
  explicit WnModel(WnConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto R = static_cast<std::uint32_t>(config_.residual_channels);
    const auto S = static_cast<std::uint32_t>(config_.skip_channels);
    const auto A = static_cast<std::uint32_t>(config_.aux_dim);
    const auto L = static_cast<std::uint32_t>(kNumLevels);
    embed_ = Tensor({L, R});
    blocks_.resize(config_.n_blocks);
    for (auto& b : blocks_) {
      b.filter_w = Tensor({2, R, R});
      b.filter_b = Tensor({R});
      b.gate_w = Tensor({2, R, R});
      b.gate_b = Tensor({R});
      b.aux_filter_w = Tensor({A, R});
      b.aux_gate_w = Tensor({A, R});
      b.res_w = Tensor({R, R});
      b.res_b = Tensor({R});
      b.skip_w = Tensor({R, S});
      b.skip_b = Tensor({S});
    }
    post1_w_ = Tensor({S, S});
    post1_b_ = Tensor({S});
    post2_w_ = Tensor({S, L});
    post2_b_ = Tensor({L});
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static WnModel random(WnConfig config, std::uint64_t seed) {
    WnModel m(std::move(config));
    std::mt19937_64 rng(seed);
    m.for_each_tensor([&](Tensor& t) {
      if (t.dims.size() == 1) return;
      std::size_t fan_in = t.dims.size() == 3 ? 2 * t.dims[1] : t.dims[0];
      const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
      for (auto& v : t.data) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = static_cast<float>((2.0 * u - 1.0) * bound);
      }
    });
    return m;
  }

  const WnConfig& config() const noexcept { return config_; }
  std::size_t receptive_field() const override { return config_.receptive_field(); }
  std::size_t aux_dim() const override { return config_.aux_dim; }

  Tensor& embed() { return embed_; }
  std::vector<WnBlock>& blocks() { return blocks_; }
  Tensor& post1_w() { return post1_w_; }
  Tensor& post1_b() { return post1_b_; }
  Tensor& post2_w() { return post2_w_; }
  Tensor& post2_b() { return post2_b_; }

  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
    fn(embed_);
    for (auto& b : blocks_) {
      fn(b.filter_w), fn(b.filter_b), fn(b.gate_w), fn(b.gate_b), fn(b.aux_filter_w), fn(b.aux_gate_w);
      fn(b.res_w), fn(b.res_b), fn(b.skip_w), fn(b.skip_b);
    }
    fn(post1_w_), fn(post1_b_), fn(post2_w_), fn(post2_b_);
  }

  template <typename Fn>
  void for_each_tensor(Fn&& fn) const {
    const_cast<WnModel*>(this)->for_each_tensor([&](Tensor& t) { fn(static_cast<const Tensor&>(t)); });
  }

  friend bool operator==(const WnModel& a, const WnModel& b) {
    return a.config_ == b.config_ && a.embed_ == b.embed_ && a.blocks_ == b.blocks_ && a.post1_w_ == b.post1_w_ &&
           a.post1_b_ == b.post1_b_ && a.post2_w_ == b.post2_w_ && a.post2_b_ == b.post2_b_;
  }

  // PMF of y[t] given the r most recent levels (oldest first). Only the
  // positions each layer actually needs are evaluated.
  Pmf256 forward(std::span<const LevelIndex> history, std::span<const float> aux) const {
    const std::size_t r = receptive_field();
    if (history.size() != r) throw std::invalid_argument("WnModel: history length != receptive field");
    if (aux.size() != config_.aux_dim) throw std::invalid_argument("WnModel: aux length != aux_dim");
    const std::size_t R = config_.residual_channels;
    const std::size_t S = config_.skip_channels;

    // x[p] for p in [0, r); rows are positions.
    std::vector<float> x(r * R);
    for (std::size_t p = 0; p < r; ++p) {
      const float* e = embed_.data.data() + static_cast<std::size_t>(history[p].value()) * R;
      std::copy(e, e + R, x.begin() + static_cast<std::ptrdiff_t>(p * R));
    }

    std::vector<float> skip(S, 0.0f), f(R), g(R), z(R), aux_f(R), aux_g(R), delta(R);
    std::size_t remaining = r - 1;  // sum of dilations of this and later blocks
    for (std::size_t li = 0; li < blocks_.size(); ++li) {
      const WnBlock& b = blocks_[li];
      const std::size_t d = config_.dilations[li];
      remaining -= d;
      std::fill(aux_f.begin(), aux_f.end(), 0.0f);
      std::fill(aux_g.begin(), aux_g.end(), 0.0f);
      detail::matvec_acc(aux, b.aux_filter_w.data.data(), R, aux_f.data());
      detail::matvec_acc(aux, b.aux_gate_w.data.data(), R, aux_g.data());
      // Outputs needed at [r-1-remaining, r-1]; update in descending order so
      // x[p - d] is still this layer's input when p is processed.
      for (std::size_t p = r - 1;; --p) {
        const std::span<const float> past(x.data() + (p - d) * R, R);
        const std::span<const float> now(x.data() + p * R, R);
        for (std::size_t o = 0; o < R; ++o) {
          f[o] = b.filter_b.data[o] + aux_f[o];
          g[o] = b.gate_b.data[o] + aux_g[o];
        }
        detail::matvec_acc(past, b.filter_w.data.data(), R, f.data());
        detail::matvec_acc(now, b.filter_w.data.data() + R * R, R, f.data());
        detail::matvec_acc(past, b.gate_w.data.data(), R, g.data());
        detail::matvec_acc(now, b.gate_w.data.data() + R * R, R, g.data());
        for (std::size_t o = 0; o < R; ++o) z[o] = std::tanh(f[o]) / (1.0f + std::exp(-g[o]));
        std::copy(b.res_b.data.begin(), b.res_b.data.end(), delta.begin());
        detail::matvec_acc(z, b.res_w.data.data(), R, delta.data());
        if (p == r - 1) {
          for (std::size_t o = 0; o < S; ++o) skip[o] += b.skip_b.data[o];
          detail::matvec_acc(z, b.skip_w.data.data(), S, skip.data());
        }
        float* xp = x.data() + p * R;
        for (std::size_t o = 0; o < R; ++o) xp[o] += delta[o];
        if (p == r - 1 - remaining) break;
      }
    }

    for (auto& v : skip) v = std::max(v, 0.0f);
    std::vector<float> hidden(post1_b_.data);
    detail::matvec_acc(skip, post1_w_.data.data(), S, hidden.data());
    for (auto& v : hidden) v = std::max(v, 0.0f);
    std::vector<float> logits(post2_b_.data);
    detail::matvec_acc(hidden, post2_w_.data.data(), kNumLevels, logits.data());
    Pmf256::Array lw{};
    for (int q = 0; q < kNumLevels; ++q) lw[q] = logits[q];
    return Pmf256::from_log_weights(lw);
  }

  Pmf256 predict(std::size_t, std::span<const LevelIndex> history, std::span<const float> aux) const override {
    return forward(history, aux);
  }

private:
  WnConfig config_;
  Tensor embed_;
  std::vector<WnBlock> blocks_;
  Tensor post1_w_, post1_b_, post2_w_, post2_b_;
};

inline Pmf256 wn_forward(const WnModel& model, std::span<const LevelIndex> history, std::span<const float> aux) {
  return model.forward(history, aux);
}

inline Generated wn_generate(const WnModel& model, const AuxTrack& aux, std::size_t n_samples, std::uint64_t seed,
                             int sample_rate = 22050, bool capture_pmfs = false) {
  return generate(model, aux, n_samples, seed, sample_rate, capture_pmfs);
}

inline std::size_t parameter_count(const WnConfig& cfg) {
  const std::size_t R = cfg.residual_channels, S = cfg.skip_channels, A = cfg.aux_dim, L = kNumLevels;
  const std::size_t per_block = 2 * (2 * R * R + R) + 2 * A * R + (R * R + R) + (R * S + S);
  return L * R + cfg.n_blocks * per_block + (S * S + S) + (S * L + L);
}

class WeightFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr std::uint32_t kWeightVersion = 1;
inline constexpr std::uint32_t kKernelSize = 2;

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
public:
  explicit ByteReader(const std::vector<unsigned char>& b) : bytes_(b) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw WeightFormatError("weight file truncated");
  }
  bool at_end() const { return pos_ == bytes_.size(); }

private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_weights(const WnModel& model) {
  using detail::put_u32;
  std::vector<unsigned char> out{'W', 'G', 'W', 'N'};
  const WnConfig& c = model.config();
  put_u32(out, detail::kWeightVersion);
  put_u32(out, static_cast<std::uint32_t>(c.n_blocks));
  put_u32(out, static_cast<std::uint32_t>(c.residual_channels));
  put_u32(out, static_cast<std::uint32_t>(c.skip_channels));
  put_u32(out, static_cast<std::uint32_t>(c.aux_dim));
  put_u32(out, detail::kKernelSize);
  put_u32(out, kNumLevels);
  for (auto d : c.dilations) put_u32(out, static_cast<std::uint32_t>(d));
  std::uint32_t count = 0;
  model.for_each_tensor([&](const Tensor&) { ++count; });
  put_u32(out, count);
  model.for_each_tensor([&](const Tensor& t) {
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float v : t.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_u32(out, bits);
    }
  });
  return out;
}

inline WnModel decode_weights(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "WGWN", 4) != 0) throw WeightFormatError("bad magic");
  const std::vector<unsigned char> body(bytes.begin() + 4, bytes.end());
  detail::ByteReader in(body);
  if (in.u32() != detail::kWeightVersion) throw WeightFormatError("unsupported weight format version");
  WnConfig c;
  c.n_blocks = in.u32();
  c.residual_channels = in.u32();
  c.skip_channels = in.u32();
  c.aux_dim = in.u32();
  if (in.u32() != detail::kKernelSize) throw WeightFormatError("unsupported kernel size");
  if (in.u32() != kNumLevels) throw WeightFormatError("unsupported level count");
  if (c.n_blocks > 4096) throw WeightFormatError("implausible block count");
  c.dilations.clear();
  for (std::size_t i = 0; i < c.n_blocks; ++i) c.dilations.push_back(in.u32());
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw WeightFormatError(e.what());
  }
  in.need(static_cast<std::size_t>(4) * parameter_count(c));  // reject truncation before allocating
  WnModel model(c);
  std::uint32_t expected = 0;
  model.for_each_tensor([&](Tensor&) { ++expected; });
  if (in.u32() != expected) throw WeightFormatError("tensor count does not match config");
  model.for_each_tensor([&](Tensor& t) {
    const std::uint32_t ndim = in.u32();
    std::vector<std::uint32_t> dims;
    for (std::uint32_t i = 0; i < ndim; ++i) dims.push_back(in.u32());
    if (dims != t.dims) throw WeightFormatError("tensor shape does not match config");
    for (auto& v : t.data) v = in.f32();
  });
  if (!in.at_end()) throw WeightFormatError("trailing bytes after last tensor");
  return model;
}

inline void save_weights(const WnModel& model, const std::string& path) {
  const auto bytes = encode_weights(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightFormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightFormatError("write failed: " + path);
}

inline WnModel load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightFormatError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_weights(bytes);
}

// Loads and checks the stored configuration against the expected one.
inline WnModel load_weights(const std::string& path, const WnConfig& expected) {
  WnModel m = load_weights(path);
  if (!(m.config() == expected)) throw WeightFormatError("weight file config does not match expected config");
  return m;
}

}  // namespace wavguard

#endif  // WAVGUARD_WAVENET_HPP
