#pragma once

// Text actor-critic: per-channel GRU encoders over a shared embedding,
// inner-product action scoring and an A2C update with hand-written backprop.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "skillgym/rlenv.hpp"

namespace skillgym::agent {

class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;

  Vocab();
  static Vocab build(const std::vector<std::string>& texts);

  int add(const std::string& token);
  int id(const std::string& token) const;
  std::vector<int> encode(std::string_view text) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Texts a game can show: names, descriptions, templates, messages.
std::vector<std::string> game_texts(const GameSpec& spec);

struct Dims {
  int d_emb = 32;
  int d_hidden = 64;
  int policy_hidden = 128;
  int value_hidden = 128;
  bool operator==(const Dims&) const = default;
};

enum Channel { kObservation = 0, kInventory = 1, kRoom = 2, kAction = 3 };

template <class S>
struct Gru {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  Mat Wz, Wr, Wh;  // hidden x emb
  Mat Uz, Ur, Uh;  // hidden x hidden
  Vec bz, br, bh;
};

template <class S>
struct Params {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

  Dims dims;
  Mat embedding;  // emb x vocab, one column per token
  std::array<Gru<S>, 4> gru;
  // Policy: query = W2 tanh(W1 s + b1) + b2; score(a) = query . enc(a).
  Mat W1;
  Vec b1;
  Mat W2;
  Vec b2;
  // Value: v2 . tanh(V1 s + c1) + c2.
  Mat V1;
  Vec c1;
  Vec v2;
  Vec c2;  // length 1

  static Params zeros(const Dims& dims, std::size_t vocab_size);
  // Every entry uniform in [-scale, scale].
  static Params init(const Dims& dims, std::size_t vocab_size, std::uint64_t seed, S scale = S(0.1));
  // Glorot-uniform weight matrices, zero biases, embeddings uniform in
  // [-embed_scale, embed_scale]. Used for fresh agents.
  static Params glorot(const Dims& dims, std::size_t vocab_size, std::uint64_t seed, S embed_scale = S(0.5));

  // Visits every tensor in a fixed order.
  template <class F>
  void visit(F&& f) {
    f(embedding);
    for (auto& g : gru) {
      f(g.Wz), f(g.Wr), f(g.Wh), f(g.Uz), f(g.Ur), f(g.Uh), f(g.bz), f(g.br), f(g.bh);
    }
    f(W1), f(b1), f(W2), f(b2), f(V1), f(c1), f(v2), f(c2);
  }
  template <class F>
  void visit(F&& f) const {
    f(embedding);
    for (const auto& g : gru) {
      f(g.Wz), f(g.Wr), f(g.Wh), f(g.Uz), f(g.Ur), f(g.Uh), f(g.bz), f(g.br), f(g.bh);
    }
    f(W1), f(b1), f(W2), f(b2), f(V1), f(c1), f(v2), f(c2);
  }

  std::size_t count() const;
  Vec flat() const;
  void set_flat(const Vec& v);
  template <class T>
  Params<T> cast() const;
  // Appends embedding columns for tokens added to the vocabulary.
  void grow_vocab(std::size_t new_size, std::uint64_t seed);
  std::size_t state_size() const { return static_cast<std::size_t>(4 * dims.d_hidden); }
};

// Token ids for one decision point.
struct StepInput {
  std::vector<int> observation;
  std::vector<int> inventory;
  std::vector<int> room;
  std::vector<std::vector<int>> actions;
};

struct TrajectoryStep {
  StepInput input;
  int chosen = 0;
  double reward = 0;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  bool terminal = true;
  // Observation after the last step; used to bootstrap when truncated.
  std::optional<StepInput> bootstrap;
};

struct TrainConfig {
  double gamma = 0.9;
  double learning_rate = 1e-3;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double clip_norm = 5.0;
  enum class Optimizer { sgd, adam } optimizer = Optimizer::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct LossReport {
  double policy = 0;
  double value = 0;
  double entropy = 0;
  double total = 0;
  double grad_norm = 0;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Final hidden state of the GRU over the embedded tokens (zeros when empty).
template <class S>
typename Params<S>::Vec encode_text(const std::vector<int>& tokens, const Gru<S>& gru,
                                    const typename Params<S>::Mat& embedding);

// Concatenation in channel order observation, inventory, room, action summary.
template <class S>
typename Params<S>::Vec state_representation(const typename Params<S>::Vec& observation,
                                             const typename Params<S>::Vec& inventory,
                                             const typename Params<S>::Vec& room,
                                             const typename Params<S>::Vec& action_summary);

enum class Mode { sample, greedy };

struct Choice {
  int index = 0;
  double log_probability = 0;
  double value = 0;
};

// `actions` holds one encoded admissible command per column.
template <class S>
Choice select_action(const typename Params<S>::Vec& state, const typename Params<S>::Mat& actions,
                     const Params<S>& params, std::mt19937_64& rng, Mode mode);

// Softmax over action scores for a state.
template <class S>
typename Params<S>::Vec action_probabilities(const typename Params<S>::Vec& state,
                                             const typename Params<S>::Mat& actions, const Params<S>& params);

int random_policy(std::size_t n_actions, std::mt19937_64& rng);

// Discounted returns and advantages, fixed for one update.
struct Targets {
  std::vector<std::vector<double>> returns;
  std::vector<std::vector<double>> advantages;
};

template <class S>
Targets compute_targets(const Params<S>& params, const std::vector<Trajectory>& batch, const TrainConfig& cfg);

// Loss with advantages held constant; fills `grad` when given.
template <class S>
LossReport a2c_loss(const Params<S>& params, const std::vector<Trajectory>& batch, const Targets& targets,
                    const TrainConfig& cfg, Params<S>* grad);

struct AdamState {
  Eigen::VectorXd m, v;
  long step = 0;
};

// One clipped gradient step. Throws NonFiniteLoss on divergence.
template <class S>
LossReport a2c_update(const std::vector<Trajectory>& batch, Params<S>& params, const TrainConfig& cfg,
                      AdamState* adam = nullptr);

// Max relative error between the analytic gradient and central differences,
// over all coordinates or a seeded subset of `max_coords` of them.
double gradient_check(const Params<double>& params, const std::vector<Trajectory>& batch, const TrainConfig& cfg,
                      double epsilon, std::size_t max_coords = 0, std::uint64_t seed = 0);

// Binary parameter file: magic, version, dims, vocab, float32 weights.
void save_params(const std::filesystem::path& path, const Params<float>& params, const Vocab& vocab);
std::pair<Params<float>, Vocab> load_params(const std::filesystem::path& path);

// Stateful learner used by the experiment loop.
class Agent {
 public:
  Agent(Vocab vocab, Dims dims, std::uint64_t seed);
  Agent(Params<float> params, Vocab vocab);

  const Params<float>& params() const { return params_; }
  Params<float>& params() { return params_; }
  const Vocab& vocab() const { return vocab_; }
  // Adds unseen tokens from `texts` with freshly initialized embeddings.
  void extend_vocab(const std::vector<std::string>& texts, std::uint64_t seed);

  StepInput tokenize(const rlenv::Observation& obs) const;
  Choice act(const StepInput& input, std::mt19937_64& rng, Mode mode);
  LossReport update(const std::vector<Trajectory>& batch, const TrainConfig& cfg);

 private:
  Params<float> params_;
  Vocab vocab_;
  AdamState adam_;
  // Encodings are reused until the next update changes the weights.
  std::unordered_map<std::string, Eigen::VectorXf> cache_[4];

  const Eigen::VectorXf& encode(Channel ch, const std::vector<int>& tokens);
};

}  // namespace skillgym::agent
