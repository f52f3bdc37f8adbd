#include "skillgym/agent.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "skillgym/text.hpp"

namespace skillgym::agent {

// ---------------------------------------------------------------- vocabulary

Vocab::Vocab() {
  add("<pad>");
  add("<unk>");
}

int Vocab::add(const std::string& token) {
  auto it = ids_.find(token);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  ids_.emplace(token, id);
  return id;
}

int Vocab::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnknown : it->second;
}

std::vector<int> Vocab::encode(std::string_view s) const {
  std::vector<int> out;
  for (const auto& tok : text::tokenize(s)) out.push_back(id(tok));
  return out;
}

Vocab Vocab::build(const std::vector<std::string>& texts) {
  std::vector<std::string> all;
  for (const auto& t : texts)
    for (auto& tok : text::tokenize(t)) all.push_back(std::move(tok));
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  Vocab v;
  for (const auto& tok : all) v.add(tok);
  return v;
}

namespace {

// Words the engine itself prints.
constexpr const char* kEngineWords =
    "a about already any are aren't be by can cannot carrying close closed command completed do done drop "
    "edible empty examine failed filled first fixed gone happens has have holding i in inside inventory is it "
    "itself just look more moves need not nothing nothing special on off open opened place point points portable "
    "put score see such switched take that the thing things to too turn up want what where won you your "
    "didn't understand sentence here there also see can't has just gone *** you have won ***";

}  // namespace

std::vector<std::string> game_texts(const GameSpec& spec) {
  std::vector<std::string> out{kEngineWords, spec.title, spec.goal_text};
  for (const auto& r : spec.rooms) out.push_back(r.name + " " + r.description);
  for (const auto& e : spec.entities) out.push_back(e.name + " " + e.description);
  for (const auto& v : default_verbs()) out.push_back(v);
  for (const auto& f : declared_flags(spec)) out.push_back(f);
  for (const auto& a : spec.custom_actions) {
    out.push_back(a.template_text);
    for (const auto& al : a.aliases) out.push_back(al);
    out.push_back(a.success_text);
    out.push_back(a.failure_text);
  }
  return out;
}

// ---------------------------------------------------------------- parameters

namespace {

template <class S, class M>
void fill_uniform(M& m, std::mt19937_64& rng, S scale) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(dist(rng)) * scale;
}

}  // namespace

template <class S>
Params<S> Params<S>::zeros(const Dims& d, std::size_t vocab_size) {
  if (d.d_emb < 1 || d.d_hidden < 1 || d.policy_hidden < 1 || d.value_hidden < 1)
    throw std::invalid_argument("dimensions must be positive");
  Params p;
  p.dims = d;
  const auto E = d.d_emb, H = d.d_hidden, S4 = 4 * d.d_hidden;
  p.embedding = Mat::Zero(E, static_cast<Eigen::Index>(vocab_size));
  for (auto& g : p.gru) {
    g.Wz = g.Wr = g.Wh = Mat::Zero(H, E);
    g.Uz = g.Ur = g.Uh = Mat::Zero(H, H);
    g.bz = g.br = g.bh = Vec::Zero(H);
  }
  p.W1 = Mat::Zero(d.policy_hidden, S4);
  p.b1 = Vec::Zero(d.policy_hidden);
  p.W2 = Mat::Zero(H, d.policy_hidden);
  p.b2 = Vec::Zero(H);
  p.V1 = Mat::Zero(d.value_hidden, S4);
  p.c1 = Vec::Zero(d.value_hidden);
  p.v2 = Vec::Zero(d.value_hidden);
  p.c2 = Vec::Zero(1);
  return p;
}

template <class S>
Params<S> Params<S>::init(const Dims& d, std::size_t vocab_size, std::uint64_t seed, S scale) {
  auto p = zeros(d, vocab_size);
  std::mt19937_64 rng(seed);
  p.visit([&](auto& m) { fill_uniform<S>(m, rng, scale); });
  return p;
}

template <class S>
Params<S> Params<S>::glorot(const Dims& d, std::size_t vocab_size, std::uint64_t seed, S embed_scale) {
  auto p = zeros(d, vocab_size);
  std::mt19937_64 rng(seed);
  fill_uniform<S>(p.embedding, rng, embed_scale);
  auto mat = [&](Mat& m) { fill_uniform<S>(m, rng, static_cast<S>(std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols())))); };
  for (auto& g : p.gru) {
    mat(g.Wz), mat(g.Wr), mat(g.Wh), mat(g.Uz), mat(g.Ur), mat(g.Uh);
  }
  mat(p.W1), mat(p.W2), mat(p.V1);
  Mat v2(p.v2.size(), 1);
  mat(v2);
  p.v2 = v2.col(0);
  return p;
}

template <class S>
std::size_t Params<S>::count() const {
  std::size_t n = 0;
  visit([&](const auto& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <class S>
typename Params<S>::Vec Params<S>::flat() const {
  Vec out(static_cast<Eigen::Index>(count()));
  Eigen::Index at = 0;
  visit([&](const auto& m) {
    std::copy(m.data(), m.data() + m.size(), out.data() + at);
    at += m.size();
  });
  return out;
}

template <class S>
void Params<S>::set_flat(const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != count()) throw std::invalid_argument("flat parameter size mismatch");
  Eigen::Index at = 0;
  visit([&](auto& m) {
    std::copy(v.data() + at, v.data() + at + m.size(), m.data());
    at += m.size();
  });
}

template <class S>
template <class T>
Params<T> Params<S>::cast() const {
  auto out = Params<T>::zeros(dims, static_cast<std::size_t>(embedding.cols()));
  out.set_flat(flat().template cast<T>());
  return out;
}

template <class S>
void Params<S>::grow_vocab(std::size_t new_size, std::uint64_t seed) {
  const auto old = embedding.cols();
  if (static_cast<Eigen::Index>(new_size) <= old) return;
  Mat grown = Mat::Zero(embedding.rows(), static_cast<Eigen::Index>(new_size));
  grown.leftCols(old) = embedding;
  std::mt19937_64 rng(seed);
  Mat fresh(embedding.rows(), static_cast<Eigen::Index>(new_size) - old);
  fill_uniform<S>(fresh, rng, S(0.1));
  grown.rightCols(fresh.cols()) = fresh;
  embedding = std::move(grown);
}

// ---------------------------------------------------------------- forward

namespace {

template <class S>
S sigmoid(S x) {
  using std::exp;  // found by ADL for multiprecision scalars
  return S(1) / (S(1) + exp(-x));
}

template <class S>
struct GruTrace {
  using Mat = typename Params<S>::Mat;
  Mat h;  // hidden x (T+1), column 0 is the zero state
  Mat z, r, hh;
};

template <class S>
GruTrace<S> gru_forward(const std::vector<int>& tokens, const Gru<S>& g, const typename Params<S>::Mat& emb) {
  using Mat = typename Params<S>::Mat;
  using Vec = typename Params<S>::Vec;
  const auto H = g.Uz.rows();
  const auto T = static_cast<Eigen::Index>(tokens.size());
  GruTrace<S> tr;
  tr.h = Mat::Zero(H, T + 1);
  tr.z.resize(H, T);
  tr.r.resize(H, T);
  tr.hh.resize(H, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const int tok = tokens[static_cast<std::size_t>(t)];
    if (tok < 0 || tok >= emb.cols()) throw std::out_of_range("token id outside vocabulary");
    const auto x = emb.col(tok);
    const Vec hp = tr.h.col(t);
    Vec z = (g.Wz * x + g.Uz * hp + g.bz).unaryExpr([](S v) { return sigmoid(v); });
    Vec r = (g.Wr * x + g.Ur * hp + g.br).unaryExpr([](S v) { return sigmoid(v); });
    Vec hh = (g.Wh * x + g.Uh * r.cwiseProduct(hp) + g.bh).array().tanh().matrix();
    tr.h.col(t + 1) = z.cwiseProduct(hp) + (Vec::Ones(H) - z).cwiseProduct(hh);
    tr.z.col(t) = z;
    tr.r.col(t) = r;
    tr.hh.col(t) = hh;
  }
  return tr;
}

template <class S>
void gru_backward(const std::vector<int>& tokens, const Gru<S>& g, const GruTrace<S>& tr,
                  typename Params<S>::Vec dh, Gru<S>& dg, typename Params<S>::Mat& demb,
                  const typename Params<S>::Mat& emb) {
  using Vec = typename Params<S>::Vec;
  const auto T = static_cast<Eigen::Index>(tokens.size());
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const int tok = tokens[static_cast<std::size_t>(t)];
    const auto x = emb.col(tok);
    const Vec hp = tr.h.col(t);
    const Vec z = tr.z.col(t), r = tr.r.col(t), hh = tr.hh.col(t);
    const Vec dz = dh.cwiseProduct(hp - hh);
    const Vec dhh = dh.cwiseProduct(Vec::Ones(z.size()) - z);
    Vec dprev = dh.cwiseProduct(z);

    const Vec ph = dhh.cwiseProduct((Vec::Ones(hh.size()) - hh.cwiseProduct(hh)));
    const Vec rh = r.cwiseProduct(hp);
    dg.Wh.noalias() += ph * x.transpose();
    dg.Uh.noalias() += ph * rh.transpose();
    dg.bh += ph;
    Vec dx = g.Wh.transpose() * ph;
    const Vec drh = g.Uh.transpose() * ph;
    const Vec dr = drh.cwiseProduct(hp);
    dprev += drh.cwiseProduct(r);

    const Vec pz = dz.cwiseProduct(z.cwiseProduct(Vec::Ones(z.size()) - z));
    dg.Wz.noalias() += pz * x.transpose();
    dg.Uz.noalias() += pz * hp.transpose();
    dg.bz += pz;
    dx.noalias() += g.Wz.transpose() * pz;
    dprev.noalias() += g.Uz.transpose() * pz;

    const Vec pr = dr.cwiseProduct(r.cwiseProduct(Vec::Ones(r.size()) - r));
    dg.Wr.noalias() += pr * x.transpose();
    dg.Ur.noalias() += pr * hp.transpose();
    dg.br += pr;
    dx.noalias() += g.Wr.transpose() * pr;
    dprev.noalias() += g.Ur.transpose() * pr;

    demb.col(tok) += dx;
    dh = std::move(dprev);
  }
}

template <class S>
struct Heads {
  using Vec = typename Params<S>::Vec;
  Vec a1, u, logits, probs, logp, v1;
  S value{};
};

template <class S>
Heads<S> heads_forward(const typename Params<S>::Vec& s, const typename Params<S>::Mat& actions, const Params<S>& p) {
  Heads<S> o;
  o.a1 = (p.W1 * s + p.b1).array().tanh().matrix();
  o.u = p.W2 * o.a1 + p.b2;
  if (actions.cols() > 0) {
    o.logits = actions.transpose() * o.u;
    // Log-softmax first so tiny probabilities keep finite logs.
    const S mx = o.logits.maxCoeff();
    using std::log;
    const S lse = mx + log(S((o.logits.array() - mx).exp().sum()));
    o.logp = (o.logits.array() - lse).matrix();
    o.probs = o.logp.array().exp().matrix();
  }
  o.v1 = (p.V1 * s + p.c1).array().tanh().matrix();
  o.value = p.v2.dot(o.v1) + p.c2(0);
  return o;
}

template <class S>
typename Params<S>::Vec summary(const typename Params<S>::Mat& actions, Eigen::Index hidden) {
  if (actions.cols() == 0) return typename Params<S>::Vec(Params<S>::Vec::Zero(hidden));
  return actions.rowwise().mean();
}

// Distinct (channel, tokens) texts in a batch with their GRU traces.
template <class S>
struct TextTable {
  std::map<std::pair<int, std::vector<int>>, std::size_t> index;
  std::vector<std::pair<int, const std::vector<int>*>> keys;
  std::vector<GruTrace<S>> traces;

  std::size_t add(const Params<S>& p, int ch, const std::vector<int>& tokens) {
    auto [it, fresh] = index.try_emplace({ch, tokens}, keys.size());
    if (fresh) {
      keys.emplace_back(ch, &it->first.second);
      traces.push_back(gru_forward<S>(tokens, p.gru[static_cast<std::size_t>(ch)], p.embedding));
    }
    return it->second;
  }
  auto enc(std::size_t i) const { return traces[i].h.col(traces[i].h.cols() - 1); }
};

template <class S>
struct StepRefs {
  std::size_t obs, inv, room;
  std::vector<std::size_t> acts;
};

template <class S>
StepRefs<S> register_step(TextTable<S>& table, const Params<S>& p, const StepInput& in) {
  StepRefs<S> r;
  r.obs = table.add(p, kObservation, in.observation);
  r.inv = table.add(p, kInventory, in.inventory);
  r.room = table.add(p, kRoom, in.room);
  for (const auto& a : in.actions) r.acts.push_back(table.add(p, kAction, a));
  return r;
}

template <class S>
std::pair<typename Params<S>::Vec, typename Params<S>::Mat> assemble(const TextTable<S>& table, const StepRefs<S>& r,
                                                                     Eigen::Index H) {
  typename Params<S>::Mat acts(H, static_cast<Eigen::Index>(r.acts.size()));
  for (std::size_t j = 0; j < r.acts.size(); ++j) acts.col(static_cast<Eigen::Index>(j)) = table.enc(r.acts[j]);
  auto s = state_representation<S>(table.enc(r.obs), table.enc(r.inv), table.enc(r.room), summary<S>(acts, H));
  return {std::move(s), std::move(acts)};
}

}  // namespace

template <class S>
typename Params<S>::Vec encode_text(const std::vector<int>& tokens, const Gru<S>& gru,
                                    const typename Params<S>::Mat& embedding) {
  auto tr = gru_forward<S>(tokens, gru, embedding);
  return tr.h.col(tr.h.cols() - 1);
}

template <class S>
typename Params<S>::Vec state_representation(const typename Params<S>::Vec& observation,
                                             const typename Params<S>::Vec& inventory,
                                             const typename Params<S>::Vec& room,
                                             const typename Params<S>::Vec& action_summary) {
  typename Params<S>::Vec s(observation.size() + inventory.size() + room.size() + action_summary.size());
  s << observation, inventory, room, action_summary;
  return s;
}

template <class S>
typename Params<S>::Vec action_probabilities(const typename Params<S>::Vec& state,
                                             const typename Params<S>::Mat& actions, const Params<S>& params) {
  if (actions.cols() == 0) throw std::invalid_argument("no admissible actions");
  return heads_forward<S>(state, actions, params).probs;
}

template <class S>
Choice select_action(const typename Params<S>::Vec& state, const typename Params<S>::Mat& actions,
                     const Params<S>& params, std::mt19937_64& rng, Mode mode) {
  if (actions.cols() == 0) throw std::invalid_argument("no admissible actions");
  auto h = heads_forward<S>(state, actions, params);
  Eigen::Index pick = 0;
  if (mode == Mode::greedy) {
    h.probs.maxCoeff(&pick);  // first maximum
  } else {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(rng), acc = 0;
    pick = h.probs.size() - 1;
    for (Eigen::Index i = 0; i < h.probs.size(); ++i) {
      acc += static_cast<double>(h.probs(i));
      if (u < acc) {
        pick = i;
        break;
      }
    }
  }
  Choice c;
  c.index = static_cast<int>(pick);
  c.log_probability = static_cast<double>(h.logp(pick));
  c.value = static_cast<double>(h.value);
  return c;
}

int random_policy(std::size_t n_actions, std::mt19937_64& rng) {
  if (n_actions == 0) throw std::invalid_argument("no admissible actions");
  std::uniform_int_distribution<std::size_t> dist(0, n_actions - 1);
  return static_cast<int>(dist(rng));
}

// ---------------------------------------------------------------- learning

template <class S>
Targets compute_targets(const Params<S>& params, const std::vector<Trajectory>& batch, const TrainConfig& cfg) {
  const auto H = params.dims.d_hidden;
  TextTable<S> table;
  Targets out;
  for (const auto& traj : batch) {
    std::vector<double> values;
    for (const auto& st : traj.steps) {
      auto refs = register_step(table, params, st.input);
      auto [s, acts] = assemble(table, refs, H);
      values.push_back(static_cast<double>(heads_forward<S>(s, acts, params).value));
    }
    double R = 0;
    if (!traj.terminal && traj.bootstrap) {
      auto refs = register_step(table, params, *traj.bootstrap);
      auto [s, acts] = assemble(table, refs, H);
      R = static_cast<double>(heads_forward<S>(s, acts, params).value);
    }
    std::vector<double> ret(traj.steps.size()), adv(traj.steps.size());
    for (std::size_t t = traj.steps.size(); t-- > 0;) {
      R = traj.steps[t].reward + cfg.gamma * R;
      ret[t] = R;
      adv[t] = R - values[t];
    }
    out.returns.push_back(std::move(ret));
    out.advantages.push_back(std::move(adv));
  }
  return out;
}

namespace {

// Shared body of a2c_loss. The sums stay in S so that finite differences in
// extended precision are not rounded back to double.
template <class S>
std::pair<LossReport, S> loss_impl(const Params<S>& p, const std::vector<Trajectory>& batch, const Targets& targets,
                                   const TrainConfig& cfg, Params<S>* grad) {
  using Vec = typename Params<S>::Vec;
  const auto H = p.dims.d_hidden;
  if (targets.returns.size() != batch.size()) throw std::invalid_argument("targets do not match batch");
  TextTable<S> table;
  std::vector<std::vector<StepRefs<S>>> refs(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b)
    for (const auto& st : batch[b].steps) refs[b].push_back(register_step(table, p, st.input));

  std::vector<Vec> dtext;
  if (grad) {
    *grad = Params<S>::zeros(p.dims, static_cast<std::size_t>(p.embedding.cols()));
    dtext.assign(table.traces.size(), Vec::Zero(H));
  }

  S policy = 0, value = 0, ent = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t t = 0; t < batch[b].steps.size(); ++t) {
      const auto& st = batch[b].steps[t];
      const auto& r = refs[b][t];
      if (r.acts.empty()) throw std::invalid_argument("step without admissible actions");
      if (st.chosen < 0 || static_cast<std::size_t>(st.chosen) >= r.acts.size())
        throw std::out_of_range("chosen action outside admissible list");
      auto [s, acts] = assemble(table, r, H);
      auto h = heads_forward<S>(s, acts, p);
      const double A = targets.advantages[b][t];
      const double R = targets.returns[b][t];
      const auto& logp = h.logp;
      const S entropy_s = -h.probs.dot(logp);
      const S verr_s = static_cast<S>(R) - h.value;
      policy -= static_cast<S>(A) * logp(st.chosen);
      value += verr_s * verr_s;
      ent += entropy_s;
      const double entropy = static_cast<double>(entropy_s);
      const double verr = R - static_cast<double>(h.value);
      if (!grad) continue;

      // d loss / d logits
      Vec gz = h.probs * static_cast<S>(A);
      gz(st.chosen) -= static_cast<S>(A);
      gz += static_cast<S>(cfg.entropy_coef) *
            h.probs.cwiseProduct((logp.array() + static_cast<S>(entropy)).matrix());
      const S gv = static_cast<S>(-2.0 * cfg.value_coef * verr);

      Vec ds = Vec::Zero(s.size());
      const Vec du = acts * gz;
      grad->W2.noalias() += du * h.a1.transpose();
      grad->b2 += du;
      const Vec pa = (p.W2.transpose() * du).cwiseProduct((Vec::Ones(h.a1.size()) - h.a1.cwiseProduct(h.a1)));
      grad->W1.noalias() += pa * s.transpose();
      grad->b1 += pa;
      ds.noalias() += p.W1.transpose() * pa;

      grad->v2 += gv * h.v1;
      grad->c2(0) += gv;
      const Vec pv = (gv * p.v2).cwiseProduct((Vec::Ones(h.v1.size()) - h.v1.cwiseProduct(h.v1)));
      grad->V1.noalias() += pv * s.transpose();
      grad->c1 += pv;
      ds.noalias() += p.V1.transpose() * pv;

      dtext[r.obs] += ds.segment(0, H);
      dtext[r.inv] += ds.segment(H, H);
      dtext[r.room] += ds.segment(2 * H, H);
      const Vec dmean = ds.segment(3 * H, H) / static_cast<S>(r.acts.size());
      for (std::size_t j = 0; j < r.acts.size(); ++j)
        dtext[r.acts[j]] += dmean + gz(static_cast<Eigen::Index>(j)) * h.u;
    }
  }
  const S total = policy + static_cast<S>(cfg.value_coef) * value - static_cast<S>(cfg.entropy_coef) * ent;
  LossReport rep;
  rep.policy = static_cast<double>(policy);
  rep.value = static_cast<double>(value);
  rep.entropy = static_cast<double>(ent);
  rep.total = static_cast<double>(total);

  if (grad) {
    for (std::size_t i = 0; i < table.traces.size(); ++i) {
      const auto ch = static_cast<std::size_t>(table.keys[i].first);
      gru_backward<S>(*table.keys[i].second, p.gru[ch], table.traces[i], dtext[i], grad->gru[ch], grad->embedding,
                      p.embedding);
    }
  }
  return {rep, total};
}

}  // namespace

template <class S>
LossReport a2c_loss(const Params<S>& p, const std::vector<Trajectory>& batch, const Targets& targets,
                    const TrainConfig& cfg, Params<S>* grad) {
  return loss_impl(p, batch, targets, cfg, grad).first;
}

template <class S>
LossReport a2c_update(const std::vector<Trajectory>& batch, Params<S>& params, const TrainConfig& cfg,
                      AdamState* adam) {
  auto targets = compute_targets(params, batch, cfg);
  Params<S> grad;
  auto rep = a2c_loss(params, batch, targets, cfg, &grad);
  Eigen::VectorXd g = grad.flat().template cast<double>();
  rep.grad_norm = g.norm();
  if (!std::isfinite(rep.total) || !std::isfinite(rep.grad_norm)) throw NonFiniteLoss("loss or gradient is not finite");
  if (rep.grad_norm > cfg.clip_norm) g *= cfg.clip_norm / rep.grad_norm;

  Eigen::VectorXd theta = params.flat().template cast<double>();
  if (cfg.optimizer == TrainConfig::Optimizer::adam) {
    if (!adam) throw std::invalid_argument("adam optimizer needs state");
    if (adam->m.size() != theta.size()) {
      adam->m = Eigen::VectorXd::Zero(theta.size());
      adam->v = Eigen::VectorXd::Zero(theta.size());
      adam->step = 0;
    }
    adam->step += 1;
    adam->m = cfg.adam_beta1 * adam->m + (1 - cfg.adam_beta1) * g;
    adam->v = cfg.adam_beta2 * adam->v + (1 - cfg.adam_beta2) * g.cwiseProduct(g);
    const double bc1 = 1 - std::pow(cfg.adam_beta1, static_cast<double>(adam->step));
    const double bc2 = 1 - std::pow(cfg.adam_beta2, static_cast<double>(adam->step));
    theta.array() -= cfg.learning_rate * (adam->m.array() / bc1) / ((adam->v.array() / bc2).sqrt() + cfg.adam_eps);
  } else {
    theta -= cfg.learning_rate * g;
  }
  if (!theta.allFinite()) throw NonFiniteLoss("parameters diverged");
  params.set_flat(theta.template cast<S>());
  return rep;
}

double gradient_check(const Params<double>& params, const std::vector<Trajectory>& batch, const TrainConfig& cfg,
                      double epsilon, std::size_t max_coords, std::uint64_t seed) {
  if (std::none_of(batch.begin(), batch.end(), [](const Trajectory& t) { return !t.steps.empty(); }))
    throw std::invalid_argument("gradient check needs a non-empty batch");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  const auto targets = compute_targets(params, batch, cfg);
  Params<double> grad;
  a2c_loss(params, batch, targets, cfg, &grad);
  const Eigen::VectorXd analytic = grad.flat();
  const Eigen::VectorXd theta = params.flat();

  std::vector<Eigen::Index> coords(static_cast<std::size_t>(theta.size()));
  std::iota(coords.begin(), coords.end(), Eigen::Index{0});
  if (max_coords > 0 && max_coords < coords.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(max_coords);
  }

  // Central differences run in quad precision: at epsilon = 1e-5 a double
  // loss difference is dominated by rounding, not by the truncation term.
  using Ld = boost::multiprecision::cpp_bin_float_quad;
  const Params<Ld> base = params.cast<Ld>();
  const auto theta_ld = base.flat();
  Params<Ld> probe = base;
  double worst = 0;
  for (auto i : coords) {
    auto t = theta_ld;
    t(i) = theta_ld(i) + static_cast<Ld>(epsilon);
    probe.set_flat(t);
    const Ld up = loss_impl<Ld>(probe, batch, targets, cfg, nullptr).second;
    t(i) = theta_ld(i) - static_cast<Ld>(epsilon);
    probe.set_flat(t);
    const Ld down = loss_impl<Ld>(probe, batch, targets, cfg, nullptr).second;
    const double numeric = static_cast<double>((up - down) / (2 * static_cast<Ld>(epsilon)));
    const double a = analytic(i);
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(a - numeric) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------- persistence

namespace {

constexpr char kMagic[8] = {'S', 'K', 'G', 'Y', 'M', 'P', 'R', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated parameter file");
  return v;
}

}  // namespace

void save_params(const std::filesystem::path& path, const Params<float>& params, const Vocab& vocab) {
  if (static_cast<std::size_t>(params.embedding.cols()) != vocab.size())
    throw std::invalid_argument("vocabulary does not match embedding");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kFormatVersion);
  for (int d : {params.dims.d_emb, params.dims.d_hidden, params.dims.policy_hidden, params.dims.value_hidden})
    put<std::int32_t>(out, d);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.size()));
  for (const auto& tok : vocab.tokens()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(tok.size()));
    out.write(tok.data(), static_cast<std::streamsize>(tok.size()));
  }
  const Eigen::VectorXf flat = params.flat();
  put<std::uint64_t>(out, static_cast<std::uint64_t>(flat.size()));
  out.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(float)));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::pair<Params<float>, Vocab> load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw std::runtime_error("not a parameter file: " + path.string());
  if (get<std::uint32_t>(in) != kFormatVersion) throw std::runtime_error("unsupported parameter file version");
  Dims d;
  d.d_emb = get<std::int32_t>(in);
  d.d_hidden = get<std::int32_t>(in);
  d.policy_hidden = get<std::int32_t>(in);
  d.value_hidden = get<std::int32_t>(in);
  const auto n_tokens = get<std::uint32_t>(in);
  Vocab vocab;
  for (std::uint32_t i = 0; i < n_tokens; ++i) {
    const auto len = get<std::uint32_t>(in);
    std::string tok(len, '\0');
    if (!in.read(tok.data(), len)) throw std::runtime_error("truncated parameter file");
    if (static_cast<std::uint32_t>(vocab.add(tok)) != i) throw std::runtime_error("malformed vocabulary");
  }
  auto params = Params<float>::zeros(d, vocab.size());
  const auto n = get<std::uint64_t>(in);
  if (n != params.count()) throw std::runtime_error("parameter count does not match dimensions");
  Eigen::VectorXf flat(static_cast<Eigen::Index>(n));
  if (!in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(n * sizeof(float))))
    throw std::runtime_error("truncated parameter file");
  params.set_flat(flat);
  return {std::move(params), std::move(vocab)};
}

// ---------------------------------------------------------------- agent

Agent::Agent(Vocab vocab, Dims dims, std::uint64_t seed)
    : params_(Params<float>::glorot(dims, vocab.size(), seed)), vocab_(std::move(vocab)) {}

Agent::Agent(Params<float> params, Vocab vocab) : params_(std::move(params)), vocab_(std::move(vocab)) {
  if (static_cast<std::size_t>(params_.embedding.cols()) != vocab_.size())
    throw std::invalid_argument("vocabulary does not match embedding");
}

void Agent::extend_vocab(const std::vector<std::string>& texts, std::uint64_t seed) {
  std::vector<std::string> fresh;
  for (const auto& t : texts)
    for (auto& tok : text::tokenize(t))
      if (vocab_.id(tok) == Vocab::kUnknown && tok != "<unk>") fresh.push_back(std::move(tok));
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
  for (const auto& tok : fresh) vocab_.add(tok);
  params_.grow_vocab(vocab_.size(), seed);
  adam_ = {};
  for (auto& c : cache_) c.clear();
}

StepInput Agent::tokenize(const rlenv::Observation& obs) const {
  StepInput in;
  in.observation = vocab_.encode(obs.feedback);
  in.inventory = vocab_.encode(obs.inventory);
  in.room = vocab_.encode(obs.room_description);
  for (const auto& a : obs.admissible_commands) in.actions.push_back(vocab_.encode(a));
  return in;
}

const Eigen::VectorXf& Agent::encode(Channel ch, const std::vector<int>& tokens) {
  std::string key(reinterpret_cast<const char*>(tokens.data()), tokens.size() * sizeof(int));
  auto& cache = cache_[ch];
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(std::move(key), encode_text<float>(tokens, params_.gru[ch], params_.embedding)).first;
  return it->second;
}

Choice Agent::act(const StepInput& input, std::mt19937_64& rng, Mode mode) {
  const auto H = params_.dims.d_hidden;
  Eigen::MatrixXf acts(H, static_cast<Eigen::Index>(input.actions.size()));
  for (std::size_t j = 0; j < input.actions.size(); ++j)
    acts.col(static_cast<Eigen::Index>(j)) = encode(kAction, input.actions[j]);
  Eigen::VectorXf mean = acts.cols() ? Eigen::VectorXf(acts.rowwise().mean()) : Eigen::VectorXf::Zero(H);
  auto s = state_representation<float>(encode(kObservation, input.observation), encode(kInventory, input.inventory),
                                       encode(kRoom, input.room), mean);
  return select_action<float>(s, acts, params_, rng, mode);
}

LossReport Agent::update(const std::vector<Trajectory>& batch, const TrainConfig& cfg) {
  auto rep = a2c_update(batch, params_, cfg, &adam_);
  for (auto& c : cache_) c.clear();
  return rep;
}

// ---------------------------------------------------------------- instantiations

#define SKILLGYM_INSTANTIATE(S)                                                                                   \
  template struct Params<S>;                                                                                      \
  template Params<S>::Vec encode_text<S>(const std::vector<int>&, const Gru<S>&, const Params<S>::Mat&);          \
  template Params<S>::Vec state_representation<S>(const Params<S>::Vec&, const Params<S>::Vec&,                   \
                                                  const Params<S>::Vec&, const Params<S>::Vec&);                  \
  template Params<S>::Vec action_probabilities<S>(const Params<S>::Vec&, const Params<S>::Mat&, const Params<S>&); \
  template Choice select_action<S>(const Params<S>::Vec&, const Params<S>::Mat&, const Params<S>&,                \
                                   std::mt19937_64&, Mode);                                                        \
  template Targets compute_targets<S>(const Params<S>&, const std::vector<Trajectory>&, const TrainConfig&);     \
  template LossReport a2c_loss<S>(const Params<S>&, const std::vector<Trajectory>&, const Targets&,               \
                                  const TrainConfig&, Params<S>*);                                                \
  template LossReport a2c_update<S>(const std::vector<Trajectory>&, Params<S>&, const TrainConfig&, AdamState*);

SKILLGYM_INSTANTIATE(float)
SKILLGYM_INSTANTIATE(double)
#undef SKILLGYM_INSTANTIATE

template Params<double> Params<float>::cast<double>() const;
template Params<float> Params<double>::cast<float>() const;
template Params<float> Params<float>::cast<float>() const;
template Params<double> Params<double>::cast<double>() const;

}  // namespace skillgym::agent
