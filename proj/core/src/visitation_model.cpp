#include "vismax/visitation_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace vismax {

namespace {

constexpr double kProbFloor = 1e-12;

template <typename T>
void write_le(std::ostream& os, T value) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  std::array<char, sizeof(T)> bytes;
  if (!is.read(bytes.data(), sizeof(T))) throw std::runtime_error("truncated visitation model checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void VisitationTrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("visitation gamma must lie in [0, 1)");
  if (!(gamma_prime >= 0.0 && gamma_prime < 1.0)) throw std::invalid_argument("gamma_prime must lie in [0, 1)");
  if (n_step == 0) throw std::invalid_argument("visitation N must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("visitation learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("visitation batch size must be positive");
  if (!(polyak_tau >= 0.0 && polyak_tau <= 1.0)) throw std::invalid_argument("visitation polyak_tau must lie in [0, 1]");
  if (!(weight_clip > 0.0)) throw std::invalid_argument("weight_clip must be positive");
}

CategoricalVisitationModel::CategoricalVisitationModel(std::size_t n_states, std::size_t n_actions,
                                                       std::size_t n_features, AdamOptions adam)
    : n_states_(n_states),
      n_actions_(n_actions),
      logits_(Table::Zero(static_cast<Eigen::Index>(n_states * n_actions), static_cast<Eigen::Index>(n_features))),
      target_logits_(logits_),
      adam_(logits_.size(), adam) {
  if (n_states == 0 || n_actions == 0 || n_features == 0) throw std::invalid_argument("empty visitation model");
}

std::size_t CategoricalVisitationModel::row(std::size_t s, std::size_t a) const {
  if (s >= n_states_ || a >= n_actions_) throw std::out_of_range("visitation model index out of range");
  return s * n_actions_ + a;
}

Vector CategoricalVisitationModel::probs(std::size_t s, std::size_t a) const {
  Vector p(logits_.cols());
  softmax_row(logits_.data() + row(s, a) * n_features(), n_features(), p.data());
  return p;
}

Vector CategoricalVisitationModel::target_probs(std::size_t s, std::size_t a) const {
  Vector p(target_logits_.cols());
  softmax_row(target_logits_.data() + row(s, a) * n_features(), n_features(), p.data());
  return p;
}

double CategoricalVisitationModel::log_prob(std::size_t s, std::size_t a, std::size_t z) const {
  if (z >= n_features()) throw std::out_of_range("feature index out of range");
  const double* l = logits_.data() + row(s, a) * n_features();
  double mx = l[0];
  for (std::size_t k = 1; k < n_features(); ++k) mx = std::max(mx, l[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < n_features(); ++k) sum += std::exp(l[k] - mx);
  return l[z] - mx - std::log(sum);
}

std::size_t CategoricalVisitationModel::sample_feature(std::size_t s, std::size_t a, Rng& rng) const {
  const Vector p = probs(s, a);
  return sample_categorical({p.data(), static_cast<std::size_t>(p.size())}, rng);
}

std::size_t CategoricalVisitationModel::sample_target(std::size_t s, std::size_t a, Rng& rng) const {
  const Vector p = target_probs(s, a);
  return sample_categorical({p.data(), static_cast<std::size_t>(p.size())}, rng);
}

void CategoricalVisitationModel::sync_target(double tau) { polyak(target_logits_, logits_, tau); }

ConditionalDistTable CategoricalVisitationModel::as_table() const {
  Table p(logits_.rows(), logits_.cols());
  for (Eigen::Index i = 0; i < logits_.rows(); ++i)
    softmax_row(logits_.data() + i * logits_.cols(), n_features(), p.data() + i * p.cols());
  return ConditionalDistTable(std::move(p));
}

void CategoricalVisitationModel::save_text(std::ostream& os) const {
  os << n_states_ << ' ' << n_actions_ << ' ' << n_features() << '\n';
  os.precision(17);
  for (Eigen::Index i = 0; i < logits_.rows(); ++i) {
    for (Eigen::Index j = 0; j < logits_.cols(); ++j) os << (j ? " " : "") << logits_(i, j);
    os << '\n';
  }
}

void CategoricalVisitationModel::save_binary(std::ostream& os) const {
  write_le<std::uint64_t>(os, n_states_);
  write_le<std::uint64_t>(os, n_actions_);
  write_le<std::uint64_t>(os, n_features());
  for (Eigen::Index i = 0; i < logits_.size(); ++i) write_le<double>(os, logits_.data()[i]);
}

CategoricalVisitationModel CategoricalVisitationModel::load_text(std::istream& is) {
  std::size_t s = 0, a = 0, k = 0;
  if (!(is >> s >> a >> k)) throw std::runtime_error("malformed visitation model header");
  CategoricalVisitationModel model(s, a, k);
  for (Eigen::Index i = 0; i < model.logits_.size(); ++i)
    if (!(is >> model.logits_.data()[i])) throw std::runtime_error("truncated visitation model checkpoint");
  model.target_logits_ = model.logits_;
  return model;
}

CategoricalVisitationModel CategoricalVisitationModel::load_binary(std::istream& is) {
  const auto s = read_le<std::uint64_t>(is);
  const auto a = read_le<std::uint64_t>(is);
  const auto k = read_le<std::uint64_t>(is);
  CategoricalVisitationModel model(s, a, k);
  for (Eigen::Index i = 0; i < model.logits_.size(); ++i) model.logits_.data()[i] = read_le<double>(is);
  model.target_logits_ = model.logits_;
  return model;
}

std::size_t sample_delta(double gamma_prime, Rng& rng) {
  if (!(gamma_prime >= 0.0 && gamma_prime < 1.0)) throw std::invalid_argument("gamma_prime must lie in [0, 1)");
  if (gamma_prime == 0.0) return 1;
  // Inverse CDF: Pr(Delta > k) = g^k.
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  const double k = std::floor(std::log(u) / std::log(gamma_prime));
  return 1 + static_cast<std::size_t>(std::max(0.0, k));
}

double geometric_pmf(double g, std::size_t k) {
  if (k == 0) return 0.0;
  return (1.0 - g) * std::pow(g, static_cast<double>(k - 1));
}

TargetSample sample_target_feature(const NStepSegment& segment, std::size_t delta, const FeatureMap& fmap,
                                   const CategoricalVisitationModel& model, const VisitationTrainConfig& cfg,
                                   Rng& rng, const Policy* target_policy) {
  const std::size_t n = segment.future.size();
  const std::size_t offset = std::min(delta, n);
  if (delta == 0 || offset == 0) throw std::out_of_range("lookahead offset must be at least 1");

  TargetSample out;
  out.offset = offset;
  out.bootstrapped = delta > n;

  const StateAction& ahead = segment.future[offset - 1];
  std::size_t action = ahead.action;
  if (target_policy != nullptr)
    action = sample_categorical(row_span(*target_policy, static_cast<Eigen::Index>(ahead.state)), rng);

  if (out.bootstrapped) {
    out.feature = model.sample_target(ahead.state, action, rng);
  } else {
    out.feature = fmap.sample(ahead.state * model.n_actions() + action, rng);
  }

  const double denom = geometric_pmf(cfg.gamma_prime, delta);
  double w = denom > 0.0 ? geometric_pmf(cfg.gamma, delta) / denom : 0.0;
  if (cfg.exact_policy_ratio) {
    if (target_policy == nullptr) throw std::invalid_argument("exact policy ratio needs the target policy");
    if (segment.behavior_probs.size() != n) throw std::invalid_argument("segment lacks behavior probabilities");
    for (std::size_t k = 1; k < offset; ++k) {
      const StateAction& sa = segment.future[k - 1];
      w *= (*target_policy)(static_cast<Eigen::Index>(sa.state), static_cast<Eigen::Index>(sa.action)) /
           segment.behavior_probs[k - 1];
    }
  }
  out.weight = std::clamp(w, 0.0, cfg.weight_clip);
  return out;
}

Vector ce_grad(const CategoricalVisitationModel& model, std::size_t s, std::size_t a, std::size_t z, double w) {
  if (z >= model.n_features()) throw std::out_of_range("feature index out of range");
  Vector g = model.probs(s, a);
  g(static_cast<Eigen::Index>(z)) -= 1.0;
  return w * g;
}

double ce_loss(const CategoricalVisitationModel& model, std::size_t s, std::size_t a, std::size_t z, double w) {
  const double lp = model.log_prob(s, a, z);
  return -w * std::max(lp, std::log(kProbFloor));
}

double train_step(CategoricalVisitationModel& model, const ReplayBuffer& buffer, const Policy* policy,
                  const FeatureMap& fmap, const VisitationTrainConfig& cfg, Rng& rng) {
  if (buffer.size() < cfg.batch_size) throw std::logic_error("replay buffer holds fewer segments than one batch");
  const std::size_t k = model.n_features();
  Table grad = Table::Zero(model.logits().rows(), model.logits().cols());
  Vector p(static_cast<Eigen::Index>(k));
  double loss = 0.0;
  for (std::size_t b = 0; b < cfg.batch_size; ++b) {
    const NStepSegment& seg = buffer.sample(rng);
    if (seg.future.size() != cfg.n_step) throw std::invalid_argument("segment length differs from the configured N");
    const std::size_t delta = sample_delta(cfg.gamma_prime, rng);
    const TargetSample ts = sample_target_feature(seg, delta, fmap, model, cfg, rng, policy);
    const std::size_t r = model.row(seg.anchor_state, seg.anchor_action);
    softmax_row(model.logits().data() + r * k, k, p.data());
    loss += -ts.weight * std::log(std::max(p(static_cast<Eigen::Index>(ts.feature)), kProbFloor));
    p(static_cast<Eigen::Index>(ts.feature)) -= 1.0;
    grad.row(static_cast<Eigen::Index>(r)) += ts.weight * p.transpose();
  }
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  grad *= inv_b;
  model.optimizer().step(model.logits(), grad);
  return loss * inv_b;
}

}  // namespace vismax
