#include "sersem/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sersem/error.hpp"
#include "sersem/rng.hpp"

namespace sersem {
namespace {

// log(1 + e^x) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_labels(const LabeledSet& data) {
  if (data.labels.size() != data.features.size() || data.ids.size() != data.features.size()) {
    throw InvalidArgument("feature, id and label counts differ");
  }
  std::size_t positives = 0;
  for (int y : data.labels) {
    if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = data.labels.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("probe training needs both classes");
  if (positives < 2 || negatives < 2) {
    throw InvalidArgument("probe training needs at least two samples of each class");
  }
}

void check_features(const LabeledSet& data) {
  const std::size_t dim = data.features.front().size();
  if (dim == 0) throw InvalidArgument("empty feature vectors");
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (data.features[r].size() != dim) {
      throw InvalidArgument("sample " + data.ids[r] + ": feature dimension " +
                            std::to_string(data.features[r].size()) + ", expected " +
                            std::to_string(dim));
    }
    for (double v : data.features[r]) {
      if (!std::isfinite(v)) throw InvalidArgument("sample " + data.ids[r] + ": non-finite feature");
    }
  }
}

// Hidden pre-activations for one standardized row.
void hidden_pre(const ProbeParams& p, std::span<const double> x, std::vector<double>& h) {
  h.assign(p.b1.begin(), p.b1.end());
  for (std::size_t i = 0; i < p.input_dim; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = p.w1.data() + i * p.hidden_dim;
    for (std::size_t j = 0; j < p.hidden_dim; ++j) h[j] += xi * row[j];
  }
}

double output_logit(const ProbeParams& p, const std::vector<double>& pre) {
  double out = p.b2;
  for (std::size_t j = 0; j < p.hidden_dim; ++j) out += p.w2[j] * std::max(pre[j], 0.0);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (hidden_dim == 0) throw InvalidArgument("hidden dimension must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("momentum must lie in [0, 1)");
  if (epochs == 0) throw InvalidArgument("epochs must be positive");
  if (batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw InvalidArgument("validation fraction must lie in (0, 1)");
  }
}

Standardizer Standardizer::fit(std::span<const std::vector<double>> rows) {
  if (rows.empty()) throw InvalidArgument("cannot fit a standardizer on no rows");
  const std::size_t dim = rows.front().size();
  Standardizer s;
  s.mean.assign(dim, 0.0);
  s.scale.assign(dim, 0.0);
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < dim; ++d) s.mean[d] += row[d];
  }
  for (double& m : s.mean) m /= static_cast<double>(rows.size());
  for (const auto& row : rows) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double dev = row[d] - s.mean[d];
      s.scale[d] += dev * dev;
    }
  }
  for (double& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(rows.size()));
    if (v < kStdGuard) v = 0.0;
  }
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    out[d] = scale[d] == 0.0 ? 0.0 : (x[d] - mean[d]) / scale[d];
  }
  return out;
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> rows) const {
  LabeledSet out;
  out.ids.reserve(rows.size());
  out.features.reserve(rows.size());
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    out.ids.push_back(ids[r]);
    out.features.push_back(features[r]);
    out.labels.push_back(labels[r]);
  }
  return out;
}

ProbeParams init_probe(std::size_t input_dim, std::size_t hidden_dim, std::uint64_t seed) {
  Rng rng(seed);
  ProbeParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.standardizer.mean.assign(input_dim, 0.0);
  p.standardizer.scale.assign(input_dim, 1.0);
  const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim));
  p.w1.resize(input_dim * hidden_dim);
  for (double& w : p.w1) w = rng.uniform(-a1, a1);
  p.b1.assign(hidden_dim, 0.0);
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_dim + 1));
  p.w2.resize(hidden_dim);
  for (double& w : p.w2) w = rng.uniform(-a2, a2);
  return p;
}

double bce_loss(const ProbeParams& p, std::span<const std::vector<double>> x,
                std::span<const int> labels, ProbeGradient* grad) {
  if (grad) {
    grad->w1.assign(p.w1.size(), 0.0);
    grad->b1.assign(p.b1.size(), 0.0);
    grad->w2.assign(p.w2.size(), 0.0);
    grad->b2 = 0.0;
  }
  const double inv_n = 1.0 / static_cast<double>(x.size());
  std::vector<double> pre;
  std::vector<double> dpre(p.hidden_dim);
  double loss = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    hidden_pre(p, x[r], pre);
    const double logit = output_logit(p, pre);
    const double y = labels[r];
    loss += softplus(logit) - y * logit;
    if (!grad) continue;

    const double dlogit = (logistic(logit) - y) * inv_n;
    grad->b2 += dlogit;
    for (std::size_t j = 0; j < p.hidden_dim; ++j) {
      const bool active = pre[j] > 0.0;
      grad->w2[j] += dlogit * (active ? pre[j] : 0.0);
      dpre[j] = active ? dlogit * p.w2[j] : 0.0;
      grad->b1[j] += dpre[j];
    }
    for (std::size_t i = 0; i < p.input_dim; ++i) {
      const double xi = x[r][i];
      if (xi == 0.0) continue;
      double* row = grad->w1.data() + i * p.hidden_dim;
      for (std::size_t j = 0; j < p.hidden_dim; ++j) row[j] += xi * dpre[j];
    }
  }
  return loss * inv_n;
}

ProbeParams train_probe(const LabeledSet& data, const TrainConfig& config, std::size_t layer,
                        TrainLog* log) {
  config.validate();
  check_labels(data);
  check_features(data);

  const std::size_t dim = data.features.front().size();
  ProbeParams p = init_probe(dim, config.hidden_dim, derive_seed(config.seed, 2 * layer));
  p.layer = layer;
  p.standardizer = Standardizer::fit(data.features);

  std::vector<std::vector<double>> x;
  x.reserve(data.size());
  for (const auto& row : data.features) x.push_back(p.standardizer.apply(row));

  std::vector<double> vw1(p.w1.size(), 0.0), vb1(p.b1.size(), 0.0), vw2(p.w2.size(), 0.0);
  double vb2 = 0.0;
  const auto step = [&](std::vector<double>& w, std::vector<double>& v, const std::vector<double>& g) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      v[k] = config.momentum * v[k] - config.learning_rate * g[k];
      w[k] += v[k];
    }
  };

  if (log) log->epoch_loss.assign(1, bce_loss(p, x, data.labels));

  Rng rng(derive_seed(config.seed, 2 * layer + 1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> batch_x;
  std::vector<int> batch_y;
  ProbeGradient g;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch_x.clear();
      batch_y.clear();
      for (std::size_t k = begin; k < end; ++k) {
        batch_x.push_back(x[order[k]]);
        batch_y.push_back(data.labels[order[k]]);
      }
      bce_loss(p, batch_x, batch_y, &g);
      step(p.w1, vw1, g.w1);
      step(p.b1, vb1, g.b1);
      step(p.w2, vw2, g.w2);
      vb2 = config.momentum * vb2 - config.learning_rate * g.b2;
      p.b2 += vb2;
    }
    if (log) log->epoch_loss.push_back(bce_loss(p, x, data.labels));
  }
  p.trained = true;
  return p;
}

double probe_logit(const ProbeParams& p, std::span<const double> features) {
  if (features.size() != p.input_dim) {
    throw InvalidArgument("layer " + std::to_string(p.layer) + " probe expects dimension " +
                          std::to_string(p.input_dim) + ", got " + std::to_string(features.size()));
  }
  const std::vector<double> x = p.standardizer.apply(features);
  std::vector<double> pre;
  hidden_pre(p, x, pre);
  return output_logit(p, pre);
}

double probe_infer(const ProbeParams& p, std::span<const double> features) {
  // Saturated logits would round to exactly 0 or 1.
  return std::clamp(logistic(probe_logit(p, features)), std::nextafter(0.0, 1.0),
                    std::nextafter(1.0, 0.0));
}

}  // namespace sersem
