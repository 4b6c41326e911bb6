#include "hvrp/predictor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "hvrp/cvrp_solver.hpp"
#include "hvrp/error.hpp"
#include "hvrp/io.hpp"
#include "hvrp/json_io.hpp"

namespace hvrp {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using CMap = Eigen::Map<const Mat>;
using MMap = Eigen::Map<Mat>;
using CRowMap = Eigen::Map<const RowVec>;
using MRowMap = Eigen::Map<RowVec>;

constexpr double kLayerNormEps = 1e-5;
constexpr int kCheckpointVersion = 1;
constexpr const char* kCheckpointFormat = "hvrp-predictor";

struct LayerNormOut {
  Mat y, xhat;
  Vec inv;
};

LayerNormOut layer_norm(const Mat& x, const RowVec& gain, const RowVec& bias) {
  LayerNormOut o;
  const auto h = static_cast<double>(x.cols());
  const Vec mean = x.rowwise().sum() / h;
  o.xhat = x.colwise() - mean;
  const Vec var = o.xhat.array().square().rowwise().sum() / h;
  o.inv = (var.array() + kLayerNormEps).rsqrt();
  o.xhat = o.inv.asDiagonal() * o.xhat;
  o.y = (o.xhat.array().rowwise() * gain.array()).rowwise() + bias.array();
  return o;
}

// Returns dx; accumulates dgain, dbias.
Mat layer_norm_backward(const Mat& dy, const Mat& xhat, const Vec& inv, const RowVec& gain, MRowMap dgain,
                        MRowMap dbias) {
  dgain += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbias += dy.colwise().sum();
  const Mat dxhat = dy.array().rowwise() * gain.array();
  const auto h = static_cast<double>(dy.cols());
  const Vec m1 = dxhat.rowwise().sum() / h;
  const Vec m2 = (dxhat.array() * xhat.array()).rowwise().sum().matrix() / h;
  Mat dx = dxhat;
  dx.colwise() -= m1;
  dx -= m2.asDiagonal() * xhat;
  return inv.asDiagonal() * dx;
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden < 1 || heads < 1) throw ConfigError("model: hidden size and heads must be positive");
  if (hidden % heads != 0) throw ConfigError("model: hidden size must be divisible by the number of heads");
  if (layers < 0) throw ConfigError("model: layer count must be non-negative");
  if (knn < 1) throw ConfigError("model: k must be at least 1");
  if (ff_multiplier < 1) throw ConfigError("model: feed-forward multiplier must be positive");
}

struct Predictor::Cache {
  struct Layer {
    Mat in, q, k, v, cat;
    std::vector<double> alpha;  // [head][edge]
    Mat xhat1, u1, pre, act, xhat2, out;
    Vec inv1, inv2;
  };
  Mat u0;
  std::vector<Layer> layers;
};

std::size_t Predictor::add_tensor(const std::string& name, int rows, int cols) {
  TensorInfo t{name, rows, cols, params_.size()};
  params_.resize(params_.size() + t.size(), 0.0);
  layout_.push_back(t);
  return layout_.size() - 1;
}

Predictor::Predictor(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  const int h = cfg_.hidden, f = cfg_.hidden * cfg_.ff_multiplier;
  add_tensor("embed.W", 3, h);
  add_tensor("embed.b", 1, h);
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* n : {"Wq", "Wk", "Wv", "Wo"}) add_tensor(p + n, h, h);
    add_tensor(p + "ln1.gain", 1, h);
    add_tensor(p + "ln1.bias", 1, h);
    add_tensor(p + "ff.W1", h, f);
    add_tensor(p + "ff.b1", 1, f);
    add_tensor(p + "ff.W2", f, h);
    add_tensor(p + "ff.b2", 1, h);
    add_tensor(p + "ln2.gain", 1, h);
    add_tensor(p + "ln2.bias", 1, h);
  }
  add_tensor("readout.W", h, 1);
  add_tensor("readout.b", 1, 1);

  Rng rng(seed);
  for (const auto& t : layout_) {
    const bool gain = t.name.ends_with(".gain");
    const bool weight = t.rows > 1;
    const double limit = std::sqrt(6.0 / (t.rows + t.cols));
    for (std::size_t i = 0; i < t.size(); ++i)
      params_[t.offset + i] = gain ? 1.0 : weight ? uniform_real(rng, -limit, limit) : 0.0;
  }
}

double& Predictor::readout_bias() { return params_[layout_.back().offset]; }

double Predictor::forward(const KnnGraph& g, Cache* cache) const {
  if (g.features.cols() != 3)
    throw ConfigError("predictor: expected 3 node features, got " + std::to_string(g.features.cols()));
  const int n = g.num_nodes();
  if (n < 1 || static_cast<int>(g.neighbor_offset.size()) != n + 1) throw ConfigError("predictor: malformed graph");
  const int h = cfg_.hidden, heads = cfg_.heads, dh = h / heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(h));
  const double* p = params_.data();
  std::size_t ti = 0;
  auto mat = [&] {
    const auto& t = layout_[ti++];
    return CMap(p + t.offset, t.rows, t.cols);
  };
  auto row = [&]() {
    const auto& t = layout_[ti++];
    return CRowMap(p + t.offset, t.cols);
  };

  const auto we = mat();
  const auto be = row();
  Mat u = (g.features * we).rowwise() + be;
  if (cache) {
    cache->u0 = u;
    cache->layers.assign(cfg_.layers, {});
  }
  const auto nnz = g.neighbor_index.size();
  std::vector<double> alpha(static_cast<std::size_t>(heads) * nnz);
  for (int l = 0; l < cfg_.layers; ++l) {
    const auto wq = mat(), wk = mat(), wv = mat(), wo = mat();
    const auto g1 = row(), b1n = row();
    const auto w1 = mat();
    const auto bf1 = row();
    const auto w2 = mat();
    const auto bf2 = row();
    const auto g2 = row(), b2n = row();

    const Mat q = u * wq, k = u * wk, v = u * wv;
    Mat cat = Mat::Zero(n, h);
    for (int hd = 0; hd < heads; ++hd) {
      const int c0 = hd * dh;
      for (int i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        if (nb.empty()) continue;
        const int e0 = g.neighbor_offset[i];
        double* a = alpha.data() + static_cast<std::size_t>(hd) * nnz + e0;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t e = 0; e < nb.size(); ++e) {
          a[e] = q.row(i).segment(c0, dh).dot(k.row(nb[e]).segment(c0, dh)) * score_scale;
          mx = std::max(mx, a[e]);
        }
        double z = 0.0;
        for (std::size_t e = 0; e < nb.size(); ++e) z += (a[e] = std::exp(a[e] - mx));
        for (std::size_t e = 0; e < nb.size(); ++e) {
          a[e] /= z;
          cat.row(i).segment(c0, dh) += a[e] * v.row(nb[e]).segment(c0, dh);
        }
      }
    }
    const Mat r1 = u + cat * wo;
    auto ln1 = layer_norm(r1, g1, b1n);
    const Mat pre = (ln1.y * w1).rowwise() + bf1;
    const Mat act = pre.cwiseMax(0.0);
    const Mat r2 = ln1.y + ((act * w2).rowwise() + bf2);
    auto ln2 = layer_norm(r2, g2, b2n);
    if (cache) {
      auto& c = cache->layers[l];
      c.in = std::move(u);
      c.q = q;
      c.k = k;
      c.v = v;
      c.cat = std::move(cat);
      c.alpha = alpha;
      c.xhat1 = std::move(ln1.xhat);
      c.inv1 = std::move(ln1.inv);
      c.u1 = ln1.y;
      c.pre = pre;
      c.act = act;
      c.xhat2 = std::move(ln2.xhat);
      c.inv2 = std::move(ln2.inv);
      c.out = ln2.y;
    }
    u = std::move(ln2.y);
  }
  const auto wr = mat();
  const double br = params_[layout_[ti].offset];
  const double mean_out = (u * wr).mean() + br;
  return mean_out * g.scale_factor;
}

void Predictor::backward(const KnnGraph& g, const Cache& cache, double dout, std::span<double> grad) const {
  const int n = g.num_nodes();
  const int h = cfg_.hidden, heads = cfg_.heads, dh = h / heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(h));
  const auto nnz = g.neighbor_index.size();
  auto P = [&](std::size_t t) { return CMap(params_.data() + layout_[t].offset, layout_[t].rows, layout_[t].cols); };
  auto G = [&](std::size_t t) { return MMap(grad.data() + layout_[t].offset, layout_[t].rows, layout_[t].cols); };
  auto PR = [&](std::size_t t) { return CRowMap(params_.data() + layout_[t].offset, layout_[t].cols); };
  auto GR = [&](std::size_t t) { return MRowMap(grad.data() + layout_[t].offset, layout_[t].cols); };

  const std::size_t t_readout = layout_.size() - 2;
  const Mat& u_last = cfg_.layers > 0 ? cache.layers.back().out : cache.u0;
  // v = scale * (mean_i(u_i . w) + b)
  const double dy = dout * g.scale_factor / n;
  G(t_readout) += dy * u_last.colwise().sum().transpose();
  grad[layout_[t_readout + 1].offset] += dout * g.scale_factor;
  Mat du = Mat::Constant(n, 1, dy) * P(t_readout).transpose();

  for (int l = cfg_.layers - 1; l >= 0; --l) {
    const auto& c = cache.layers[l];
    const std::size_t base = 2 + static_cast<std::size_t>(l) * 12;
    const std::size_t tq = base, tk = base + 1, tv = base + 2, to = base + 3, tg1 = base + 4, tb1 = base + 5,
                      tw1 = base + 6, tbf1 = base + 7, tw2 = base + 8, tbf2 = base + 9, tg2 = base + 10,
                      tb2 = base + 11;
    // LN2
    const Mat dr2 = layer_norm_backward(du, c.xhat2, c.inv2, PR(tg2), GR(tg2), GR(tb2));
    // FF: r2 = u1 + act W2 + b2, act = relu(u1 W1 + b1)
    G(tw2) += c.act.transpose() * dr2;
    GR(tbf2) += dr2.colwise().sum();
    Mat dact = dr2 * P(tw2).transpose();
    dact = (c.pre.array() > 0.0).select(dact, 0.0);
    G(tw1) += c.u1.transpose() * dact;
    GR(tbf1) += dact.colwise().sum();
    const Mat du1 = dr2 + dact * P(tw1).transpose();
    // LN1: r1 = in + cat Wo
    const Mat dr1 = layer_norm_backward(du1, c.xhat1, c.inv1, PR(tg1), GR(tg1), GR(tb1));
    G(to) += c.cat.transpose() * dr1;
    const Mat dcat = dr1 * P(to).transpose();
    Mat dq = Mat::Zero(n, h), dk = Mat::Zero(n, h), dv = Mat::Zero(n, h);
    std::vector<double> da;
    for (int hd = 0; hd < heads; ++hd) {
      const int c0 = hd * dh;
      for (int i = 0; i < n; ++i) {
        const auto nb = g.neighbors(i);
        if (nb.empty()) continue;
        const double* a = c.alpha.data() + static_cast<std::size_t>(hd) * nnz + g.neighbor_offset[i];
        const auto dhead = dcat.row(i).segment(c0, dh);
        da.assign(nb.size(), 0.0);
        double s = 0.0;
        for (std::size_t e = 0; e < nb.size(); ++e) {
          da[e] = dhead.dot(c.v.row(nb[e]).segment(c0, dh));
          s += a[e] * da[e];
          dv.row(nb[e]).segment(c0, dh) += a[e] * dhead;
        }
        for (std::size_t e = 0; e < nb.size(); ++e) {
          const double ds = a[e] * (da[e] - s) * score_scale;
          dq.row(i).segment(c0, dh) += ds * c.k.row(nb[e]).segment(c0, dh);
          dk.row(nb[e]).segment(c0, dh) += ds * c.q.row(i).segment(c0, dh);
        }
      }
    }
    G(tq) += c.in.transpose() * dq;
    G(tk) += c.in.transpose() * dk;
    G(tv) += c.in.transpose() * dv;
    du = dr1 + dq * P(tq).transpose() + dk * P(tk).transpose() + dv * P(tv).transpose();
  }
  G(0) += g.features.transpose() * du;
  GR(1) += du.colwise().sum();
}

double Predictor::predict(const KnnGraph& g) const { return forward(g, nullptr); }

double Predictor::loss(const KnnGraph& g, double label, std::span<double> grad) const {
  if (grad.empty()) {
    const double e = forward(g, nullptr) - label;
    return e * e;
  }
  if (grad.size() != params_.size()) throw ConfigError("predictor: gradient buffer has the wrong size");
  Cache cache;
  const double e = forward(g, &cache) - label;
  backward(g, cache, 2.0 * e, grad);
  return e * e;
}

std::vector<double> Predictor::attention(const KnnGraph& g, int layer, int head, int node) const {
  if (layer < 0 || layer >= cfg_.layers || head < 0 || head >= cfg_.heads || node < 0 || node >= g.num_nodes())
    throw ConfigError("predictor: attention index out of range");
  Cache cache;
  forward(g, &cache);
  const auto& a = cache.layers[layer].alpha;
  const auto off = static_cast<std::size_t>(head) * g.neighbor_index.size();
  return {a.begin() + off + g.neighbor_offset[node], a.begin() + off + g.neighbor_offset[node + 1]};
}

// --- checkpoints -----------------------------------------------------------

std::string Predictor::to_json() const {
  Json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = {{"hidden", cfg_.hidden},
                 {"heads", cfg_.heads},
                 {"layers", cfg_.layers},
                 {"knn", cfg_.knn},
                 {"ff_multiplier", cfg_.ff_multiplier}};
  Json tensors = Json::array();
  for (const auto& t : layout_) {
    Json tj;
    tj["name"] = t.name;
    tj["shape"] = {t.rows, t.cols};
    tj["data"] = std::vector<double>(params_.begin() + t.offset, params_.begin() + t.offset + t.size());
    tensors.push_back(std::move(tj));
  }
  j["tensors"] = std::move(tensors);
  return j.dump() + "\n";
}

Predictor Predictor::from_json(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(source, 1, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) throw ConfigError("not a predictor checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    const auto& c = j.at("config");
    ModelConfig cfg{c.at("hidden").get<int>(), c.at("heads").get<int>(), c.at("layers").get<int>(),
                    c.at("knn").get<int>(), c.at("ff_multiplier").get<int>()};
    Predictor model(cfg, 0);
    const auto& tensors = j.at("tensors");
    if (tensors.size() != model.layout_.size()) throw ConfigError("tensor count does not match the configuration");
    for (std::size_t i = 0; i < tensors.size(); ++i) {
      const auto& t = model.layout_[i];
      const auto& tj = tensors[i];
      const auto shape = tj.at("shape").get<std::vector<int>>();
      if (tj.at("name").get<std::string>() != t.name || shape != std::vector<int>{t.rows, t.cols})
        throw ConfigError("tensor " + std::to_string(i) + " ('" + t.name + "') has an unexpected name or shape");
      const auto data = tj.at("data").get<std::vector<double>>();
      if (data.size() != t.size()) throw ConfigError("tensor '" + t.name + "' has the wrong number of values");
      for (double v : data)
        if (!std::isfinite(v)) throw ConfigError("tensor '" + t.name + "' contains a non-finite value");
      std::copy(data.begin(), data.end(), model.params_.begin() + t.offset);
    }
    return model;
  } catch (const ConfigError& e) {
    throw ParseError(source, 1, std::string("checkpoint: ") + e.what());
  } catch (const Json::exception& e) {
    throw ParseError(source, 1, std::string("checkpoint: ") + e.what());
  }
}

void Predictor::save(const std::filesystem::path& path) const { write_text_file(path, to_json()); }

Predictor Predictor::load(const std::filesystem::path& path) { return from_json(read_text_file(path), path.string()); }

// --- training ------------------------------------------------------------

CvrpInstance apply_symmetry(const CvrpInstance& inst, int s) {
  if (s < 0 || s >= 8) throw ConfigError("symmetry index must be in [0, 8)");
  auto map = [s](Point p) {
    if (s & 1) p.x = -p.x;
    if (s & 2) p.y = -p.y;
    if (s & 4) std::swap(p.x, p.y);
    return p;
  };
  CvrpInstance out = inst;
  out.depot = map(out.depot);
  for (auto& c : out.customers) c.pos = map(c.pos);
  return out;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("train: learning rate must be positive");
  if (epochs < 1) throw ConfigError("train: at least one epoch is required");
  if (batch_size && *batch_size == 0) throw ConfigError("train: batch size must be positive");
  if (!(validation_fraction >= 0 && validation_fraction < 1)) throw ConfigError("train: validation fraction must be in [0, 1)");
  if (patience && *patience < 1) throw ConfigError("train: patience must be positive");
}

TrainResult train(Predictor& model, std::span<const CvrpInstance> instances, std::span<const double> labels,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (instances.empty()) throw ConfigError("train: empty dataset");
  if (instances.size() != labels.size()) throw ConfigError("train: instance and label counts differ");
  for (double y : labels)
    if (!(y > 0) || !std::isfinite(y)) throw ConfigError("train: labels must be positive and finite");

  std::vector<KnnGraph> graphs;
  graphs.reserve(instances.size());
  for (const auto& inst : instances) graphs.push_back(build_knn_graph(inst, model.config().knn));
  // variants[i][s - 1] is sample i under symmetry s
  std::vector<std::vector<KnnGraph>> variants;
  if (cfg.augment_symmetries) {
    variants.resize(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i)
      for (int s = 1; s < 8; ++s) variants[i].push_back(build_knn_graph(apply_symmetry(instances[i], s), model.config().knn));
  }

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * instances.size()));
  if (instances.size() == 1) n_val = 0;
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end()), val_idx(order.begin(), order.begin() + n_val);
  const auto& eval_idx = val_idx.empty() ? train_idx : val_idx;

  double mean_size = 0.0;
  for (const auto& inst : instances) mean_size += static_cast<double>(inst.size());
  mean_size /= instances.size();
  const std::size_t batch = std::min(train_idx.size(), cfg.batch_size.value_or(batch_size_for_size(mean_size)));

  if (cfg.init_bias_from_data) {
    double s = 0.0;
    for (auto i : train_idx) s += labels[i] / graphs[i].scale_factor;
    model.readout_bias() = 0.0;
    double pred = 0.0;
    for (auto i : train_idx) pred += model.predict(graphs[i]) / graphs[i].scale_factor;
    model.readout_bias() = (s - pred) / train_idx.size();
  }

  const std::size_t np = model.num_parameters();
  auto params = model.parameters();
  std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
  std::vector<double> best(params.begin(), params.end());
  TrainResult result;
  result.best_validation_loss = std::numeric_limits<double>::infinity();
  long step = 0;
  int since_best = 0;

  auto evaluate = [&](const std::vector<std::size_t>& idx, double& mse, double& mape_out) {
    mse = 0.0;
    mape_out = 0.0;
    for (auto i : idx) {
      const double p = model.predict(graphs[i]);
      mse += (p - labels[i]) * (p - labels[i]);
      mape_out += std::abs(p - labels[i]) / labels[i] * 100.0;
    }
    mse /= idx.size();
    mape_out /= idx.size();
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    double lr = cfg.learning_rate;
    if (cfg.schedule == LrSchedule::Cosine && cfg.epochs > 1) {
      const double t = static_cast<double>(epoch - 1) / (cfg.epochs - 1);
      lr *= 0.01 + 0.99 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
    }
    double train_loss = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += batch) {
      const std::size_t end = std::min(train_idx.size(), start + batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto i = train_idx[b];
        const int sym = cfg.augment_symmetries ? uniform_int(rng, 0, 7) : 0;
        const KnnGraph& g = sym == 0 ? graphs[i] : variants[i][sym - 1];
        train_loss += model.loss(g, labels[i], grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < np; ++k) {
        const double gk = grad[k] * inv;
        m[k] = cfg.adam_beta1 * m[k] + (1.0 - cfg.adam_beta1) * gk;
        v[k] = cfg.adam_beta2 * v[k] + (1.0 - cfg.adam_beta2) * gk * gk;
        params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.adam_eps);
      }
    }
    EpochStats st;
    st.epoch = epoch;
    st.train_loss = train_loss / train_idx.size();
    evaluate(eval_idx, st.validation_loss, st.validation_mape);
    result.history.push_back(st);
    if (cfg.verbose)
      std::fprintf(stderr, "epoch %3d  train %.6g  val %.6g  val-mape %.3f%%\n", epoch, st.train_loss,
                   st.validation_loss, st.validation_mape);
    if (st.validation_loss < result.best_validation_loss) {
      result.best_validation_loss = st.validation_loss;
      result.best_epoch = epoch;
      best.assign(params.begin(), params.end());
      since_best = 0;
    } else if (cfg.patience && ++since_best >= *cfg.patience) {
      break;
    }
  }
  std::copy(best.begin(), best.end(), params.begin());
  return result;
}

// --- inference ---------------------------------------------------------------

std::vector<double> NeuralEstimator::estimate_batch(std::span<const CvrpInstance> instances) const {
  std::vector<double> out;
  out.reserve(instances.size());
  if (instances.empty()) return out;
  double mean_size = 0.0;
  for (const auto& inst : instances) mean_size += static_cast<double>(inst.size());
  mean_size /= instances.size();
  const std::size_t chunk = batch_size_for_size(mean_size);
  for (std::size_t start = 0; start < instances.size(); start += chunk) {
    const std::size_t end = std::min(instances.size(), start + chunk);
    for (std::size_t i = start; i < end; ++i) out.push_back(model_.predict(instances[i]));
  }
  return out;
}

}  // namespace hvrp
