#include "qamro/regressor.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace qamro {

namespace {

void check_metadata(int input_dim, const std::vector<std::string>& head_names,
                    const std::vector<int>& hidden_dims) {
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  if (head_names.empty())
    throw std::invalid_argument("at least one head required");
  std::set<std::string> uniq(head_names.begin(), head_names.end());
  if (uniq.size() != head_names.size())
    throw std::domain_error("duplicate head names");
  if (hidden_dims.size() != 2)
    throw std::invalid_argument("exactly two hidden layer sizes required");
  if (hidden_dims[0] < 1 || hidden_dims[1] < 1)
    throw std::invalid_argument("hidden layer sizes must be >= 1");
}

}  // namespace

Regressor::Regressor(int input_dim, std::vector<std::string> head_names,
                     std::vector<int> hidden_dims, std::uint64_t seed,
                     double output_bias)
    : input_dim_(input_dim),
      hidden_dims_(std::move(hidden_dims)),
      seed_(seed),
      head_names_(std::move(head_names)) {
  check_metadata(input_dim_, head_names_, hidden_dims_);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int h1 = hidden_dims_[0];
  const int h2 = hidden_dims_[1];
  // draw order is part of the reproducibility contract: w1 row-major,
  // then w2, then w3, per head in name order
  const auto fill = [&](Matrix& m, double sd) {
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = sd * normal(rng);
  };

  heads_.reserve(head_names_.size());
  for (std::size_t h = 0; h < head_names_.size(); ++h) {
    HeadParams p;
    p.w1.resize(h1, input_dim_);
    fill(p.w1, 1.0 / std::sqrt(static_cast<double>(input_dim_)));
    p.b1 = Vector::Zero(h1);
    p.w2.resize(h2, h1);
    fill(p.w2, 1.0 / std::sqrt(static_cast<double>(h1)));
    p.b2 = Vector::Zero(h2);
    p.w3.resize(h2);
    const double sd3 = 1.0 / std::sqrt(static_cast<double>(h2));
    for (Index i = 0; i < p.w3.size(); ++i) p.w3[i] = sd3 * normal(rng);
    p.b3 = output_bias;
    heads_.push_back(std::move(p));
  }
}

Regressor::Regressor(int input_dim, std::vector<std::string> head_names,
                     std::vector<int> hidden_dims, std::uint64_t seed,
                     std::vector<HeadParams> heads)
    : input_dim_(input_dim),
      hidden_dims_(std::move(hidden_dims)),
      seed_(seed),
      head_names_(std::move(head_names)),
      heads_(std::move(heads)) {
  check_metadata(input_dim_, head_names_, hidden_dims_);
  if (heads_.size() != head_names_.size())
    throw std::invalid_argument("one parameter set per head required");
  const Index h1 = hidden_dims_[0];
  const Index h2 = hidden_dims_[1];
  for (const auto& p : heads_) {
    if (p.w1.rows() != h1 || p.w1.cols() != input_dim_ || p.b1.size() != h1 ||
        p.w2.rows() != h2 || p.w2.cols() != h1 || p.b2.size() != h2 ||
        p.w3.size() != h2)
      throw std::invalid_argument("head parameter shapes do not match");
  }
}

Matrix Regressor::forward(const Eigen::Ref<const Matrix>& features) const {
  std::vector<HeadCache> caches;
  return forward(features, caches);
}

Matrix Regressor::forward(const Eigen::Ref<const Matrix>& features,
                          std::vector<HeadCache>& caches) const {
  if (heads_.empty()) throw std::logic_error("regressor not initialized");
  if (features.cols() != input_dim_)
    throw std::invalid_argument("feature width does not match input_dim");

  const Index n = features.rows();
  const Index n_heads = static_cast<Index>(heads_.size());
  Matrix out(n, n_heads);
  caches.resize(heads_.size());
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    const HeadParams& p = heads_[h];
    HeadCache& cache = caches[h];
    cache.a1 = ((features * p.w1.transpose()).rowwise() + p.b1.transpose())
                   .array()
                   .tanh()
                   .matrix();
    cache.a2 = ((cache.a1 * p.w2.transpose()).rowwise() + p.b2.transpose())
                   .array()
                   .tanh()
                   .matrix();
    out.col(static_cast<Index>(h)) =
        (cache.a2 * p.w3).array() + p.b3;
  }
  return out;
}

std::vector<HeadGrads> Regressor::backward(
    const Eigen::Ref<const Matrix>& features,
    const std::vector<HeadCache>& caches,
    const Eigen::Ref<const Matrix>& output_grads) const {
  if (caches.size() != heads_.size())
    throw std::invalid_argument("forward cache does not match the model");
  if (output_grads.rows() != features.rows() ||
      output_grads.cols() != static_cast<Index>(heads_.size()))
    throw std::invalid_argument("output gradient shape mismatch");
  if (features.cols() != input_dim_)
    throw std::invalid_argument("feature width does not match input_dim");

  std::vector<HeadGrads> grads(heads_.size());
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    const HeadParams& p = heads_[h];
    const Matrix& a1 = caches[h].a1;
    const Matrix& a2 = caches[h].a2;
    const auto g = output_grads.col(static_cast<Index>(h));

    HeadGrads& gr = grads[h];
    gr.w3 = a2.transpose() * g;
    gr.b3 = g.sum();
    const Matrix dz2 =
        ((g * p.w3.transpose()).array() * (1.0 - a2.array().square())).matrix();
    gr.w2 = dz2.transpose() * a1;
    gr.b2 = dz2.colwise().sum().transpose();
    const Matrix dz1 =
        ((dz2 * p.w2).array() * (1.0 - a1.array().square())).matrix();
    gr.w1 = dz1.transpose() * features;
    gr.b1 = dz1.colwise().sum().transpose();
  }
  return grads;
}

void Regressor::apply_step(const std::vector<HeadGrads>& grads,
                           double learning_rate) {
  if (grads.size() != heads_.size())
    throw std::invalid_argument("gradient count does not match the model");
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    HeadParams& p = heads_[h];
    const HeadGrads& g = grads[h];
    p.w1 -= learning_rate * g.w1;
    p.b1 -= learning_rate * g.b1;
    p.w2 -= learning_rate * g.w2;
    p.b2 -= learning_rate * g.b2;
    p.w3 -= learning_rate * g.w3;
    p.b3 -= learning_rate * g.b3;
  }
}

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const ordered_json& j) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("bad matrix layout");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      throw std::runtime_error("ragged matrix layout");
    for (Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                    .get<double>();
  }
  return m;
}

ordered_json vector_to_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const ordered_json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

constexpr const char* kCheckpointFormat = "qamro-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Regressor& reg,
                     const LossConfig& loss) {
  ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["input_dim"] = reg.input_dim();
  j["hidden_dims"] = reg.hidden_dims();
  j["rng_seed"] = reg.rng_seed();
  ordered_json lc;
  lc["alpha"] = loss.alpha;
  lc["beta"] = loss.beta;
  lc["fixed_margin"] = loss.fixed_margin;
  lc["huber_delta"] = loss.huber_delta;
  lc["lambda_rank"] = loss.lambda_rank;
  lc["scale_min"] = loss.scale_min;
  lc["scale_max"] = loss.scale_max;
  j["loss"] = std::move(lc);
  ordered_json heads = ordered_json::array();
  for (std::size_t h = 0; h < reg.heads().size(); ++h) {
    const HeadParams& p = reg.heads()[h];
    ordered_json hj;
    hj["name"] = reg.head_names()[h];
    hj["w1"] = matrix_to_json(p.w1);
    hj["b1"] = vector_to_json(p.b1);
    hj["w2"] = matrix_to_json(p.w2);
    hj["b2"] = vector_to_json(p.b2);
    hj["w3"] = vector_to_json(p.w3);
    hj["b3"] = p.b3;
    heads.push_back(std::move(hj));
  }
  j["heads"] = std::move(heads);

  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("invalid checkpoint " + path.string() + ": " +
                             e.what());
  }
  if (!j.contains("format") || j["format"] != kCheckpointFormat)
    throw std::runtime_error("not a checkpoint file: " + path.string());
  if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " +
                             path.string());

  Checkpoint cp;
  const auto& lc = j.at("loss");
  cp.loss.alpha = lc.at("alpha").get<double>();
  cp.loss.beta = lc.at("beta").get<double>();
  cp.loss.fixed_margin = lc.at("fixed_margin").get<double>();
  cp.loss.huber_delta = lc.at("huber_delta").get<double>();
  cp.loss.lambda_rank = lc.at("lambda_rank").get<double>();
  cp.loss.scale_min = lc.at("scale_min").get<double>();
  cp.loss.scale_max = lc.at("scale_max").get<double>();

  std::vector<std::string> names;
  std::vector<HeadParams> heads;
  for (const auto& hj : j.at("heads")) {
    names.push_back(hj.at("name").get<std::string>());
    HeadParams p;
    p.w1 = matrix_from_json(hj.at("w1"));
    p.b1 = vector_from_json(hj.at("b1"));
    p.w2 = matrix_from_json(hj.at("w2"));
    p.b2 = vector_from_json(hj.at("b2"));
    p.w3 = vector_from_json(hj.at("w3"));
    p.b3 = hj.at("b3").get<double>();
    heads.push_back(std::move(p));
  }

  cp.regressor = Regressor(j.at("input_dim").get<int>(), std::move(names),
                           j.at("hidden_dims").get<std::vector<int>>(),
                           j.at("rng_seed").get<std::uint64_t>(),
                           std::move(heads));
  return cp;
}

}  // namespace qamro
