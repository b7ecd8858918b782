#include "rsls/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsls/random.hpp"

namespace rsls {

SamplingDensity::SamplingDensity(std::vector<double> weights) : probs_(std::move(weights)) {
  double total = 0.0;
  for (double w : probs_) {
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("SamplingDensity: weights must be finite and nonnegative");
    total += w;
  }
  if (total <= 0.0) throw std::invalid_argument("SamplingDensity: all weights are zero");
  for (double& p : probs_) {
    p /= total;
    if (p < kMinSamplingProbability) p = 0.0;
  }
  cumulative_.resize(probs_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    acc += probs_[i];
    cumulative_[i] = acc;
  }
}

SamplingDensity SamplingDensity::uniform(std::size_t rows) {
  return SamplingDensity(std::vector<double>(rows, 1.0));
}

std::size_t SamplingDensity::draw(double u) const {
  const double target = u * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  std::size_t k = it == cumulative_.end() ? cumulative_.size() - 1
                                          : static_cast<std::size_t>(it - cumulative_.begin());
  // upper_bound skips zero-mass rows except at the very end, where rounding
  // in the cumulative sum could land us on a trailing zero.
  while (probs_[k] == 0.0) --k;
  return k;
}

SamplingDensity row_sampling_density(const Matrix& a) {
  Vector sq = row_squared_norms(a);
  if (std::all_of(sq.begin(), sq.end(), [](double v) { return v == 0.0; }))
    throw std::invalid_argument("row_sampling_density: matrix is identically zero");
  return SamplingDensity(std::move(sq));
}

std::size_t default_sample_size(std::size_t n, double factor) {
  if (n < 2) throw std::invalid_argument("default_sample_size: n must be at least 2");
  if (!(factor > 0.0)) throw std::invalid_argument("default_sample_size: factor must be positive");
  const double nd = static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(factor * nd * std::log(nd)));
}

SamplePlan draw_sample_plan(const SamplingDensity& density, std::size_t s, std::uint64_t seed) {
  if (s < 1) throw std::invalid_argument("draw_sample_plan: sample size must be positive");
  SamplePlan plan;
  plan.seed = seed;
  plan.sample_size = s;
  plan.indices.resize(s);
  plan.weights.resize(s);
  Rng rng(seed);
  const double sd = static_cast<double>(s);
  const auto& p = density.probs();
  for (std::size_t t = 0; t < s; ++t) {
    const std::size_t k = density.draw(rng.uniform());
    plan.indices[t] = k;
    plan.weights[t] = 1.0 / std::sqrt(sd * p[k]);
  }
  return plan;
}

namespace {

void check_plan(const SamplePlan& plan, std::size_t rows) {
  if (plan.indices.size() != plan.weights.size())
    throw std::invalid_argument("apply_sample: indices and weights differ in length");
  for (std::size_t k : plan.indices)
    if (k >= rows)
      throw std::out_of_range("apply_sample: row index " + std::to_string(k) +
                              " out of range for " + std::to_string(rows) + " rows");
}

}  // namespace

DenseMatrix apply_sample(const DenseMatrix& a, const SamplePlan& plan) {
  check_plan(plan, a.rows());
  DenseMatrix out(plan.indices.size(), a.cols());
  for (std::size_t t = 0; t < plan.indices.size(); ++t) {
    auto src = a.row(plan.indices[t]);
    auto dst = out.row(t);
    for (std::size_t j = 0; j < src.size(); ++j) dst[j] = plan.weights[t] * src[j];
  }
  return out;
}

SparseMatrix apply_sample(const SparseMatrix& a, const SamplePlan& plan) {
  check_plan(plan, a.rows());
  std::vector<std::size_t> offsets(plan.indices.size() + 1, 0);
  for (std::size_t t = 0; t < plan.indices.size(); ++t)
    offsets[t + 1] = offsets[t] + a.row_cols(plan.indices[t]).size();
  std::vector<std::size_t> idx;
  std::vector<double> vals;
  idx.reserve(offsets.back());
  vals.reserve(offsets.back());
  for (std::size_t t = 0; t < plan.indices.size(); ++t) {
    auto c = a.row_cols(plan.indices[t]);
    auto v = a.row_values(plan.indices[t]);
    idx.insert(idx.end(), c.begin(), c.end());
    for (double x : v) vals.push_back(plan.weights[t] * x);
  }
  return SparseMatrix(plan.indices.size(), a.cols(), std::move(offsets), std::move(idx),
                      std::move(vals));
}

Matrix apply_sample(const Matrix& a, const SamplePlan& plan) {
  return std::visit([&](const auto& m) { return Matrix(apply_sample(m, plan)); }, a);
}

void to_json(nlohmann::json& j, const SamplePlan& plan) {
  j = nlohmann::json{{"seed", plan.seed},
                     {"s", plan.sample_size},
                     {"indices", plan.indices},
                     {"weights", plan.weights}};
}

void from_json(const nlohmann::json& j, SamplePlan& plan) {
  j.at("seed").get_to(plan.seed);
  j.at("s").get_to(plan.sample_size);
  j.at("indices").get_to(plan.indices);
  j.at("weights").get_to(plan.weights);
  if (plan.indices.size() != plan.sample_size || plan.weights.size() != plan.sample_size)
    throw std::invalid_argument("SamplePlan JSON: s does not match array lengths");
}

}  // namespace rsls
