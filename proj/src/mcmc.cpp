#include "mcmc.hpp"

#include <algorithm>
#include <cmath>

#include "longtail/inference.hpp"

namespace longtail::detail {

BlockSampler::BlockSampler(int dim, double target_accept)
    : dim_(dim),
      target_(target_accept),
      log_scale_(std::log(0.1)),
      mean_(Eigen::VectorXd::Zero(dim)),
      m2_(Eigen::MatrixXd::Zero(dim, dim)),
      shape_(Eigen::MatrixXd::Identity(dim, dim)) {}

void BlockSampler::propose(const double* current, double* out, rng::Engine& rng) {
  Eigen::VectorXd eta(dim_);
  for (int i = 0; i < dim_; ++i) eta(i) = rng.normal();
  const Eigen::VectorXd step = std::exp(log_scale_) * (shape_ * eta);
  for (int i = 0; i < dim_; ++i) out[i] = current[i] + step(i);
  ++proposals_;
}

void BlockSampler::adapt(bool accepted, long t) {
  if (accepted) ++accepts_;
  const double gain = std::pow(static_cast<double>(t) + 1.0, -0.6);
  log_scale_ += gain * ((accepted ? 1.0 : 0.0) - target_);
  log_scale_ = std::clamp(log_scale_, -15.0, 5.0);
}

void BlockSampler::observe(const double* current) {
  Eigen::Map<const Eigen::VectorXd> x(current, dim_);
  ++n_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_).transpose();
  if (n_ >= 10 * dim_ + 40 && n_ % 200 == 0) refresh_shape();
}

void BlockSampler::refresh_shape() {
  Eigen::MatrixXd cov = m2_ / static_cast<double>(n_ - 1);
  cov.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) shape_ = llt.matrixL();
}

}  // namespace longtail::detail

namespace longtail::inference {

std::vector<std::vector<double>> sample_generic(const std::function<double(const std::vector<double>&)>& logtarget,
                                                std::vector<double> init,
                                                const std::vector<std::vector<int>>& blocks, long iters, long burn_in,
                                                int thin, std::uint64_t seed, double target_block,
                                                double target_scalar) {
  rng::Engine rng(seed);
  std::vector<detail::BlockSampler> samplers;
  samplers.reserve(blocks.size());
  for (const auto& b : blocks)
    samplers.emplace_back(static_cast<int>(b.size()), b.size() == 1 ? target_scalar : target_block);

  std::vector<double> cur = std::move(init);
  double cur_lp = logtarget(cur);
  std::vector<std::vector<double>> draws;
  std::vector<double> cand = cur;
  std::vector<double> block_cur, block_out;

  for (long t = 0; t < iters; ++t) {
    const bool adapting = t < burn_in;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      block_cur.clear();
      block_out.assign(blocks[b].size(), 0.0);
      for (const int k : blocks[b]) block_cur.push_back(cur[static_cast<std::size_t>(k)]);
      samplers[b].propose(block_cur.data(), block_out.data(), rng);
      cand = cur;
      for (std::size_t i = 0; i < blocks[b].size(); ++i) cand[static_cast<std::size_t>(blocks[b][i])] = block_out[i];
      const double cand_lp = logtarget(cand);
      const bool accepted = std::log(rng.uniform_open()) < cand_lp - cur_lp;
      if (accepted) {
        cur = cand;
        cur_lp = cand_lp;
      }
      if (adapting) {
        samplers[b].adapt(accepted, t);
        block_cur.clear();
        for (const int k : blocks[b]) block_cur.push_back(cur[static_cast<std::size_t>(k)]);
        samplers[b].observe(block_cur.data());
      }
    }
    if (t >= burn_in && (t - burn_in) % thin == 0) draws.push_back(cur);
  }
  return draws;
}

}  // namespace longtail::inference
