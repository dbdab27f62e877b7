#include "semmatch/online_viterbi.hpp"

#include <stdexcept>

#include "semmatch/log_math.hpp"

namespace semmatch {

OnlineViterbi::OnlineViterbi(std::size_t window) : window_(window) {
  if (window_ < 1) {
    throw std::invalid_argument("viterbi window must hold at least one step");
  }
}

void OnlineViterbi::advance(const Step& prev, Step& cur) {
  const std::size_t n = cur.log_obs.size();
  cur.delta.assign(n, kLogZero);
  cur.back.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = kLogZero;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < prev.delta.size(); ++j) {
      const double v = prev.delta[j] + cur.log_trans(j, i);
      if (v > best) {
        best = v;
        arg = j;
      }
    }
    cur.delta[i] = best + cur.log_obs[i];
    cur.back[i] = arg;
  }
}

void OnlineViterbi::redecode() {
  Step& head = steps_.front();
  head.delta.resize(head.log_obs.size());
  head.back.assign(head.log_obs.size(), 0);
  for (std::size_t i = 0; i < head.log_obs.size(); ++i) {
    head.delta[i] = front_priors_[i] + head.log_obs[i];
  }
  for (std::size_t k = 1; k < steps_.size(); ++k) {
    advance(steps_[k - 1], steps_[k]);
  }
}

std::size_t OnlineViterbi::argmax_last() const {
  const auto& delta = steps_.back().delta;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < delta.size(); ++i) {
    if (delta[i] > delta[arg]) {
      arg = i;
    }
  }
  return arg;
}

std::vector<std::size_t> OnlineViterbi::window_path() const {
  if (steps_.empty()) {
    return {};
  }
  std::vector<std::size_t> path(steps_.size());
  std::size_t s = argmax_last();
  for (std::size_t k = steps_.size(); k-- > 0;) {
    path[k] = s;
    s = steps_[k].back[s];
  }
  return path;
}

double OnlineViterbi::best_score() const {
  if (steps_.empty()) {
    return kLogZero;
  }
  return steps_.back().delta[argmax_last()];
}

std::vector<OnlineViterbi::Commit> OnlineViterbi::evict_front() {
  const auto path = window_path();
  std::vector<Commit> commits{{steps_.front().index, path.front()}};
  if (steps_.size() > 1) {
    PriorUpdate update = update_log_priors(front_priors_, steps_[1].log_trans);
    if (update.uniform_fallback) {
      ++prior_fallbacks_;
    }
    front_priors_ = std::move(update.log_priors);
  }
  steps_.pop_front();
  if (!steps_.empty()) {
    redecode();
  }
  return commits;
}

std::vector<OnlineViterbi::Commit> OnlineViterbi::flush() {
  std::vector<Commit> commits;
  const auto path = window_path();
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    commits.push_back({steps_[k].index, path[k]});
  }
  steps_.clear();
  front_priors_.clear();
  return commits;
}

std::vector<OnlineViterbi::Commit> OnlineViterbi::start(std::vector<double> log_priors, std::vector<double> log_obs) {
  if (log_priors.size() != log_obs.size() || log_obs.empty()) {
    throw std::invalid_argument("priors and observations must be non-empty and of equal size");
  }
  std::vector<Commit> commits = flush();
  front_priors_ = std::move(log_priors);
  Step head;
  head.index = next_step_++;
  head.log_obs = std::move(log_obs);
  steps_.push_back(std::move(head));
  redecode();
  return commits;
}

std::optional<std::vector<OnlineViterbi::Commit>> OnlineViterbi::extend(LogMatrix log_trans,
                                                                        std::vector<double> log_obs) {
  if (steps_.empty()) {
    throw std::logic_error("extend called before start");
  }
  if (log_trans.rows != steps_.back().log_obs.size() || log_trans.cols != log_obs.size() || log_obs.empty()) {
    throw std::invalid_argument("transition matrix shape does not match the adjacent steps");
  }
  Step cur;
  cur.log_obs = std::move(log_obs);
  cur.log_trans = std::move(log_trans);
  advance(steps_.back(), cur);
  bool any_finite = false;
  for (double d : cur.delta) {
    any_finite = any_finite || d > kLogZero;
  }
  if (!any_finite) {
    return std::nullopt;
  }
  cur.index = next_step_++;
  steps_.push_back(std::move(cur));
  std::vector<Commit> commits;
  while (steps_.size() > window_) {
    auto c = evict_front();
    commits.insert(commits.end(), c.begin(), c.end());
  }
  return commits;
}

}  // namespace semmatch
