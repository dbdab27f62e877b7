#include "semmatch/matcher.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "semmatch/errors.hpp"

namespace semmatch {

CandidateSet extract_candidates(PathFinder& paths, const SemanticEvent& z, std::span<const StateId> previous,
                                const HmmConfig& cfg, double budget_m) {
  const RoadNetwork& net = paths.network();
  CandidateSet set;
  set.states = net.query_radius(z.loc, cfg.err_scale * z.err_m);
  if (set.states.size() < static_cast<std::size_t>(cfg.min_candidates)) {
    throw NoCandidatesError("no candidate states within " + std::to_string(cfg.err_scale * z.err_m) +
                            " m of the observation at t=" + std::to_string(z.t));
  }
  if (previous.empty()) {
    return set;
  }
  std::vector<StateId> kept;
  for (StateId s : set.states) {
    for (StateId p : previous) {
      if (net.state(p).segment == net.state(s).segment || paths.distance(p, s, budget_m)) {
        kept.push_back(s);
        break;
      }
    }
  }
  if (kept.empty()) {
    set.connectivity_fallback = true;
  } else {
    set.states = std::move(kept);
  }
  return set;
}

Matcher::Matcher(const RoadNetwork& network, const ConfusionMatrix& confusion, HmmConfig config)
    : network_(&network),
      confusion_(&confusion),
      config_(config),
      paths_(network),
      viterbi_(static_cast<std::size_t>(std::max(config.window, 1))) {
  config_.validate();
}

std::vector<double> Matcher::observation_scores(const SemanticEvent& z, std::span<const StateId> candidates) const {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (StateId id : candidates) {
    const HiddenState& s = network_->state(id);
    out.push_back(config_.model == HmmModel::Semantic ? observation_log_prob(z, s, *confusion_)
                                                      : location_log_prob(z.loc, z.err_m, s.loc));
  }
  return out;
}

LogMatrix Matcher::transition_scores(std::span<const StateId> from, std::span<const StateId> to,
                                     double observed_change_deg, double budget_m) {
  if (config_.model == HmmModel::LocationOnly) {
    return LogMatrix(from.size(), to.size(), 0.0);
  }
  LogMatrix m(from.size(), to.size(), kLogZero);
  for (std::size_t j = 0; j < from.size(); ++j) {
    for (std::size_t i = 0; i < to.size(); ++i) {
      m(j, i) = transition_log_prob(paths_, from[j], to[i], observed_change_deg, *confusion_, config_.sigma_h_deg,
                                    budget_m);
    }
  }
  return m;
}

std::vector<double> Matcher::chain_priors(const SemanticEvent& z, std::span<const StateId> candidates) const {
  if (config_.model == HmmModel::LocationOnly) {
    return std::vector<double>(candidates.size(), -std::log(static_cast<double>(candidates.size())));
  }
  return initial_log_priors(*network_, candidates, z.type, *confusion_);
}

void Matcher::apply_commits(std::span<const OnlineViterbi::Commit> commits) {
  for (const auto& c : commits) {
    Pending& p = pending_.front();
    double term = p.log_obs[c.state];
    if (p.chain_head || !last_committed_index_) {
      term += p.log_priors.empty() ? 0.0 : p.log_priors[c.state];
    } else {
      term += p.log_trans(*last_committed_index_, c.state);
    }
    cumulative_loglik_ += term;
    MatchRecord& rec = output_.records[p.record];
    rec.state = p.candidates[c.state];
    rec.loglik = cumulative_loglik_;
    output_.path.push_back(p.candidates[c.state]);
    last_committed_index_ = c.state;
    pending_.pop_front();
  }
}

StepResult Matcher::step(const SemanticEvent& z) {
  if (!is_landmark_type(z.type)) {
    throw std::invalid_argument("no_class observations carry no landmark evidence; drop them before matching");
  }
  if (!(z.err_m > 0.0)) {
    throw std::invalid_argument("observation error must be > 0");
  }
  if (last_processed_ && z.t < last_processed_->t) {
    throw std::invalid_argument("observations must be time-ordered");
  }

  StepResult result;
  result.observation = output_.records.size();
  output_.records.push_back({z.t, std::nullopt, kLogZero, false});

  const double dt = last_processed_ ? z.t - last_processed_->t : 0.0;
  const double budget = config_.max_speed_mps * dt;

  CandidateSet cands;
  try {
    cands = extract_candidates(paths_, z, last_candidates_, config_, budget);
  } catch (const NoCandidatesError&) {
    output_.records.back().stale = true;
    ++output_.stale_steps;
    result.stale = true;
    if (!viterbi_.empty()) {
      result.state = pending_.back().candidates[viterbi_.window_path().back()];
      result.loglik = viterbi_.best_score();
    } else if (!output_.path.empty()) {
      result.state = output_.path.back();
    }
    return result;
  }
  if (cands.connectivity_fallback) {
    ++output_.connectivity_fallbacks;
  }

  Pending p;
  p.record = result.observation;
  p.candidates = cands.states;
  p.log_obs = observation_scores(z, cands.states);

  bool head = viterbi_.empty();
  if (!head) {
    const double observed_change = wrap_signed_deg(z.heading_deg - last_processed_->heading_deg);
    p.log_trans = transition_scores(last_candidates_, cands.states, observed_change, budget);
    auto commits = viterbi_.extend(p.log_trans, p.log_obs);
    if (commits) {
      pending_.push_back(std::move(p));
      apply_commits(*commits);
    } else {
      head = true;
      result.chain_restart = true;
      ++output_.chain_restarts;
      p.log_trans = LogMatrix{};
    }
  }
  if (head) {
    p.chain_head = true;
    p.log_priors = chain_priors(z, cands.states);
    const auto flushed = viterbi_.flush();
    apply_commits(flushed);
    const auto commits = viterbi_.start(p.log_priors, p.log_obs);
    pending_.push_back(std::move(p));
    apply_commits(commits);
  }

  last_processed_ = z;
  last_candidates_ = std::move(cands.states);

  result.candidates = pending_.back().candidates.size();
  result.connectivity_fallback = cands.connectivity_fallback;
  result.state = pending_.back().candidates[viterbi_.window_path().back()];
  result.loglik = viterbi_.best_score();
  return result;
}

MatchOutput Matcher::finish() {
  apply_commits(viterbi_.flush());
  output_.prior_fallbacks = viterbi_.prior_fallbacks();
  // stale observations repeat the decoded state before them
  std::optional<StateId> prev;
  double prev_loglik = kLogZero;
  for (auto& rec : output_.records) {
    if (rec.stale) {
      rec.state = prev;
      rec.loglik = prev_loglik;
    } else {
      prev = rec.state;
      prev_loglik = rec.loglik;
    }
  }
  MatchOutput out = std::move(output_);
  reset();
  return out;
}

void Matcher::reset() {
  viterbi_ = OnlineViterbi(static_cast<std::size_t>(config_.window));
  pending_.clear();
  last_processed_.reset();
  last_candidates_.clear();
  last_committed_index_.reset();
  cumulative_loglik_ = 0.0;
  output_ = MatchOutput{};
  paths_.clear();
}

std::vector<RouteLeg> legs_through_states(const RoadNetwork& network, std::span<const StateId> states) {
  std::vector<RouteLeg> legs;
  PathFinder paths(network);
  for (std::size_t k = 1; k < states.size(); ++k) {
    const auto r = paths.route(states[k - 1], states[k]);
    if (!r) {
      continue;  // disconnected components: the gap is left out of the path
    }
    legs.insert(legs.end(), r->legs.begin(), r->legs.end());
  }
  return legs;
}

SegmentPath path_through_states(const RoadNetwork& network, std::span<const StateId> states) {
  return path_from_legs(network, legs_through_states(network, states));
}

}  // namespace semmatch
