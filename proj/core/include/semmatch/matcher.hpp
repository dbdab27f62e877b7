#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "semmatch/eval.hpp"
#include "semmatch/hmm_model.hpp"
#include "semmatch/log_math.hpp"
#include "semmatch/online_viterbi.hpp"
#include "semmatch/path_finder.hpp"
#include "semmatch/road_network.hpp"
#include "semmatch/semantics.hpp"

namespace semmatch {

struct CandidateSet {
  std::vector<StateId> states;  ///< ascending ids
  bool connectivity_fallback = false;
};

/// States within err_scale * z.err_m of z.loc. With a previous candidate set,
/// keeps only states connected to one of them within budget_m; if that
/// leaves nothing the unfiltered radius set is returned with
/// connectivity_fallback set. Throws NoCandidatesError when the radius set
/// holds fewer than cfg.min_candidates states.
CandidateSet extract_candidates(PathFinder& paths, const SemanticEvent& z, std::span<const StateId> previous,
                                const HmmConfig& cfg, double budget_m);

/// What the matcher reports right after an observation.
struct StepResult {
  std::size_t observation = 0;
  bool stale = false;            ///< no candidates; previous output repeated
  std::optional<StateId> state;  ///< last state of the current decoded sequence
  double loglik = kLogZero;      ///< score of the best path in the window
  std::size_t candidates = 0;
  bool connectivity_fallback = false;
  bool chain_restart = false;    ///< no finite path survived; decoding restarted
};

/// Final decoded state for one observation.
struct MatchRecord {
  double t = 0.0;
  std::optional<StateId> state;
  double loglik = kLogZero;  ///< cumulative log-likelihood of the decoded path up to here
  bool stale = false;
};

struct MatchOutput {
  std::vector<MatchRecord> records;  ///< one per observation passed to step()
  std::vector<StateId> path;         ///< decoded sequence Q over processed observations
  std::size_t stale_steps = 0;
  std::size_t chain_restarts = 0;
  std::size_t connectivity_fallbacks = 0;
  std::size_t prior_fallbacks = 0;
};

/// Incremental map matcher for one trace. Observations must arrive in time
/// order and carry a landmark type (NoClass events are filtered upstream).
/// The network and confusion matrix must outlive the matcher.
class Matcher {
 public:
  Matcher(const RoadNetwork& network, const ConfusionMatrix& confusion, HmmConfig config);

  StepResult step(const SemanticEvent& z);

  /// Commits the remaining window and returns the decoded trace. The matcher
  /// is reset and may be reused for a new trace.
  MatchOutput finish();

  const HmmConfig& config() const noexcept { return config_; }

 private:
  struct Pending {
    std::size_t record = 0;
    std::vector<StateId> candidates;
    std::vector<double> log_obs;
    std::vector<double> log_priors;  // chain heads only
    LogMatrix log_trans;             // from the previous processed step
    bool chain_head = false;
  };

  std::vector<double> observation_scores(const SemanticEvent& z, std::span<const StateId> candidates) const;
  LogMatrix transition_scores(std::span<const StateId> from, std::span<const StateId> to, double observed_change_deg,
                              double budget_m);
  std::vector<double> chain_priors(const SemanticEvent& z, std::span<const StateId> candidates) const;
  void apply_commits(std::span<const OnlineViterbi::Commit> commits);
  void reset();

  const RoadNetwork* network_;
  const ConfusionMatrix* confusion_;
  HmmConfig config_;
  PathFinder paths_;
  OnlineViterbi viterbi_;

  std::deque<Pending> pending_;
  std::optional<SemanticEvent> last_processed_;
  std::vector<StateId> last_candidates_;
  std::optional<std::size_t> last_committed_index_;
  double cumulative_loglik_ = 0.0;
  MatchOutput output_;
};

/// Route legs joining consecutive states along minimal routes (unbounded).
std::vector<RouteLeg> legs_through_states(const RoadNetwork& network, std::span<const StateId> states);

/// Segment path joining consecutive states along minimal routes.
SegmentPath path_through_states(const RoadNetwork& network, std::span<const StateId> states);

}  // namespace semmatch
